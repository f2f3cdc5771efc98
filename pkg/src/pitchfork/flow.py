"""Flows: RK4 integration, variational equations, time-t maps, Gronwall bounds.

The continuous problem is reduced to the discrete one through the time-t
map T^t(x) = phi(t, x), which is an ordinary ``MapFamily``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dynsys import MapFamily, fd_jacobian, split_components
from .errors import LeftTube, ParamsViolateIneq
from .geometry import ManifoldMesh, ReferenceManifold, TubularPoint, UnitSphere, build_mesh
from .graphtransform import BranchPair, SolverConfig, solve_branches
from .hypotheses import ConditionResult, HypothesisVerdict, check_theorem1

__all__ = [
    "GronwallBounds",
    "GronwallParams",
    "READINGS",
    "Theorem5Verdict",
    "VectorFieldFamily",
    "check_theorem5",
    "field_components",
    "flow_solve",
    "FlowSolveResult",
    "gronwall_bounds",
    "gronwall_domination",
    "integrate_flow",
    "model_field",
    "model_radius",
    "time_t_map",
    "trajectory",
    "variational_jacobian",
    "verify_invariance_across_t",
]

DEFAULT_STEP = 1e-3


@dataclass(eq=False)
class VectorFieldFamily:
    """x' = X(x, mu) on R^m with M invariant; ``jacobian`` optional (else FD)."""

    field: Callable[[np.ndarray, float], np.ndarray]
    manifold: ReferenceManifold
    jacobian: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    alpha: float = 0.2
    mu_range: tuple[float, float] = (-1 / 25, 1 / 25)
    name: str = "field"
    fd_step: float = 1e-6
    meta: dict = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return self.manifold.ambient_dim

    def __call__(self, x, mu):
        return np.asarray(self.field(np.atleast_2d(x), mu), dtype=float)

    def jac(self, x, mu):
        x = np.atleast_2d(x)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x, mu), dtype=float)
        return fd_jacobian(lambda z: self(z, mu), x, self.fd_step)


def _generator(m: int, omega: float) -> np.ndarray:
    W = np.zeros((m, m))
    W[0, 1], W[1, 0] = -omega, omega
    return W


def model_field(m: int = 2, omega: float = 1.0, alpha: float = 0.2) -> VectorFieldFamily:
    """r' = mu r - r^3 in the normal direction plus rigid rotation (about e_3 if m=3)."""
    W = _generator(m, omega)

    def h(rho, mu):
        d = rho - 1.0
        return mu * d - d**3

    def X(x, mu):
        rho = np.linalg.norm(x, axis=1)
        return (h(rho, mu) / rho)[:, None] * x + x @ W.T

    def J(x, mu):
        rho = np.linalg.norm(x, axis=1)
        u = x / rho[:, None]
        d = rho - 1.0
        dh = mu - 3 * d**2
        uu = u[:, :, None] * u[:, None, :]
        eye = np.eye(m)[None]
        return dh[:, None, None] * uu + (h(rho, mu) / rho)[:, None, None] * (eye - uu) + W[None]

    return VectorFieldFamily(X, UnitSphere(m), J, alpha, name=f"flow-model-{m}d",
                             meta={"branch_oracle": lambda mu: math.sqrt(mu) if mu > 0 else None})


def model_radius(r0, mu, t):
    """Closed-form offset of the model: r^2(t) = mu / (1 + (mu/r0^2 - 1) e^{-2 mu t})."""
    r0 = np.asarray(r0, dtype=float)
    if mu == 0:
        return r0 / np.sqrt(1 + 2 * r0**2 * t)
    return np.sign(r0) * np.sqrt(mu / (1 + (mu / r0**2 - 1) * np.exp(-2 * mu * t)))


# --- integration ----------------------------------------------------------

def _steps(t: float, h: float) -> tuple[int, float]:
    n = max(1, math.ceil(abs(t) / h - 1e-9))
    return n, t / n


def _check(X: VectorFieldFamily, x, enforce):
    if not enforce:
        return
    if isinstance(X.manifold, UnitSphere):
        r = np.linalg.norm(x, axis=1) - 1.0
    else:
        r = X.manifold.project(x).r
    bad = np.abs(r) > X.alpha + 1e-9
    if np.any(bad):
        i = int(np.argmax(bad))
        raise LeftTube(f"trajectory left N({X.alpha}) (r={r[i]:.6g})", witness=x[i].tolist())


def _rk4_step(X: VectorFieldFamily, x, mu, dt):
    k1 = X(x, mu)
    k2 = X(x + 0.5 * dt * k1, mu)
    k3 = X(x + 0.5 * dt * k2, mu)
    k4 = X(x + dt * k3, mu)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_flow(X: VectorFieldFamily, x0, mu: float, t: float, h: float = DEFAULT_STEP,
                   check_tube: bool = True, richardson: bool = False):
    """phi(t, x0, mu) by classical RK4 with n = ceil(|t|/h) equal steps.

    With ``richardson=True`` also returns |phi_h - phi_{h/2}| / 15 per point.
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    if t == 0:
        return (x, np.zeros(len(x))) if richardson else x
    n, dt = _steps(t, h)
    for _ in range(n):
        x = _rk4_step(X, x, mu, dt)
        _check(X, x, check_tube)
    if richardson:
        fine = integrate_flow(X, x0, mu, t, h / 2, check_tube)
        return fine, np.linalg.norm(fine - x, axis=1) / 15
    return x


def trajectory(X: VectorFieldFamily, x0, mu: float, t: float, h: float = DEFAULT_STEP, every: int = 100):
    """Times and states (n_out, N, m) sampled every ``every`` steps."""
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    n, dt = _steps(t, h)
    ts, xs = [0.0], [x.copy()]
    for k in range(1, n + 1):
        x = _rk4_step(X, x, mu, dt)
        _check(X, x, True)
        if k % every == 0 or k == n:
            ts.append(k * dt)
            xs.append(x.copy())
    return np.array(ts), np.array(xs)


def variational_jacobian(X: VectorFieldFamily, mu: float, x0, t: float, h: float = DEFAULT_STEP,
                         check_tube: bool = False) -> np.ndarray:
    """D_x phi(t, x0) from Phi' = D_x X(phi) Phi, Phi(0) = I; shape (N, m, m)."""
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    N, m = x.shape
    P = np.broadcast_to(np.eye(m), (N, m, m)).copy()
    if t == 0:
        return P
    n, dt = _steps(t, h)

    def rhs(x, P):
        return X(x, mu), X.jac(x, mu) @ P

    for _ in range(n):
        a1, b1 = rhs(x, P)
        a2, b2 = rhs(x + 0.5 * dt * a1, P + 0.5 * dt * b1)
        a3, b3 = rhs(x + 0.5 * dt * a2, P + 0.5 * dt * b2)
        a4, b4 = rhs(x + dt * a3, P + dt * b3)
        x = x + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        P = P + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        _check(X, x, check_tube)
    return P


def time_t_map(X: VectorFieldFamily, t: float = 1.0, h: float = DEFAULT_STEP) -> MapFamily:
    """T^t(x) = phi(t, x) as a map family; the inverse integrates backwards."""

    def forward(x, mu):
        return integrate_flow(X, x, mu, t, h, check_tube=False)

    def inverse(x, mu):
        return integrate_flow(X, x, mu, -t, h, check_tube=False)

    def jacobian(x, mu):
        return variational_jacobian(X, mu, x, t, h)

    def inverse_jacobian(x, mu):
        return variational_jacobian(X, mu, x, -t, h)

    return MapFamily(forward, X.manifold, inverse, jacobian, inverse_jacobian, X.mu_range, X.alpha,
                     name=f"{X.name}-T{t:g}", meta={"flow": X, "t": t, **X.meta})


# --- tubular split of the field ----------------------------------------------

@dataclass
class FieldComponents:
    R: np.ndarray
    Y: np.ndarray
    DrR: np.ndarray
    DyR: np.ndarray
    DrY: np.ndarray
    DyY: np.ndarray


def _RY(X: VectorFieldFamily, r, u, mu):
    M = X.manifold
    x = M.embed(r, u)
    v = np.einsum("nij,nj->ni", M.projection_jacobian(x), X(x, mu))
    E = M.tangent_frame(u)
    return v[:, 0], np.einsum("nij,nj->ni", E, v[:, 1:])


def field_components(X: VectorFieldFamily, p: TubularPoint, mu: float, h: float = 1e-5) -> FieldComponents:
    """R = normal rate, Y = base-point velocity, and their (r, y) derivatives.

    y-derivatives move the base point along the tangent frame; the
    derivative of Y is projected back onto the frame (covariant form).
    """
    M = X.manifold
    r = np.atleast_1d(p.r).astype(float)
    u = np.atleast_2d(p.u)
    k = M.ambient_dim - 1
    E = M.tangent_frame(u)
    R, Yamb = _RY(X, r, u, mu)
    Rp, Yp = _RY(X, r + h, u, mu)
    Rm, Ym = _RY(X, r - h, u, mu)
    DrR = (Rp - Rm) / (2 * h)
    DrY = np.einsum("nij,ni->nj", E, (Yp - Ym) / (2 * h))
    DyR = np.empty((len(r), k))
    DyY = np.empty((len(r), k, k))
    for j in range(k):
        v = np.zeros((len(r), k))
        v[:, j] = h
        Rp, Yp = _RY(X, r, M.retract(u, v), mu)
        Rm, Ym = _RY(X, r, M.retract(u, -v), mu)
        DyR[:, j] = (Rp - Rm) / (2 * h)
        DyY[:, :, j] = np.einsum("nij,ni->nj", E, (Yp - Ym) / (2 * h))
    Y = np.einsum("nij,ni->nj", E, Yamb)
    return FieldComponents(R, Y, DrR, DyR, DrY, DyY)


# --- Gronwall comparison -------------------------------------------------------

READINGS = [
    {"gap": g, "e1": e, "labels": lab}
    for lab in ("narrative", "printed")
    for g in ("minus", "times")
    for e in ("inverse", "plain")
]


@dataclass(frozen=True)
class GronwallParams:
    s: float
    sigma: float
    nu: float
    t_star: float = 2.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("s must be positive")
        if self.sigma < 0 or self.nu < 0:
            raise ValueError("sigma and nu must be nonnegative")

    def ineq_violations(self) -> list[str]:
        q = self.s / 4
        names = {"sigma": self.sigma, "nu": self.nu, "sigma^2": self.sigma**2, "nu^2": self.nu**2}
        return [k for k, v in names.items() if not v < q]

    @property
    def satisfies_ineq(self) -> bool:
        return not self.ineq_violations()


def _safe_div(a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.asarray(a) == 0, 0.0, np.asarray(a, dtype=float) / b)


@dataclass
class GronwallBounds:
    """Exact solution of the 2x2 comparison system and the closed forms.

    ``E(t)`` returns the reference entries (u, v, w, z) = exp(M t) of
    M = [[-2s, sigma], [sigma, nu]], the bounds for |phi|, |Phi_I|,
    |Phi_II|, |Phi_III|.  ``printed(t, reading)`` evaluates the closed-form
    expressions under one reading of their ambiguous operators.
    """

    params: GronwallParams
    lambda_minus: float
    lambda_plus: float
    eigvecs: np.ndarray
    combine: str = "reference"
    discrepancy_log: list = field(default_factory=list)

    @property
    def matrix(self) -> np.ndarray:
        p = self.params
        return np.array([[-2 * p.s, p.sigma], [p.sigma, p.nu]])

    def expm(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lam = np.array([self.lambda_minus, self.lambda_plus])
        V = self.eigvecs
        return np.einsum("ik,tk,jk->tij", V, np.exp(np.outer(t, lam)), V)

    def reference(self, t) -> np.ndarray:
        """(len(t), 4) array of E0..E3 from the eigen-solution."""
        Q = self.expm(t)
        return np.stack([Q[:, 0, 0], Q[:, 0, 1], Q[:, 1, 0], Q[:, 1, 1]], axis=1)

    def E(self, t) -> np.ndarray:
        """Bounds used downstream, (len(t), 4).

        ``combine="reference"``: the eigen-solution.  ``combine="max"``: the
        entrywise max of the reference and every finite printed reading.
        """
        ref = self.reference(t)
        if self.combine == "reference":
            return ref
        out = ref.copy()
        for rd in READINGS:
            pr = self.printed(t, rd)["E"]
            out = np.where(np.isfinite(pr), np.maximum(out, pr), out)
        return out

    def ode_residual(self, t, h: float | None = None) -> float:
        """max |dE/dt - M E| over ``t``.

        dE/dt is differentiated term by term from the eigen-solution, or by a
        five-point stencil of step ``h`` when given.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        Q = self.expm
        if h is None:
            lam = np.array([self.lambda_minus, self.lambda_plus])
            V = self.eigvecs
            dQ = np.einsum("ik,tk,jk->tij", V, lam * np.exp(np.outer(t, lam)), V)
        else:
            dQ = (-Q(t + 2 * h) + 8 * Q(t + h) - 8 * Q(t - h) + Q(t - 2 * h)) / (12 * h)
        return float(np.max(np.abs(dQ - self.matrix @ Q(t))))

    def printed(self, t, reading: dict) -> dict:
        """Closed forms under ``reading``.

        gap: how to read the missing operator in "lambda_- nu" and
        "lambda_+ 2s" (minus or times).  e1: whether the sigma factor in E1
        carries an inverse like E0 does.  labels: "printed" keeps the
        printed lambda formula's +/- roles, "narrative" swaps them so that
        lambda_- is the negative root.
        """
        with np.errstate(all="ignore"):
            return self._printed(t, reading)

    def _printed(self, t, reading):
        p = self.params
        s, sg, nu = p.s, p.sigma, p.nu
        root = math.sqrt(1 + (4 * sg**2 + nu**2) / (2 * s - nu) ** 2)
        lp = -(2 * s - nu) / 2 * (1 + root)
        lm = -(2 * s - nu) / 2 * (1 - root)
        if reading["labels"] == "narrative":
            lp, lm = lm, lp
        gap = (lambda a, b: a - b) if reading["gap"] == "minus" else (lambda a, b: a * b)
        lmn = gap(lm, nu)
        lp2 = lp + 2 * s
        inner = lp2 + sg**2 * (lm - nu)
        k1 = 1 - _safe_div(sg**2, lp2 * inner)
        k2 = -_safe_div(sg, lmn * lp2 * inner)
        kb1 = sg * lmn * _safe_div(1.0, lp2 * (lm - nu) + sg**2) if sg else 0.0
        kb2 = 1.0 / (1 + _safe_div(sg**2, lp2 * (lm - nu)))
        e1f = gap(lp, 2 * s)
        e1f = _safe_div(sg, e1f) if reading["e1"] == "inverse" else sg * e1f
        t = np.atleast_1d(np.asarray(t, dtype=float))
        em, ep = np.exp(lm * t), np.exp(lp * t)
        E0 = k1 * em - _safe_div(sg, lp2) * k2 * ep
        E2 = _safe_div(sg, lm - nu) * k1 * em - k2 * ep
        E1 = kb1 * em - e1f * kb2 * ep
        E3 = _safe_div(sg, lmn) * kb1 * em - kb2 * ep
        return {"lambda_plus": lp, "lambda_minus": lm, "kappa1": float(k1), "kappa2": float(k2),
                "kappa1_bar": float(kb1), "kappa2_bar": float(kb2),
                "E": np.stack([E0, E1, E2, E3], axis=1) * np.ones((len(t), 1))}

    def discrepancies(self, t) -> list[dict]:
        """Per reading, max |printed - reference| for each E_i and each lambda."""
        ref = self.reference(t)
        rows = []
        for rd in READINGS:
            pr = self.printed(t, rd)
            d = np.abs(pr["E"] - ref)
            rows.append({**rd, "d_lambda_plus": abs(pr["lambda_plus"] - self.lambda_plus),
                         "d_lambda_minus": abs(pr["lambda_minus"] - self.lambda_minus),
                         **{f"d_E{i}": float(np.max(d[:, i])) for i in range(4)}})
        return rows


def gronwall_bounds(p: GronwallParams, combine: str = "reference", log_t=(0.0, 1.0, 2.0)) -> GronwallBounds:
    """Comparison-system bounds; raises ParamsViolateIneq if (ineq) fails."""
    bad = p.ineq_violations()
    if bad:
        raise ParamsViolateIneq(f"need sigma, nu, sigma^2, nu^2 < s/4; violated by {', '.join(bad)}")
    M = np.array([[-2 * p.s, p.sigma], [p.sigma, p.nu]])
    lam, V = np.linalg.eigh(M)
    lm, lp = float(lam[0]), float(lam[1])
    if not (lm < 0 <= lp):
        raise ParamsViolateIneq(f"eigenvalues {lm}, {lp} do not straddle zero")
    if combine not in ("reference", "max"):
        raise ValueError("combine must be 'reference' or 'max'")
    gb = GronwallBounds(p, lm, lp, V, combine)
    gb.discrepancy_log = gb.discrepancies(np.asarray(log_t))
    return gb


# --- Theorem 5 checks ----------------------------------------------------------

@dataclass
class Theorem5Verdict:
    mu: float
    conditions: dict
    params: GronwallParams | None = None
    estimates: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.holds for c in self.conditions.values())

    def __getitem__(self, key):
        return self.conditions[key]

    def to_dict(self) -> dict:
        d = {"mu": self.mu, "overall": self.overall,
             "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
             "estimates": self.estimates}
        if self.params is not None:
            d["params"] = {"s": self.params.s, "sigma": self.params.sigma, "nu": self.params.nu}
        return d


def _shell_points(mesh: ManifoldMesh, rs):
    rs = np.asarray(rs, dtype=float)
    r = np.repeat(rs, len(mesh))
    u = np.tile(mesh.params, (len(rs), 1))
    return TubularPoint(r, mesh.manifold.point(u), u)


def _eest(gb: GronwallBounds, ts) -> dict:
    Ef = gb.E(ts)
    Eb = np.abs(gb.E(-np.asarray(ts)))
    E0, E1 = Ef[:, 0], Ef[:, 1]
    E2m, E3m = Eb[:, 2], Eb[:, 3]
    return {
        "Eest1": E0 * (1 + E2m) + E1,
        "Eest2": (E0 + E1) * (E2m + E3m),
        "Eest3": E0 * (2 * E2m + E3m) + E1 * E2m,
    }


def check_theorem5(X: VectorFieldFamily, mus, *, alpha1: float = 0.1, mu_star: float = 0.0,
                   n_r: int = 16, mesh: ManifoldMesh | None = None, ts=(1.0, 1.5, 2.0)) -> list[Theorem5Verdict]:
    """Sampled (i)-(v) for a flow; s, sigma, nu are fitted on A(mu).

    mu < 0 checks (i), (ii); mu > mu* checks (i), (iii), (iv), (v).  In (v)
    the backward-time bounds E_i(-t) enter in absolute value.
    """
    mesh = mesh or build_mesh(X.manifold, 16 if X.ambient_dim == 2 else 42)
    a = X.alpha
    out = []
    for mu in mus:
        res, params, est = {}, None, {}
        ends = field_components(X, _shell_points(mesh, [-a, a]), mu)
        n = len(mesh)
        inward = np.concatenate([-ends.R[n:], ends.R[:n]])
        res["i"] = ConditionResult(np.all(inward > 0), inward.min())
        if mu < 0:
            c = field_components(X, _shell_points(mesh, np.linspace(-a, a, 2 * n_r + 1)), mu)
            res["ii"] = ConditionResult(c.DrR.max() < 0, -c.DrR.max())
        if mu > mu_star:
            c0 = field_components(X, _shell_points(mesh, [0.0]), mu)
            res["iii"] = ConditionResult(c0.DrR.min() > 0, c0.DrR.min())
            band = np.linspace(alpha1, a, n_r + 1)
            cA = field_components(X, _shell_points(mesh, np.concatenate([-band[::-1], band])), mu)
            edge = field_components(X, _shell_points(mesh, [-alpha1, alpha1]), mu)
            outward = np.concatenate([-edge.R[:n], edge.R[n:]])
            s = -cA.DrR.max() / 2
            into_A = min(outward.min(), inward.min())
            res["iv"] = ConditionResult(into_A > 0 and s > 0, min(into_A, s), note=f"s={s:.6g}")
            sigma = float(max(np.linalg.norm(cA.DyR, axis=1).max(), np.linalg.norm(cA.DrY, axis=1).max()))
            nu = float(np.linalg.norm(cA.DyY, ord=2, axis=(1, 2)).max())
            if s > 0:
                params = GronwallParams(s, sigma, nu)
                if params.satisfies_ineq:
                    gb = gronwall_bounds(params)
                    e = _eest(gb, ts)
                    est = {k: v.tolist() for k, v in e.items()}
                    m1 = 1 - max(e["Eest1"].max(), e["Eest3"].max())
                    m2 = 1 - e["Eest2"].max()
                    res["v"] = ConditionResult(m1 > 0 and m2 >= 0, min(m1, m2), note=f"sigma={sigma:.3g}, nu={nu:.3g}")
                else:
                    res["v"] = ConditionResult(False, -1.0, note="ineq fails: " + ", ".join(params.ineq_violations()))
            else:
                res["v"] = ConditionResult(False, -1.0, note="no s > 0")
        out.append(Theorem5Verdict(mu, res, params, est))
    return out


def gronwall_domination(X: VectorFieldFamily, mu: float, *, ts=(0.5, 1.0, 2.0), alpha1: float = 0.1,
                        mesh: ManifoldMesh | None = None, n_r: int = 4, tol: float = 1e-9) -> dict:
    """Compare |D phi(t)| blocks on the shell with the reference E(t).

    Only meaningful when (iv) and (v) hold; otherwise ``applicable`` is False
    and no comparison is made.
    """
    mesh = mesh or build_mesh(X.manifold, 16 if X.ambient_dim == 2 else 42)
    v = check_theorem5(X, [mu], alpha1=alpha1, mesh=mesh)[0]
    ok = all(k in v.conditions and v[k].holds for k in ("iv", "v"))
    out = {"mu": mu, "applicable": ok, "params": v.to_dict().get("params"), "per_t": {}, "dominated": None}
    if not ok:
        return out
    gb = gronwall_bounds(v.params)
    band = np.linspace(alpha1, X.alpha, n_r + 1)
    p = _shell_points(mesh, np.concatenate([-band[::-1], band]))
    worst = -np.inf
    for t in ts:
        ce = split_components(time_t_map(X, t), p, mu, check_tube=False)
        nrm = ce.norms()
        got = np.array([nrm["Drf"].max(), nrm["Dyf"].max(), nrm["Drg"].max(), nrm["Dyg"].max()])
        E = gb.E([t])[0]
        excess = got - E
        worst = max(worst, float(excess.max()))
        out["per_t"][float(t)] = {"blocks": got.tolist(), "E": E.tolist(), "max_excess": float(excess.max())}
    out["dominated"] = bool(worst <= tol)
    out["max_excess"] = worst
    return out


def verify_invariance_across_t(X: VectorFieldFamily, mu: float, graphs, ts=(0.37, 1.0, 1.5, 2.0),
                               h: float = DEFAULT_STEP) -> dict:
    """Flow each graph's node points for time t and measure the offset gap to the graph."""
    M = X.manifold
    per_t = {}
    for t in ts:
        dev = 0.0
        if t != 0:
            for g in graphs:
                y = integrate_flow(X, g.points(), mu, t, h, check_tube=False)
                p = M.project(y)
                dev = max(dev, float(np.max(np.abs(p.r - g(p.u)))))
        per_t[float(t)] = dev
    return {"per_t": per_t, "max": max(per_t.values()) if per_t else 0.0}


@dataclass
class FlowSolveResult:
    mu: float
    t: float
    theorem5: Theorem5Verdict
    theorem1: HypothesisVerdict
    branches: BranchPair
    invariance: dict

    def to_dict(self) -> dict:
        return {"mu": self.mu, "t": self.t, "theorem5": self.theorem5.to_dict(),
                "theorem1": self.theorem1.to_dict(), "branches": self.branches.summary(),
                "invariance": self.invariance}


def flow_solve(X: VectorFieldFamily, mu: float, *, t: float = 1.0, h: float = DEFAULT_STEP,
               config: SolverConfig | None = None, check_mesh: int | None = None,
               ts=(0.37, 1.0, 1.5, 2.0), alpha1: float = 0.15, flow_alpha1: float = 0.1) -> FlowSolveResult:
    """Flow hypotheses, discrete hypotheses for T^t, both branches, and t-independence."""
    config = config or SolverConfig(mesh_resolution=64 if X.ambient_dim == 2 else 162, n_r=16, probe_steps=25)
    small = build_mesh(X.manifold, check_mesh or (16 if X.ambient_dim == 2 else 42))
    v5 = check_theorem5(X, [mu], alpha1=flow_alpha1, mesh=small)[0]
    T = time_t_map(X, t, h)
    v1 = check_theorem1(T, [mu], alpha1=alpha1, chi=config.chi, n_r=config.n_r, mesh=small)[0]
    bp = solve_branches(T, mu, config)
    inv = verify_invariance_across_t(X, mu, [bp.plus, bp.minus], ts, h)
    return FlowSolveResult(mu, t, v5, v1, bp, inv)
