"""Map families F_mu, their tubular components (f, g) and inverses.

A family is evaluated in ambient coordinates; ``split_components`` turns it
into the normal/base split used by the hypotheses and the graph transform.
Jacobian blocks are expressed in the orthonormal tangent frame returned by
``ReferenceManifold.tangent_frame`` at the relevant base point.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import (
    LeftTube,
    NewtonDivergence,
    NoInverseProvided,
    NotRotation,
    UnsupportedManifold,
)
from .geometry import TUBE_TOL, ReferenceManifold, UnitSphere, sphere_frame

Array = np.ndarray

__all__ = [
    "ComponentEval",
    "MapFamily",
    "SigmaProfile",
    "SideVerdict",
    "canonical_family",
    "classify_side_behavior",
    "compose",
    "fd_step_default",
    "identity_family",
    "inverse_components",
    "rotation_2d",
    "rotation_3d",
    "side_reversing_wrap",
    "split_components",
]

fd_step_default = 1e-5


@dataclass(eq=False)
class ComponentEval:
    """f, g and the four Jacobian blocks at a batch of tubular points.

    Shapes for N points in R^m: f (N,), g and g_u (N, m), Drf (N,),
    Dyf (N, m-1), Drg (N, m-1), Dyg (N, m-1, m-1).
    """

    f: Array
    g: Array
    g_u: Array
    Drf: Array
    Dyf: Array
    Drg: Array
    Dyg: Array

    def norms(self) -> dict[str, Array]:
        """Pointwise |Drf| and spectral norms of the other blocks."""
        return {
            "Drf": np.abs(self.Drf),
            "Dyf": np.linalg.norm(self.Dyf, axis=1),
            "Drg": np.linalg.norm(self.Drg, axis=1),
            "Dyg": np.linalg.norm(self.Dyg, ord=2, axis=(1, 2)),
        }

    def matrix(self) -> Array:
        """Full block Jacobian, shape (N, m, m)."""
        n, k = self.Dyf.shape
        out = np.empty((n, k + 1, k + 1))
        out[:, 0, 0] = self.Drf
        out[:, 0, 1:] = self.Dyf
        out[:, 1:, 0] = self.Drg
        out[:, 1:, 1:] = self.Dyg
        return out

    @classmethod
    def from_matrix(cls, f, g, g_u, J) -> "ComponentEval":
        return cls(f, g, g_u, J[:, 0, 0], J[:, 0, 1:], J[:, 1:, 0], J[:, 1:, 1:])


ComponentFn = Callable[[Array, Array, float], ComponentEval]


@dataclass(eq=False)
class MapFamily:
    """One-parameter family of diffeomorphisms leaving ``manifold`` invariant.

    ``forward(x, mu)`` takes (N, m) points.  ``inverse`` and the Jacobians are
    optional: a missing inverse is computed by damped Newton, a missing
    Jacobian by central differences with step ``fd_step``.  ``components``
    and ``inverse_components`` short-circuit the generic (r, y) split when an
    analytic form exists.
    """

    forward: Callable[[Array, float], Array]
    manifold: ReferenceManifold
    inverse: Optional[Callable[[Array, float], Array]] = None
    jacobian: Optional[Callable[[Array, float], Array]] = None
    inverse_jacobian: Optional[Callable[[Array, float], Array]] = None
    mu_range: tuple[float, float] = (-1 / 25, 1 / 25)
    alpha: float = 0.2
    components: Optional[ComponentFn] = None
    inverse_components: Optional[ComponentFn] = None
    name: str = "map"
    fd_step: float = fd_step_default
    side: str = "preserving"
    meta: dict = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return self.manifold.ambient_dim

    def __call__(self, x, mu):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.forward(x, mu), dtype=float).reshape(x.shape)

    def inv(self, x, mu):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.inverse is not None:
            return np.asarray(self.inverse(x, mu), dtype=float).reshape(x.shape)
        return numeric_inverse(self, x, mu)

    def jac(self, x, mu):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x, mu), dtype=float)
        return fd_jacobian(lambda z: self(z, mu), x, self.fd_step)

    def inv_jac(self, x, mu):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.inverse_jacobian is not None:
            return np.asarray(self.inverse_jacobian(x, mu), dtype=float)
        if self.inverse is None and self.jacobian is not None:
            return np.linalg.inv(self.jac(self.inv(x, mu), mu))
        return fd_jacobian(lambda z: self.inv(z, mu), x, self.fd_step)

    def in_range(self, mu) -> bool:
        lo, hi = self.mu_range
        return lo <= mu <= hi


def fd_jacobian(fn, x, h):
    """Central-difference Jacobian of a batched map; shape (N, m, m)."""
    x = np.atleast_2d(x)
    n, m = x.shape
    J = np.empty((n, m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        J[:, :, j] = (fn(x + e) - fn(x - e)) / (2 * h)
    return J


def numeric_inverse(F: MapFamily, x, mu, tol=1e-11, max_iter=100):
    """Damped Newton for F(z) = x from z = x."""
    x = np.atleast_2d(x)
    z = x.copy()
    res = F(z, mu) - x
    err = np.linalg.norm(res, axis=1)
    trace = [float(err.max())]
    for _ in range(max_iter):
        active = err > tol
        if not np.any(active):
            return z
        J = F.jac(z[active], mu)
        step = -np.linalg.solve(J, res[active][:, :, None])[:, :, 0]
        lam = np.ones(int(active.sum()))
        za = z[active]
        ea = err[active]
        for _ in range(30):
            trial = za + lam[:, None] * step
            ra = F(trial, mu) - x[active]
            et = np.linalg.norm(ra, axis=1)
            worse = et > (1 - 1e-4 * lam) * ea
            if not np.any(worse):
                break
            lam = np.where(worse, lam / 2, lam)
        z[active] = trial
        res[active] = ra
        err[active] = et
        trace.append(float(err.max()))
    if np.any(err > tol):
        raise NewtonDivergence(f"inverse did not converge (residual {err.max():.3e})", trace)
    return z


# --- component split -----------------------------------------------------

def _check_tube(F: MapFamily, f, where, check):
    if check and np.any(np.abs(f) > F.alpha + TUBE_TOL):
        i = int(np.argmax(np.abs(f)))
        raise LeftTube(f"image offset {f[i]:.6g} outside N({F.alpha})", witness=where[i])


def _generic(F: MapFamily, r, u, mu, fwd, jac, blocks=True):
    M = F.manifold
    x = M.embed(r, u)
    Fx = fwd(x, mu)
    p = M.project(Fx)
    if not blocks:
        n, m = x.shape
        J = np.full((n, m, m), np.nan)
        return ComponentEval.from_matrix(p.r, p.y, p.u, J)
    J = jac(x, mu)
    P = M.projection_jacobian(Fx)
    # P has rows [dr; dy] in the frame at p.u; our frames depend only on u
    B = P @ J @ M.embed_jacobian(r, u)
    return ComponentEval.from_matrix(p.r, p.y, p.u, B)


def split_components(F: MapFamily, p, mu, check_tube: bool = True, blocks: bool = True) -> ComponentEval:
    """(f, g) and Jacobian blocks of F_mu at tubular points ``p``.

    With ``blocks=False`` a generic family skips its Jacobian (blocks are NaN).
    """
    r = np.atleast_1d(np.asarray(p.r, dtype=float))
    u = np.atleast_2d(p.u)
    if F.components is not None:
        ce = F.components(r, u, mu)
    else:
        ce = _generic(F, r, u, mu, F.__call__, F.jac, blocks)
    _check_tube(F, ce.f, np.column_stack([r, u]), check_tube)
    return ce


def inverse_components(F: MapFamily, p, mu, check_tube: bool = False, blocks: bool = True) -> ComponentEval:
    """(f_hat, g_hat) and blocks of F_mu^{-1} at tubular points ``p``."""
    r = np.atleast_1d(np.asarray(p.r, dtype=float))
    u = np.atleast_2d(p.u)
    if F.inverse_components is not None:
        ce = F.inverse_components(r, u, mu)
    else:
        if F.inverse is None and F.jacobian is None and not F.meta.get("numeric_inverse_ok", True):
            raise NoInverseProvided(f"{F.name}: no inverse and no Jacobian for Newton")
        ce = _generic(F, r, u, mu, F.inv, F.inv_jac, blocks)
    _check_tube(F, ce.f, np.column_stack([r, u]), check_tube)
    return ce


# --- side classification -------------------------------------------------

@dataclass(frozen=True)
class SideVerdict:
    kind: str  # side-preserving | side-reversing | mixed
    counterexample: Optional[tuple] = None

    def __str__(self):
        return self.kind


def classify_side_behavior(F: MapFamily, mu, samples: int = 64, seed: int = 0) -> SideVerdict:
    """Where do inner points of N(alpha) land: inner, outer, or both?"""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M = F.manifold
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(samples, M.ambient_dim))
    u /= np.linalg.norm(u, axis=1)[:, None]
    r = -F.alpha * (np.arange(samples) + 1) / samples
    x = M.embed(r, u)
    inside = M.is_inside(F(x, mu))
    if np.all(inside):
        return SideVerdict("side-preserving")
    if not np.any(inside):
        return SideVerdict("side-reversing")
    i = int(np.argmin(inside))
    j = int(np.argmax(inside))
    return SideVerdict("mixed", (x[j].tolist(), x[i].tolist()))


# --- canonical family ----------------------------------------------------

def _hermite(s, a, b, va, da, vb, db):
    h = b - a
    t = (s - a) / h
    t2, t3 = t * t, t * t * t
    v = (2 * t3 - 3 * t2 + 1) * va + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * vb + (t3 - t2) * h * db
    d = ((6 * t2 - 6 * t) * va + (3 * t2 - 4 * t + 1) * h * da + (-6 * t2 + 6 * t) * vb + (3 * t2 - 2 * t) * h * db) / h
    return v, d


@dataclass(frozen=True)
class SigmaProfile:
    """Radial gain sigma_mu(s): cubic core with C^1 Hermite shoulders.

    Core 1 - (s-1)^3 + mu (s-1) on [lo, hi]; cubic blends over
    [lo - blend, lo] and [hi, hi + blend] to the constants core(lo) + lift and
    core(hi) - lift, flat beyond.
    """

    lo: float = 0.8
    hi: float = 1.2
    blend: float = 0.1
    lift: float = 0.05

    @staticmethod
    def core(s, mu):
        d = s - 1.0
        return 1.0 - d**3 + mu * d

    @staticmethod
    def core_deriv(s, mu):
        d = s - 1.0
        return -3.0 * d**2 + mu

    def _eval(self, s, mu):
        s = np.asarray(s, dtype=float)
        v = self.core(s, mu)
        d = self.core_deriv(s, mu)
        a0, a1 = self.lo - self.blend, self.lo
        b0, b1 = self.hi, self.hi + self.blend
        left = s < a1
        right = s > b0
        if np.any(left):
            vl, dl = _hermite(np.maximum(s, a0), a0, a1, self.core(a1, mu) + self.lift, 0.0,
                              self.core(a1, mu), self.core_deriv(a1, mu))
            v = np.where(left, vl, v)
            d = np.where(left, np.where(s < a0, 0.0, dl), d)
        if np.any(right):
            vr, dr = _hermite(np.minimum(s, b1), b0, b1, self.core(b0, mu), self.core_deriv(b0, mu),
                              self.core(b0, mu) - self.lift, 0.0)
            v = np.where(right, vr, v)
            d = np.where(right, np.where(s > b1, 0.0, dr), d)
        return v, d

    def value(self, s, mu):
        return self._eval(s, mu)[0]

    def deriv(self, s, mu):
        return self._eval(s, mu)[1]

    def radial(self, s, mu):
        """s * sigma(s): the radius map."""
        return np.asarray(s) * self.value(s, mu)

    def radial_deriv(self, s, mu):
        v, d = self._eval(s, mu)
        return v + np.asarray(s) * d

    def radial_inverse(self, rho, mu, tol=1e-15, max_iter=60):
        """Solve s*sigma(s) = rho by Newton from s = rho."""
        rho = np.asarray(rho, dtype=float)
        s = rho.copy()
        trace = []
        for _ in range(max_iter):
            v, d = self._eval(s, mu)
            res = s * v - rho
            trace.append(float(np.max(np.abs(res))) if res.size else 0.0)
            step = res / (v + s * d)
            s = s - step
            if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(s))):
                return s
        if np.max(np.abs(self.radial(s, mu) - rho)) < 1e-13:
            return s
        raise NewtonDivergence("radial inverse did not converge", trace)


def rotation_2d(theta: float) -> Array:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_3d(axis, angle: float) -> Array:
    axis = np.asarray(axis, dtype=float)
    return Rotation.from_rotvec(angle * axis / np.linalg.norm(axis)).as_matrix()


def _check_rotation(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotRotation(f"A must be square, got shape {A.shape}")
    if np.linalg.norm(A.T @ A - np.eye(len(A))) > 1e-12:
        raise NotRotation("A is not orthogonal to 1e-12")
    if abs(np.linalg.det(A) - 1.0) > 1e-12:
        raise NotRotation("det A != 1")
    return A


def canonical_family(n: int = 2, A=None, sigma: SigmaProfile | None = None, *,
                     alpha: float = 0.2, mu_range=(-1 / 25, 1 / 25)) -> MapFamily:
    """F_mu(x) = sigma_mu(|x|) A x on the unit circle (n=2) or sphere (n=3)."""
    sig = sigma or SigmaProfile()
    if A is None:
        A = np.eye(n)
    A = _check_rotation(A)
    if A.shape[0] != n:
        raise NotRotation(f"A is {A.shape[0]}x{A.shape[0]} but n={n}")
    M = UnitSphere(n)

    def forward(x, mu):
        rho = np.linalg.norm(x, axis=1)
        return sig.value(rho, mu)[:, None] * (x @ A.T)

    def inverse(x, mu):
        rho = np.linalg.norm(x, axis=1)
        s = sig.radial_inverse(rho, mu)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(rho > 0, s / rho, 0.0)
        return scale[:, None] * (x @ A)

    def jacobian(x, mu):
        rho = np.linalg.norm(x, axis=1)
        v, d = sig._eval(rho, mu)
        u = x / rho[:, None]
        Ax = x @ A.T
        return v[:, None, None] * A[None] + d[:, None, None] * Ax[:, :, None] * u[:, None, :]

    def inverse_jacobian(x, mu):
        return np.linalg.inv(jacobian(inverse(x, mu), mu))

    def components(r, u, mu):
        s = 1.0 + r
        f = sig.radial(s, mu) - 1.0
        Au = u @ A.T
        k = n - 1
        N = len(r)
        Dyg = np.einsum("nik,ij,njl->nkl", sphere_frame(Au), A, sphere_frame(u))
        return ComponentEval(f, Au, Au, sig.radial_deriv(s, mu), np.zeros((N, k)), np.zeros((N, k)), Dyg)

    def inv_components(r, u, mu):
        s = sig.radial_inverse(1.0 + r, mu)
        Atu = u @ A
        k = n - 1
        N = len(r)
        Dyg = np.einsum("nik,ji,njl->nkl", sphere_frame(Atu), A, sphere_frame(u))
        return ComponentEval(s - 1.0, Atu, Atu, 1.0 / sig.radial_deriv(s, mu), np.zeros((N, k)),
                             np.zeros((N, k)), Dyg)

    return MapFamily(
        forward=forward,
        manifold=M,
        inverse=inverse,
        jacobian=jacobian,
        inverse_jacobian=inverse_jacobian,
        mu_range=mu_range,
        alpha=alpha,
        components=components,
        inverse_components=inv_components,
        name=f"canonical-{n}d",
        meta={"A": A, "sigma": sig, "branch_oracle": lambda mu: np.sqrt(mu) if mu > 0 else None},
    )


def identity_family(M: ReferenceManifold, alpha: float = 0.2) -> MapFamily:
    return MapFamily(forward=lambda x, mu: x.copy(), manifold=M, inverse=lambda x, mu: x.copy(),
                     jacobian=lambda x, mu: np.broadcast_to(np.eye(x.shape[1]), (len(x),) + (x.shape[1],) * 2).copy(),
                     alpha=alpha, name="identity")


# --- side-reversing wrap and composition ----------------------------------

def _reflect(x):
    rho = np.linalg.norm(x, axis=1)
    return ((2.0 - rho) / rho)[:, None] * x


def _reflect_jac(x):
    rho = np.linalg.norm(x, axis=1)
    m = x.shape[1]
    return ((2.0 / rho - 1.0)[:, None, None] * np.eye(m)[None]
            - 2.0 * x[:, :, None] * x[:, None, :] / (rho**3)[:, None, None])


def side_reversing_wrap(F: MapFamily) -> MapFamily:
    """G_mu = R o F_mu with R(x) = (2 - |x|) x / |x|, the radial flip r -> -r."""
    if not isinstance(F.manifold, UnitSphere):
        raise UnsupportedManifold("the radial flip is defined for the unit circle/sphere only")

    def forward(x, mu):
        return _reflect(F(x, mu))

    def inverse(x, mu):
        return F.inv(_reflect(x), mu)

    def jacobian(x, mu):
        return _reflect_jac(F(x, mu)) @ F.jac(x, mu)

    def inverse_jacobian(x, mu):
        return F.inv_jac(_reflect(x), mu) @ _reflect_jac(x)

    comps = inv_comps = None
    if F.components is not None:
        def comps(r, u, mu):
            c = F.components(r, u, mu)
            return ComponentEval(-c.f, c.g, c.g_u, -c.Drf, -c.Dyf, c.Drg, c.Dyg)

    if F.inverse_components is not None:
        def inv_comps(r, u, mu):
            c = F.inverse_components(-r, u, mu)
            return ComponentEval(c.f, c.g, c.g_u, -c.Drf, c.Dyf, -c.Drg, c.Dyg)

    side = "reversing" if F.side == "preserving" else "preserving"
    return replace(F, forward=forward, inverse=inverse, jacobian=jacobian, inverse_jacobian=inverse_jacobian,
                   components=comps, inverse_components=inv_comps, name=F.name + "-reversed", side=side,
                   meta=dict(F.meta))


def compose(F: MapFamily, G: MapFamily) -> MapFamily:
    """F o G (G applied first); blocks compose by the chain rule."""
    if F.manifold is not G.manifold and type(F.manifold) is not type(G.manifold):
        raise UnsupportedManifold("cannot compose families on different manifolds")

    def forward(x, mu):
        return F(G(x, mu), mu)

    def inverse(x, mu):
        return G.inv(F.inv(x, mu), mu)

    def jacobian(x, mu):
        return F.jac(G(x, mu), mu) @ G.jac(x, mu)

    def inverse_jacobian(x, mu):
        y = F.inv(x, mu)
        return G.inv_jac(y, mu) @ F.inv_jac(x, mu)

    comps = inv_comps = None
    if F.components is not None and G.components is not None:
        def comps(r, u, mu):
            cg = G.components(r, u, mu)
            cf = F.components(cg.f, cg.g_u, mu)
            return ComponentEval.from_matrix(cf.f, cf.g, cf.g_u, cf.matrix() @ cg.matrix())

    if F.inverse_components is not None and G.inverse_components is not None:
        def inv_comps(r, u, mu):
            cf = F.inverse_components(r, u, mu)
            cg = G.inverse_components(cf.f, cf.g_u, mu)
            return ComponentEval.from_matrix(cg.f, cg.g, cg.g_u, cg.matrix() @ cf.matrix())

    side = "preserving" if F.side == G.side else "reversing"
    return MapFamily(forward=forward, manifold=F.manifold, inverse=inverse, jacobian=jacobian,
                     inverse_jacobian=inverse_jacobian, mu_range=F.mu_range, alpha=F.alpha,
                     components=comps, inverse_components=inv_comps, name=f"{F.name}*{G.name}",
                     fd_step=F.fd_step, side=side, meta=dict(F.meta))
