"""Graph transform: invariant manifolds as fixed points of psi -> F(psi).

A candidate manifold is the graph {(psi(y), y)} of a mesh-sampled offset
function.  The operator

    F(psi)(z) = f(psi(w), w),   w = g_hat(psi(z), z)

maps graphs to graphs; its fixed point is the invariant manifold.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .dynsys import MapFamily, compose, inverse_components, split_components
from .errors import BranchCollapse, LeftTube, NoBifurcation, NoCrossing, NotContracting
from .geometry import TUBE_TOL, ManifoldMesh, TubularPoint, TubularRegion, build_mesh
from .hypotheses import estimate_norms, find_mu_star, resolve_shell
from .simulate import iterate

__all__ = [
    "BifurcationReport",
    "BranchPair",
    "FixedPointRun",
    "GraphFunction",
    "SolverConfig",
    "assemble_bifurcation_report",
    "diffeomorphy_check",
    "equicontinuity_probe",
    "graph_invariance_defect",
    "graph_transform_apply",
    "in_space_X",
    "lipschitz_estimate",
    "solve_branches",
    "solve_fixed_point",
]

ROUNDOFF = 16 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class GraphFunction:
    """Offsets psi(y_i) at mesh nodes; ``branch`` is "plus" or "minus"."""

    mesh: ManifoldMesh
    values: np.ndarray
    branch: str = "plus"
    region: TubularRegion | None = None

    def __post_init__(self):
        if self.branch not in ("plus", "minus"):
            raise ValueError(f"branch must be plus/minus, got {self.branch!r}")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.mesh),):
            raise ValueError(f"need {len(self.mesh)} node values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, mesh, c, branch=None, region=None):
        branch = branch or ("plus" if c >= 0 else "minus")
        return cls(mesh, np.full(len(mesh), float(c)), branch, region)

    @property
    def sign(self) -> float:
        return 1.0 if self.branch == "plus" else -1.0

    def __call__(self, u) -> np.ndarray:
        return self.mesh.interpolate(self.values, u)

    def with_values(self, values) -> "GraphFunction":
        return replace(self, values=np.asarray(values, dtype=float))

    def points(self) -> np.ndarray:
        """Ambient coordinates of the graph over the mesh nodes."""
        return self.mesh.manifold.embed(self.values, self.mesh.params)

    def tubular(self) -> TubularPoint:
        return TubularPoint(self.values, self.mesh.nodes, self.mesh.params)


def graph_transform_apply(psi: GraphFunction, F: MapFamily, mu: float, check_tube: bool = True) -> GraphFunction:
    """One application of the functional-equation operator at every node."""
    w = inverse_components(F, psi.tubular(), mu, blocks=False).g_u
    pw = psi(w)
    M = psi.mesh.manifold
    ce = split_components(F, TubularPoint(pw, M.point(w), w), mu, check_tube=check_tube, blocks=False)
    return psi.with_values(ce.f)


def lipschitz_estimate(psi: GraphFunction) -> float:
    """Max |psi_i - psi_j| / |y_i - y_j| over mesh edges (chordal distance)."""
    e = psi.mesh.edges
    if len(psi.mesh) < 2:
        raise ValueError("need at least two nodes")
    X = psi.mesh.nodes
    d = np.linalg.norm(X[e[:, 0]] - X[e[:, 1]], axis=1)
    return float(np.max(np.abs(psi.values[e[:, 0]] - psi.values[e[:, 1]]) / d))


def in_space_X(psi: GraphFunction, K: TubularRegion | None = None, tol: float = 1e-9) -> dict:
    """Sign, Lipschitz <= 1 and containment checks defining the space X."""
    K = K or psi.region
    v = psi.values
    sign_ok = bool(np.all(psi.sign * v >= -tol))
    lip = lipschitz_estimate(psi)
    cont = True if K is None else bool(np.all(K.contains(v, tol)))
    return {"sign": sign_ok, "lipschitz": lip <= 1 + tol, "contained": cont, "lip": lip,
            "ok": sign_ok and lip <= 1 + tol and cont}


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 500
    method: str = "anderson"
    depth: int = 5
    chi: object = "auto"
    alpha1: float = 0.15
    mesh_resolution: int | None = None
    n_r: int = 64
    keep_snapshots: bool = True
    stall_limit: int = 10
    probe_steps: int = 400


@dataclass
class FixedPointRun:
    """History of one fixed-point solve.

    ``banach_bound`` = c*/(1-c*) * last_change.  ``error_bound`` adds the
    evaluation floor ``roundoff_floor / (1 - c*)`` so the bound stays valid
    once the change itself hits roundoff.
    """

    iterates: int = 0
    history: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    ratios_by_iter: list = field(default_factory=list)
    c_star_used: float = float("nan")
    error_bound: float = float("inf")
    banach_bound: float = float("inf")
    roundoff_floor: float = 0.0
    converged: bool = False
    certified: bool = False
    method: str = "anderson"
    snapshots: list = field(default_factory=list)
    mesh: ManifoldMesh | None = None

    @property
    def last_change(self) -> float:
        return self.history[-1] if self.history else float("nan")

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def rows(self):
        """(iteration, sup-change, ratio) rows; ratio is NaN where undefined."""
        rat = dict(self.ratios_by_iter)
        return [(i, h, rat.get(i, float("nan"))) for i, h in enumerate(self.history)]


def _band(psi: GraphFunction, K: TubularRegion | None, alpha: float):
    lo, hi = (K.inner_cut, K.alpha) if K is not None else (0.0, alpha)
    return (lo, hi) if psi.branch == "plus" else (-hi, -lo)


def solve_fixed_point(psi0: GraphFunction, F: MapFamily, mu: float, tol: float = 1e-12,
                      max_iter: int = 500, *, c_star: float | None = None, method: str = "anderson",
                      depth: int = 5, keep_snapshots: bool = True, stall_limit: int = 10):
    """Iterate the graph transform from ``psi0`` to its fixed point.

    ``method="picard"`` is the plain iteration psi_{n+1} = F(psi_n).
    ``method="anderson"`` mixes the last ``depth`` residuals (type-II
    Anderson), falls back to a plain step whenever the residual grows and
    clips iterates into the branch's band of K.  The returned graph is always
    a plain image F(x) of the last iterate, so the Banach estimate applies.
    """
    if method not in ("anderson", "picard"):
        raise ValueError(f"unknown method {method!r}")
    K = psi0.region
    if c_star is None:
        c_star = estimate_norms(F, mu, K or TubularRegion(F.alpha, 0.0), mesh=psi0.mesh).c_star
    run = FixedPointRun(c_star_used=float(c_star), method=method, mesh=psi0.mesh)
    lo, hi = _band(psi0, K, F.alpha)
    sign = psi0.sign

    def T(v):
        return graph_transform_apply(psi0.with_values(v), F, mu).values

    x = psi0.values.copy()
    Tx = T(x)
    prev_x = prev_Tx = None
    X_hist, R_hist = [], []
    streak = 0
    floor = 0.0
    for k in range(max_iter + 1):
        if keep_snapshots:
            run.snapshots.append(Tx.copy())
        if np.any(sign * Tx < 0):
            run.iterates = k
            raise BranchCollapse(f"{psi0.branch} branch crossed zero at iteration {k}", run)
        res = Tx - x
        change = float(np.max(np.abs(res)))
        run.history.append(change)
        floor = max(floor, ROUNDOFF * (1.0 + float(np.max(np.abs(Tx)))))
        if prev_x is not None:
            den = float(np.max(np.abs(x - prev_x)))
            if den > 1e-10:
                ratio = float(np.max(np.abs(Tx - prev_Tx))) / den
                run.ratios.append(ratio)
                run.ratios_by_iter.append((k, ratio))
                streak = streak + 1 if ratio >= 1 else 0
                if streak >= stall_limit:
                    run.iterates = k
                    raise NotContracting(f"observed ratio >= 1 for {stall_limit} consecutive iterations", run)
        if change <= tol:
            run.converged = True
            break
        if k == max_iter:
            break
        if method == "picard":
            nxt = Tx
        else:
            if len(R_hist) and change > np.max(np.abs(R_hist[-1])):
                X_hist, R_hist = [], []
            X_hist.append(x.copy())
            R_hist.append(res.copy())
            X_hist, R_hist = X_hist[-(depth + 1):], R_hist[-(depth + 1):]
            if len(R_hist) >= 2:
                dR = np.diff(np.array(R_hist), axis=0).T
                dX = np.diff(np.array(X_hist), axis=0).T
                gam, *_ = np.linalg.lstsq(dR, res, rcond=None)
                nxt = x + res - (dX + dR) @ gam
            else:
                nxt = Tx
            nxt = np.clip(nxt, lo, hi)
        prev_x, prev_Tx = x, Tx
        x = nxt
        Tx = T(x)
    run.iterates = len(run.history) - 1
    run.roundoff_floor = floor
    last = run.history[-1]
    c = run.c_star_used
    # c* only bounds the operator on K; a graph outside K voids the certificate
    inside = K is None or bool(np.all(K.contains(Tx, 1e-9)))
    run.certified = c < 1 and inside
    if c >= 1 and run.ratios and run.max_ratio < 1:
        c = run.max_ratio
    if c < 1:
        run.banach_bound = c / (1 - c) * last
        run.error_bound = run.banach_bound + floor / (1 - c)
    psi = psi0.with_values(Tx)
    return psi, run


def graph_invariance_defect(psi: GraphFunction, F: MapFamily, mu: float,
                            target: GraphFunction | None = None) -> float:
    """Max over nodes of |f(psi(y), y) - target(g(psi(y), y))|.

    With ``target`` omitted this is the invariance defect of Gamma_psi; with
    a second graph it measures how far F carries Gamma_psi from Gamma_target.
    """
    target = target or psi
    ce = split_components(F, psi.tubular(), mu, check_tube=False, blocks=False)
    return float(np.max(np.abs(ce.f - target(ce.g_u))))


def equicontinuity_probe(run: FixedPointRun, deltas=None, values=None) -> dict:
    """Max |Dpsi_n(y_i) - Dpsi_n(y_j)| over node pairs with chord <= delta.

    Returns ``{"deltas": [...], "moduli": array (n_snapshots, n_deltas)}``.
    """
    if deltas is None:
        deltas = [2.0 ** -k for k in range(3, 9)]
    snaps = values if values is not None else run.snapshots
    mesh = run.mesh
    tree = cKDTree(mesh.nodes)
    pairs = [np.array(sorted(tree.query_pairs(d)), dtype=int).reshape(-1, 2) for d in deltas]
    out = np.zeros((len(snaps), len(deltas)))
    for n, v in enumerate(snaps):
        G = mesh.gradient(v)
        for j, pr in enumerate(pairs):
            if len(pr):
                out[n, j] = np.max(np.linalg.norm(G[pr[:, 0]] - G[pr[:, 1]], axis=1))
    return {"deltas": list(deltas), "moduli": out}


def diffeomorphy_check(psi: GraphFunction) -> dict:
    """Bi-Lipschitz bounds of y -> (psi(y), y) over all node pairs."""
    Y = psi.mesh.nodes
    X = psi.points()
    i, j = np.triu_indices(len(Y), 1)
    dy = np.linalg.norm(Y[i] - Y[j], axis=1)
    dx = np.linalg.norm(X[i] - X[j], axis=1)
    q = dx / dy
    return {"lower": float(q.min()), "upper": float(q.max()), "injective": bool(q.min() > 0)}


# --- end-to-end ------------------------------------------------------------

@dataclass
class BranchPair:
    mu: float
    plus: GraphFunction | None = None
    minus: GraphFunction | None = None
    runs: dict = field(default_factory=dict)
    stability: dict = field(default_factory=dict)
    sign_separated: bool = False
    swap_deviation: float | None = None
    square_invariance: dict = field(default_factory=dict)
    diffeomorphy: dict = field(default_factory=dict)
    lipschitz: dict = field(default_factory=dict)
    shell: TubularRegion | None = None
    note: str = ""

    def summary(self) -> dict:
        d = {"mu": self.mu, "note": self.note, "stability": self.stability,
             "sign_separated": self.sign_separated}
        for name in ("plus", "minus"):
            g = getattr(self, name)
            if g is not None:
                run = self.runs[name]
                d[name] = {"mean": float(g.values.mean()), "min": float(g.values.min()),
                           "max": float(g.values.max()), "spread": float(np.ptp(g.values)),
                           "iterations": run.iterates, "error_bound": run.error_bound,
                           "c_star": run.c_star_used, "max_ratio": run.max_ratio,
                           "converged": run.converged, "certified": run.certified, "lipschitz": self.lipschitz.get(name)}
        if self.swap_deviation is not None:
            d["swap_deviation"] = self.swap_deviation
            d["square_invariance"] = self.square_invariance
        if self.shell is not None:
            d["K"] = {"chi": self.shell.inner_cut, "alpha": self.shell.alpha}
        return d


@dataclass
class BifurcationReport:
    mu_star_bracket: tuple | None
    entries: list
    family: str = ""

    @property
    def branches(self):
        return {e.mu: (e.plus, e.minus) for e in self.entries if e.plus is not None}

    def to_dict(self) -> dict:
        return {"family": self.family, "mu_star_bracket": list(self.mu_star_bracket or []),
                "entries": [e.summary() for e in self.entries]}


def _stability(F: MapFamily, mu: float, psi: GraphFunction, steps: int = 400, kick: float = 1e-3) -> str:
    """Label from D_r f along the graph, confirmed by a perturbed orbit."""
    ce = split_components(F, psi.tubular(), mu, check_tube=False)
    by_derivative = "attracting" if np.max(np.abs(ce.Drf)) < 1 else "repelling"
    M = psi.mesh.manifold
    idx = np.linspace(0, len(psi.mesh) - 1, min(8, len(psi.mesh))).astype(int)
    r0 = psi.values[idx] + kick * np.where(psi.values[idx] >= 0, -1.0, 1.0)
    x0 = M.embed(r0, psi.mesh.params[idx])
    tr = iterate(F, mu, x0, steps)
    last = tr.r[-1]
    if np.any(np.isnan(last)):
        return "repelling"
    p = M.project(tr.points[-1])
    dist = np.abs(p.r - psi(p.u))
    by_orbit = "attracting" if np.all(dist < kick) else "repelling"
    return by_derivative if by_derivative == by_orbit else f"inconclusive({by_derivative}/{by_orbit})"


def _stability_M(F: MapFamily, mu: float, mesh: ManifoldMesh, steps: int = 400, kick: float = 1e-3) -> str:
    zero = GraphFunction.constant(mesh, 0.0, "plus")
    ce = split_components(F, zero.tubular(), mu, check_tube=False)
    by_derivative = "repelling" if np.min(np.abs(ce.Drf)) > 1 else "attracting"
    x0 = mesh.manifold.embed(np.array([kick, -kick]), mesh.params[:2])
    tr = iterate(F, mu, x0, steps)
    last = np.nan_to_num(np.abs(tr.r[-1]), nan=np.inf)
    by_orbit = "repelling" if np.all(last > kick) else "attracting"
    return by_derivative if by_derivative == by_orbit else f"inconclusive({by_derivative}/{by_orbit})"


def solve_branches(F: MapFamily, mu: float, config: SolverConfig = SolverConfig(),
                   mu_star: float = 0.0, mesh: ManifoldMesh | None = None) -> BranchPair:
    """Both bifurcated branches at one mu, with checks.

    For a side-reversing family both branches are fixed points of the
    side-preserving square G o G; the swap G(M+) = M- is then verified.
    """
    if mu <= mu_star:
        raise NoBifurcation(f"mu={mu} is not above the threshold mu*={mu_star:g}")
    reversing = F.side == "reversing"
    H = compose(F, F) if reversing else F
    if mesh is None:
        res = config.mesh_resolution or (256 if F.ambient_dim == 2 else 162)
        mesh = build_mesh(F.manifold, res)
    K = resolve_shell(H, mu, config.chi, config.alpha1, mu_star)
    report = estimate_norms(H, mu, K, config.n_r, mesh)
    out = BranchPair(mu, shell=K)
    for name, sgn in (("plus", 1.0), ("minus", -1.0)):
        psi0 = GraphFunction.constant(mesh, sgn * 0.5 * (K.inner_cut + K.alpha), name, K)
        psi, run = solve_fixed_point(psi0, H, mu, config.tol, config.max_iter, c_star=report.c_star,
                                     method=config.method, depth=config.depth,
                                     keep_snapshots=config.keep_snapshots, stall_limit=config.stall_limit)
        setattr(out, name, psi)
        out.runs[name] = run
        out.lipschitz[name] = lipschitz_estimate(psi)
        out.diffeomorphy[name] = diffeomorphy_check(psi)
        out.stability[name] = _stability(H, mu, psi, config.probe_steps)
    out.stability["M"] = _stability_M(H, mu, mesh, config.probe_steps)
    out.sign_separated = bool(np.all(out.plus.values > 0) and np.all(out.minus.values < 0))
    if reversing:
        out.swap_deviation = max(graph_invariance_defect(out.plus, F, mu, out.minus),
                                 graph_invariance_defect(out.minus, F, mu, out.plus))
        out.square_invariance = {n: graph_invariance_defect(getattr(out, n), H, mu) for n in ("plus", "minus")}
    return out


def assemble_bifurcation_report(F: MapFamily, mus, config: SolverConfig = SolverConfig(),
                                mesh: ManifoldMesh | None = None, map_fn=map) -> BifurcationReport:
    """Threshold bracket plus both branches (or an explanation) for each mu.

    ``map_fn`` may be an executor's ``map``; entries keep the order of ``mus``.
    """
    try:
        bracket = find_mu_star(F, F.mu_range)
        mu_star = 0.5 * (bracket[0] + bracket[1])
    except NoCrossing:
        bracket, mu_star = None, None

    if mesh is None:
        mesh = build_mesh(F.manifold, config.mesh_resolution or (256 if F.ambient_dim == 2 else 162))

    def entry(mu):
        if mu_star is None:
            return BranchPair(mu, note="no threshold: inf|D_r f(0,.)| never crosses 1")
        if mu <= bracket[1]:
            return BranchPair(mu, stability={"M": _stability_M(F, mu, mesh, config.probe_steps)},
                              note=f"mu <= mu* ({bracket[1]:.3g}): M is not repelling, no branches")
        try:
            return solve_branches(F, mu, config, mu_star, mesh)
        except (NotContracting, BranchCollapse, LeftTube) as exc:
            return BranchPair(mu, note=f"{type(exc).__name__}: {exc}")

    return BifurcationReport(bracket, list(map_fn(entry, mus)), F.name)
