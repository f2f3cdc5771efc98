"""Sampled checks of the bifurcation hypotheses (i)-(viii), (ix), (v')/(x).

Sup-norms are maxima over a tensor grid (radial offsets x mesh nodes), so
they are lower bounds for the true suprema.  Every report carries the same
quantity on the nested half-resolution radial grid as an honesty metric.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynsys import MapFamily, classify_side_behavior, inverse_components, split_components
from .errors import NoCrossing
from .geometry import ManifoldMesh, TubularPoint, TubularRegion, build_mesh

__all__ = [
    "ConditionResult",
    "HypothesisVerdict",
    "NormReport",
    "check_corollary2",
    "check_corollary_ix",
    "check_theorem1",
    "default_mesh",
    "estimate_norms",
    "find_mu_star",
    "linear_chi",
    "resolve_shell",
    "shell_containment",
]

NORM_KEYS = ("Drf", "Dyf", "Drg", "Dyg", "Drg_hat", "Dyg_hat")
ALL_CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii")
CONTAIN_TOL = 1e-9


def default_mesh(F: MapFamily, resolution: int | None = None) -> ManifoldMesh:
    m = F.ambient_dim
    return build_mesh(F.manifold, resolution or (64 if m == 2 else 162))


def _grid(region: TubularRegion, n_r: int, mesh: ManifoldMesh):
    rs = region.radial_samples(n_r)
    r = np.repeat(rs, len(mesh))
    u = np.tile(mesh.params, (len(rs), 1))
    return TubularPoint(r, mesh.manifold.point(u), u)


def _witness(p: TubularPoint, i: int) -> dict:
    return {"r": float(p.r[i]), "y": p.y[i].tolist()}


@dataclass
class NormReport:
    """Sampled sup-norms over a region and the constants assembled from them."""

    mu: float
    norms: dict
    region: TubularRegion | None = None
    grid: tuple[int, int] = (0, 0)
    half_norms: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, Drf=0.0, Dyf=0.0, Drg_hat=0.0, Dyg_hat=0.0, Drg=0.0, Dyg=0.0, mu=float("nan")):
        return cls(mu, dict(Drf=Drf, Dyf=Dyf, Drg=Drg, Dyg=Dyg, Drg_hat=Drg_hat, Dyg_hat=Dyg_hat))

    def __getitem__(self, key):
        return self.norms[key]

    @property
    def c(self) -> float:
        return self["Drf"]

    @property
    def c_star(self) -> float:
        return self["Drf"] * (1 + self["Drg_hat"]) + self["Dyf"]

    @property
    def vii_lhs(self) -> float:
        return (self["Drf"] + self["Dyf"]) * (self["Drg_hat"] + self["Dyg_hat"])

    @property
    def sigma(self) -> float:
        return self["Drf"] * (2 * self["Drg_hat"] + self["Dyg_hat"]) + self["Dyf"] * self["Drg_hat"]

    @property
    def cor_ix(self) -> float:
        return self["Drf"] * self["Drg_hat"] + (self["Drf"] + self["Dyf"]) * (1 + self["Drg_hat"])

    @property
    def constants(self) -> dict:
        return {"c": self.c, "c_star": self.c_star, "sigma": self.sigma, "cor_ix": self.cor_ix,
                "vii_lhs": self.vii_lhs}

    @property
    def refinement_delta(self) -> dict:
        return {k: self.norms[k] - self.half_norms[k] for k in self.half_norms}

    def to_dict(self) -> dict:
        d = {"mu": self.mu, "norms": dict(self.norms), "constants": self.constants,
             "grid": list(self.grid), "refinement_delta": self.refinement_delta,
             "witnesses": self.witnesses}
        if self.region is not None:
            d["region"] = {"alpha": self.region.alpha, "inner_cut": self.region.inner_cut,
                           "side": self.region.side}
        return d


def estimate_norms(F: MapFamily, mu: float, region: TubularRegion, n_r: int = 64,
                   mesh: ManifoldMesh | None = None) -> NormReport:
    """Sup of |D_r f| and spectral norms of the other blocks over ``region``."""
    if n_r < 8:
        raise ValueError("need at least 8 radial samples per band")
    if region.alpha > F.alpha + 1e-12:
        raise ValueError(f"region alpha {region.alpha} exceeds the tube radius {F.alpha}")
    mesh = mesh or default_mesh(F)
    p = _grid(region, n_r, mesh)
    fw = split_components(F, p, mu).norms()
    bw = inverse_components(F, p, mu).norms()
    pointwise = {"Drf": fw["Drf"], "Dyf": fw["Dyf"], "Drg": fw["Drg"], "Dyg": fw["Dyg"],
                 "Drg_hat": bw["Drg"], "Dyg_hat": bw["Dyg"]}
    norms, witnesses = {}, {}
    for k, v in pointwise.items():
        i = int(np.argmax(v))
        norms[k] = float(v[i])
        witnesses[k] = _witness(p, i)
    # nested half grid: every other radial sample
    n_band = len(region.radial_samples(n_r))
    half_r = np.isin(p.r, region.radial_samples(n_r // 2))
    half = {k: float(v[half_r].max()) for k, v in pointwise.items()}
    return NormReport(mu, norms, region, (n_band, len(mesh)), half, witnesses)


@dataclass
class ConditionResult:
    holds: bool
    margin: float
    witness: dict | None = None
    note: str = ""

    def __post_init__(self):
        self.holds = bool(self.holds)
        self.margin = float(self.margin)

    def to_dict(self):
        return {"holds": bool(self.holds), "margin": float(self.margin), "witness": self.witness,
                "note": self.note}


@dataclass
class HypothesisVerdict:
    mu: float
    conditions: dict
    shell: TubularRegion | None = None
    report: NormReport | None = None

    @property
    def overall(self) -> bool:
        return all(c.holds for c in self.conditions.values())

    def __getitem__(self, key) -> ConditionResult:
        return self.conditions[key]

    def to_dict(self) -> dict:
        d = {"mu": self.mu, "overall": self.overall,
             "conditions": {k: v.to_dict() for k, v in self.conditions.items()}}
        if self.shell is not None:
            d["K"] = {"chi": self.shell.inner_cut, "alpha": self.shell.alpha}
        if self.report is not None:
            d["norm_report"] = self.report.to_dict()
        return d


# --- individual conditions ------------------------------------------------

def _cond_side(F, mu):
    v = classify_side_behavior(F, mu)
    expected = "side-preserving" if F.side == "preserving" else "side-reversing"
    return ConditionResult(v.kind == expected, 1.0 if v.kind == expected else -1.0,
                           None if v.counterexample is None else {"pair": v.counterexample}, v.kind)


def _sup_drf(F, mu, region, n_r, mesh):
    p = _grid(region, n_r, mesh)
    d = np.abs(split_components(F, p, mu, check_tube=False).Drf)
    i = int(np.argmax(d))
    return float(d[i]), _witness(p, i)


def shell_containment(F: MapFamily, mu, K: TubularRegion, n_r: int, mesh: ManifoldMesh):
    """Smallest signed slack of F(K) inside K over the sample grid."""
    p = _grid(K, n_r, mesh)
    f = split_components(F, p, mu, check_tube=False, blocks=False).f
    a = np.abs(f)
    slack = np.minimum(a - K.inner_cut, K.alpha - a)
    if K.side == "outer":
        slack = np.minimum(slack, f)
    elif K.side == "inner":
        slack = np.minimum(slack, -f)
    i = int(np.argmin(slack))
    return float(slack[i]), _witness(p, i)


def _cond_v(F, mu, K, n_r, mesh):
    slack, wit = shell_containment(F, mu, K, n_r, mesh)
    c, cwit = _sup_drf(F, mu, K, n_r, mesh)
    contained = slack >= -CONTAIN_TOL
    holds = contained and c < 1
    margin = min(slack, 1 - c)
    note = f"containment slack {slack:.6g}; c={c:.6g}"
    return ConditionResult(holds, margin, wit if slack <= 1 - c else cwit, note)


def linear_chi(mu, mu_star, a, alpha1):
    """chi = alpha1 * clip(4 (mu - mu*) / (a - mu*), 0, 1)."""
    return alpha1 * max(0.0, min(1.0, 4 * (mu - mu_star) / (a - mu_star)))


def resolve_shell(F: MapFamily, mu, chi="auto", alpha1=0.15, mu_star=0.0, n_r=32,
                  mesh: ManifoldMesh | None = None) -> TubularRegion:
    """Pick K(mu) = {chi <= |r| <= alpha}.

    ``chi`` may be a number, a TubularRegion, "linear" (continuous ramp from
    0 at mu* to alpha1) or "auto": the largest of 64 candidates in
    (0, alpha1] for which (v) holds on the sample grid.  A larger chi keeps K
    away from M and lowers c.  If no candidate passes, the one with the best
    margin is returned so the failure shows up in the verdict.
    """
    if isinstance(chi, TubularRegion):
        return chi
    alpha = F.alpha
    if chi == "linear":
        return TubularRegion(alpha, linear_chi(mu, mu_star, F.mu_range[1], alpha1))
    if chi != "auto":
        return TubularRegion(alpha, float(chi))
    mesh = mesh or default_mesh(F, 16 if F.ambient_dim == 2 else 42)
    best, best_margin = None, -np.inf
    for c in alpha1 * np.arange(64, 0, -1) / 64:
        v = _cond_v(F, mu, TubularRegion(alpha, float(c)), n_r, mesh)
        if v.holds:
            return TubularRegion(alpha, float(c))
        if v.margin > best_margin:
            best, best_margin = float(c), v.margin
    return TubularRegion(alpha, best)


def check_theorem1(F: MapFamily, mus: Iterable[float], *, alpha1: float = 0.15, chi="auto",
                   mu_star: float | None = None, conditions: Sequence[str] | None = None,
                   n_r: int = 64, mesh: ManifoldMesh | None = None) -> list[HypothesisVerdict]:
    """Verdicts per mu.  Without ``conditions`` the applicable set depends on mu.

    mu < 0: (i), (ii).  mu >= 0: (i), (iv).  mu > mu*: also (iii), (v)-(viii).
    """
    mesh = mesh or default_mesh(F)
    if mu_star is None:
        try:
            lo, hi = find_mu_star(F, F.mu_range, mesh=mesh)
            mu_star = 0.5 * (lo + hi)
        except NoCrossing:
            mu_star = 0.0
    alpha = F.alpha
    out = []
    for mu in mus:
        if conditions is None:
            want = ["i"] + (["ii"] if mu < 0 else ["iv"])
            if mu > mu_star:
                want += ["iii", "v", "vi", "vii", "viii"]
        else:
            want = list(conditions)
            bad = set(want) - set(ALL_CONDITIONS)
            if bad:
                raise ValueError(f"unknown conditions {sorted(bad)}")
        K = resolve_shell(F, mu, chi, alpha1, mu_star) if mu >= 0 or chi != "auto" else TubularRegion(alpha, alpha1)
        res, report = {}, None
        for c in sorted(want, key=ALL_CONDITIONS.index):
            if c == "i":
                res[c] = _cond_side(F, mu)
            elif c == "ii":
                s, w = _sup_drf(F, mu, TubularRegion(alpha, 0.0), n_r, mesh)
                res[c] = ConditionResult(s < 1, 1 - s, w)
            elif c == "iii":
                p = TubularPoint(np.zeros(len(mesh)), mesh.nodes, mesh.params)
                d = np.abs(split_components(F, p, mu, check_tube=False).Drf)
                i = int(np.argmin(d))
                res[c] = ConditionResult(d[i] > 1, float(d[i] - 1), _witness(p, i))
            elif c == "iv":
                s, w = _sup_drf(F, mu, TubularRegion(alpha, alpha1), n_r, mesh)
                res[c] = ConditionResult(s < 1, 1 - s, w)
            elif c == "v":
                res[c] = _cond_v(F, mu, K, n_r, mesh)
            else:
                if report is None:
                    report = estimate_norms(F, mu, K, n_r, mesh)
                if c == "vi":
                    res[c] = ConditionResult(report.c_star < 1, 1 - report.c_star, report.witnesses["Drf"])
                elif c == "vii":
                    res[c] = ConditionResult(report.vii_lhs <= 1, 1 - report.vii_lhs, report.witnesses["Dyg_hat"])
                else:
                    res[c] = ConditionResult(report.sigma < 1, 1 - report.sigma, report.witnesses["Dyg_hat"])
        out.append(HypothesisVerdict(mu, res, K, report))
    return out


@dataclass
class CorollaryVerdict:
    holds: bool
    margin: float
    implication_ok: bool = True
    witness: dict | None = None

    def to_dict(self):
        return {"holds": self.holds, "margin": self.margin, "implication_ok": self.implication_ok,
                "witness": self.witness}


def check_corollary_ix(report: NormReport) -> CorollaryVerdict:
    """(ix): one inequality standing in for (vi)-(viii).

    The implication needs ||D_y g_hat|| <= 1; ``implication_ok`` records
    whether (vi)-(viii) actually hold whenever (ix) does.
    """
    v = report.cor_ix
    holds = v < 1
    implied = report.c_star < 1 and report.vii_lhs <= 1 and report.sigma < 1
    return CorollaryVerdict(bool(holds), 1 - v, (not holds) or implied)


def check_corollary2(F: MapFamily, mu: float, chi: float, n_r: int = 32,
                     mesh: ManifoldMesh | None = None) -> CorollaryVerdict:
    """(x): f > r on (0, chi] and f < r on [-chi, 0); reversed if side-reversing."""
    if not chi > 0:
        raise ValueError("chi must be positive")
    mesh = mesh or default_mesh(F)
    k = np.arange(1, n_r + 1) / n_r
    rs = np.concatenate([-chi * k[::-1], chi * k])
    r = np.repeat(rs, len(mesh))
    u = np.tile(mesh.params, (len(rs), 1))
    p = TubularPoint(r, mesh.manifold.point(u), u)
    f = split_components(F, p, mu, check_tube=False, blocks=False).f
    sgn = 1.0 if F.side == "preserving" else -1.0
    gap = sgn * np.sign(r) * (f - r)
    i = int(np.argmin(gap))
    return CorollaryVerdict(bool(gap[i] > 0), float(gap[i]), True, _witness(p, i))


def find_mu_star(F: MapFamily, interval: tuple[float, float] | None = None, width: float = 1e-10,
                 mesh: ManifoldMesh | None = None) -> tuple[float, float]:
    """Bisection bracket where inf_y |D_r f_mu(0, y)| crosses 1."""
    lo, hi = interval or F.mu_range
    mesh = mesh or default_mesh(F)
    p = TubularPoint(np.zeros(len(mesh)), mesh.nodes, mesh.params)

    def q(mu):
        return float(np.min(np.abs(split_components(F, p, mu, check_tube=False).Drf)) - 1.0)

    qlo, qhi = q(lo), q(hi)
    if (qlo > 0) == (qhi > 0):
        raise NoCrossing(f"inf|D_r f(0,.)| - 1 keeps sign on [{lo}, {hi}] ({qlo:.3g}, {qhi:.3g})")
    rising = qhi > 0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if (q(mid) > 0) == rising:
            hi = mid
        else:
            lo = mid
    return lo, hi
