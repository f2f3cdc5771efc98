"""Plugin family: the canonical map conjugated by a diagonal stretch.

F = L o F_canonical o L^-1 leaves the ellipse L(S^1) invariant, and its
branches are the stretched circles L(S_{1 +- sqrt(mu)}), which are not
constant-offset graphs over the ellipse.  Use with

    pitchfork solve --spec spec.json   # {"family": "plugin", "plugin": "scripts/ellipse_plugin.py", ...}

Keep alpha small enough that L^-1 of the tube stays off the sigma blend
zone (circle radii in [0.8, 1.2]); alpha = 0.15 with axes 1.05 and 0.95 does.
"""
import numpy as np

from pitchfork import MapFamily, ParameterizedManifold, canonical_family

AXES = (1.05, 0.95)


def build_family(spec: dict) -> MapFamily:
    L = np.diag(AXES)
    Li = np.linalg.inv(L)
    base = canonical_family(2)
    M = ParameterizedManifold(lambda u: u @ L.T, 2, name="ellipse")

    def forward(x, mu):
        return base(np.atleast_2d(x) @ Li.T, mu) @ L.T

    def inverse(x, mu):
        return base.inv(np.atleast_2d(x) @ Li.T, mu) @ L.T

    def jacobian(x, mu):
        return L @ base.jac(np.atleast_2d(x) @ Li.T, mu) @ Li

    def inverse_jacobian(x, mu):
        return L @ base.inv_jac(np.atleast_2d(x) @ Li.T, mu) @ Li

    return MapFamily(forward, M, inverse, jacobian, inverse_jacobian, alpha=spec.get("alpha", 0.15),
                     name="ellipse-conjugate", meta={"L": L, "branch_oracle": "stretched circles"})


def branch_error(F: MapFamily, psi, mu: float) -> float:
    """max | |L^-1 x| - (1 +- sqrt(mu)) | over the graph's node points."""
    Li = np.linalg.inv(F.meta["L"])
    rad = np.linalg.norm(psi.points() @ Li.T, axis=1)
    return float(np.max(np.abs(rad - 1 - psi.sign * np.sqrt(mu))))
