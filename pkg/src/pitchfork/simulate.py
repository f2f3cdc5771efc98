"""Forward iteration of map families, used for stability probes and dumps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynsys import MapFamily
from .geometry import ReferenceManifold

__all__ = ["Trajectory", "iterate", "start_points"]


@dataclass
class Trajectory:
    """Orbits of N starts: ``points`` (n+1, N, m), offsets ``r`` (n+1, N).

    ``exit_step[j]`` is the first step at which orbit j left N(alpha), or -1.
    Rows after an exit are NaN.
    """

    points: np.ndarray
    r: np.ndarray
    exit_step: np.ndarray
    mu: float

    @property
    def n_steps(self) -> int:
        return len(self.r) - 1


def start_points(M: ReferenceManifold, r0, n_dirs: int = 1, seed: int | None = 0) -> np.ndarray:
    """Points at offsets ``r0`` over ``n_dirs`` base points (seeded, or e_1 if n_dirs == 1)."""
    r0 = np.atleast_1d(np.asarray(r0, dtype=float))
    m = M.ambient_dim
    if n_dirs == 1:
        u = np.zeros((1, m))
        u[0, 0] = 1.0
    else:
        u = np.random.default_rng(seed).normal(size=(n_dirs, m))
        u /= np.linalg.norm(u, axis=1)[:, None]
    rr = np.repeat(r0, len(u))
    uu = np.tile(u, (len(r0), 1))
    return M.embed(rr, uu)


def iterate(F: MapFamily, mu: float, x0, n_steps: int) -> Trajectory:
    """x_{n+1} = F_mu(x_n); orbits that leave N(alpha) are frozen as NaN."""
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    N, m = x.shape
    M = F.manifold
    pts = np.full((n_steps + 1, N, m), np.nan)
    rs = np.full((n_steps + 1, N), np.nan)
    exit_step = np.full(N, -1)
    alive = np.ones(N, dtype=bool)
    pts[0] = x
    rs[0] = M.project(x).r
    for n in range(1, n_steps + 1):
        if not alive.any():
            break
        x[alive] = F(x[alive], mu)
        r = M.project(x[alive]).r
        gone = np.abs(r) > F.alpha + 1e-9
        idx = np.flatnonzero(alive)
        exit_step[idx[gone]] = n
        rs[n, idx] = r
        pts[n, idx] = x[idx]
        alive[idx[gone]] = False
    return Trajectory(pts, rs, exit_step, mu)
