"""Reference manifolds, tubular coordinates and meshes.

Every manifold here is a diffeomorph of the unit sphere S^{m-1} in R^m.  Base
points are carried in two forms: ``y`` (the point on M, ambient coordinates)
and ``u`` (its parameter on the unit sphere).  For the built-in unit
circle/sphere the two coincide.

All array-valued functions are vectorised over a leading batch axis.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import (
    AmbiguousProjection,
    InterpolationOutOfRange,
    MeshError,
    OutsideTube,
    UnsupportedManifold,
)

__all__ = [
    "TubularPoint",
    "TubularRegion",
    "ReferenceManifold",
    "UnitSphere",
    "ParameterizedManifold",
    "ManifoldMesh",
    "unit_circle",
    "unit_sphere",
    "project",
    "embed",
    "build_mesh",
    "sphere_frame",
    "retract_sphere",
]

TUBE_TOL = 1e-9
DEFAULT_ALPHA = 0.2


def _as_batch(x, m=None):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if m is not None and x.shape[-1] != m:
        raise ValueError(f"expected points in R^{m}, got shape {x.shape}")
    return x, single


def sphere_frame(u: np.ndarray) -> np.ndarray:
    """Orthonormal tangent frame of the unit sphere at ``u``; shape (N, m, m-1).

    m=2 uses (-u2, u1).  m=3 uses a frame built from e_z away from the poles
    and from e_x near them, oriented so that t1 x t2 = u.
    """
    u = np.atleast_2d(u)
    m = u.shape[1]
    if m == 2:
        return np.stack([-u[:, 1], u[:, 0]], axis=1)[:, :, None]
    if m != 3:
        raise UnsupportedManifold(f"ambient dimension {m} not supported")
    ez = np.array([0.0, 0.0, 1.0])
    ex = np.array([1.0, 0.0, 0.0])
    ref = np.where((np.abs(u[:, 2]) < 0.9)[:, None], ez, ex)
    t1 = ref - np.sum(ref * u, axis=1)[:, None] * u
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(u, t1)
    return np.stack([t1, t2], axis=2)


def retract_sphere(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Move parameters ``u`` along frame coordinates ``v`` and renormalise."""
    E = sphere_frame(u)
    w = u + np.einsum("nij,nj->ni", E, v)
    return w / np.linalg.norm(w, axis=1)[:, None]


@dataclass(frozen=True, eq=False)
class TubularPoint:
    """Point x = (r, y) of a tubular neighbourhood; batched along axis 0.

    ``r`` is the signed normal offset (positive on the outer, unbounded side),
    ``y`` the nearest point of M and ``u`` its sphere parameter.
    """

    r: np.ndarray
    y: np.ndarray
    u: np.ndarray | None = None

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        y = np.atleast_2d(np.asarray(self.y, dtype=float))
        u = y if self.u is None else np.atleast_2d(np.asarray(self.u, dtype=float))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", u)

    def __len__(self):
        return len(self.r)


@dataclass(frozen=True)
class TubularRegion:
    """Shell {inner_cut <= |r| <= alpha} on one or both sides of M."""

    alpha: float = DEFAULT_ALPHA
    inner_cut: float = 0.0
    side: str = "both"

    def __post_init__(self):
        if not (0.0 <= self.inner_cut < self.alpha):
            raise ValueError(
                f"need 0 <= inner_cut < alpha, got {self.inner_cut}, {self.alpha}"
            )
        if self.side not in ("both", "outer", "inner"):
            raise ValueError(f"side must be both/outer/inner, not {self.side!r}")

    def radial_samples(self, n: int) -> np.ndarray:
        """Signed offsets: ``n`` intervals per band, endpoints included.

        Grids for n and 2n are nested, so sup estimates refine monotonically.
        """
        band = np.linspace(self.inner_cut, self.alpha, n + 1)
        if self.side == "outer":
            return band
        if self.side == "inner":
            return -band[::-1]
        if self.inner_cut == 0.0:
            return np.concatenate([-band[:0:-1], band])
        return np.concatenate([-band[::-1], band])

    def contains(self, r, tol: float = TUBE_TOL) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        a = np.abs(r)
        ok = (a >= self.inner_cut - tol) & (a <= self.alpha + tol)
        if self.side == "outer":
            ok &= r >= -tol
        elif self.side == "inner":
            ok &= r <= tol
        return ok


class ReferenceManifold:
    """Compact, connected, boundaryless hypersurface diffeomorphic to S^{m-1}."""

    kind: str = "abstract"
    ambient_dim: int

    @property
    def intrinsic_dim(self) -> int:
        return self.ambient_dim - 1

    # subclass API -----------------------------------------------------------
    def point(self, u):
        raise NotImplementedError

    def normal(self, u):
        raise NotImplementedError

    def tangent_frame(self, u):
        raise NotImplementedError

    def project(self, x, alpha: float | None = None) -> TubularPoint:
        raise NotImplementedError

    def embed_jacobian(self, r, u) -> np.ndarray:
        raise NotImplementedError

    def retract(self, u, v):
        raise NotImplementedError

    def is_inside(self, x) -> np.ndarray:
        raise NotImplementedError

    # shared -----------------------------------------------------------------
    def embed(self, r, u, alpha: float | None = None) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if alpha is not None and np.any(np.abs(r) > alpha + TUBE_TOL):
            i = int(np.argmax(np.abs(r)))
            raise OutsideTube(f"|r|={abs(r[i]):.6g} exceeds alpha={alpha}")
        return self.point(u) + r[:, None] * self.normal(u)

    def projection_jacobian(self, x) -> np.ndarray:
        """Rows [dr/dx; dy_E/dx] at ``x`` in the frame at its base point."""
        p = self.project(x)
        return np.linalg.inv(self.embed_jacobian(p.r, p.u))

    def tangent_displacement_scale(self, r, u) -> np.ndarray:
        return np.ones_like(np.atleast_1d(r))


class UnitSphere(ReferenceManifold):
    """Unit circle (m=2) or unit sphere (m=3); outward normal x/|x|."""

    def __init__(self, ambient_dim: int):
        if ambient_dim not in (2, 3):
            raise UnsupportedManifold("built-in manifolds exist for m = 2, 3 only")
        self.ambient_dim = ambient_dim
        self.kind = "circle-in-R2" if ambient_dim == 2 else "sphere-in-R3"

    def __repr__(self):
        return f"UnitSphere({self.ambient_dim})"

    def point(self, u):
        return np.atleast_2d(np.asarray(u, dtype=float))

    def normal(self, u):
        return np.atleast_2d(np.asarray(u, dtype=float))

    def tangent_frame(self, u):
        return sphere_frame(np.atleast_2d(u))

    def retract(self, u, v):
        return retract_sphere(np.atleast_2d(u), np.atleast_2d(v))

    def project(self, x, alpha=None):
        x, _ = _as_batch(x, self.ambient_dim)
        rho = np.linalg.norm(x, axis=1)
        if np.any(rho < 1e-14):
            raise AmbiguousProjection("the origin is equidistant from every point of M")
        r = rho - 1.0
        if alpha is not None and np.any(np.abs(r) > alpha + TUBE_TOL):
            i = int(np.argmax(np.abs(r)))
            raise OutsideTube(f"|r|={abs(r[i]):.6g} exceeds alpha={alpha}")
        y = x / rho[:, None]
        return TubularPoint(r, y, y)

    def embed_jacobian(self, r, u):
        r = np.atleast_1d(r)
        u = np.atleast_2d(u)
        E = sphere_frame(u)
        return np.concatenate([u[:, :, None], (1.0 + r)[:, None, None] * E], axis=2)

    def projection_jacobian(self, x):
        x, _ = _as_batch(x, self.ambient_dim)
        rho = np.linalg.norm(x, axis=1)
        u = x / rho[:, None]
        E = sphere_frame(u)
        return np.concatenate([u[:, None, :], np.transpose(E, (0, 2, 1)) / rho[:, None, None]], axis=1)

    def tangent_displacement_scale(self, r, u):
        return 1.0 + np.atleast_1d(r)

    def is_inside(self, x):
        x, _ = _as_batch(x, self.ambient_dim)
        return np.linalg.norm(x, axis=1) < 1.0


def unit_circle() -> UnitSphere:
    return UnitSphere(2)


def unit_sphere() -> UnitSphere:
    return UnitSphere(3)


class ParameterizedManifold(ReferenceManifold):
    """M = h(S^{m-1}) for a user-supplied smooth embedding ``h``.

    ``embedding`` maps (N, m) unit vectors to (N, m) points and must be
    vectorised.  Projection runs Newton on the squared distance in local
    sphere coordinates (tolerance 1e-12, at most 50 steps), seeded from the
    nearest node of a reference mesh.  Orientation follows the chart and is
    checked against a ray-casting inside test at construction.
    """

    kind = "parameterized"

    def __init__(
        self,
        embedding: Callable[[np.ndarray], np.ndarray],
        ambient_dim: int,
        *,
        fd_step: float = 1e-5,
        seed_resolution: int | None = None,
        name: str = "parameterized",
    ):
        if ambient_dim not in (2, 3):
            raise UnsupportedManifold("parameterized manifolds need m = 2 or 3")
        self.embedding = embedding
        self.ambient_dim = ambient_dim
        self.fd_step = fd_step
        self.name = name
        self._orientation = 1.0
        res = seed_resolution or (512 if ambient_dim == 2 else 642)
        self._seed_mesh = _sphere_param_mesh(ambient_dim, res)
        nodes = self.point(self._seed_mesh[0])
        if not np.all(np.isfinite(nodes)):
            raise UnsupportedManifold("embedding returned non-finite values")
        self._seed_tree = cKDTree(nodes)
        self._seed_nodes = nodes
        self._seed_cells = self._seed_mesh[1]
        # outward-orientation check by parity of ray crossings
        u0 = self._seed_mesh[0][:8]
        probe = self.point(u0) + 1e-3 * self.normal(u0)
        outside = ~_inside_by_parity(probe, nodes, self._seed_cells)
        if np.mean(outside) < 0.5:
            self._orientation = -1.0

    def __repr__(self):
        return f"ParameterizedManifold({self.name!r}, m={self.ambient_dim})"

    def point(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.asarray(self.embedding(u), dtype=float).reshape(u.shape)

    def chart_derivative(self, u):
        """dh along the sphere frame at u; shape (N, m, m-1)."""
        u = np.atleast_2d(u)
        h = self.fd_step
        cols = []
        for i in range(self.ambient_dim - 1):
            v = np.zeros((len(u), self.ambient_dim - 1))
            v[:, i] = h
            cols.append((self.point(retract_sphere(u, v)) - self.point(retract_sphere(u, -v))) / (2 * h))
        return np.stack(cols, axis=2)

    def tangent_frame(self, u):
        D = self.chart_derivative(u)
        Q = np.empty_like(D)
        for i in range(D.shape[2]):
            w = D[:, :, i].copy()
            for j in range(i):
                w -= np.sum(w * Q[:, :, j], axis=1)[:, None] * Q[:, :, j]
            Q[:, :, i] = w / np.linalg.norm(w, axis=1)[:, None]
        return Q

    def normal(self, u):
        D = self.chart_derivative(u)
        if self.ambient_dim == 2:
            t = D[:, :, 0]
            n = np.stack([t[:, 1], -t[:, 0]], axis=1)
        else:
            n = np.cross(D[:, :, 0], D[:, :, 1])
        n /= np.linalg.norm(n, axis=1)[:, None]
        return self._orientation * n

    def retract(self, u, v):
        u = np.atleast_2d(u)
        E = self.tangent_frame(u)
        x = self.point(u) + np.einsum("nij,nj->ni", E, np.atleast_2d(v))
        return self.project(x).u

    def _newton_params(self, x, u):
        m = self.ambient_dim
        k = m - 1
        h2 = 1e-4
        prev = np.inf
        for _ in range(50):
            D = self.chart_derivative(u)
            res = self.point(u) - x
            grad = np.einsum("nik,ni->nk", D, res)
            H = np.einsum("nik,nil->nkl", D, D)
            # curvature term res . d2h, central second differences
            for a in range(k):
                for b in range(a, k):
                    va = np.zeros((len(u), k))
                    vb = np.zeros((len(u), k))
                    va[:, a] = h2
                    vb[:, b] = h2
                    if a == b:
                        d2 = (self.point(retract_sphere(u, va)) - 2 * self.point(u)
                              + self.point(retract_sphere(u, -va))) / h2**2
                    else:
                        d2 = (self.point(retract_sphere(u, va + vb)) - self.point(retract_sphere(u, va - vb))
                              - self.point(retract_sphere(u, vb - va)) + self.point(retract_sphere(u, -va - vb))) / (4 * h2**2)
                    c = np.sum(res * d2, axis=1)
                    H[:, a, b] += c
                    if a != b:
                        H[:, b, a] += c
            step = -np.linalg.solve(H, grad[:, :, None])[:, :, 0]
            u = retract_sphere(u, step)
            size = float(np.max(np.abs(step)))
            # FD derivatives leave a noise floor near 1e-12; a stalled tiny step is converged
            if size < 1e-12 or (size < 1e-8 and size > 0.5 * prev):
                return u, True
            prev = size
        return u, False

    def project(self, x, alpha=None):
        x, _ = _as_batch(x, self.ambient_dim)
        _, idx = self._seed_tree.query(x)
        u, ok = self._newton_params(x, self._seed_mesh[0][idx])
        if not ok:
            raise AmbiguousProjection("Newton projection did not converge in 50 steps")
        y = self.point(u)
        r = np.sum((x - y) * self.normal(u), axis=1)
        if alpha is not None and np.any(np.abs(r) > alpha + TUBE_TOL):
            i = int(np.argmax(np.abs(r)))
            raise OutsideTube(f"|r|={abs(r[i]):.6g} exceeds alpha={alpha}")
        return TubularPoint(r, y, u)

    def embed_jacobian(self, r, u):
        r = np.atleast_1d(r)
        u = np.atleast_2d(u)
        h = self.fd_step
        D = self.chart_derivative(u)
        E = self.tangent_frame(u)
        cols = []
        for i in range(self.ambient_dim - 1):
            v = np.zeros((len(u), self.ambient_dim - 1))
            v[:, i] = h
            cols.append((self.normal(retract_sphere(u, v)) - self.normal(retract_sphere(u, -v))) / (2 * h))
        Dn = np.stack(cols, axis=2)
        dxda = D + r[:, None, None] * Dn
        # convert sphere-parameter coordinates to M-frame coordinates
        B = np.einsum("nik,nil->nkl", E, D)
        dxdy = dxda @ np.linalg.inv(B)
        return np.concatenate([self.normal(u)[:, :, None], dxdy], axis=2)

    def is_inside(self, x):
        x, _ = _as_batch(x, self.ambient_dim)
        return _inside_by_parity(x, self._seed_nodes, self._seed_cells)


def _inside_by_parity(x, nodes, cells):
    """Even-odd crossing test against a closed polygon (m=2) or triangulation (m=3)."""
    x = np.atleast_2d(x)
    if nodes.shape[1] == 2:
        a = nodes[cells[:, 0]]
        b = nodes[cells[:, 1]]
        px, py = x[:, 0:1], x[:, 1:2]
        cond = (a[None, :, 1] > py) != (b[None, :, 1] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = a[None, :, 0] + (py - a[None, :, 1]) * (b[None, :, 0] - a[None, :, 0]) / (b[None, :, 1] - a[None, :, 1])
        hits = cond & (px < xc)
        return (np.sum(hits, axis=1) % 2) == 1
    d = np.array([0.5773, 0.5779, 0.5767])
    d /= np.linalg.norm(d)
    v0, v1, v2 = nodes[cells[:, 0]], nodes[cells[:, 1]], nodes[cells[:, 2]]
    e1, e2 = v1 - v0, v2 - v0
    p = np.cross(d, e2)
    det = np.sum(e1 * p, axis=1)
    out = np.empty(len(x), dtype=bool)
    for i, xi in enumerate(x):
        s = xi - v0
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.sum(s * p, axis=1) / det
            q = np.cross(s, e1)
            b = (q @ d) / det
            t = np.sum(e2 * q, axis=1) / det
        hit = (a >= 0) & (b >= 0) & (a + b <= 1) & (t > 0)
        out[i] = np.sum(hit) % 2 == 1
    return out


def project(x, M: ReferenceManifold, alpha: float | None = None) -> TubularPoint:
    """Nearest point and signed distance of ``x`` with respect to M."""
    return M.project(x, alpha)


def embed(p: TubularPoint, M: ReferenceManifold, alpha: float | None = None) -> np.ndarray:
    """Ambient point y + r n(y)."""
    return M.embed(p.r, p.u, alpha)


# --- meshes -----------------------------------------------------------------

def _icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return v / np.linalg.norm(v, axis=1)[:, None], f


def icosphere(subdivisions: int):
    verts, faces = _icosahedron()
    verts = list(verts)
    for _ in range(subdivisions):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    verts = np.array(verts)
    # outward (counter-clockwise seen from outside) orientation
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    flip = np.sum(np.cross(b - a, c - a) * (a + b + c), axis=1) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return verts, faces


def _sphere_param_mesh(m: int, resolution: int):
    if m == 2:
        th = 2 * np.pi * np.arange(resolution) / resolution
        u = np.stack([np.cos(th), np.sin(th)], axis=1)
        cells = np.stack([np.arange(resolution), (np.arange(resolution) + 1) % resolution], axis=1)
        return u, cells
    s = 0
    while 10 * 4**s + 2 < resolution:
        s += 1
    return icosphere(s)


@dataclass(frozen=True, eq=False)
class ManifoldMesh:
    """Closed mesh of M: polygon (m=2) or triangulation (m=3).

    ``params`` are unit-sphere parameters of the nodes; ``cells`` are edges
    for m=2 and faces for m=3.  Values on nodes are interpolated with a
    periodic cubic spline (m=2) or barycentric-linear on faces (m=3).
    """

    manifold: ReferenceManifold
    params: np.ndarray
    cells: np.ndarray
    scheme: str
    nodes: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.nodes is None:
            object.__setattr__(self, "nodes", self.manifold.point(self.params))

    def __len__(self):
        return len(self.params)

    @property
    def ambient_dim(self) -> int:
        return self.params.shape[1]

    @cached_property
    def edges(self) -> np.ndarray:
        if self.ambient_dim == 2:
            return self.cells
        f = self.cells
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e = np.sort(e, axis=1)
        return np.unique(e, axis=0)

    def boundary_edges(self) -> np.ndarray:
        """Edges (m=3) or vertices (m=2) with odd incidence; empty if closed."""
        if self.ambient_dim == 2:
            deg = np.bincount(self.cells.ravel(), minlength=len(self))
            return np.flatnonzero(deg != 2)
        f = self.cells
        e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq[counts != 2]

    def is_closed(self) -> bool:
        if len(self.boundary_edges()) > 0:
            return False
        if self.ambient_dim == 2:
            # single cycle
            nxt = {int(a): int(b) for a, b in self.cells}
            seen, i = 0, int(self.cells[0, 0])
            for _ in range(len(self)):
                i = nxt.get(i, -1)
                seen += 1
                if i == int(self.cells[0, 0]):
                    break
            return seen == len(self) and i == int(self.cells[0, 0])
        return True

    # interpolation ----------------------------------------------------------
    @cached_property
    def _angles(self):
        th = np.mod(np.arctan2(self.params[:, 1], self.params[:, 0]), 2 * np.pi)
        order = np.argsort(th)
        return th, order

    @cached_property
    def _face_data(self):
        P = self.params
        f = self.cells
        T = np.stack([P[f[:, 0]], P[f[:, 1]], P[f[:, 2]]], axis=2)
        Tinv = np.linalg.inv(T)
        incident = [[] for _ in range(len(P))]
        for k, tri in enumerate(f):
            for v in tri:
                incident[v].append(k)
        width = max(len(x) for x in incident)
        inc = np.full((len(P), width), -1, dtype=int)
        for v, lst in enumerate(incident):
            inc[v, : len(lst)] = lst
        return Tinv, inc, cKDTree(P)

    def locate(self, u: np.ndarray):
        """Face index and barycentric weights for sphere parameters (m=3)."""
        u = np.atleast_2d(u)
        Tinv, inc, tree = self._face_data
        _, near = tree.query(u, k=3)
        cand = inc[near].reshape(len(u), -1)
        valid = cand >= 0
        cidx = np.where(valid, cand, 0)
        w = np.einsum("nkij,nj->nki", Tinv[cidx], u)
        wmin = np.where(valid, w.min(axis=2), -np.inf)
        best = np.argmax(wmin, axis=1)
        face = cidx[np.arange(len(u)), best]
        bw = w[np.arange(len(u)), best]
        bad = wmin[np.arange(len(u)), best] < -1e-9
        if np.any(bad):
            # brute-force fallback over all faces
            wa = np.einsum("fij,nj->nfi", Tinv, u[bad])
            fb = np.argmax(wa.min(axis=2), axis=1)
            if np.any(wa[np.arange(len(fb)), fb].min(axis=1) < -1e-9):
                raise InterpolationOutOfRange("query point not covered by any mesh face")
            face[bad] = fb
            bw[bad] = wa[np.arange(len(fb)), fb]
        bw = bw / bw.sum(axis=1)[:, None]
        return face, bw

    def interpolate(self, values: np.ndarray, u: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        u = np.atleast_2d(u)
        if self.ambient_dim == 2:
            th, order = self._angles
            ts = th[order]
            vs = values[order]
            spl = CubicSpline(np.append(ts, ts[0] + 2 * np.pi), np.append(vs, vs[0]), bc_type="periodic")
            q = np.mod(np.arctan2(u[:, 1], u[:, 0]) - ts[0], 2 * np.pi) + ts[0]
            return spl(q)
        face, bw = self.locate(u)
        return np.sum(values[self.cells[face]] * bw, axis=1)

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Surface gradient of the interpolant at the nodes, as ambient vectors."""
        values = np.asarray(values, dtype=float)
        M = self.manifold
        if self.ambient_dim == 2:
            th, order = self._angles
            ts = th[order]
            vs = values[order]
            spl = CubicSpline(np.append(ts, ts[0] + 2 * np.pi), np.append(vs, vs[0]), bc_type="periodic")
            dth = np.empty_like(values)
            dth[order] = spl(ts, 1)
            speed = np.linalg.norm(_chart_speed(M, self.params), axis=1)
            E = M.tangent_frame(self.params)[:, :, 0]
            return (dth / speed)[:, None] * E
        X = self.nodes
        f = self.cells
        a, b, c = X[f[:, 0]], X[f[:, 1]], X[f[:, 2]]
        nrm = np.cross(b - a, c - a)
        area2 = np.sum(nrm * nrm, axis=1)
        va, vb, vc = values[f[:, 0]], values[f[:, 1]], values[f[:, 2]]
        g = (np.cross(nrm, c - b) * va[:, None] + np.cross(nrm, a - c) * vb[:, None]
             + np.cross(nrm, b - a) * vc[:, None]) / area2[:, None]
        acc = np.zeros_like(X)
        cnt = np.zeros(len(X))
        for k in range(3):
            np.add.at(acc, f[:, k], g)
            np.add.at(cnt, f[:, k], 1)
        acc /= cnt[:, None]
        n = M.normal(self.params)
        return acc - np.sum(acc * n, axis=1)[:, None] * n

    # serialisation ----------------------------------------------------------
    def to_dict(self) -> dict:
        key = "edges" if self.ambient_dim == 2 else "faces"
        d = {"nodes": self.nodes.tolist(), key: self.cells.tolist(), "scheme": self.scheme}
        if not isinstance(self.manifold, UnitSphere):
            d["params"] = self.params.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, manifold: ReferenceManifold | None = None) -> "ManifoldMesh":
        nodes = np.asarray(data["nodes"], dtype=float)
        m = nodes.shape[1]
        if manifold is None:
            manifold = UnitSphere(m)
        cells = np.asarray(data["edges"] if m == 2 else data["faces"], dtype=int)
        params = np.asarray(data.get("params", nodes), dtype=float)
        mesh = cls(manifold, params, cells, data["scheme"], nodes)
        _validate_mesh(mesh)
        return mesh

    @classmethod
    def from_json(cls, text: str, manifold: ReferenceManifold | None = None) -> "ManifoldMesh":
        return cls.from_dict(json.loads(text), manifold)


def _chart_speed(M, u):
    if isinstance(M, ParameterizedManifold):
        return M.chart_derivative(u)[:, :, 0]
    return sphere_frame(u)[:, :, 0]


def _validate_mesh(mesh: ManifoldMesh):
    if not mesh.is_closed():
        raise MeshError("mesh is not closed")
    on = mesh.manifold.project(mesh.nodes)
    scale = np.maximum(1.0, np.linalg.norm(mesh.nodes, axis=1))
    if np.any(np.abs(on.r) > 1e-12 * scale):
        raise MeshError("mesh nodes do not lie on the manifold")


def build_mesh(M: ReferenceManifold, resolution: int) -> ManifoldMesh:
    """Closed mesh with about ``resolution`` nodes.

    Circle: ``resolution`` nodes at angles 2*pi*k/resolution.  Sphere: the
    smallest icosphere with at least ``resolution`` vertices (10*4**s + 2).
    """
    m = M.ambient_dim
    minimum = 8 if m == 2 else 42
    if resolution < minimum:
        raise ValueError(f"resolution must be >= {minimum} for m={m}, got {resolution}")
    if not isinstance(M, (UnitSphere, ParameterizedManifold)):
        raise UnsupportedManifold(f"no chart coverage for {M!r}")
    params, cells = _sphere_param_mesh(m, resolution)
    scheme = "periodic-cubic" if m == 2 else "barycentric-linear"
    mesh = ManifoldMesh(M, params, cells, scheme)
    if not mesh.is_closed():
        raise MeshError("generated mesh is not closed")
    return mesh
