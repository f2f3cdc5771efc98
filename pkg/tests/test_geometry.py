import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pitchfork import (ManifoldMesh, ParameterizedManifold, TubularPoint, TubularRegion, UnitSphere, build_mesh,
                       embed, icosphere, project, unit_circle, unit_sphere)
from pitchfork.errors import AmbiguousProjection, MeshError, OutsideTube, UnsupportedManifold
from pitchfork.geometry import retract_sphere, sphere_frame

angles = st.floats(0, 2 * np.pi, allow_nan=False)
offsets = st.floats(-0.2, 0.2, allow_nan=False)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


unit3 = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1).map(_unit)


# --- projection and embedding -------------------------------------------------

@given(angles, offsets)
def test_circle_round_trip(th, r):
    M = unit_circle()
    u = np.array([[np.cos(th), np.sin(th)]])
    p = project(M.embed(r, u), M)
    assert abs(p.r[0] - r) <= 1e-10
    assert np.allclose(p.u, u, atol=1e-10)
    assert np.allclose(embed(p, M), M.embed(r, u), atol=1e-10)


@given(unit3, offsets)
def test_sphere_round_trip(u, r):
    M = unit_sphere()
    x = M.embed(r, u[None])
    p = M.project(x)
    assert abs(p.r[0] - r) <= 1e-10
    assert np.allclose(p.y, u, atol=1e-10)


def test_signed_offset_is_positive_outside():
    M = unit_circle()
    p = M.project(np.array([[1.1, 0.0], [0.9, 0.0]]))
    assert p.r[0] == pytest.approx(0.1) and p.r[1] == pytest.approx(-0.1)


def test_origin_is_ambiguous():
    with pytest.raises(AmbiguousProjection):
        unit_circle().project(np.zeros((1, 2)))


def test_outside_tube_raises():
    M = unit_sphere()
    with pytest.raises(OutsideTube):
        M.project(np.array([[0.0, 0.0, 1.3]]), alpha=0.2)
    with pytest.raises(OutsideTube):
        M.embed(0.25, np.array([[1.0, 0.0, 0.0]]), alpha=0.2)


@given(unit3)
def test_sphere_frame_is_orthonormal_and_tangent(u):
    E = sphere_frame(u[None])[0]
    assert np.allclose(E.T @ E, np.eye(2), atol=1e-12)
    assert np.allclose(u @ E, 0, atol=1e-12)


@given(unit3, st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_retraction_stays_on_sphere(u, a, b):
    w = retract_sphere(u[None], np.array([[a, b]]))
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-14)


def test_projection_jacobian_inverts_embedding():
    M = unit_sphere()
    rng = np.random.default_rng(1)
    u = rng.normal(size=(20, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    r = rng.uniform(-0.2, 0.2, 20)
    P = M.projection_jacobian(M.embed(r, u))
    J = M.embed_jacobian(r, u)
    assert np.allclose(P @ J, np.eye(3), atol=1e-12)


def test_inside_test():
    M = unit_circle()
    assert M.is_inside(np.array([[0.5, 0.0]]))[0]
    assert not M.is_inside(np.array([[1.5, 0.0]]))[0]


def test_region_samples_nested_and_contained():
    K = TubularRegion(0.2, 0.15)
    a, b = K.radial_samples(8), K.radial_samples(16)
    assert set(np.round(a, 14)) <= set(np.round(b, 14))
    assert np.all(K.contains(b))
    assert not K.contains(0.1) and not K.contains(0.21)
    assert TubularRegion(0.2, 0.0, "outer").contains(-0.1) == np.False_


def test_tubular_point_batches():
    p = TubularPoint(np.zeros(3), np.eye(3))
    assert len(p) == 3


# --- parameterized manifolds ------------------------------------------------

@pytest.fixture(scope="module")
def ellipse_manifold():
    L = np.diag([1.05, 0.95])
    return ParameterizedManifold(lambda u: u @ L.T, 2, name="ellipse")


def test_parameterized_round_trip(ellipse_manifold):
    M = ellipse_manifold
    rng = np.random.default_rng(0)
    th = rng.uniform(0, 2 * np.pi, 400)
    u = np.stack([np.cos(th), np.sin(th)], axis=1)
    for r in (-0.15, 0.0, 0.1):
        p = M.project(M.embed(np.full(len(u), r), u))
        assert np.max(np.abs(p.r - r)) <= 1e-10
        assert np.max(np.abs(p.u - u)) <= 1e-9


def test_parameterized_matches_builtin_circle():
    P = ParameterizedManifold(lambda u: u, 2)
    C = unit_circle()
    x = np.array([[1.1, 0.3], [-0.2, 0.85]])
    a, b = P.project(x), C.project(x)
    assert np.allclose(a.r, b.r, atol=1e-10)
    assert np.allclose(P.normal(b.u), C.normal(b.u), atol=1e-8)


def test_parameterized_orientation_is_outward():
    M = ParameterizedManifold(lambda u: u[:, ::-1] * np.array([1.0, 1.2]), 2)  # reversed chart
    u = np.array([[1.0, 0.0]])
    assert not M.is_inside(M.point(u) + 0.05 * M.normal(u))[0]


def test_parameterized_rejects_bad_dimension():
    with pytest.raises(UnsupportedManifold):
        ParameterizedManifold(lambda u: u, 4)


# --- meshes ------------------------------------------------------------------

@pytest.mark.parametrize("s,n", [(0, 12), (1, 42), (2, 162)])
def test_icosphere_counts_and_orientation(s, n):
    V, F = icosphere(s)
    assert len(V) == n and len(F) == 2 * n - 4
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    assert np.all(np.sum(np.cross(b - a, c - a) * (a + b + c), axis=1) > 0)


def test_meshes_are_closed():
    assert build_mesh(unit_circle(), 16).is_closed()
    m = build_mesh(unit_sphere(), 162)
    assert m.is_closed() and len(m) == 162 and len(m.boundary_edges()) == 0


@pytest.mark.parametrize("M,res", [(unit_circle(), 7), (unit_sphere(), 41)])
def test_mesh_minimum_resolution(M, res):
    with pytest.raises(ValueError):
        build_mesh(M, res)


def test_circle_interpolation_is_spectrally_accurate():
    mesh = build_mesh(unit_circle(), 64)
    th = np.arctan2(mesh.params[:, 1], mesh.params[:, 0])
    vals = 0.1 + 0.02 * np.sin(3 * th)
    q = np.linspace(0, 2 * np.pi, 301)
    uq = np.stack([np.cos(q), np.sin(q)], axis=1)
    assert np.max(np.abs(mesh.interpolate(vals, uq) - (0.1 + 0.02 * np.sin(3 * q)))) < 1e-6


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), unit3)
def test_barycentric_reproduces_affine_on_faces(c0, c1, c2, c3, u):
    mesh = build_mesh(unit_sphere(), 162)
    a = np.array([c1, c2, c3])
    vals = c0 + mesh.nodes @ a
    face, w = mesh.locate(u[None])
    corners = mesh.nodes[mesh.cells[face[0]]]
    expect = c0 + (w[0] @ corners) @ a
    assert mesh.interpolate(vals, u[None])[0] == pytest.approx(expect, abs=1e-12)
    assert np.all(w >= -1e-9) and w.sum() == pytest.approx(1.0)


def test_interpolation_at_nodes_is_exact():
    mesh = build_mesh(unit_sphere(), 42)
    vals = np.random.default_rng(3).normal(size=len(mesh))
    assert np.allclose(mesh.interpolate(vals, mesh.params), vals, atol=1e-12)


def test_gradient_of_linear_field_on_sphere():
    mesh = build_mesh(unit_sphere(), 642)
    g = mesh.gradient(mesh.nodes[:, 2])
    expect = np.array([0, 0, 1.0]) - mesh.nodes[:, 2:3] * mesh.nodes
    assert np.max(np.linalg.norm(g - expect, axis=1)) < 0.05


def test_mesh_json_round_trip():
    mesh = build_mesh(unit_sphere(), 42)
    back = ManifoldMesh.from_json(mesh.to_json())
    assert np.array_equal(back.nodes, mesh.nodes) and np.array_equal(back.cells, mesh.cells)
    assert back.scheme == mesh.scheme


def test_mesh_validation_rejects_open_or_off_manifold():
    mesh = build_mesh(unit_circle(), 8)
    d = json.loads(mesh.to_json())
    d["edges"] = d["edges"][:-1]
    with pytest.raises(MeshError):
        ManifoldMesh.from_dict(d)
    d = json.loads(mesh.to_json())
    d["nodes"][0] = [1.1, 0.0]
    with pytest.raises(MeshError):
        ManifoldMesh.from_dict(d)


def test_unit_sphere_kinds():
    assert UnitSphere(2).ambient_dim == 2 and UnitSphere(3).intrinsic_dim == 2
