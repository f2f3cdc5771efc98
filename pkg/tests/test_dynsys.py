from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pitchfork import (MapFamily, SigmaProfile, TubularPoint, canonical_family, classify_side_behavior, compose,
                       identity_family, inverse_components, rotation_2d, rotation_3d, side_reversing_wrap,
                       split_components, unit_circle)
from pitchfork.dynsys import fd_jacobian, numeric_inverse
from pitchfork.errors import LeftTube, NewtonDivergence, NotRotation, UnsupportedManifold

mus = st.floats(-1 / 25, 1 / 25, allow_nan=False)
radii = st.floats(-0.2, 0.2, allow_nan=False)


def _points(M, n, seed=0, rmax=0.2):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n, M.ambient_dim))
    u /= np.linalg.norm(u, axis=1)[:, None]
    r = rng.uniform(-rmax, rmax, n)
    return TubularPoint(r, M.point(u), u)


def _generic_copy(F):
    """Same maps, but components go through projection and Jacobians."""
    return replace(F, components=None, inverse_components=None)


# --- sigma profile -----------------------------------------------------------

@given(mus)
def test_sigma_is_c1_at_blend_joints(mu):
    sig = SigmaProfile()
    for s0 in (0.7, 0.8, 1.2, 1.3):
        e = 1e-9
        assert sig.value(s0 - e, mu) == pytest.approx(sig.value(s0 + e, mu), abs=1e-8)
        assert sig.deriv(s0 - e, mu) == pytest.approx(sig.deriv(s0 + e, mu), abs=1e-6)


@given(mus)
def test_radius_map_is_increasing(mu):
    s = np.linspace(0.5, 1.6, 2001)
    assert np.all(SigmaProfile().radial_deriv(s, mu) > 0.05)


@given(mus, st.floats(0.6, 1.5))
def test_radial_inverse(mu, s):
    sig = SigmaProfile()
    assert sig.radial_inverse(sig.radial(s, mu), mu) == pytest.approx(s, abs=1e-13)


def test_radial_inverse_reports_divergence():
    with pytest.raises(NewtonDivergence):
        SigmaProfile().radial_inverse(np.array([1.1]), 0.0, max_iter=0)


# --- canonical family -----------------------------------------------------------

@given(st.floats(1e-4, 1 / 25))
def test_three_invariant_circles(mu):
    # s sigma(s) = s exactly at s = 1 and s = 1 +- sqrt(mu)
    F = canonical_family(2, rotation_2d(0.4))
    for s in (1.0, 1 - np.sqrt(mu), 1 + np.sqrt(mu)):
        x = np.array([[s, 0.0]])
        assert np.linalg.norm(F(x, mu)) == pytest.approx(s, abs=1e-14)


@given(mu=mus)
def test_radial_derivative_at_M(F2, mu):
    p = TubularPoint(np.zeros(1), np.array([[1.0, 0.0]]))
    assert split_components(F2, p, mu).Drf[0] == pytest.approx(1 + mu, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3])
def test_analytic_components_match_generic(n):
    A = rotation_2d(0.3) if n == 2 else rotation_3d([1, 2, 3], 0.7)
    F = canonical_family(n, A)
    G = _generic_copy(F)
    p = _points(F.manifold, 50, rmax=0.15)
    for mu in (-0.02, 0.02):
        a = split_components(F, p, mu, check_tube=False)
        b = split_components(G, p, mu, check_tube=False)
        assert np.allclose(a.f, b.f, atol=1e-12)
        assert np.allclose(a.g, b.g, atol=1e-12)
        assert np.allclose(a.Drf, b.Drf, atol=1e-9)
        assert np.allclose(a.Dyf, b.Dyf, atol=1e-9)
        assert np.allclose(a.Drg, b.Drg, atol=1e-9)
        assert np.allclose(a.Dyg, b.Dyg, atol=1e-9)
        ai = inverse_components(F, p, mu)
        bi = inverse_components(G, p, mu)
        assert np.allclose(ai.f, bi.f, atol=1e-12)
        assert np.allclose(ai.Drf, bi.Drf, atol=1e-9)
        assert np.allclose(ai.Dyg, bi.Dyg, atol=1e-9)


def test_dyg_is_isometry(F3):
    ce = split_components(F3, _points(F3.manifold, 30), 0.02, check_tube=False)
    assert np.allclose(np.linalg.norm(ce.Dyg, ord=2, axis=(1, 2)), 1.0, atol=1e-12)
    assert np.all(ce.Dyf == 0) and np.all(ce.Drg == 0)


def test_inverse_round_trip(F3):
    x = F3.manifold.embed(np.linspace(-0.2, 0.2, 9), np.tile([[0.0, 0.6, 0.8]], (9, 1)))
    assert np.allclose(F3.inv(F3(x, 0.03), 0.03), x, atol=1e-13)


def test_jacobian_matches_fd(F3):
    x = F3.manifold.embed(np.array([0.1, -0.05]), np.array([[1.0, 0, 0], [0, 0, 1.0]]))
    assert np.allclose(F3.jac(x, 0.01), fd_jacobian(lambda z: F3(z, 0.01), x, 1e-6), atol=1e-8)
    assert np.allclose(F3.inv_jac(F3(x, 0.01), 0.01) @ F3.jac(x, 0.01), np.eye(3), atol=1e-12)


def test_numeric_inverse_fallback(F2):
    G = replace(F2, inverse=None, inverse_components=None)
    x = np.array([[1.1, 0.2], [0.0, 0.85]])
    assert np.allclose(numeric_inverse(G, F2(x, 0.02), 0.02), x, atol=1e-11)
    assert np.allclose(G.inv(F2(x, 0.02), 0.02), x, atol=1e-11)


def test_left_tube_has_witness(F2):
    F = replace(F2, alpha=0.01)
    with pytest.raises(LeftTube) as e:
        split_components(F, TubularPoint(np.array([0.0099]), np.array([[1.0, 0.0]])), 0.04)
    assert e.value.witness is not None


def test_rotation_validation():
    with pytest.raises(NotRotation):
        canonical_family(2, np.diag([1.0, -1.0]))
    with pytest.raises(NotRotation):
        canonical_family(2, 2 * np.eye(2))
    with pytest.raises(NotRotation):
        canonical_family(3, np.eye(2))


# --- side behaviour ---------------------------------------------------------------

@given(mus)
def test_side_classification(mu):
    F = canonical_family(2)
    assert classify_side_behavior(F, mu).kind == "side-preserving"
    assert classify_side_behavior(side_reversing_wrap(F), mu).kind == "side-reversing"


def test_reversing_components_flip_offset(F2, G2):
    p = _points(F2.manifold, 20, rmax=0.15)
    a = split_components(F2, p, 0.02, check_tube=False)
    b = split_components(G2, p, 0.02, check_tube=False)
    c = split_components(_generic_copy(G2), p, 0.02, check_tube=False)
    assert np.allclose(b.f, -a.f) and np.allclose(b.Drf, -a.Drf)
    assert np.allclose(c.f, b.f, atol=1e-12) and np.allclose(c.Drf, b.Drf, atol=1e-8)
    bi = inverse_components(G2, p, 0.02)
    ci = inverse_components(_generic_copy(G2), p, 0.02)
    assert np.allclose(bi.f, ci.f, atol=1e-12) and np.allclose(bi.Drf, ci.Drf, atol=1e-8)


def test_reversing_wrap_requires_unit_sphere():
    from pitchfork import ParameterizedManifold

    F = MapFamily(lambda x, mu: x, ParameterizedManifold(lambda u: 1.1 * u, 2))
    with pytest.raises(UnsupportedManifold):
        side_reversing_wrap(F)


def test_square_of_reversing_is_preserving(G2):
    H = compose(G2, G2)
    assert H.side == "preserving"
    assert classify_side_behavior(H, 0.02).kind == "side-preserving"
    p = _points(G2.manifold, 10, rmax=0.1)
    a = split_components(H, p, 0.02, check_tube=False)
    b = split_components(_generic_copy(H), p, 0.02, check_tube=False)
    assert np.allclose(a.Drf, b.Drf, atol=1e-8) and np.allclose(a.Dyg, b.Dyg, atol=1e-8)


def test_identity_family():
    F = identity_family(unit_circle())
    p = _points(F.manifold, 5)
    ce = split_components(F, p, 0.0)
    assert np.allclose(ce.f, p.r) and np.allclose(ce.Drf, 1.0)
