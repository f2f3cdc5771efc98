import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pitchfork import (GronwallParams, TubularPoint, build_mesh, check_theorem5, gronwall_bounds, gronwall_domination,
                       integrate_flow, model_field, model_radius, split_components, time_t_map,
                       verify_invariance_across_t)
from pitchfork.errors import LeftTube, ParamsViolateIneq
from pitchfork.flow import READINGS, field_components, trajectory, variational_jacobian
from pitchfork.graphtransform import GraphFunction

NARRATIVE = [rd for rd in READINGS if rd["labels"] == "narrative"]


@pytest.fixture(scope="module")
def X2():
    return model_field(2)


@pytest.fixture(scope="module")
def mesh16(X2):
    return build_mesh(X2.manifold, 16)


# --- integration --------------------------------------------------------------

@pytest.mark.parametrize("mu", [-0.02, 0.0, 0.02])
@pytest.mark.parametrize("r0", [-0.15, 0.05, 0.18])
def test_rk4_matches_closed_form_radius(X2, mu, r0):
    th = 0.7
    x0 = (1 + r0) * np.array([np.cos(th), np.sin(th)])
    x, est = integrate_flow(X2, x0, mu, 2.0, richardson=True)
    r = np.linalg.norm(x) - 1
    assert r == pytest.approx(model_radius(r0, mu, 2.0), abs=1e-12)
    # rotation about the origin at unit rate
    assert np.arctan2(x[0, 1], x[0, 0]) == pytest.approx(th + 2.0, abs=1e-10)
    assert est[0] < 1e-12


def test_backward_integration_inverts_forward(X2):
    x0 = np.array([[1.1, 0.05], [0.0, 0.9]])
    y = integrate_flow(X2, x0, 0.02, 1.0)
    assert np.allclose(integrate_flow(X2, y, 0.02, -1.0), x0, atol=1e-12)


def test_left_tube_detected(X2):
    with pytest.raises(LeftTube):
        integrate_flow(X2, np.array([[1.25, 0.0]]), 0.02, 0.5)


def test_trajectory_samples(X2):
    ts, xs = trajectory(X2, np.array([1.05, 0.0]), 0.02, 1.0, every=250)
    assert np.allclose(ts, [0, 0.25, 0.5, 0.75, 1.0])
    assert xs.shape == (5, 1, 2)


def test_variational_matches_fd(X2):
    x0 = np.array([[1.1, 0.05], [0.3, -0.85]])
    P = variational_jacobian(X2, 0.02, x0, 1.0)
    e = 1e-6
    for j in range(2):
        d = np.zeros(2)
        d[j] = e
        fd = (integrate_flow(X2, x0 + d, 0.02, 1.0) - integrate_flow(X2, x0 - d, 0.02, 1.0)) / (2 * e)
        assert np.allclose(P[:, :, j], fd, atol=1e-8)


@given(st.floats(-0.04, 0.04), st.floats(0.2, 2.0))
def test_time_t_map_normal_rate_on_M(mu, t):
    T = time_t_map(model_field(2), t, h=2e-3)
    p = TubularPoint(np.zeros(1), np.array([[0.6, 0.8]]))
    ce = split_components(T, p, mu, check_tube=False)
    assert ce.Drf[0] == pytest.approx(np.exp(mu * t), rel=1e-9)
    assert ce.f[0] == pytest.approx(0.0, abs=1e-13)


def test_time_t_map_inverse(X2):
    T = time_t_map(X2, 1.0)
    x = np.array([[1.1, 0.1]])
    assert np.allclose(T.inv(T(x, 0.01), 0.01), x, atol=1e-12)


def test_field_components_of_model(X2):
    r = np.array([-0.1, 0.0, 0.15])
    u = np.tile([[1.0, 0.0]], (3, 1))
    c = field_components(X2, TubularPoint(r, u, u), 0.02)
    assert np.allclose(c.R, 0.02 * r - r**3, atol=1e-12)
    assert np.allclose(c.DrR, 0.02 - 3 * r**2, atol=1e-8)
    assert np.allclose(c.DyR, 0, atol=1e-8)


# --- Gronwall comparison ------------------------------------------------------

@given(st.floats(0.5, 2.0), st.floats(0, 1), st.floats(0, 1))
def test_reference_solves_comparison_ode(s, a, b):
    q = min(s / 4, np.sqrt(s / 4))
    gb = gronwall_bounds(GronwallParams(s, 0.99 * a * q, 0.99 * b * q))
    assert gb.ode_residual(np.linspace(0, 2, 21)) <= 1e-10
    assert np.allclose(gb.reference([0.0])[0], [1, 0, 0, 1], atol=1e-15)


@given(st.floats(0.1, 3.0))
def test_decoupled_printed_forms_match_reference(s):
    gb = gronwall_bounds(GronwallParams(s, 0.0, 0.0))
    t = np.linspace(0, 2, 9)
    ref = gb.reference(t)
    assert np.allclose(ref[:, 0], np.exp(-2 * s * t), rtol=1e-14)
    for rd in NARRATIVE:
        E = gb.printed(t, rd)["E"]
        assert np.array_equal(E[:, :3], ref[:, :3]) or np.allclose(E[:, :3], ref[:, :3], rtol=1e-15, atol=0)
        # the printed E3 carries the opposite sign of z(t) = exp(nu t)
        assert np.allclose(E[:, 3], -ref[:, 3], rtol=1e-15)


def test_lambda_values():
    gb = gronwall_bounds(GronwallParams(1.0, 0.1, 0.1))
    lam = np.linalg.eigvalsh(np.array([[-2, 0.1], [0.1, 0.1]]))
    assert (gb.lambda_minus, gb.lambda_plus) == pytest.approx(tuple(lam), abs=1e-14)
    # closed-form roots: exact eigenvalues only when nu = 0
    pr = gb.printed([0.0], NARRATIVE[0])
    assert pr["lambda_minus"] == pytest.approx(-1.9065563234854495, abs=1e-12)
    assert abs(pr["lambda_plus"] - gb.lambda_plus) > 0.09
    gb0 = gronwall_bounds(GronwallParams(1.0, 0.1, 0.0))
    pr0 = gb0.printed([0.0], NARRATIVE[0])
    assert pr0["lambda_minus"] == pytest.approx(gb0.lambda_minus, abs=1e-12)
    assert pr0["lambda_plus"] == pytest.approx(gb0.lambda_plus, abs=1e-12)


@pytest.mark.parametrize("sigma,nu", [(0.3, 0.0), (0.0, 0.3), (0.6, 0.6)])
def test_ineq_violation_raises(sigma, nu):
    with pytest.raises(ParamsViolateIneq):
        gronwall_bounds(GronwallParams(1.0, sigma, nu))


def test_combine_max_dominates_reference():
    gb = gronwall_bounds(GronwallParams(1.0, 0.1, 0.1), combine="max")
    t = np.linspace(0, 2, 5)
    assert np.all(gb.E(t) >= gb.reference(t))
    assert len(gb.discrepancy_log) == len(READINGS)


# --- flow hypotheses -------------------------------------------------------

def test_theorem5_before_threshold(X2, mesh16):
    v = check_theorem5(X2, [-0.02], mesh=mesh16)[0]
    assert v.overall and set(v.conditions) == {"i", "ii"}


def test_theorem5_after_threshold(X2, mesh16):
    v = check_theorem5(X2, [0.02], mesh=mesh16)[0]
    assert v.overall, v.to_dict()
    # exact fits for the model: DrR = mu - 3 r^2 peaks at r = alpha1
    assert v.params.s == pytest.approx(-(0.02 - 3 * 0.01) / 2, abs=1e-7)
    assert v.params.sigma < 1e-6 and v.params.nu < 1e-6


def test_domination_when_applicable(X2, mesh16):
    d = gronwall_domination(X2, 0.02, mesh=mesh16)
    assert d["applicable"] and d["dominated"]
    assert gronwall_domination(X2, -0.02, mesh=mesh16)["applicable"] is False


def test_invariance_across_t(X2):
    mesh = build_mesh(X2.manifold, 32)
    g = GraphFunction.constant(mesh, np.sqrt(0.02), "plus")
    assert verify_invariance_across_t(X2, 0.02, [g], ts=(0.37, 1.0))["max"] < 1e-12
    off = GraphFunction.constant(mesh, 0.1, "plus")
    assert verify_invariance_across_t(X2, 0.02, [off], ts=(1.0,))["max"] == pytest.approx(
        abs(model_radius(0.1, 0.02, 1.0) - 0.1), abs=1e-10)


@given(st.floats(0.1, 1.0), st.floats(0.1, 1.0))
def test_flow_group_property(t, s):
    X = model_field(2)
    x0 = np.array([[1.12, 0.03], [-0.4, 0.8]])
    once = integrate_flow(X, x0, 0.02, t + s)
    twice = integrate_flow(X, integrate_flow(X, x0, 0.02, s), 0.02, t)
    assert np.max(np.abs(once - twice)) < 1e-11
