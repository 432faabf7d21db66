from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import subsonic_states
from hypothesis import given, reject, settings
from hypothesis import strategies as st
from oracles import ORACLE

from eulerjunction.coupling import PiecewiseSection, psi_residual, psi_scale, t_map
from eulerjunction.errors import AmplitudeOverflow, DomainError, SpeedSignError
from eulerjunction.junction import (
    JunctionFan,
    _check_speeds,
    amplify_pair,
    chain_propagate,
    interact_incoming,
    solve_junction_riemann,
    stationary_profile,
    wave_speeds,
)
from eulerjunction.thermo import GasLaw, conserved_from_primitive, primitives, state_from_theta
from eulerjunction.waves import FORWARD, lax_curve, solve_riemann

KINDS = ("S", "P", "L", "p")


def test_equal_sections_reduce_to_riemann():
    uL = conserved_from_primitive(1.0, 0.3, 1.0)
    uR = conserved_from_primitive(1.1, 0.35, 0.95)
    fan = solve_junction_riemann("P", 1.2, 1.2, uL, uR)
    ref = solve_riemann(uL, uR)
    assert fan.sigma == ref.sigma
    assert fan.traceL == fan.traceR


@pytest.mark.parametrize("kind", KINDS)
def test_stationary_data_gives_no_waves(kind):
    u = state_from_theta(0.3)
    fan = solve_junction_riemann(kind, 1.0, 1.05, u, t_map(kind, 1.0, 1.05, u))
    np.testing.assert_allclose(fan.sigma, 0.0, atol=1e-9)


@pytest.mark.parametrize("kind", ("P", "L", "p"))
def test_junction_fan_is_consistent(kind):
    u = state_from_theta(0.3)
    uR = conserved_from_primitive(u.rho * 1.02, primitives(u).v * 0.98, primitives(u).e * 1.01)
    fan = solve_junction_riemann(kind, 1.0, 1.04, u, uR)
    assert fan.residual <= 1e-10
    # the two traces satisfy the coupling condition
    r = psi_residual(kind, 1.0, fan.traceL, 1.04, fan.traceR) / psi_scale(kind, 1.0, fan.traceL)
    assert np.max(np.abs(r)) < 1e-10
    end = lax_curve(3, FORWARD, lax_curve(2, FORWARD, fan.traceR, fan.sigma2), fan.sigma3)
    np.testing.assert_allclose(end.as_array(), uR.as_array(), rtol=1e-9)


def test_wave_speeds():
    u = conserved_from_primitive(1.0, 0.3, 1.0)
    v, c = 0.3, primitives(u).c
    assert wave_speeds(2, u, lax_curve(2, FORWARD, u, 0.1)) == (v, v)
    lo, hi = wave_speeds(1, u, lax_curve(1, FORWARD, u, 0.1))
    assert lo == pytest.approx(v - c) and hi > lo
    s = wave_speeds(3, u, lax_curve(3, FORWARD, u, -0.1))
    assert s[0] == s[1] and s[0] > v + c * 0.9


def test_speed_guard_rejects_supersonic_left_state():
    # with subsonic traces the guard never fires; feed it a fan whose left state is supersonic
    u = conserved_from_primitive(1.0, 2.0, 1.0)
    w = state_from_theta(0.3)
    fan = JunctionFan("P", (0.0, 0.0, 0.0), u, u, w, w, w)
    with pytest.raises(SpeedSignError):
        _check_speeds(fan, GasLaw())


@given(subsonic_states(theta_max=0.7), st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
@settings(max_examples=25)
def test_fan_speeds_have_correct_signs(u, dr, dv):
    pr = primitives(u)
    uR = conserved_from_primitive(u.rho * (1 + dr), pr.v * (1 + dv), pr.e)
    try:
        fan = solve_junction_riemann("p", 1.0, 1.03, u, uR, check_speeds=False)
    except DomainError:
        reject()
    assert wave_speeds(1, fan.uL, fan.traceL)[1] <= 0.0
    assert wave_speeds(2, fan.traceR, fan.uMid)[0] > 0.0
    assert wave_speeds(3, fan.uMid, fan.uR)[0] > 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_flat_junction_passes_wave_through(kind):
    u = state_from_theta(0.4)
    res = interact_incoming(kind, u, 0.01, 1.0, 0.0)
    assert res.sigma == (0.0, 0.0, 0.01)
    assert res.uPlus is u
    assert res.ratio == 1.0


@pytest.mark.parametrize("kind", ("P", "L", "p"))
def test_interaction_first_order_transmission(kind):
    # outgoing 3-wave ratio is 1 + f1 h + O(h^2)
    t, h, s = 0.25, 1e-3, 1e-5
    res = interact_incoming(kind, state_from_theta(t), s, 1.0, h)
    f1, f2 = ORACLE[(kind, t)][:2]
    assert res.ratio - 1.0 == pytest.approx(f1 * h + f2 * h * h, abs=5e-6)


def _chi_richardson(kind, theta, h, s=1e-6):
    u = state_from_theta(theta)
    c1 = (amplify_pair(kind, u, s, 1.0, h).ratio - 1.0) / h**2
    c2 = (amplify_pair(kind, u, s, 1.0, h / 2).ratio - 1.0) / (h / 2) ** 2
    # the leading error of (ratio - 1)/h^2 is linear in h
    return 2.0 * c2 - c1


@pytest.mark.parametrize("kind", ("P", "p"))
@pytest.mark.parametrize("theta", (0.25, 0.75))
def test_pair_ratio_matches_chi_oracle(kind, theta):
    chi = ORACLE[(kind, theta)][2]
    assert _chi_richardson(kind, theta, 2.5e-3) == pytest.approx(chi, abs=0.05 * max(1.0, abs(chi)))


def test_lax_pair_ratio_is_one():
    for t in (0.1, 0.5, 0.9):
        pair = amplify_pair("L", state_from_theta(t), 1e-3, 1.0, 0.05)
        assert pair.ratio == pytest.approx(1.0, abs=1e-9)


def test_smooth_pair_ratio_matches_oracle():
    assert _chi_richardson("S", 0.25, 1e-2) == pytest.approx(ORACLE[("S", 0.25)][2], rel=0.05)


def test_pair_prediction_uses_closed_form():
    pair = amplify_pair("p", state_from_theta(0.3), 1e-4, 1.0, 0.02)
    from eulerjunction.asymptotics import chi_closed

    assert pair.predicted_ratio == 1.0 + chi_closed("p", 0.3) * 0.02**2
    other = amplify_pair("p", state_from_theta(0.3, GasLaw(1.4)), 1e-4, 1.0, 0.02, GasLaw(1.4))
    assert math.isnan(other.predicted_ratio)


def test_chain_without_pairs():
    ch = chain_propagate("P", state_from_theta(0.3), 1e-3, 1.0, 0.05, 0)
    assert list(ch.trajectory) == [1e-3]
    assert ch.ratios.size == 0


def test_chain_growth_is_monotone():
    # momentum coupling at theta = 0.75 amplifies a 3-wave pair after pair
    ch = chain_propagate("P", state_from_theta(0.75), 1e-3, 1.0, 0.05, 10)
    assert np.all(np.diff(ch.trajectory) > 0.0)
    assert np.all(ch.ratios > 1.0)


def test_chain_decay_is_monotone():
    ch = chain_propagate("p", state_from_theta(0.5), 1e-3, 1.0, 0.05, 10)
    assert np.all(np.diff(ch.trajectory) < 0.0)


def test_chain_overflow_reports_trajectory():
    with pytest.raises(AmplitudeOverflow) as info:
        chain_propagate("P", state_from_theta(0.75), 1e-2, 1.0, 0.05, 40, overflow=0.0105)
    exc = info.value
    assert len(exc.trajectory) >= 1
    assert exc.trajectory[0] == 1e-2


@given(subsonic_states(theta_max=0.6), st.sampled_from(("P", "L", "p")), st.floats(-0.04, 0.04))
@settings(max_examples=20)
def test_zero_incoming_wave_leaves_stationary_state(u, kind, h):
    res = interact_incoming(kind, u, 0.0, 1.0, h)
    np.testing.assert_allclose(res.sigma, 0.0, atol=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_stationary_profile(kind):
    prof = PiecewiseSection((0.0, 1.0, 2.0), (1.0, 1.03, 1.01, 1.04))
    u0 = state_from_theta(0.3)
    sp = stationary_profile(kind, prof, u0)
    assert len(sp.states) == 4
    assert np.max(sp.residuals) < 1e-11
    assert sp.a_tv == pytest.approx(0.08)
    assert sp.tv > 0.0
    # composition of the individual maps
    direct = t_map(kind, 1.0, 1.04, u0)
    np.testing.assert_allclose(sp.states[-1].as_array(), direct.as_array(), rtol=1e-8)


def test_stationary_profile_tv_guard():
    prof = PiecewiseSection((0.0, 1.0), (1.0, 1.9, 0.9))
    with pytest.raises(DomainError):
        stationary_profile("P", prof, state_from_theta(0.1))
