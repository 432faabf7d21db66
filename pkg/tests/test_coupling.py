from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import subsonic_states
from hypothesis import given, reject, settings
from hypothesis import strategies as st

from eulerjunction.coupling import (
    ALL_KINDS,
    CouplingKind,
    PiecewiseSection,
    SmoothSection,
    check_section_ratio,
    det_closed_form,
    det_criterion,
    integrate_stationary,
    momentum_source,
    psi_residual,
    psi_scale,
    stationary_direction,
    t_map,
)
from eulerjunction.errors import DomainError, IntegrationError, NoConvergence, NonSubsonicResult, SectionRatioError, SonicError
from eulerjunction.thermo import GasState, conserved_from_primitive, flux, flux_jacobian, primitives, state_from_theta

KINDS = [k.value for k in ALL_KINDS]


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def test_kind_parsing():
    assert CouplingKind.parse("p") is CouplingKind.PRESSURE
    assert CouplingKind.parse("P") is CouplingKind.MOMENTUM
    assert CouplingKind.parse(CouplingKind.LAX) is CouplingKind.LAX
    assert str(CouplingKind.SMOOTH) == "S"
    with pytest.raises(ValueError):
        CouplingKind.parse("X")


@pytest.mark.parametrize("kind", KINDS)
def test_residual_vanishes_at_identity(kind):
    u = state_from_theta(0.3)
    r = psi_residual(kind, 1.7, u, 1.7, u)
    assert np.all(r == 0.0)


def test_lax_residual_first_component():
    u = conserved_from_primitive(1.0, 0.4, 1.0)
    assert psi_residual("L", 1.0, u, 2.0, u)[0] == pytest.approx(u.q, rel=1e-15)


def test_pressure_residual_zero_by_construction():
    # equal pressure, a*q and a*F: construct u+ from u- at a+ = 2 a-
    uM = conserved_from_primitive(1.0, 0.4, 1.0)
    uP = t_map("p", 1.0, 1.1, uM)
    assert primitives(uP).p == pytest.approx(primitives(uM).p, rel=1e-13)
    r = psi_residual("p", 1.0, uM, 1.1, uP) / psi_scale("p", 1.0, uM)
    assert np.max(np.abs(r)) < 1e-13


@pytest.mark.parametrize("kind", KINDS)
def test_t_map_identity_and_exact_momentum(kind):
    u = state_from_theta(0.4)
    assert t_map(kind, 1.3, 1.3, u) is u
    uP = t_map(kind, 1.0, 1.08, u)
    assert uP.q == u.q * 1.0 / 1.08


@pytest.mark.parametrize("kind", KINDS)
def test_t_map_solves_coupling(kind):
    u = state_from_theta(0.35, rho_bar=1.4, e_bar=0.7)
    uP = t_map(kind, 1.0, 1.07, u)
    r = psi_residual(kind, 1.0, u, 1.07, uP) / psi_scale(kind, 1.0, u)
    assert np.max(np.abs(r)) < 1e-11


def test_lax_map_is_a_scaling():
    # a+ f(u+) = a- f(u-) with f homogeneous of degree one gives u+ = u- a-/a+
    u = state_from_theta(0.6)
    np.testing.assert_allclose(t_map("L", 1.0, 1.05, u).as_array(), u.as_array() / 1.05, rtol=1e-14)


def test_smooth_map_keeps_isentropic_invariants():
    u = state_from_theta(0.3)
    uP = t_map("S", 1.0, 1.1, u)
    pr0, pr1 = primitives(u), primitives(uP)
    assert pr1.S == pytest.approx(pr0.S, rel=1e-12, abs=1e-12)
    g = 5.0 / 3.0
    assert 0.5 * pr1.v**2 + g * pr1.e == pytest.approx(0.5 * pr0.v**2 + g * pr0.e, rel=1e-12)
    assert 1.1 * uP.q == pytest.approx(u.q, rel=1e-12)


@given(subsonic_states(theta_max=0.6), st.sampled_from(KINDS), st.floats(-0.09, 0.09), st.floats(-0.09, 0.09))
@settings(max_examples=25)
def test_consistency_of_composition(u, kind, h1, h2):
    a0, a1, a2 = 1.0, 1.0 + h1, (1.0 + h1) * (1.0 + h2)
    # contractions of near-sonic states can push past the sonic point, where no subsonic image exists
    try:
        one = t_map(kind, a0, a2, u)
        mid = t_map(kind, a0, a1, u)
    except (NoConvergence, DomainError):
        reject()
    two = t_map(kind, a1, a2, mid)
    tol = 1e-7 if kind == "S" else 1e-9
    assert _rel(two.as_array(), one.as_array()) <= tol


@given(subsonic_states(theta_max=0.6), st.sampled_from(KINDS), st.floats(-0.1, 0.1))
@settings(max_examples=25)
def test_inverse(u, kind, h):
    try:
        fwd = t_map(kind, 1.0, 1.0 + h, u)
    except (NoConvergence, DomainError):
        reject()
    back = t_map(kind, 1.0 + h, 1.0, fwd)
    assert _rel(back.as_array(), u.as_array()) <= 1e-9


def test_section_ratio_guard():
    u = state_from_theta(0.2)
    with pytest.raises(SectionRatioError):
        t_map("P", 1.0, 1.5, u)
    t_map("P", 1.0, 1.5, u, allow_large=True)
    with pytest.raises(DomainError):
        check_section_ratio(0.0, 1.0)


def test_t_map_rejects_supersonic_and_negative_speed():
    with pytest.raises(DomainError):
        t_map("P", 1.0, 1.05, conserved_from_primitive(1.0, -0.2, 1.0))
    with pytest.raises(DomainError):
        t_map("P", 1.0, 1.05, conserved_from_primitive(1.0, 2.0, 1.0))


def test_no_subsonic_image_beyond_fold():
    # momentum-conserving coupling at theta = 0.5: the subsonic branch ends between 3% and 4% contraction
    u = state_from_theta(0.5)
    assert primitives(t_map("P", 1.0, 0.97, u)).theta < 1.0
    with pytest.raises((NoConvergence, NonSubsonicResult)):
        t_map("P", 1.0, 0.96, u)


def test_near_sonic_contraction_fails_cleanly():
    # contracting the section accelerates a subsonic flow up to the sonic point
    u = state_from_theta(0.95)
    with pytest.raises((SonicError, NonSubsonicResult, IntegrationError)):
        t_map("S", 1.0, 0.9, u)


def test_stationary_direction_matches_linear_solve():
    u = state_from_theta(0.45, rho_bar=1.3, e_bar=0.8)
    g = np.array([u.q, u.q**2 / u.rho, flux(u)[2]])
    ref = -np.linalg.solve(flux_jacobian(u), g)
    np.testing.assert_allclose(stationary_direction(u), ref, rtol=1e-12)


def test_flat_section_gives_constant_path():
    u = state_from_theta(0.3)
    path = integrate_stationary(u, SmoothSection(1.2, 1.2))
    assert path.sigma == 0.0
    assert path.endpoint == u
    assert np.all(path.states == u.as_array())


def test_stationary_conserves_mass_and_energy_flux():
    u = state_from_theta(0.3)
    prof = SmoothSection(1.0, 1.05)
    path = integrate_stationary(u, prof)
    a_end = prof.a(prof.X)
    end = path.endpoint
    assert abs(a_end * end.q - u.q) <= 1e-10 * u.q
    assert abs(a_end * flux(end)[2] - flux(u)[2]) <= 1e-10 * flux(u)[2]
    assert path.error < 1e-12
    assert len(path.states) == 2001


def test_stationary_momentum_balance():
    # a+ P+ - a- P- = Sigma along the stationary solution
    u = state_from_theta(0.3)
    prof = SmoothSection(1.0, 1.1)
    path = integrate_stationary(u, prof)
    lhs = 1.1 * flux(path.endpoint)[1] - flux(u)[1]
    assert lhs == pytest.approx(path.sigma, rel=1e-10)
    assert momentum_source(1.0, u, 1.1) == pytest.approx(path.sigma, rel=1e-15)


def test_endpoint_independent_of_shape():
    u = state_from_theta(0.3)
    lin = integrate_stationary(u, SmoothSection(1.0, 1.05, shape="linear")).endpoint
    cub = integrate_stationary(u, SmoothSection(1.0, 1.05, shape="cubic")).endpoint
    sine = (lambda t: math.sin(0.5 * math.pi * t), lambda t: 0.5 * math.pi * math.cos(0.5 * math.pi * t))
    snn = integrate_stationary(u, SmoothSection(1.0, 1.05, X=3.0, shape=sine)).endpoint
    assert _rel(cub.as_array(), lin.as_array()) <= 1e-8
    assert _rel(snn.as_array(), lin.as_array()) <= 1e-8


def test_smooth_section_validation():
    with pytest.raises(DomainError):
        SmoothSection(1.0, 1.1, shape=(lambda t: t * t, lambda t: 4.0 * t - 1.0))
    with pytest.raises(DomainError):
        SmoothSection(-1.0, 1.1)
    with pytest.raises(DomainError):
        SmoothSection(1.0, 1.1, shape="wiggly")


def test_piecewise_section():
    pw = PiecewiseSection((0.0, 1.0), (1.0, 1.2, 1.1))
    assert pw.total_variation == pytest.approx(0.3)
    with pytest.raises(ValueError):
        PiecewiseSection((0.0,), (1.0,))
    with pytest.raises(DomainError):
        PiecewiseSection((1.0, 0.0), (1.0, 1.0, 1.0))
    sampled = PiecewiseSection.sample(SmoothSection(1.0, 1.2), 4)
    assert sampled.sections[0] == 1.0 and sampled.sections[-1] == 1.2
    assert len(sampled.sections) == 6


def test_sonic_guard_in_integrator():
    u = state_from_theta(0.9)
    with pytest.raises(SonicError):
        integrate_stationary(u, SmoothSection(1.0, 0.8))


def test_det_closed_form_example():
    # lambda = (-1, 1, 3) for rho = 1, q = 1, E = 4.1
    u = GasState(1.0, 1.0, 4.1)
    assert det_closed_form("S", 1.0, u) == pytest.approx(3.0, rel=1e-14)
    assert det_closed_form("L", 1.0, u) == pytest.approx(3.0, rel=1e-14)
    assert det_closed_form("P", 2.0, u) == pytest.approx(12.0, rel=1e-14)


@given(subsonic_states())
def test_pressure_determinant_positive(u):
    assert det_closed_form("p", 1.3, u) > 0.0


@given(subsonic_states(), st.sampled_from(KINDS), st.floats(0.5, 2.0))
@settings(max_examples=30)
def test_det_criterion_matches_closed_form(u, kind, a):
    d = det_criterion(kind, a, u)
    assert d.relative_gap <= 1e-5
    assert d.numeric != 0.0
