"""Lax curves of the three wave families and the exact Riemann solver.

Wave strengths are density offsets: along the forward curves the density
is ``rho0 - sigma`` (family 1) or ``rho0 + sigma`` (families 2 and 3); the
reversed curves flip those signs. Families 1 and 3 use the shock branch
for ``sigma < 0`` and the rarefaction branch for ``sigma >= 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence, NotApplicable, VacuumError
from .newton import damped_newton, fd_jacobian
from .thermo import IDEAL_GAS, GasLaw, GasState, conserved_from_primitive, primitives

VACUUM_FLOOR = 1e-12
RIEMANN_TOL = 1e-11


class CurveDirection(enum.Enum):
    FORWARD = "forward"
    REVERSED = "reversed"


FORWARD = CurveDirection.FORWARD
REVERSED = CurveDirection.REVERSED

# sign of d(rho)/d(sigma) along the forward curves
_RHO_SIGN = {1: -1.0, 2: 1.0, 3: 1.0}
# sign in front of 2/(gamma-1) (c - c0) along rarefactions (both directions)
_RAREFACTION_SIGN = {1: -1.0, 3: 1.0}


def _check_family(family):
    if family not in (1, 2, 3):
        raise ValueError(f"wave family must be 1, 2 or 3, got {family!r}")


def _hugoniot(rho0, v0, e0, rho, vsign, law):
    """State at density ``rho`` on the Hugoniot locus through ``(rho0, v0, e0)``."""
    g1 = law.gamma - 1.0
    p0 = law.pressure(rho0, e0)
    dtau = 1.0 / rho - 1.0 / rho0
    # e = e0 - (p + p0) dtau / 2 with p = (gamma - 1) rho e, solved for e
    den = 1.0 + 0.5 * g1 * rho * dtau
    num = e0 - 0.5 * p0 * dtau
    if den <= 0.0 or num <= 0.0:
        limit = (law.gamma + 1.0) / g1
        raise NotApplicable(
            "rho",
            rho,
            f"density ratio {rho / rho0:.6g} beyond the Hugoniot limit (ratio {limit:.6g} or its inverse)",
        )
    e = num / den
    p = law.pressure(rho, e)
    jump = -(p - p0) * dtau
    return rho, v0 + vsign * math.sqrt(max(jump, 0.0)), e


def lax_curve_primitive(family, direction, rho0, v0, e0, sigma, law: GasLaw = IDEAL_GAS):
    """Same as :func:`lax_curve` but on primitive triples ``(rho, v, e)``."""
    _check_family(family)
    sign = _RHO_SIGN[family] * (1.0 if direction is FORWARD else -1.0)
    rho = rho0 + sign * sigma
    if not rho > 0.0:
        raise DomainError("rho", rho)
    if sigma == 0.0:
        return rho0, v0, e0
    if family == 2:
        # contact: v and p unchanged
        return rho, v0, e0 * rho0 / rho
    if sigma < 0.0:
        vsign = -1.0 if direction is FORWARD else 1.0
        return _hugoniot(rho0, v0, e0, rho, vsign, law)
    g1 = law.gamma - 1.0
    e = e0 * (rho / rho0) ** g1
    c0 = law.sound_speed(rho0, e0)
    c = law.sound_speed(rho, e)
    return rho, v0 + _RAREFACTION_SIGN[family] * 2.0 / g1 * (c - c0), e


def lax_curve(family, direction, u0: GasState, sigma, law: GasLaw = IDEAL_GAS) -> GasState:
    """State reached from ``u0`` along the ``family`` Lax curve at strength ``sigma``."""
    if sigma == 0.0:
        _check_family(family)
        return u0
    v0, e0 = u0.q / u0.rho, u0.e
    rho, v, e = lax_curve_primitive(family, direction, u0.rho, v0, e0, float(sigma), law)
    if not e > 0.0:
        raise DomainError("e", e)
    return conserved_from_primitive(rho, v, e, law)


def lax_tangent_at_zero(family, direction, u0: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    """Derivative of :func:`lax_curve` with respect to ``sigma`` at ``sigma = 0``.

    Returned in conserved variables. Family 1 is parametrized by decreasing
    density, so its tangent is ``-(1, lambda1, (E + p)/rho - v c)``.
    """
    _check_family(family)
    v, e, p, _, c, _ = primitives(u0, law)
    h = (u0.E + p) / u0.rho
    if family == 1:
        t = -np.array([1.0, v - c, h - v * c])
    elif family == 2:
        t = np.array([1.0, v, h - u0.rho * c * c / law.dp_de(u0.rho, e)])
    else:
        t = np.array([1.0, v + c, h + v * c])
    return t if direction is FORWARD else -t


def normalized_lax_tangent(family, u0: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    """Tangent columns normalized as ``(1, lambda_i, ...)``.

    They coincide with :func:`lax_tangent_at_zero` except for family 1, whose
    normalized column points along increasing density.
    """
    t = lax_tangent_at_zero(family, FORWARD, u0, law)
    return -t if family == 1 else t


@dataclass(frozen=True)
class WaveFan:
    sigma: tuple
    uL: GasState
    uStarL: GasState
    uStarR: GasState
    uR: GasState
    residual: float = 0.0
    iterations: int = 0

    @property
    def sigma1(self):
        return self.sigma[0]

    @property
    def sigma2(self):
        return self.sigma[1]

    @property
    def sigma3(self):
        return self.sigma[2]


def state_scale(u: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    """Componentwise scale used to nondimensionalize residuals."""
    c = primitives(u, law).c
    return np.array([u.rho, u.rho * c + abs(u.q), u.E])


def _check_vacuum(u: GasState):
    if u.rho < VACUUM_FLOOR:
        raise VacuumError("rho", u.rho)
    if u.e < VACUUM_FLOOR:
        raise VacuumError("e", u.e)


def fan_states(uL: GasState, sigma, law: GasLaw = IDEAL_GAS):
    """Intermediate states ``L1(uL)``, ``L2(.)``, ``L3(.)`` of a classical fan."""
    a = lax_curve(1, FORWARD, uL, sigma[0], law)
    b = lax_curve(2, FORWARD, a, sigma[1], law)
    c = lax_curve(3, FORWARD, b, sigma[2], law)
    return a, b, c


def solve_riemann(uL: GasState, uR: GasState, law: GasLaw = IDEAL_GAS, tol=RIEMANN_TOL) -> WaveFan:
    """Strengths ``(sigma1, sigma2, sigma3)`` with ``L3(L2(L1(uL)))= uR``.

    Damped Newton from zero strengths; the first Jacobian uses the exact
    tangents at zero, later ones central differences.
    """
    scale = state_scale(uR, law)
    target = uR.as_array()

    def residual(s):
        states = fan_states(uL, s, law)
        for w in states:
            _check_vacuum(w)
        return (states[2].as_array() - target) / scale

    def jacobian(s, f):
        if not np.any(s):
            tangents = [lax_tangent_at_zero(i, FORWARD, uL, law) for i in (1, 2, 3)]
            return np.column_stack(tangents) / scale[:, None]
        return fd_jacobian(residual, s, f, steps=np.full(3, 1e-7 * uL.rho))

    if uL == uR:
        return WaveFan((0.0, 0.0, 0.0), uL, uL, uR, 0.0, 0)
    prL, prR = primitives(uL, law), primitives(uR, law)
    # two rarefactions cannot meet: the classical pressure-positivity condition
    gap = 2.0 * (prL.c + prR.c) / (law.gamma - 1.0) - (prR.v - prL.v)
    if gap <= 0.0:
        raise VacuumError("v_jump", prR.v - prL.v, "velocity jump opens a vacuum between the rarefactions")
    try:
        res = damped_newton(residual, np.zeros(3), jacobian, tol=tol)
    except NoConvergence as exc:
        if isinstance(exc.__cause__, VacuumError):
            raise exc.__cause__
        raise
    s = res.x
    a, b, _ = fan_states(uL, s, law)
    return WaveFan(tuple(float(x) for x in s), uL, a, b, uR, res.residual, res.iterations)
