"""Riemann problems at a junction and the interaction of waves with junctions.

At a junction between sections ``a-`` (left) and ``a+`` (right) the solution
consists of a 1-wave moving left, the transmission ``T`` at ``x = 0`` and a
2-wave followed by a 3-wave moving right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingKind, PiecewiseSection, check_section_ratio, t_map
from .errors import AmplitudeOverflow, DomainError, NoConvergence, NonSubsonicTrace, SpeedSignError, VacuumError
from .newton import damped_newton, fd_jacobian
from .thermo import IDEAL_GAS, GasLaw, GasState, eigensystem, is_subsonic, primitives
from .waves import FORWARD, REVERSED, lax_curve, solve_riemann, state_scale

JUNCTION_TOL = 1e-10
OVERFLOW_FRACTION = 0.2
TV_GUARD = 1.0


@dataclass(frozen=True)
class JunctionFan:
    kind: CouplingKind
    sigma: tuple
    uL: GasState
    traceL: GasState
    traceR: GasState
    uMid: GasState
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


def wave_speeds(family, left: GasState, right: GasState, law: GasLaw = IDEAL_GAS):
    """``(slowest, fastest)`` speed of the ``family`` wave joining ``left`` to ``right``."""
    k = family - 1
    lam_l = eigensystem(left, law).lam[k]
    if left == right:
        return lam_l, lam_l
    if family == 2:
        v = left.q / left.rho
        return v, v
    lam_r = eigensystem(right, law).lam[k]
    # shock when characteristics converge, rarefaction otherwise
    if lam_l > lam_r:
        # the Lax condition puts the speed between the characteristic speeds; clipping
        # keeps round-off in the quotient of near-zero jumps from escaping that interval
        s = (right.q - left.q) / (right.rho - left.rho)
        s = min(max(s, lam_r), lam_l)
        return s, s
    return lam_l, lam_r


def _check_speeds(fan: JunctionFan, law):
    s1 = wave_speeds(1, fan.uL, fan.traceL, law)
    if s1[1] > 0.0:
        raise SpeedSignError(f"1-wave reaches positive speed {s1[1]:.6g}")
    s2 = wave_speeds(2, fan.traceR, fan.uMid, law)
    s3 = wave_speeds(3, fan.uMid, fan.uR, law)
    if s2[0] <= 0.0 or s3[0] <= 0.0:
        raise SpeedSignError(f"2- or 3-wave has non-positive speed ({s2[0]:.6g}, {s3[0]:.6g})")


class _CachedJacobian:
    """Finite-difference Jacobian refreshed only when Newton progress stalls."""

    def __init__(self, fun, step):
        self.fun = fun
        self.step = step
        self.J = None
        self.last_norm = None

    def __call__(self, x, f):
        norm = float(np.max(np.abs(f)))
        if self.J is None or self.last_norm is None or norm > 1e-3 * self.last_norm:
            if self.J is not None and norm <= 0.25 * self.last_norm:
                self.last_norm = norm
                return self.J
            self.J = fd_jacobian(self.fun, x, f, steps=np.full(x.size, self.step))
        self.last_norm = norm
        return self.J


def solve_junction_riemann(
    kind,
    aM,
    aP,
    uL: GasState,
    uR: GasState,
    law: GasLaw = IDEAL_GAS,
    profile=None,
    allow_large=False,
    sigma_sign=-1.0,
    tol=JUNCTION_TOL,
    check_speeds=True,
) -> JunctionFan:
    """Solve ``L3(L2(T(L1(uL; s1)); s2); s3) = uR`` for ``(s1, s2, s3)``."""
    kind = CouplingKind.parse(kind)
    check_section_ratio(aM, aP, allow_large)
    if aM == aP:
        fan = solve_riemann(uL, uR, law, tol=tol)
        return JunctionFan(kind, fan.sigma, uL, fan.uStarL, fan.uStarL, fan.uStarR, uR, fan.residual, fan.iterations)
    scale = state_scale(uR, law)
    target = uR.as_array()
    tkw = dict(profile=profile, allow_large=allow_large, sigma_sign=sigma_sign)

    def states(s):
        traceL = lax_curve(1, FORWARD, uL, s[0], law)
        if not is_subsonic(traceL, law):
            raise NonSubsonicTrace("theta", primitives(traceL, law).theta, "left trace left the subsonic region")
        traceR = t_map(kind, aM, aP, traceL, law, **tkw)
        mid = lax_curve(2, FORWARD, traceR, s[1], law)
        end = lax_curve(3, FORWARD, mid, s[2], law)
        return traceL, traceR, mid, end

    def residual(s):
        *_, end = states(s)
        if end.rho < 1e-12 or end.e < 1e-12:
            raise VacuumError("rho", end.rho)
        return (end.as_array() - target) / scale

    jac = _CachedJacobian(residual, 1e-7 * uL.rho)
    try:
        res = damped_newton(residual, np.zeros(3), jac, tol=tol)
    except NoConvergence as exc:
        if isinstance(exc.__cause__, (NonSubsonicTrace, VacuumError)):
            raise exc.__cause__
        raise
    s = res.x
    traceL, traceR, mid, _ = states(s)
    if not is_subsonic(traceR, law):
        raise NonSubsonicTrace("theta", primitives(traceR, law).theta, "right trace is not subsonic")
    fan = JunctionFan(kind, tuple(float(x) for x in s), uL, traceL, traceR, mid, uR, res.residual, res.iterations)
    if check_speeds:
        _check_speeds(fan, law)
    return fan


@dataclass(frozen=True)
class InteractionResult:
    sigma3_in: float
    sigma: tuple
    uPlus: GasState
    thetaPlus: float
    fan: JunctionFan | None = None

    @property
    def sigma3(self):
        return self.sigma[2]

    @property
    def ratio(self):
        return self.sigma[2] / self.sigma3_in if self.sigma3_in != 0.0 else math.nan


def interact_incoming(
    kind, u: GasState, sigma3m, a, da, law: GasLaw = IDEAL_GAS, **solver_kw
) -> InteractionResult:
    """A 3-wave of strength ``sigma3m`` moving right hits the junction ``a -> a + da``.

    Solves ``L3(L2(T(L1(u; s1)); s2); s3) = T(L3(u; sigma3m))``; ``uPlus``
    is ``T(L3(u; sigma3m))`` pulled back along the reversed 3-curve by the
    outgoing ``sigma3+``.
    """
    kind = CouplingKind.parse(kind)
    sigma3m = float(sigma3m)
    theta = primitives(u, law).theta
    if da == 0.0:
        return InteractionResult(sigma3m, (0.0, 0.0, sigma3m), u, theta)
    aP = a + da
    tkw = _tmap_kw(solver_kw)
    if sigma3m == 0.0:
        fan = solve_junction_riemann(kind, a, aP, u, t_map(kind, a, aP, u, law, **tkw), law, **solver_kw)
        return InteractionResult(0.0, fan.sigma, fan.uR, primitives(fan.uR, law).theta, fan)
    uBehind = lax_curve(3, FORWARD, u, sigma3m, law)
    base = t_map(kind, a, aP, uBehind, law, **tkw)
    fan = solve_junction_riemann(kind, a, aP, u, base, law, **solver_kw)
    uPlus = lax_curve(3, REVERSED, base, fan.sigma3, law)
    return InteractionResult(sigma3m, fan.sigma, uPlus, primitives(uPlus, law).theta, fan)


def _tmap_kw(kw):
    return {k: kw[k] for k in ("profile", "allow_large", "sigma_sign") if k in kw}


@dataclass(frozen=True)
class PairResult:
    sigma3_in: float
    sigma3_out: float
    ratio: float
    predicted_ratio: float
    first: InteractionResult
    second: InteractionResult


def amplify_pair(
    kind, u: GasState, sigma3m, a, h, law: GasLaw = IDEAL_GAS, overflow=None, **solver_kw
) -> PairResult:
    """A 3-wave crosses ``a -> a(1+h)`` and then ``a(1+h) -> a``.

    The second junction sees ``first.uPlus`` as its background and the
    outgoing strength of the first interaction as its incoming one.
    ``predicted_ratio`` is ``1 + chi h^2`` from the closed form, ``nan``
    where no closed form exists. With ``overflow`` set, an intermediate
    strength above ``overflow`` times the density raises
    :class:`AmplitudeOverflow` before the second junction is attempted.
    """
    from .asymptotics import CLOSED_FORM_GAMMA, chi_closed

    kind = CouplingKind.parse(kind)
    da = a * h
    first = interact_incoming(kind, u, sigma3m, a, da, law, **solver_kw)
    if overflow is not None and abs(first.sigma3) > overflow * u.rho:
        raise AmplitudeOverflow(
            f"|sigma3| = {abs(first.sigma3):.6g} exceeds {overflow} rho inside a pair", [sigma3m, first.sigma3], []
        )
    second = interact_incoming(kind, first.uPlus, first.sigma3, a + da, -da, law, **solver_kw)
    ratio = second.sigma3 / sigma3m if sigma3m != 0.0 else math.nan
    predicted = math.nan
    if abs(law.gamma - CLOSED_FORM_GAMMA) < 1e-14:
        try:
            predicted = 1.0 + chi_closed(kind, primitives(u, law).theta) * h * h
        except DomainError:
            pass
    return PairResult(float(sigma3m), second.sigma3, ratio, predicted, first, second)


@dataclass(frozen=True)
class ChainResult:
    trajectory: np.ndarray
    ratios: np.ndarray
    states: list = field(default_factory=list)


def chain_propagate(
    kind, u: GasState, sigma3m, a, h, n_pairs, law: GasLaw = IDEAL_GAS, overflow=OVERFLOW_FRACTION, **solver_kw
) -> ChainResult:
    """Send a 3-wave through ``n_pairs`` consecutive ``+h``/``-h`` junction pairs.

    After each pair the wave continues into the background left behind the
    pair's outgoing wave. Raises :class:`AmplitudeOverflow` once
    ``|sigma3|`` exceeds ``overflow`` times the background density.
    """
    kind = CouplingKind.parse(kind)
    traj = [float(sigma3m)]
    ratios = []
    states = [u]
    base, s = u, float(sigma3m)
    for k in range(int(n_pairs)):
        try:
            pair = amplify_pair(kind, base, s, a, h, law, overflow=overflow, **solver_kw)
        except AmplitudeOverflow as exc:
            raise AmplitudeOverflow(str(exc), traj, ratios) from None
        ratios.append(pair.ratio)
        s = pair.sigma3_out
        base = pair.second.uPlus
        traj.append(s)
        states.append(base)
        if abs(s) > overflow * base.rho:
            raise AmplitudeOverflow(
                f"|sigma3| = {abs(s):.6g} exceeds {overflow} rho after {k + 1} pairs",
                np.array(traj),
                np.array(ratios),
            )
    return ChainResult(np.array(traj), np.array(ratios), states)


@dataclass(frozen=True)
class StationaryProfile:
    states: list
    tv: float
    a_tv: float
    residuals: np.ndarray


def stationary_profile(
    kind, profile: PiecewiseSection, u0: GasState, law: GasLaw = IDEAL_GAS, allow_large=False, sigma_sign=-1.0
) -> StationaryProfile:
    """Stationary solution on a piecewise constant section, left state ``u0``.

    ``tv`` sums the Euclidean norms of the jumps in conserved variables
    scaled componentwise by ``u0``; ``a_tv`` the relative total variation of the section.
    """
    kind = CouplingKind.parse(kind)
    secs = list(profile.sections)
    a_tv = profile.total_variation / secs[0]
    if a_tv > TV_GUARD and not allow_large:
        raise DomainError("section_tv", a_tv, f"relative TV(a) {a_tv:.3g} exceeds {TV_GUARD}; pass allow_large=True")
    from .coupling import psi_residual, psi_scale

    scale = np.abs(u0.as_array())
    states = [u0]
    res = []
    tv = 0.0
    for aM, aP in zip(secs[:-1], secs[1:]):
        uM = states[-1]
        uP = t_map(kind, aM, aP, uM, law, allow_large=allow_large, sigma_sign=sigma_sign)
        r = psi_residual(kind, aM, uM, aP, uP, law, sigma_sign=sigma_sign) / psi_scale(kind, aM, uM, law)
        res.append(float(np.max(np.abs(r))))
        tv += float(np.linalg.norm((uP.as_array() - uM.as_array()) / scale))
        states.append(uP)
    return StationaryProfile(states, tv, a_tv, np.array(res))


__all__ = [
    "JunctionFan",
    "InteractionResult",
    "PairResult",
    "ChainResult",
    "StationaryProfile",
    "solve_junction_riemann",
    "interact_incoming",
    "amplify_pair",
    "chain_propagate",
    "stationary_profile",
    "wave_speeds",
]
