"""Coupling conditions at a section jump and the induced transmission map.

Four conditions are available, all sharing conservation of mass
(``a q``) and energy (``a F``) and differing in the momentum component:

* ``S`` smooth-limit: ``a+ P+ - a- P- - Sigma``, ``Sigma`` the momentum
  source ``int p a' dx`` along the smooth stationary solution;
* ``P`` momentum flux continuity: ``P+ - P-``;
* ``L`` section-weighted flux continuity: ``a+ P+ - a- P-``;
* ``p`` pressure continuity: ``p+ - p-``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    IntegrationError,
    NonSubsonicResult,
    SectionRatioError,
)
from .newton import damped_newton, fd_jacobian
from .thermo import (
    IDEAL_GAS,
    GasLaw,
    GasState,
    eigensystem,
    flux,
    flux_jacobian,
    is_subsonic,
    primitives,
)

SECTION_RATIO_GUARD = 0.2
TMAP_TOL = 1e-11
ODE_STEPS = 2000
SONIC_BAND = 1e-6


class CouplingKind(enum.Enum):
    SMOOTH = "S"
    MOMENTUM = "P"
    LAX = "L"
    PRESSURE = "p"

    @classmethod
    def parse(cls, tag):
        if isinstance(tag, cls):
            return tag
        try:
            return cls(tag)
        except ValueError:
            raise ValueError(f"unknown coupling kind {tag!r}; expected one of S, P, L, p") from None

    def __str__(self):
        return self.value


ALL_KINDS = tuple(CouplingKind)

_SHAPES = {
    "linear": (lambda t: t, lambda t: 1.0),
    "cubic": (lambda t: t * t * (3.0 - 2.0 * t), lambda t: 6.0 * t * (1.0 - t)),
}


@dataclass(frozen=True)
class SmoothSection:
    """Monotone section from ``a_minus`` at ``-X`` to ``a_plus`` at ``X``.

    ``shape`` is ``"linear"``, ``"cubic"`` or a pair ``(s, ds)`` of callables
    on ``[0, 1]`` with ``s(0) = 0``, ``s(1) = 1`` and ``ds >= 0``.
    """

    a_minus: float
    a_plus: float
    X: float = 1.0
    shape: object = "linear"

    def __post_init__(self):
        if not (self.a_minus > 0.0 and self.a_plus > 0.0):
            raise DomainError("section", (self.a_minus, self.a_plus))
        if not self.X > 0.0:
            raise DomainError("X", self.X)
        s, ds = self._shape()
        if abs(s(0.0)) > 1e-14 or abs(s(1.0) - 1.0) > 1e-14:
            raise DomainError("shape", self.shape, "section shape must map 0 -> 0 and 1 -> 1")
        if any(ds(t) < 0.0 for t in np.linspace(0.0, 1.0, 65)):
            raise DomainError("shape", self.shape, "non-monotone smooth sections are not supported")

    def _shape(self):
        if isinstance(self.shape, str):
            try:
                return _SHAPES[self.shape]
            except KeyError:
                raise DomainError("shape", self.shape) from None
        return self.shape

    def a(self, x):
        s, _ = self._shape()
        return self.a_minus + (self.a_plus - self.a_minus) * s((x + self.X) / (2.0 * self.X))

    def da(self, x):
        _, ds = self._shape()
        return (self.a_plus - self.a_minus) * ds((x + self.X) / (2.0 * self.X)) / (2.0 * self.X)


@dataclass(frozen=True)
class PiecewiseSection:
    """Piecewise-constant section: ``sections[j]`` on ``(breaks[j-1], breaks[j])``."""

    breaks: tuple
    sections: tuple

    def __post_init__(self):
        breaks = tuple(float(x) for x in self.breaks)
        sections = tuple(float(a) for a in self.sections)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "sections", sections)
        if len(sections) != len(breaks) + 1:
            raise ValueError("need exactly one more section value than break points")
        if any(not a > 0.0 for a in sections):
            raise DomainError("section", min(sections))
        if any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise DomainError("breaks", breaks, "break points must be strictly increasing")

    @property
    def total_variation(self):
        return float(np.sum(np.abs(np.diff(self.sections))))

    @classmethod
    def sample(cls, profile: SmoothSection, n_pieces):
        """Piecewise approximation of a smooth section with ``n_pieces`` cells on ``[-X, X]``."""
        X = profile.X
        edges = np.linspace(-X, X, n_pieces + 1)
        mids = 0.5 * (edges[1:] + edges[:-1])
        values = [profile.a_minus] + [profile.a(x) for x in mids] + [profile.a_plus]
        return cls(tuple(edges), tuple(values))


@dataclass(frozen=True)
class StationaryPath:
    x: np.ndarray
    states: np.ndarray  # rows (rho, q, E)
    sigma: float
    endpoint: GasState
    error: float = field(default=float("nan"))


def stationary_direction(u: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    """``-Df(u)^{-1} g(u)`` with ``g = (q, q^2/rho, F)``, in closed form.

    The stationary solution obeys ``du/dx = stationary_direction(u) a'/a``.
    """
    rho, q, E = u.rho, u.q, u.E
    v = q / rho
    e = E / rho - 0.5 * v * v
    c2 = law.gamma * (law.gamma - 1.0) * e
    k = v * v / (c2 - v * v)  # theta / (1 - theta)
    drho = rho * k
    # dE = (v^2/2 + e + rho de/drho) drho + rho v dv, with dv/v = -1/(1 - theta)
    dE = (0.5 * v * v + law.gamma * e) * drho - rho * v * v * (1.0 + k)
    return np.array([drho, -q, dE])


def _sonic_check(rho, q, E, law):
    v = q / rho
    e = E / rho - 0.5 * v * v
    if not (rho > 0.0 and e > 0.0):
        raise IntegrationError("e" if rho > 0.0 else "rho", e if rho > 0.0 else rho)
    c = math.sqrt(law.gamma * (law.gamma - 1.0) * e)
    if v < SONIC_BAND * c:
        raise IntegrationError("lambda2", v, f"stationary path reached lambda2 = {v:.3e} (stagnation)")
    if c - v < SONIC_BAND * c:
        raise IntegrationError("lambda1", v - c, f"stationary path reached the sonic point (lambda1 = {v - c:.3e})")
    return (law.gamma - 1.0) * rho * e


def _rk4(u0: GasState, profile: SmoothSection, law: GasLaw, steps: int, keep_path: bool):
    X = profile.X
    dx = 2.0 * X / steps
    g = law.gamma
    gg1 = g * (g - 1.0)
    # section data at the nodes and midpoints, node j at index 2j
    xs = np.linspace(-X, X, 2 * steps + 1)
    try:
        a = np.broadcast_to(profile.a(xs), xs.shape)
        da = np.broadcast_to(profile.da(xs), xs.shape)
    except TypeError:  # shape callables that only accept scalars
        a = np.array([profile.a(x) for x in xs])
        da = np.array([profile.da(x) for x in xs])
    ratio = (da / a).tolist()
    da = da.tolist()

    def rhs(j, rho, q, E):
        v = q / rho
        e = E / rho - 0.5 * v * v
        c2 = gg1 * e
        if not (rho > 0.0 and e > 0.0) or v * v >= c2 * (1.0 - SONIC_BAND) ** 2 or v * v < SONIC_BAND**2 * c2:
            _sonic_check(rho, q, E, law)
        s = ratio[j]
        k = v * v / (c2 - v * v)
        drho = rho * k
        dE = (0.5 * v * v + g * e) * drho - rho * v * v * (1.0 + k)
        return drho * s, -q * s, dE * s, (g - 1.0) * rho * e * da[j]

    rho, q, E, sig = u0.rho, u0.q, u0.E, 0.0
    h2 = 0.5 * dx
    h6 = dx / 6.0
    path = [(rho, q, E)] if keep_path else None
    for i in range(steps):
        j = 2 * i
        k1 = rhs(j, rho, q, E)
        k2 = rhs(j + 1, rho + h2 * k1[0], q + h2 * k1[1], E + h2 * k1[2])
        k3 = rhs(j + 1, rho + h2 * k2[0], q + h2 * k2[1], E + h2 * k2[2])
        k4 = rhs(j + 2, rho + dx * k3[0], q + dx * k3[1], E + dx * k3[2])
        rho += h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        q += h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        E += h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        sig += h6 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        if keep_path:
            path.append((rho, q, E))
    _sonic_check(rho, q, E, law)
    return np.array([rho, q, E]), sig, path


def integrate_stationary(
    u_start: GasState,
    profile: SmoothSection,
    law: GasLaw = IDEAL_GAS,
    steps: int = ODE_STEPS,
    error_estimate: bool = True,
    keep_path: bool = True,
) -> StationaryPath:
    """Integrate the smooth stationary equations across ``profile``.

    Classic RK4 with ``steps`` uniform steps on ``[-X, X]``; the momentum
    source ``Sigma = int p a' dx`` is integrated alongside. With
    ``error_estimate`` a second run at half the steps gives a Richardson
    estimate of the endpoint error (scaled by the endpoint state).
    """
    if not is_subsonic(u_start, law):
        raise IntegrationError("theta", primitives(u_start, law).theta, "stationary integration needs a subsonic start")
    if profile.a_minus == profile.a_plus:
        xs = np.linspace(-profile.X, profile.X, steps + 1)
        states = np.tile(u_start.as_array(), (steps + 1, 1)) if keep_path else np.empty((0, 3))
        return StationaryPath(xs if keep_path else np.empty(0), states, 0.0, u_start, 0.0)
    end, sig, path = _rk4(u_start, profile, law, steps, keep_path)
    err = float("nan")
    if error_estimate:
        coarse, _, _ = _rk4(u_start, profile, law, steps // 2, False)
        err = float(np.max(np.abs(end - coarse) / np.abs(end)) / 15.0)
    xs = np.linspace(-profile.X, profile.X, steps + 1) if keep_path else np.empty(0)
    states = np.array(path) if keep_path else np.empty((0, 3))
    return StationaryPath(xs, states, float(sig), GasState.from_array(end), err)


def momentum_source(aM, uM: GasState, aP, law: GasLaw = IDEAL_GAS, profile=None) -> float:
    """``Sigma(a-, a+, u-)``; zero without a section change."""
    if aM == aP:
        return 0.0
    prof = profile if profile is not None else SmoothSection(aM, aP)
    _check_profile(prof, aM, aP)
    return integrate_stationary(uM, prof, law, error_estimate=False, keep_path=False).sigma


def _check_profile(profile, aM, aP):
    if not isinstance(profile, SmoothSection):
        raise TypeError("condition S needs a SmoothSection profile")
    if profile.a_minus != aM or profile.a_plus != aP:
        raise DomainError("profile", (profile.a_minus, profile.a_plus), "profile end sections must equal a- and a+")


def psi_residual(
    kind,
    aM,
    uM: GasState,
    aP,
    uP: GasState,
    law: GasLaw = IDEAL_GAS,
    profile=None,
    sigma_sign: float = -1.0,
) -> np.ndarray:
    """Coupling residual ``Psi(a-, u-; a+, u+)``.

    For kind ``S`` the source term enters as ``sigma_sign * Sigma``. The
    default ``-1`` is the sign satisfied by the smooth stationary solution;
    ``+1`` gives the other sign convention for comparison.
    """
    kind = CouplingKind.parse(kind)
    if not (aM > 0.0 and aP > 0.0):
        raise DomainError("section", (aM, aP))
    fM, fP = flux(uM, law), flux(uP, law)
    mass = aP * fP[0] - aM * fM[0]
    energy = aP * fP[2] - aM * fM[2]
    if kind is CouplingKind.SMOOTH:
        mom = aP * fP[1] - aM * fM[1] + sigma_sign * momentum_source(aM, uM, aP, law, profile)
    elif kind is CouplingKind.MOMENTUM:
        mom = fP[1] - fM[1]
    elif kind is CouplingKind.LAX:
        mom = aP * fP[1] - aM * fM[1]
    else:
        mom = law.pressure(uP.rho, uP.e) - law.pressure(uM.rho, uM.e)
    return np.array([mass, mom, energy])


def psi_scale(kind, a, u: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    """Magnitudes of the three coupling components, for relative residuals."""
    kind = CouplingKind.parse(kind)
    v, e, p, _, c, _ = primitives(u, law)
    w = c + abs(v)
    mom = p if kind is CouplingKind.PRESSURE else u.rho * w * w
    if kind in (CouplingKind.SMOOTH, CouplingKind.LAX):
        mom *= a
    return np.array([a * u.rho * w, mom, a * (u.E + p) * w])


def check_section_ratio(aM, aP, allow_large=False):
    if not (aM > 0.0 and aP > 0.0):
        raise DomainError("section", (aM, aP))
    ratio = abs(aP - aM) / aM
    if ratio > SECTION_RATIO_GUARD and not allow_large:
        raise SectionRatioError(
            "section_ratio", ratio, f"|a+ - a-|/a- = {ratio:.3g} exceeds {SECTION_RATIO_GUARD}; pass allow_large=True"
        )


def t_map(
    kind,
    aM,
    aP,
    uM: GasState,
    law: GasLaw = IDEAL_GAS,
    profile=None,
    allow_large: bool = False,
    sigma_sign: float = -1.0,
    tol: float = TMAP_TOL,
) -> GasState:
    """Transmission map: the state ``u+`` with ``Psi(a-, uM; a+, u+) = 0``.

    The momentum component ``q+ = q- a-/a+`` is solved exactly. Kind ``S``
    (default sign) is the endpoint of the stationary ODE; kinds ``P``, ``L``,
    ``p`` and the ``sigma_sign=+1`` variant of ``S`` are solved by Newton in
    ``(rho, E)`` starting from the first-order expansion.
    """
    kind = CouplingKind.parse(kind)
    check_section_ratio(aM, aP, allow_large)
    if not is_subsonic(uM, law):
        raise DomainError("theta", primitives(uM, law).theta, "transmission map needs a subsonic state")
    if aM == aP:
        return uM
    if kind is CouplingKind.SMOOTH and sigma_sign == -1.0:
        prof = profile if profile is not None else SmoothSection(aM, aP)
        _check_profile(prof, aM, aP)
        end = integrate_stationary(uM, prof, law, error_estimate=False, keep_path=False).endpoint
        # a q is an exact invariant of the ODE; pin it so every kind shares the relation
        uP = GasState(end.rho, uM.q * aM / aP, end.E)
    else:
        uP = _newton_tmap(kind, aM, aP, uM, law, profile, sigma_sign, tol)
    if not is_subsonic(uP, law):
        raise NonSubsonicResult("theta", primitives(uP, law).theta, "transmitted state is not subsonic")
    return uP


def _initial_guess(kind, aM, aP, uM, law):
    from .asymptotics import CLOSED_FORM_GAMMA, expansion_h

    if abs(law.gamma - CLOSED_FORM_GAMMA) > 1e-14 or kind is CouplingKind.SMOOTH:
        return uM
    h = (aP - aM) / aM
    try:
        guess = GasState.from_rqe(uM.rqe() + expansion_h(kind, uM, law) * h)
    except DomainError:
        return uM
    return guess


def _newton_tmap(kind, aM, aP, uM, law, profile, sigma_sign, tol):
    qP = uM.q * aM / aP
    fM = flux(uM, law)
    scale = psi_scale(kind, aM, uM, law)
    if kind is CouplingKind.SMOOTH:
        src = sigma_sign * momentum_source(aM, uM, aP, law, profile)
        target = np.array([aM * fM[1] - src, aM * fM[2]])
    elif kind is CouplingKind.MOMENTUM:
        target = np.array([fM[1], aM * fM[2]])
    elif kind is CouplingKind.LAX:
        target = np.array([aM * fM[1], aM * fM[2]])
    else:
        target = np.array([law.pressure(uM.rho, uM.e), aM * fM[2]])
    mom_weight = 1.0 if kind in (CouplingKind.MOMENTUM, CouplingKind.PRESSURE) else aP

    def state(x):
        return GasState(x[0], qP, x[1])

    def residual(x):
        u = state(x)
        f = flux(u, law)
        mom = law.pressure(u.rho, u.e) if kind is CouplingKind.PRESSURE else mom_weight * f[1]
        return (np.array([mom, aP * f[2]]) - target) / scale[1:]

    def jacobian(x, f):
        u = state(x)
        J = flux_jacobian(u, law)
        if kind is CouplingKind.PRESSURE:
            row = J[1] - np.array([-(u.q / u.rho) ** 2, 2.0 * u.q / u.rho, 0.0])
        else:
            row = mom_weight * J[1]
        rows = np.array([row[[0, 2]], aP * J[2][[0, 2]]])
        return rows / scale[1:, None]

    guess = _initial_guess(kind, aM, aP, uM, law)
    x0 = np.array([guess.rho, qP * qP / (2.0 * guess.rho) + guess.rho * guess.e])
    res = damped_newton(residual, x0, jacobian, tol=tol)
    return state(res.x)


@dataclass(frozen=True)
class DetCriterion:
    numeric: float
    analytic: float
    cross: float
    det_r: float

    @property
    def relative_gap(self):
        return abs(self.numeric - self.cross) / abs(self.cross)


def det_closed_form(kind, a, u: GasState, law: GasLaw = IDEAL_GAS) -> float:
    """Closed-form ``det D_{u+} Psi`` at ``a- = a+ = a``, ``u- = u+ = u``.

    Values refer to the orientation ``Psi = psi(a-, u-) - psi(a+, u+)``.
    """
    kind = CouplingKind.parse(kind)
    lam = eigensystem(u, law).lam
    prod = lam[0] * lam[1] * lam[2]
    if kind in (CouplingKind.SMOOTH, CouplingKind.LAX):
        return -(a**3) * prod
    if kind is CouplingKind.MOMENTUM:
        return -(a**2) * prod
    c = primitives(u, law).c
    return a**2 * lam[1] * (c * c + lam[1] ** 2 * law.dp_de(u.rho, u.e) / u.rho)


def det_criterion(kind, a, u: GasState, law: GasLaw = IDEAL_GAS) -> DetCriterion:
    """Non-degeneracy determinant ``det[D- Psi r1, D+ Psi r2, D+ Psi r3]``.

    ``numeric`` uses central differences of the coupling residual in the
    orientation ``psi(a-, u-) - psi(a+, u+)``; ``cross`` is
    ``-analytic * det[r1 r2 r3]``, which it must reproduce.
    """
    kind = CouplingKind.parse(kind)
    es = eigensystem(u, law)
    x0 = u.as_array()
    steps = 1e-6 * np.abs(x0) + 1e-9

    def minus_side(x):
        return -psi_residual(kind, a, GasState.from_array(x), a, u, law)

    def plus_side(x):
        return -psi_residual(kind, a, u, a, GasState.from_array(x), law)

    Dm = fd_jacobian(minus_side, x0, steps=steps)
    Dp = fd_jacobian(plus_side, x0, steps=steps)
    M = np.column_stack([Dm @ es.r[:, 0], Dp @ es.r[:, 1], Dp @ es.r[:, 2]])
    numeric = float(np.linalg.det(M))
    analytic = det_closed_form(kind, a, u, law)
    det_r = float(np.linalg.det(es.r))
    return DetCriterion(numeric, analytic, -analytic * det_r, det_r)
