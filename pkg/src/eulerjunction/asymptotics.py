"""Second-order expansions of the transmission map and the interaction coefficients.

Closed forms (valid for ``gamma = 5/3`` only) and numerical oracles that
extract the same coefficients from the nonlinear solvers:

* ``T(a, a(1+h); u) = u + H(u) h + G(u) h^2 + o(h^2)`` in ``(rho, q, e)``;
* ``sigma3+ / sigma3- = 1 + f1(theta) h + f2(theta) h^2`` at one junction;
* ``sigma3++ / sigma3- = 1 + chi(theta) h^2`` across a ``+da``/``-da`` pair.

The closed forms are evaluated exactly as stated; :func:`extract_t_series`
and :func:`extract_interaction_series` compute the same quantities
independently so the two can be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingKind, t_map
from .errors import DomainError, UnsupportedGamma
from .thermo import IDEAL_GAS, GasLaw, GasState, primitives, state_from_theta

CLOSED_FORM_GAMMA = 5.0 / 3.0
THETA_MARGIN = 0.02
DEFAULT_H_GRID = (1e-2, -1e-2, 5e-3, -5e-3, 2.5e-3)
# T has large high-order coefficients near the sonic line; a finer grid keeps
# the aliasing of h^5 terms into H and G below 1e-6
T_SERIES_H_GRID = (1e-3, -1e-3, 5e-4, -5e-4, 2.5e-4)
DEFAULT_EPSILON = 1e-4


def require_closed_form_gamma(law: GasLaw):
    if abs(law.gamma - CLOSED_FORM_GAMMA) > 1e-14:
        raise UnsupportedGamma(f"closed forms exist only for gamma = 5/3, got {law.gamma!r}")


def _check_theta(theta):
    if not 0.0 < theta < 1.0 or abs(theta - 1.0) < 1e-12:
        raise DomainError("theta", theta)


def cube_minus_one(t):
    """``(t - 1)^3``, the factored form of ``t^3 - 3t^2 + 3t - 1``."""
    return (t - 1.0) ** 3


# ---------------------------------------------------------------- H and G


def _hg_coefficients(kind, t):
    """Componentwise multipliers of ``(rho, q, e)`` in H and G."""
    D = cube_minus_one(t)
    if kind is CouplingKind.SMOOTH:
        H = (-(t**3 - 4 * t**2 + 5 * t - 2) / D, -1.0, -2 * (-(t**3) + 2 * t**2 - t) / (3 * D))
        G = (
            -4 * (t**3 - 2 * t**2) / (3 * D),
            1.0,
            -(70 * t**4 - 257 * t**3 + 342 * t**2 - 207 * t + 36) / (18 * D),
        )
    elif kind is CouplingKind.MOMENTUM:
        H = (8 * (-(t**3) + 2 * t**2 - t) / (3 * D), -1.0, -2 * (5 * t**4 - 7 * t**3 - t**2 + 3 * t) / (9 * D))
        G = (
            64 * (t**3 + 3 * t**2) / (27 * D),
            1.0,
            -(565 * t**4 - 1599 * t**3 + 927 * t**2 - 405 * t) / (81 * D),
        )
    elif kind is CouplingKind.LAX:
        H = (-1.0, -1.0, 0.0)
        G = (-4 * t / (3 * (t - 1)), 1.0, -(35 * t**2 - 9 * (4 * t - 1)) / (9 * (t - 1)))
    else:
        den = 4 * (2 * t**3 + 9 * t**2) + 27 * (2 * t + 1)
        num = 2 * (4 * t**3 + 12 * t**2 + 9 * t)
        H = (-num / den, -1.0, num / den)
        G = (-4 * (t**3 + 3 * t**2) / den, 1.0, 12 * (t**3 + 2 * t**2) / den)
    return np.array(H), np.array(G)


@dataclass(frozen=True)
class ExpansionHG:
    H: np.ndarray
    G: np.ndarray


def expansion_hg(kind, u: GasState, law: GasLaw = IDEAL_GAS) -> ExpansionHG:
    """Closed-form ``H(u)`` and ``G(u)`` in ``(rho, q, e)`` variables."""
    kind = CouplingKind.parse(kind)
    require_closed_form_gamma(law)
    theta = primitives(u, law).theta
    _check_theta(theta)
    if u.q <= 0.0:
        raise DomainError("v", u.q / u.rho, "expansions assume positive fluid speed")
    H, G = _hg_coefficients(kind, theta)
    x = u.rqe()
    return ExpansionHG(H * x, G * x)


def expansion_h(kind, u: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    return expansion_hg(kind, u, law).H


# ------------------------------------------------------- f1, f2 and chi


def f_coeffs(kind, theta):
    """Closed-form ``(f1, f2)`` of the one-junction transmission ratio."""
    kind = CouplingKind.parse(kind)
    _check_theta(theta)
    t = theta
    r = math.sqrt(t)
    D = cube_minus_one(t)
    Dr = D * (r - 1.0)  # sqrt(t) (t^3 - 3t^2 + 3t - 1) - (t^3 - 3t^2 + 3t - 1)
    if kind is CouplingKind.SMOOTH:
        f1 = -(-3 * t + (t - 3) * r - 3) / (6 * (t - 1) * (r - 1))
        f2 = (
            r * (126 * t**4 - 505 * t**3 + 758 * t**2 - 489 * t + 270)
            + 42 * t**4
            - 183 * t**3
            + 278 * t**2
            + 33 * t
            + 54
        ) / (72 * Dr)
    elif kind is CouplingKind.MOMENTUM:
        f1 = (r * (9 * t**2 + 2 * t - 27) + 3 * t**2 - 42 * t - 9) / (18 * (t - 1) * (r - 1))
        f2 = (
            r * (154 * t**5 + 931 * t**4 - 4416 * t**3 + 6570 * t**2 + 990 * t + 891)
            + 86 * t**5
            - 311 * t**4
            - 752 * t**3
            + 7038 * t**2
            + 1026 * t
            + 81
        ) / (324 * Dr)
    elif kind is CouplingKind.LAX:
        f1 = 0.0
        f2 = (r * (63 * t**2 - 106 * t + 27) + 21 * t**2 - 78 * t + 9) / (36 * (t - 1) * (r - 1))
    else:
        f1 = (-2 * t**2 + 4 * t**1.5 + 3 * t - 9) / (2 * (4 * t**2 + 12 * t + 9))
        f2 = (32 * t**4 + 8 * r * (4 * t**3 + 9 * t**2 - 9 * t) + 316 * t**3 + 558 * t**2 + 216 * t + 81) / (
            6 * (2 * t + 3) ** 4
        )
    return f1, f2


def chi_closed(kind, theta):
    """Closed-form amplification coefficient of a junction pair."""
    kind = CouplingKind.parse(kind)
    _check_theta(theta)
    t = theta
    r = math.sqrt(t)
    Dr = cube_minus_one(t) * (r - 1.0)
    if kind is CouplingKind.SMOOTH:
        num = r * (126 * t**4 - 506 * t**3 + 773 * t**2 - 480 * t + 279) + 42 * t**4 - 174 * t**3 + 311 * t**2
        return (num + 96 * t + 45) / (36 * Dr)
    if kind is CouplingKind.MOMENTUM:
        a = r * (407 * t**5 + 1931 * t**4 - 7858 * t**3 + 14766 * t**2 + 1179 * t + 1863)
        b = -23 * t**5 + 141 * t**4 + 2002 * t**3 + 15714 * t**2 + 2565 * t + 81
        return (a + b) / (324 * Dr)
    if kind is CouplingKind.LAX:
        num = r * (63 * t**2 - 106 * t + 27) + 21 * t**2 - 78 * t + 9
        return num / (18 * (t - 1) * (r - 1))
    num = 60 * t**4 + 96 * r * (t**3 + t**2 - 3 * t) + 700 * t**3 + 1107 * t**2 - 54 * t + 81
    return num / (6 * (2 * t + 3) ** 4)


def theta_plus_closed(kind, theta, sigma3m, h):
    """Closed-form ``theta+`` after the first interaction.

    ``sigma3m`` is the incoming strength relative to the background density.
    The ``L`` expression is read with the stray ``2`` multiplying the
    preceding ``sqrt(theta)`` group.
    """
    kind = CouplingKind.parse(kind)
    _check_theta(theta)
    t, s = theta, sigma3m
    r = math.sqrt(t)
    Dp = cube_minus_one(t) * (r + 1.0)  # sqrt(t) D + D
    if kind is CouplingKind.SMOOTH:
        first = (r * ((s + 6) * t**2 + 18 * t - 9 * s) + 2 * (3 - 2 * s) * t**2 + 6 * (2 * s + 3) * t) / (
            9 * (t - 1) * (r + 1)
        )
        sec_a = r * (
            14 * (11 * s - 30) * t**5
            + (990 - 301 * s) * t**4
            + 3 * (25 * s - 236) * t**3
            + (111 * s - 18) * t**2
            + 45 * (12 - s) * t
            - 378 * s
        )
        sec_b = (
            4 * (217 * s - 105) * t**5
            + 2 * (495 - 1489 * s) * t**4
            + 4 * (928 * s - 177) * t**3
            - 2 * (1077 * s - 9) * t**2
            + 24 * (26 * s + 15) * t
        )
        return t - first * h - (sec_a + sec_b) / (108 * Dp) * h**2
    if kind is CouplingKind.MOMENTUM:
        first = (
            r * ((11 * s - 30) * t**3 + (-19 * s - 108) * t**2 + 9 * (5 * s - 6) * t + 27 * s)
            + 2 * (31 * s - 15) * t**3
            - 36 * (s + 3) * t**2
            - 18 * (5 * s + 3) * t
        ) / (27 * (t - 1) * (r + 1))
        sec_a = r * (
            2 * (233 * s - 300) * t**6
            + (1279 * s - 5310) * t**5
            + (5400 - 2543 * s) * t**4
            + 6 * (677 * s + 1242) * t**3
            + 36 * (109 - 297 * s) * t**2
            + 729 * (2 - 5 * s) * t
            - 1215 * s
        )
        sec_b = (
            4 * (601 * s - 150) * t**6
            + 2 * (3521 * s - 2655) * t**5
            + 8 * (225 - 3814 * s) * t**4
            + 36 * (655 * s + 207) * t**3
            + 108 * (53 * s + 36) * t**2
            + 162 * (9 * s + 25) * t
        )
        return t - first * h - (sec_a + sec_b) / (486 * Dp) * h**2
    if kind is CouplingKind.LAX:
        num = (
            2 * r * ((77 * s - 210) * t**3 + (-13 * s - 36) * t**2 + 27 * (s + 2) * t - 27 * s)
            + (217 * s - 105) * t**3
            - 4 * (147 * s + 9) * t**2
            + 18 * (5 * s + 3) * t
        )
        return t - num / (54 * (t - 1) * (r + 1)) * h**2
    first = (
        -2 * (s + 6) * t**3 + r * (10 * s * t**2 + 27 * s * t + 27 * s) + 3 * (s - 18) * t**2 - 9 * (s + 6) * t
    ) / (3 * (4 * t**2 + 12 * t + 9))
    den2 = 48 * (2 * t**4 + 12 * t**3 + 27 * t**2 + 27 * t + 12)
    sec_a = -48 * (s + 5) * t**5 + r * (144 * s * t**4 + 780 * s * t**3 + 2214 * s * t**2 + 1944 * s * t + 1215 * s)
    sec_b = -4 * (91 * s + 342) * t**4 - 54 * (11 * s + 56) * t**3 - 216 * (2 * s + 15) * t**2 - 81 * (5 * s + 18) * t
    return t + first * h - (sec_a + sec_b) / den2 * h**2


# ----------------------------------------------------------- oracles


def _fit(hs, ys, order):
    """Least-squares fit ``y = sum_k c_k h^k`` for ``k = 1..order``; returns coefficients and rms residual."""
    hs = np.asarray(hs, dtype=float)
    A = np.column_stack([hs**k for k in range(1, order + 1)])
    coef, *_ = np.linalg.lstsq(A, np.asarray(ys, dtype=float), rcond=None)
    resid = np.asarray(ys) - A @ coef
    return coef, float(np.sqrt(np.mean(resid**2))) if len(hs) > order else 0.0


@dataclass(frozen=True)
class TSeries:
    H: np.ndarray
    G: np.ndarray
    residual: np.ndarray


def extract_t_series(
    kind, u: GasState, law: GasLaw = IDEAL_GAS, h_grid=T_SERIES_H_GRID, order=4, a=1.0, **tmap_kw
) -> TSeries:
    """Fit ``T(a, a(1+h); u) - u`` in ``(rho, q, e)`` against powers of ``h``.

    ``order`` terms ``h .. h^order`` are fitted so that higher-order terms
    do not bias the ``h`` and ``h^2`` coefficients; the fit needs at least
    ``order + 1`` grid points to report a residual.
    """
    kind = CouplingKind.parse(kind)
    hs = [float(h) for h in h_grid]
    if len(hs) < order:
        raise ValueError(f"need at least {order} grid points, got {len(hs)}")
    x0 = u.rqe()
    rows = np.array([t_map(kind, a, a * (1.0 + h), u, law, **tmap_kw).rqe() - x0 for h in hs])
    H, G, res = np.empty(3), np.empty(3), np.empty(3)
    for i in range(3):
        coef, res[i] = _fit(hs, rows[:, i], order)
        H[i], G[i] = coef[0], coef[1]
    return TSeries(H, G, res)


@dataclass(frozen=True)
class InteractionSeries:
    theta: float
    f1: float
    f2: float
    chi: float
    pair_linear: float
    fit_residual_single: float
    fit_residual_pair: float
    drift: float


def extract_interaction_series(
    kind,
    theta,
    law: GasLaw = IDEAL_GAS,
    rho_bar=1.0,
    e_bar=1.0,
    epsilon=DEFAULT_EPSILON,
    h_grid=DEFAULT_H_GRID,
    order=4,
    **solver_kw,
) -> InteractionSeries:
    """Numerical ``f1``, ``f2`` and ``chi`` from the nonlinear interaction solvers.

    The incoming strength is ``epsilon * rho_bar``; ratios at ``epsilon`` and
    ``epsilon / 2`` are extrapolated linearly to zero strength, and
    ``drift`` reports the relative change of the fitted coefficients between
    the two strengths.
    """
    from .junction import amplify_pair

    kind = CouplingKind.parse(kind)
    u = state_from_theta(theta, law, rho_bar, e_bar)
    hs = [float(h) for h in h_grid]

    def ratios(eps):
        single, pair = [], []
        for h in hs:
            res = amplify_pair(kind, u, eps * rho_bar, 1.0, h, law, **solver_kw)
            single.append(res.first.ratio)
            pair.append(res.ratio)
        return np.array(single), np.array(pair)

    s1, p1 = ratios(epsilon)
    s2, p2 = ratios(0.5 * epsilon)
    single = 2.0 * s2 - s1
    pair = 2.0 * p2 - p1
    cs, rs = _fit(hs, single - 1.0, order)
    cp, rp = _fit(hs, pair - 1.0, order)
    cs1, _ = _fit(hs, s1 - 1.0, order)
    cs2, _ = _fit(hs, s2 - 1.0, order)
    scale = max(abs(cs2[0]), abs(cs2[1]), 1e-300)
    drift = float(max(abs(cs1[0] - cs2[0]), abs(cs1[1] - cs2[1])) / scale)
    return InteractionSeries(float(theta), float(cs[0]), float(cs[1]), float(cp[1]), float(cp[0]), rs, rp, drift)
