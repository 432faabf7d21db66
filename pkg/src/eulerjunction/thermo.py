"""Ideal-gas thermodynamics and eigenstructure of the 1D Euler system.

States are stored in conserved variables ``(rho, q, E)``; every derived
quantity is recomputed on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

GAMMA_DEFAULT = 5.0 / 3.0


@dataclass(frozen=True)
class GasLaw:
    """Ideal gas ``p = (gamma - 1) rho e``."""

    gamma: float = GAMMA_DEFAULT

    def __post_init__(self):
        if not (self.gamma > 1.0) or not math.isfinite(self.gamma):
            raise DomainError("gamma", self.gamma, f"gamma must exceed 1, got {self.gamma!r}")

    def pressure(self, rho, e):
        return (self.gamma - 1.0) * rho * e

    def dp_drho(self, rho, e):
        return (self.gamma - 1.0) * e

    def dp_de(self, rho, e):
        return (self.gamma - 1.0) * rho

    def sound_speed(self, rho, e):
        return math.sqrt(self.gamma * (self.gamma - 1.0) * e)

    def entropy(self, rho, e):
        return math.log(e) - (self.gamma - 1.0) * math.log(rho)


IDEAL_GAS = GasLaw()


@dataclass(frozen=True)
class GasState:
    """A fluid state in conserved variables: density, momentum, total energy."""

    rho: float
    q: float
    E: float

    def __post_init__(self):
        rho, q, E = float(self.rho), float(self.q), float(self.E)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "E", E)
        if not rho > 0.0:
            raise DomainError("rho", rho)
        if not E > 0.0:
            raise DomainError("E", E)
        e = E / rho - 0.5 * q * q / (rho * rho)
        if not e > 0.0:
            raise DomainError("e", e, f"internal energy e = {e!r} <= 0 for state {self!r}")

    @property
    def v(self):
        return self.q / self.rho

    @property
    def e(self):
        return self.E / self.rho - 0.5 * self.q * self.q / (self.rho * self.rho)

    def as_array(self):
        return np.array([self.rho, self.q, self.E])

    def rqe(self):
        """Return ``(rho, q, e)``, the variables used by the series expansions."""
        return np.array([self.rho, self.q, self.e])

    @classmethod
    def from_array(cls, x):
        return cls(float(x[0]), float(x[1]), float(x[2]))

    @classmethod
    def from_rqe(cls, x):
        rho, q, e = float(x[0]), float(x[1]), float(x[2])
        if not rho > 0.0:
            raise DomainError("rho", rho)
        if not e > 0.0:
            raise DomainError("e", e)
        return cls(rho, q, 0.5 * q * q / rho + rho * e)


class Primitives(NamedTuple):
    v: float
    e: float
    p: float
    S: float
    c: float
    theta: float


@dataclass(frozen=True)
class Eigensystem:
    """Wave speeds and eigenvectors; vectors are stored as matrix columns.

    ``r`` are the right eigenvectors of the flux Jacobian in conserved
    variables, ``r_tilde`` the Lax-curve tangents in ``(rho, q, e)``.
    """

    lam: np.ndarray
    r: np.ndarray
    r_tilde: np.ndarray


def primitives(u: GasState, law: GasLaw = IDEAL_GAS) -> Primitives:
    rho = u.rho
    v = u.q / rho
    e = u.E / rho - 0.5 * v * v
    if not e > 0.0:
        raise DomainError("e", e)
    p = law.pressure(rho, e)
    c = law.sound_speed(rho, e)
    return Primitives(v, e, p, law.entropy(rho, e), c, v * v / (c * c))


def conserved_from_primitive(rho, v, e, law: GasLaw = IDEAL_GAS) -> GasState:
    if not rho > 0.0:
        raise DomainError("rho", rho)
    if not e > 0.0:
        raise DomainError("e", e)
    return GasState(rho, rho * v, 0.5 * rho * v * v + rho * e)


def state_from_theta(theta, law: GasLaw = IDEAL_GAS, rho_bar=1.0, e_bar=1.0) -> GasState:
    """Subsonic state with ``rho = rho_bar``, ``e = e_bar`` and ``v = sqrt(theta) c``."""
    if not 0.0 < theta < 1.0:
        raise DomainError("theta", theta)
    c = law.sound_speed(rho_bar, e_bar)
    return conserved_from_primitive(rho_bar, math.sqrt(theta) * c, e_bar, law)


def theta_of(u: GasState, law: GasLaw = IDEAL_GAS) -> float:
    return primitives(u, law).theta


def flux(u: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    """Return ``(q, P, F)`` with ``P = q^2/rho + p`` and ``F = q (E + p) / rho``."""
    v = u.q / u.rho
    p = law.pressure(u.rho, u.E / u.rho - 0.5 * v * v)
    return np.array([u.q, u.q * v + p, v * (u.E + p)])


def flux_jacobian(u: GasState, law: GasLaw = IDEAL_GAS) -> np.ndarray:
    rho, q, E = u.rho, u.q, u.E
    v = q / rho
    e = E / rho - 0.5 * v * v
    p = law.pressure(rho, e)
    pr, pe = law.dp_drho(rho, e), law.dp_de(rho, e)
    # partial derivatives of p(rho, e(rho, q, E))
    dp = np.array([pr + pe / rho * (v * v - E / rho), -pe * v / rho, pe / rho])
    dP = np.array([-v * v, 2.0 * v, 0.0]) + dp
    H = (E + p) / rho
    dF = np.array([-v * H, H, v]) + v * dp
    return np.array([[0.0, 1.0, 0.0], dP, dF])


def eigensystem(u: GasState, law: GasLaw = IDEAL_GAS) -> Eigensystem:
    rho, q, E = u.rho, u.q, u.E
    v, e, p, _, c, _ = primitives(u, law)
    pe = law.dp_de(rho, e)
    g1 = law.gamma - 1.0
    lam = np.array([v - c, v, v + c])
    r = np.array(
        [
            [-rho, rho, rho],
            [rho * c - q, q, q + rho * c],
            [q * c - E - p, E + p - rho * rho * c * c / pe, E + p + q * c],
        ]
    )
    # tangents d/dsigma of the forward Lax curves at zero strength, (rho, q, e)
    r_tilde = np.array(
        [
            [-1.0, 1.0, 1.0],
            [c - v, v, v + c],
            [-g1 * e / rho, -e / rho, g1 * e / rho],
        ]
    )
    return Eigensystem(lam, r, r_tilde)


def is_subsonic(u: GasState, law: GasLaw = IDEAL_GAS) -> bool:
    """True iff ``lambda1 < 0 < lambda2``, i.e. ``0 < v < c``."""
    v, _, _, _, c, _ = primitives(u, law)
    return 0.0 < v < c
