"""Coupling conditions for the full Euler system at pipe junctions.

Ideal-gas thermodynamics, Lax curves and Riemann solvers, the four
junction coupling conditions with their transmission maps, wave-junction
interactions and the second-order amplification analysis.
"""

from .asymptotics import (
    CLOSED_FORM_GAMMA,
    chi_closed,
    expansion_hg,
    extract_interaction_series,
    extract_t_series,
    f_coeffs,
    theta_plus_closed,
)
from .coupling import (
    ALL_KINDS,
    CouplingKind,
    PiecewiseSection,
    SmoothSection,
    det_criterion,
    integrate_stationary,
    psi_residual,
    t_map,
)
from .errors import (
    AmplitudeOverflow,
    DomainError,
    EulerJunctionError,
    IntegrationError,
    NoConvergence,
    NonSubsonicResult,
    NonSubsonicTrace,
    NotApplicable,
    SectionRatioError,
    SonicError,
    SpeedSignError,
    UnsupportedGamma,
    VacuumError,
)
from .junction import amplify_pair, chain_propagate, interact_incoming, solve_junction_riemann, stationary_profile
from .thermo import GAMMA_DEFAULT, IDEAL_GAS, GasLaw, GasState, eigensystem, is_subsonic, primitives, state_from_theta
from .waves import FORWARD, REVERSED, CurveDirection, lax_curve, lax_tangent_at_zero, solve_riemann

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
