from __future__ import annotations

import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from eulerjunction.thermo import IDEAL_GAS, conserved_from_primitive  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def subsonic_states(draw, theta_min=0.02, theta_max=0.9):
    """Subsonic states with ``v > 0`` spread over a few decades of density and energy."""
    rho = draw(st.floats(0.1, 10.0))
    e = draw(st.floats(0.1, 10.0))
    theta = draw(st.floats(theta_min, theta_max))
    c = IDEAL_GAS.sound_speed(rho, e)
    return conserved_from_primitive(rho, math.sqrt(theta) * c, e)


@pytest.fixture
def law():
    return IDEAL_GAS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "ACCEPTANCE_LINES", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
