"""Shared fixtures: the subcritical reference sweep.

The sweep is the most expensive object the suite needs and several
modules consume it (solver tests, reduced-equation tests, acceptance),
so it is built once per session on the default grid.
"""

import pytest

from navier_bubbles.green_robin import BallDomain
from navier_bubbles.solver import continuation_sweep, decompose

SWEEP_OFFSETS = (0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)


@pytest.fixture(scope="session")
def unit_ball6():
    return BallDomain.unit(6)


@pytest.fixture(scope="session")
def subcritical_sweep(unit_ball6):
    return continuation_sweep(list(SWEEP_OFFSETS), unit_ball6)


@pytest.fixture(scope="session")
def sweep_decompositions(unit_ball6, subcritical_sweep):
    return [decompose(s, unit_ball6) for s in subcritical_sweep]
