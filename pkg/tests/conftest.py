"""Shared plants, filters and strategies.

The worked example throughout the suite is the plant

    y(t+1) = -0.2 y(t) + 0.0125 y(t-1) + u(t) - 1.1 u(t-1)

with poles 0.05 and -0.25 and a non-minimum-phase zero at 1.1.
"""

import numpy as np
import pytest
from hypothesis import assume, strategies as st

import sbt_ilc

EXAMPLE_NUM = [0.0, 1.0, -1.1]
EXAMPLE_DEN = [1.0, 0.2, -0.0125]
EXAMPLE_ALPHA = 0.45
EXAMPLE_BAND = [0.0055, 0.4950]


@pytest.fixture
def example_plant():
    return sbt_ilc.RationalPlant(EXAMPLE_NUM, EXAMPLE_DEN)


@pytest.fixture
def example_fp(example_plant):
    return sbt_ilc.factor_plant(example_plant)


@pytest.fixture
def unity():
    return sbt_ilc.ZeroPhaseFilter.identity()


def random_filter(rng, nq):
    """Zero-phase filter with random taps rescaled to unit DC gain."""
    q = rng.uniform(-0.3, 0.3, nq + 1)
    q[0] = 1.0 - 2.0 * q[1:].sum()
    return sbt_ilc.ZeroPhaseFilter(q)


def random_gminus(rng, nu):
    return np.concatenate([[1.0], rng.uniform(-2.0, 2.0, nu)])


@st.composite
def stable_plants(draw, max_poles=3, max_zeros=3):
    """Stable plants with relative degree 1, built from poles and zeros."""
    poles = draw(st.lists(st.floats(-0.9, 0.9), max_size=max_poles))
    zeros = draw(st.lists(st.floats(-2.0, 2.0), max_size=max_zeros))
    gain = draw(st.floats(0.5, 2.0))
    den = np.poly(poles) if poles else np.array([1.0])
    num = gain * (np.poly(zeros) if zeros else np.array([1.0]))
    return sbt_ilc.RationalPlant(np.concatenate([[0.0], num]), den)


@st.composite
def zero_phase_filters(draw, max_nq=4):
    nq = draw(st.integers(0, max_nq))
    taps = draw(st.lists(st.floats(-0.3, 0.3), min_size=nq, max_size=nq))
    q = np.concatenate([[1.0 - 2.0 * sum(taps)], taps])
    return sbt_ilc.ZeroPhaseFilter(q)


@st.composite
def gminus_factors(draw, max_nu=3):
    nu = draw(st.integers(0, max_nu))
    tail = draw(st.lists(st.floats(-2.0, 2.0), min_size=nu, max_size=nu))
    g = np.array([1.0] + tail)
    assume(np.all(np.isfinite(g)))
    return sbt_ilc.FactoredPlant.from_gminus(g)
