from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from dlcz.channel import ChannelParams

probs = st.floats(min_value=0.0, max_value=0.9)
pos_probs = st.floats(min_value=1e-4, max_value=0.9)
effs = st.floats(min_value=0.05, max_value=1.0)
phases = st.floats(min_value=-math.pi, max_value=math.pi)


@st.composite
def channel_params(draw, *, excited: bool = True):
    p = pos_probs if excited else probs
    return ChannelParams(
        p_cL=draw(p), p_cR=draw(p),
        eta_L=draw(effs), eta_R=draw(effs),
        eta_1=draw(effs), eta_2=draw(effs),
        theta_L=draw(phases), theta_R=draw(phases),
    )


def random_channel(rng: np.random.Generator, p_max: float = 0.9, eta_min: float = 0.05) -> ChannelParams:
    return ChannelParams(
        *rng.uniform(1e-4, p_max, 2), *rng.uniform(eta_min, 1.0, 4), *rng.uniform(-math.pi, math.pi, 2)
    )


def random_qubit(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
