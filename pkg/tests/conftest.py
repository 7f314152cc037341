"""Shared fixtures: default packet parameters and exact fields."""

import pytest

from slitsim import analytic
from slitsim.core import WavePacketParams


@pytest.fixture(scope="session")
def params():
    return WavePacketParams()


@pytest.fixture(scope="session")
def packet_field(params):
    """Isolated Gaussian packet released from the upper slit."""
    return analytic.SlitPacketField(params)


@pytest.fixture(scope="session")
def one_field(params):
    """Symmetrized one-particle two-slit field."""
    return analytic.OneParticleField(params)


@pytest.fixture(scope="session")
def boson_field():
    return analytic.TwoParticleField(
        WavePacketParams(particles=2, exchange_sign=+1))


@pytest.fixture(scope="session")
def fermion_field():
    return analytic.TwoParticleField(
        WavePacketParams(particles=2, exchange_sign=-1))
