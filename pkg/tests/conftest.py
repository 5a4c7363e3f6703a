import math

import numpy as np
import pytest

from lgnoise.noise import NoiseChannel, RtnParams

# Channels used throughout: reference RTN/OUN parameter sets plus a unitary channel.
RTN_NM = NoiseChannel.rtn(0.05, gamma=0.001)
RTN_M = NoiseChannel.rtn(0.05, tau=0.5)
OUN_NM = NoiseChannel.oun(0.1, 0.01)
OUN_M = NoiseChannel.oun(0.1, 100.0)
UNITARY = NoiseChannel.unitary(1.3)

CHANNELS = {
    "rtn-nm": RTN_NM,
    "rtn-m": RTN_M,
    "oun-nm": OUN_NM,
    "oun-m": OUN_M,
    "unitary": UNITARY,
}

# a time scale per channel over which the coherence factor does something
HORIZON = {
    "rtn-nm": 3000.0,
    "rtn-m": 5.0,
    "oun-nm": 60.0,
    "oun-m": 60.0,
    "unitary": 2 * math.pi / 1.3,
}


@pytest.fixture
def rng():
    return np.random.default_rng(20240518)


@pytest.fixture(params=sorted(CHANNELS))
def channel_name(request):
    return request.param


def rtn_from_mu(m, gamma=1.0):
    return NoiseChannel(RtnParams.from_mu(m, gamma))
