import math
import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import CHANNELS, HORIZON
from lgnoise import _accel, kernels
from lgnoise.correlators import _kraus_stacks, plus_projectors
from lgnoise.qubit import DensityMatrix

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def batch(channel_name, rng, n=500):
    ch = CHANNELS[channel_name]
    rho = np.array([DensityMatrix.random(rng).mat for _ in range(n)])
    th = rng.uniform(-math.pi, math.pi, n)
    ph = rng.uniform(-math.pi / 2, math.pi / 2, n)
    ti = rng.uniform(0, HORIZON[channel_name], n)
    tj = ti + rng.uniform(0, HORIZON[channel_name], n)
    return rho, _kraus_stacks(ch, ti), _kraus_stacks(ch, tj - ti), plus_projectors(th, ph)


@needs_numba
def test_numba_and_numpy_paths_agree(channel_name, rng):
    args = batch(channel_name, rng)
    c1, e1 = kernels.chain_correlators_numba(*args)
    c2, e2 = kernels.chain_correlators_numpy(*args)
    assert np.max(np.abs(c1 - c2)) < 1e-13
    assert np.max(np.abs(e1 - e2)) < 1e-13


def test_zero_probability_branch_skipped():
    # |0><0| measured along sigma_z: the '-' outcome never happens
    rho = np.array([np.diag([1.0, 0.0])], dtype=complex)
    ks = np.array([[np.eye(2), np.zeros((2, 2))]], dtype=complex)
    pp = np.array([np.diag([1.0, 0.0])], dtype=complex)
    for fn in (kernels.chain_correlators_numpy, kernels.chain_correlators):
        c, e = fn(rho, ks, ks, pp)
        assert c[0] == pytest.approx(1.0) and e[0] == pytest.approx(1.0)
        assert np.all(np.isfinite(c))


def test_shape_validation():
    with pytest.raises(ValueError):
        kernels.chain_correlators(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)), np.zeros((2, 1, 2, 2)), np.zeros((2, 2, 2)))


def test_projector_stack_matches_observable():
    from lgnoise.qubit import observable

    th = np.array([0.0, 1.0, -2.5, math.pi / 2])
    ph = np.array([0.3, -1.2, 1.5, 0.0])
    stack = plus_projectors(th, ph)
    for k in range(len(th)):
        assert np.allclose(stack[k], observable(th[k], ph[k])[1].mat)


@pytest.mark.parametrize("flag,expected", [("1", "False"), ("", str(_accel.HAVE_NUMBA))])
def test_env_flag_selects_path(flag, expected):
    env = dict(os.environ, **{_accel.ENV_FLAG: flag})
    out = subprocess.run(
        [sys.executable, "-c", "from lgnoise import _accel; print(_accel.NUMBA_ENABLED)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected


def test_dummy_njit_passthrough(monkeypatch):
    monkeypatch.setattr(_accel, "HAVE_NUMBA", False)

    def f(x):
        return x + 1

    assert _accel.njit(f) is f
    assert _accel.njit(cache=True)(f) is f
