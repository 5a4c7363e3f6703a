"""Time the batched measurement-chain kernel: numba loop vs numpy einsum.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from lgnoise import kernels
from lgnoise._accel import HAVE_NUMBA
from lgnoise.correlators import _kraus_stacks, plus_projectors
from lgnoise.noise import NoiseChannel
from lgnoise.qubit import DensityMatrix


def make_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    ch = NoiseChannel.rtn(0.05, gamma=0.001)
    rho = np.array([DensityMatrix.random(rng).mat for _ in range(n)])
    ti = rng.uniform(0, 3000, n)
    tj = ti + rng.uniform(0, 3000, n)
    pp = plus_projectors(rng.uniform(-np.pi, np.pi, n), rng.uniform(-np.pi / 2, np.pi / 2, n))
    return rho, _kraus_stacks(ch, ti), _kraus_stacks(ch, tj - ti), pp


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    inputs = make_inputs(args.n)
    t_np, (c_np, e_np) = best_of(kernels.chain_correlators_numpy, inputs, args.repeat)
    print(f"n = {args.n}")
    print(f"numpy : {t_np * 1e3:9.2f} ms")
    if not HAVE_NUMBA:
        print("numba : not installed")
        return
    t0 = time.perf_counter()
    kernels.chain_correlators_numba(*(a[:2] for a in inputs))
    print(f"numba first call (compile or cache load): {(time.perf_counter() - t0) * 1e3:.1f} ms")
    t_nb, (c_nb, e_nb) = best_of(kernels.chain_correlators_numba, inputs, args.repeat)
    print(f"numba : {t_nb * 1e3:9.2f} ms  ({t_np / t_nb:.1f}x)")
    diff = max(np.abs(c_np - c_nb).max(), np.abs(e_np - e_nb).max())
    print(f"max |numba - numpy| = {diff:.1e}")


if __name__ == "__main__":
    main()
