"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 3]

Each kernel runs once untimed per backend so numba compilation (or cache
loading) is excluded.  The best of ``--repeat`` runs is reported, along with
the largest disagreement between backends.
"""
import argparse
import time

import numpy as np

from sysshock import kernels
from sysshock.montecarlo import SimulationConfig, sample_model
from sysshock.shock_model import ModelParams


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba unavailable or disabled; timing the numpy backend only")

    rng = np.random.default_rng(0)
    n = args.n
    gumbel = ModelParams.from_family("gumbel", [0.5, 0.3, 0.7], [0.2, 0.3, 0.4, 0.1], [2.0, 3.0, 1.5])
    clayton = ModelParams.from_family("clayton", [0.5, 0.3, 0.7], [0.2, 0.3, 0.4, 0.1], [2.0, 3.0, 1.5])
    unif = rng.random((n, 7)) + 2.0**-54
    u, w = unif[:, 1], unif[:, 2]
    ties = rng.integers(0, n // 4, n).astype(float)

    cases = {
        "cond_inverse gumbel": lambda b: kernels.cond_inverse(1, 2.0, u, w, b),
        "sample_latent clayton": lambda b: kernels.sample_latent(unif, *clayton.kernel_arrays(), backend=b)[1],
        "sample_latent gumbel": lambda b: kernels.sample_latent(unif, *gumbel.kernel_arrays(), backend=b)[1],
        "count_inversions": lambda b: np.array([kernels.count_inversions(ties, b)], dtype=float),
        "sample_model gumbel": lambda b: sample_model(gumbel, SimulationConfig(n, seed=1, backend=b)).T,
    }
    print(f"n = {n}, best of {args.repeat}")
    extra = f"{'speedup':>10}{'max rel diff':>14}" if len(backends) == 2 else ""
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + extra)
    for name, fn in cases.items():
        res = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        line = f"{name:<24}" + "".join(f"{res[b][0]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            a, c = res["numba"][1], res["numpy"][1]
            diff = np.max(np.abs(a - c) / np.maximum(np.abs(c), 1e-300))
            line += f"{res['numpy'][0] / res['numba'][0]:>9.1f}x{diff:>14.2e}"
        print(line)


if __name__ == "__main__":
    main()
