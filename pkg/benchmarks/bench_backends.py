"""Timing comparison of the numba kernels against the pure-numpy fallback.

Run as:  python benchmarks/bench_backends.py
The active backend comes from SEASRUIN_BACKEND; when numba is active the
fallback implementations are benchmarked side by side on the same inputs.
"""

import time

import numpy as np

from seasruin import RiskModel, displaced_poisson, truncate
from seasruin._kernels import (
    BACKEND,
    _finite_dp_layer_numpy,
    _mc_ruin_times_numpy,
    finite_dp_layer,
    mc_ruin_times,
)


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_monte_carlo():
    model = RiskModel(
        kappa=5, seasons=tuple(displaced_poisson(k / (k + 1) + 4.0) for k in range(1, 11))
    )
    tables = [np.cumsum(truncate(d, 1e-15).probs) for d in model.seasons]
    width = max(len(t) for t in tables)
    cdf = np.ones((10, width))
    for j, t in enumerate(tables):
        cdf[j, : len(t)] = t
    args = (cdf, 5, 5, 200, 200_000, 12345)

    mc_ruin_times(*args)  # warm up (JIT compile)
    t_active, a = timed(mc_ruin_times, *args)
    t_numpy, b = timed(_mc_ruin_times_numpy, *args)
    assert np.array_equal(a, b), "backends must tally identically"
    return ("monte carlo (200k paths x 200 periods)", t_active, t_numpy)


def bench_dp_layer():
    rng = np.random.default_rng(0)
    cur = rng.random((10, 4000))
    pmf = rng.random((10, 120))
    pmf /= pmf.sum(axis=1, keepdims=True)
    args = (cur, pmf, 5, 3900)

    finite_dp_layer(*args)  # warm up
    t_active, a = timed(finite_dp_layer, *args, repeat=10)
    t_numpy, b = timed(_finite_dp_layer_numpy, *args, repeat=10)
    assert np.allclose(a, b, atol=1e-12)
    return ("finite-horizon dp layer (10 x 4000)", t_active, t_numpy)


def main():
    print(f"active backend: {BACKEND}")
    rows = [bench_monte_carlo(), bench_dp_layer()]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {BACKEND:>10}   numpy    speedup")
    for name, t_active, t_numpy in rows:
        speedup = t_numpy / t_active if t_active > 0 else float("inf")
        print(f"{name.ljust(width)}  {t_active * 1e3:8.1f}ms {t_numpy * 1e3:8.1f}ms  {speedup:6.1f}x")
    if BACKEND == "numpy":
        print("note: numba backend inactive; both columns ran the numpy fallback")


if __name__ == "__main__":
    main()
