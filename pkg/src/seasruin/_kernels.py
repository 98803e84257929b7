"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The backend is chosen once at import from the environment variable
``SEASRUIN_BACKEND`` ("numba" or "numpy"); default is numba when it imports,
numpy otherwise.  Both backends draw from the same splitmix64 streams (one
stream per path), so Monte Carlo tallies are bit-identical across backends.
"""

from __future__ import annotations

import os

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
INV53 = 1.0 / 9007199254740992.0  # 2**-53

RNG_ID = "splitmix64"


def _select_backend():
    env = os.environ.get("SEASRUIN_BACKEND", "").strip().lower()
    if env not in ("", "numba", "numpy"):
        raise ValueError(f"SEASRUIN_BACKEND must be 'numba' or 'numpy', got {env!r}")
    if env == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if env == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# -- numpy reference implementations -----------------------------------------

def _mix64_np(x):
    x = (x ^ (x >> np.uint64(30))) * MIX1
    x = (x ^ (x >> np.uint64(27))) * MIX2
    return x ^ (x >> np.uint64(31))


_MASK = (1 << 64) - 1


def mix64_int(x: int) -> int:
    """Pure-python splitmix64 finalizer, bit-identical to the array version."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * int(MIX1)) & _MASK
    x = ((x ^ (x >> 27)) * int(MIX2)) & _MASK
    return x ^ (x >> 31)


def path_uniforms(seed: int, path_index: int, count: int) -> list:
    """The `count` uniforms drawn by path `path_index` of the batch kernels."""
    state = mix64_int((seed & _MASK) ^ mix64_int(((path_index + 1) * int(GOLDEN)) & _MASK))
    out = []
    for _ in range(count):
        state = (state + int(GOLDEN)) & _MASK
        out.append((mix64_int(state) >> 11) * INV53)
    return out


def derive_states(seed: int, n_paths: int) -> np.ndarray:
    """Initial splitmix64 state per path, decorrelated from (seed, path index)."""
    idx = np.arange(1, n_paths + 1, dtype=np.uint64)
    return _mix64_np(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _mix64_np(idx * GOLDEN))


def _mc_ruin_times_numpy(cdf, u0, kappa, horizon, n_paths, seed):
    n_seasons, width = cdf.shape
    states = derive_states(seed, n_paths)
    wealth = np.full(n_paths, u0, dtype=np.int64)
    alive = np.ones(n_paths, dtype=bool)
    counts = np.zeros(horizon + 2, dtype=np.int64)
    for n in range(1, horizon + 1):
        states += GOLDEN
        z = _mix64_np(states)
        u = (z >> np.uint64(11)).astype(np.float64) * INV53
        row = cdf[(n - 1) % n_seasons]
        claims = np.minimum(np.searchsorted(row, u, side="right"), width - 1)
        wealth += kappa - claims
        ruined = alive & (wealth <= 0)
        counts[n] = np.count_nonzero(ruined)
        alive &= ~ruined
    counts[horizon + 1] = np.count_nonzero(alive)
    return counts


def _finite_dp_layer_numpy(cur, pmf, kappa, valid):
    n_seasons = cur.shape[0]
    width = pmf.shape[1]
    nxt = np.zeros_like(cur)
    idx = np.arange(valid) + kappa
    for j in range(n_seasons):
        jn = (j + 1) % n_seasons
        conv = np.convolve(pmf[j], cur[jn])
        vals = conv[idx]
        inb = idx < width
        vals[inb] -= pmf[j, idx[inb]] * cur[jn, 0]
        nxt[j, :valid] = vals
    return nxt


# -- numba implementations ----------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _mix64(x):
        x = (x ^ (x >> np.uint64(30))) * MIX1
        x = (x ^ (x >> np.uint64(27))) * MIX2
        return x ^ (x >> np.uint64(31))

    @njit(cache=True)
    def _mc_ruin_times_numba(cdf, u0, kappa, horizon, n_paths, seed):
        n_seasons, width = cdf.shape
        counts = np.zeros(horizon + 2, dtype=np.int64)
        seed64 = np.uint64(seed)
        for p in range(n_paths):
            state = _mix64(seed64 ^ _mix64(np.uint64(p + 1) * GOLDEN))
            wealth = np.int64(u0)
            ruin = horizon + 1
            for n in range(1, horizon + 1):
                state += GOLDEN
                u = np.float64(_mix64(state) >> np.uint64(11)) * INV53
                row = (n - 1) % n_seasons
                k = 0
                while k < width - 1 and u >= cdf[row, k]:
                    k += 1
                wealth += kappa - k
                if wealth <= 0:
                    ruin = n
                    break
            counts[ruin] += 1
        return counts

    @njit(cache=True)
    def _finite_dp_layer_numba(cur, pmf, kappa, valid):
        n_seasons = cur.shape[0]
        width = pmf.shape[1]
        nxt = np.zeros_like(cur)
        for j in range(n_seasons):
            jn = (j + 1) % n_seasons
            for u in range(valid):
                acc = 0.0
                top = min(u + kappa, width)
                for i in range(top):
                    acc += cur[jn, u + kappa - i] * pmf[j, i]
                nxt[j, u] = acc
        return nxt


def mc_ruin_times(cdf: np.ndarray, u0: int, kappa: int, horizon: int,
                  n_paths: int, seed: int) -> np.ndarray:
    """Histogram of first-ruin periods over seeded paths.

    ``counts[n]`` paths are first ruined at period n (1-based);
    ``counts[horizon+1]`` paths survive the whole horizon.
    """
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    if BACKEND == "numba":
        return _mc_ruin_times_numba(
            cdf, np.int64(u0), np.int64(kappa), int(horizon), int(n_paths),
            np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        )
    return _mc_ruin_times_numpy(cdf, int(u0), int(kappa), int(horizon), int(n_paths), int(seed))


def finite_dp_layer(cur: np.ndarray, pmf: np.ndarray, kappa: int, valid: int) -> np.ndarray:
    """One horizon step of the season-shifted survival DP.

    ``nxt[j, u] = sum_{i<=u+kappa-1} cur[j+1 mod N, u+kappa-i] * pmf[j, i]``
    for u < valid, with i capped at the pmf width (truncated supports).
    """
    if BACKEND == "numba":
        return _finite_dp_layer_numba(cur, pmf, int(kappa), int(valid))
    return _finite_dp_layer_numpy(cur, pmf, int(kappa), int(valid))
