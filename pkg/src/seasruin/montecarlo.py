"""Seeded Monte Carlo oracle for the risk walk W(n) = u + kappa*n - sum X_i.

Sampling inverts each season's cdf (sequential search from the support start)
using one splitmix64 stream per path, so estimates are bit-reproducible for a
given seed on either kernel backend.  Ultimate-time probabilities are only
approximated by long horizons and the approximation overestimates phi, since
phi(u, T) decreases in T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import RNG_ID
from .distributions import truncate
from .errors import ValidationError
from .model import RiskModel

SAMPLING_TAIL = 1e-15

__all__ = ["SimConfig", "Estimate", "simulate_path", "estimate_survival",
           "survival_curve", "trajectory", "RNG_ID"]


@dataclass(frozen=True)
class SimConfig:
    paths: int
    horizon: int
    seed: int
    u: int = 0

    def __post_init__(self):
        if self.paths < 1 or self.horizon < 1:
            raise ValidationError("paths and horizon must be >= 1")


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    half_width_95: float
    paths: int

    def half_width(self, z: float) -> float:
        """Half-width at another normal quantile (e.g. 2.576 for 99%)."""
        if self.half_width_95 == 0.0 and self.p_hat in (0.0, 1.0):
            return 0.0
        return self.half_width_95 * z / 1.96


def _cdf_matrix(model: RiskModel) -> np.ndarray:
    tables = [np.cumsum(truncate(d, SAMPLING_TAIL).probs) for d in model.seasons]
    width = max(len(t) for t in tables)
    out = np.ones((model.n_seasons, width))
    for j, t in enumerate(tables):
        out[j, : len(t)] = t
        out[j, len(t):] = t[-1]
    return out


def simulate_path(model: RiskModel, u: int, horizon: int, seed: int,
                  path_index: int = 0) -> bool:
    """Single trajectory; True iff W(n) > 0 for every n <= horizon.

    Draws the same stream as path `path_index` of the batch kernels.
    """
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    cdf = _cdf_matrix(model)
    width = cdf.shape[1]
    wealth = u
    for n, x in enumerate(_kernels.path_uniforms(seed, path_index, horizon), start=1):
        row = cdf[(n - 1) % model.n_seasons]
        k = min(int(np.searchsorted(row, x, side="right")), width - 1)
        wealth += model.kappa - k
        if wealth <= 0:
            return False
    return True


def _ruin_histogram(model: RiskModel, cfg: SimConfig) -> np.ndarray:
    cdf = _cdf_matrix(model)
    return _kernels.mc_ruin_times(cdf, cfg.u, model.kappa, cfg.horizon, cfg.paths, cfg.seed)


def estimate_survival(model: RiskModel, cfg: SimConfig) -> Estimate:
    """Bernoulli estimate of phi(u, horizon) with a 95% normal interval."""
    counts = _ruin_histogram(model, cfg)
    p = counts[cfg.horizon + 1] / cfg.paths
    hw = 1.96 * math.sqrt(p * (1.0 - p) / cfg.paths)
    return Estimate(p_hat=float(p), half_width_95=hw, paths=cfg.paths)


def survival_curve(model: RiskModel, cfg: SimConfig) -> np.ndarray:
    """p_hat of phi(u, t) for every t = 1..horizon from one batch of paths."""
    counts = _ruin_histogram(model, cfg)
    ruined_by = np.cumsum(counts[1:-1])
    return (cfg.paths - ruined_by) / cfg.paths


def trajectory(model: RiskModel, u: int, n_periods: int, seed: int) -> np.ndarray:
    """One seeded path as an array of rows (n, claim, wealth); row 0 is the start."""
    if n_periods < 1:
        raise ValidationError("n_periods must be >= 1")
    cdf = _cdf_matrix(model)
    width = cdf.shape[1]
    rows = [(0, 0, float(u))]
    wealth = float(u)
    for n, x in enumerate(_kernels.path_uniforms(seed, 0, n_periods), start=1):
        row = cdf[(n - 1) % model.n_seasons]
        k = min(int(np.searchsorted(row, x, side="right")), width - 1)
        wealth += model.kappa - k
        rows.append((n, k, wealth))
    return np.array(rows)
