"""The N-seasonal discrete-time risk model."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from ._numerics import FLOAT64, Numerics
from .distributions import DiscreteDist, product_pgf_jet, truncate
from .errors import ValidationError

__all__ = ["RiskModel", "net_profit_margin"]


@dataclass(frozen=True)
class RiskModel:
    """Premium rate kappa and the N seasonal claim distributions X_1..X_N.

    Claims repeat with period N: the claim in period n is distributed like
    season ((n-1) mod N) + 1.
    """

    kappa: int
    seasons: tuple

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ValidationError("kappa must be an integer >= 1")
        if not self.seasons:
            raise ValidationError("model needs at least one season")
        for d in self.seasons:
            if not isinstance(d, DiscreteDist):
                raise ValidationError("seasons must be DiscreteDist values")

    @property
    def n_seasons(self) -> int:
        return len(self.seasons)

    @property
    def period_degree(self) -> int:
        """kappa * N, the exponent in s**(kappa N) = G_{S_N}(s)."""
        return self.kappa * self.n_seasons

    def cycle_mean(self, num: Numerics = FLOAT64):
        """E S_N, expected claims over one full cycle."""
        acc = num.real(0.0)
        for d in self.seasons:
            acc = acc + d.mean(num)
        return acc

    @property
    def cycle_min_support(self) -> int:
        """Smallest attainable value of S_N (the multiplicity of the root s=0)."""
        return sum(d.min_support for d in self.seasons)

    def season(self, j: int) -> DiscreteDist:
        """Season by 1-based cyclic index (season(N+1) is season(1))."""
        return self.seasons[(j - 1) % self.n_seasons]

    def prev_season(self, j: int) -> DiscreteDist:
        """The distribution paired with block j in the boundary equations:
        X_N for j=1 and X_{j-1} otherwise."""
        return self.seasons[j - 2] if j >= 2 else self.seasons[-1]

    def block_prefix(self, j: int) -> tuple:
        """Distributions whose pgf product multiplies block j of a root row:
        (X_N, X_1, ..., X_{j-2}); empty for j=1."""
        if j <= 1:
            return ()
        return (self.seasons[-1],) + tuple(self.seasons[: j - 2])

    def cycle_pgf_jet(self, s, order: int, num: Numerics = FLOAT64) -> list:
        """Exact derivatives 0..order of G_{S_N} at s (product of factor pgfs)."""
        return product_pgf_jet(self.seasons, s, order, num)

    def cycle_pmf_polynomial(self, eps: float = 1e-14) -> np.ndarray:
        """Truncated pmf of S_N with tail <= eps, as polynomial coefficients."""
        per_factor = eps / max(1, self.n_seasons)
        out = np.array([1.0])
        for d in self.seasons:
            out = np.convolve(out, np.asarray(truncate(d, per_factor).probs, dtype=float))
        return out


def net_profit_margin(model: RiskModel) -> float:
    """kappa*N - E S_N; positive exactly when the net profit condition holds."""
    return model.period_degree - model.cycle_mean()
