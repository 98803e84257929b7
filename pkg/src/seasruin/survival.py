"""Ultimate- and finite-time survival probabilities.

Ultimate time: phi(u+1) = P(M_1 <= u) = sum of the first u+1 masses of M_1.
The boundary system delivers the first kappa masses per season; the cyclic
convolution recurrences extend them, and phi(0) comes from the one-cycle
total-probability recurrence evaluated at u = 0.

The forward extension amplifies roundoff like |1/alpha_min|**n, so deep
tables automatically run in an mpmath context (see _numerics.pick_numerics).

Finite time: a dynamic program over season-shifted horizons, phi^(j)(u, 1) =
F_{X_j}(u + kappa - 1), each later layer summing the next season's layer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from ._numerics import FLOAT64, Numerics, pick_numerics
from .boundary import BoundaryMasses, _solve_ctx
from .distributions import truncate
from .errors import MassBoundsError, NetProfitViolated, ValidationError, ZeroDivisor
from .model import RiskModel, net_profit_margin
from .roots import characteristic_roots

MASS_TOL = 1e-9

__all__ = [
    "Regime",
    "SurvivalTable",
    "FiniteSurvivalTable",
    "MassSequence",
    "classify_regime",
    "extend_masses",
    "ultimate_survival",
    "finite_survival",
    "survival_via_block_recurrence",
]


class Regime(enum.Enum):
    NET_PROFIT = "NetProfit"
    SUPERCRITICAL = "Supercritical"
    CRITICAL_NONDEGENERATE = "CriticalNondegenerate"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SurvivalTable:
    """phi(u) for u = 0..u_max, plus the regime that produced it."""

    phi: tuple
    regime: Regime

    def __post_init__(self):
        vals = list(self.phi)
        for u, v in enumerate(vals):
            if not -MASS_TOL <= v <= 1 + MASS_TOL:
                raise MassBoundsError(f"phi({u}) = {v} outside [0, 1]")
            if u and v < vals[u - 1] - MASS_TOL:
                raise MassBoundsError(f"phi({u}) < phi({u - 1}): not non-decreasing")
        object.__setattr__(self, "phi", tuple(min(1.0, max(0.0, v)) for v in vals))

    def __getitem__(self, u: int) -> float:
        return self.phi[u]

    def __len__(self) -> int:
        return len(self.phi)


@dataclass(frozen=True)
class FiniteSurvivalTable:
    """phi(u, t) for u = 0..u_max and t = 1..horizon; grid[t-1, u]."""

    grid: np.ndarray

    def __post_init__(self):
        g = np.clip(self.grid, 0.0, 1.0)
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)

    @property
    def horizon(self) -> int:
        return self.grid.shape[0]

    @property
    def u_max(self) -> int:
        return self.grid.shape[1] - 1

    def at(self, u: int, t: int) -> float:
        return float(self.grid[t - 1, u])


@dataclass(frozen=True)
class MassSequence:
    """m[j-1, n] = P(M_j = n) for n = 0..n_max (clamped at -1e-9)."""

    m: np.ndarray

    def __post_init__(self):
        if np.min(self.m) < -MASS_TOL:
            raise MassBoundsError(f"mass {np.min(self.m):.3e} below clamp bound")
        sums = np.cumsum(self.m, axis=1)
        if np.max(sums) > 1 + MASS_TOL:
            raise MassBoundsError("partial sums of masses exceed 1")
        clamped = np.clip(self.m, 0.0, 1.0)
        clamped.flags.writeable = False
        object.__setattr__(self, "m", clamped)


def classify_regime(model: RiskModel) -> Regime:
    margin = net_profit_margin(model)
    tol = 1e-12 * max(1.0, model.period_degree)
    if margin > tol:
        return Regime.NET_PROFIT
    if margin < -tol:
        return Regime.SUPERCRITICAL
    if all(d.is_degenerate for d in model.seasons):
        return Regime.DEGENERATE
    return Regime.CRITICAL_NONDEGENERATE


# -- mass extension -----------------------------------------------------------

def _extend_ctx(model: RiskModel, boundary, n_max: int, num: Numerics) -> list:
    """Extend per-season mass sequences to index n_max in context scalars.

    ``boundary`` is an N x kappa nested list; entries in the trailing
    zero-column positions of a block (those with F_{X_prev}(kappa-1-i) = 0)
    are treated as unknown and recomputed by the shifted recurrence.
    """
    kappa, n_seasons = model.kappa, model.n_seasons
    prev = lambda j: (j - 1) % n_seasons
    dmin = [model.seasons[j].min_support for j in range(n_seasons)]

    seqs, corrections, tables, remaining = [], [], [], []
    for j in range(n_seasons):
        p = prev(j)
        d = dmin[p]
        if d > kappa:
            raise ZeroDivisor(
                f"season {p + 1} has min support {d} > kappa; extension undefined"
            )
        solved = kappa - d
        seqs.append([boundary[j][i] for i in range(solved)])
        remaining.append(max(num.real(0.0), num.real(1.0) - sum(seqs[j], num.real(0.0))))
        xp = model.seasons[p].pmf_table(n_max + kappa + 1, num)
        tables.append(xp)
        cdf_prev = model.seasons[p]
        corr = num.real(0.0)
        for i in range(solved):
            corr = corr + boundary[j][i] * cdf_prev.cdf(kappa - 1 - i, num)
        corrections.append(corr)

    progress = True
    while progress and any(len(s) <= n_max for s in seqs):
        progress = False
        for j in range(n_seasons):
            p = prev(j)
            d = dmin[p]
            xp = tables[j]
            pivot = xp[d]
            if not pivot > 0:
                raise ZeroDivisor(f"pmf of season {p + 1} vanishes at its min support")
            while len(seqs[j]) <= n_max:
                i = len(seqs[j])
                n = i + d
                if n < kappa:
                    break
                lag = n - kappa
                if lag >= len(seqs[p]) or (p == j and lag >= i):
                    break
                acc = seqs[p][lag]
                for t in range(i):
                    x = xp[n - t]
                    if x != 0:
                        acc = acc - seqs[j][t] * x
                if n == kappa:
                    acc = acc - corrections[j]
                val = acc / pivot
                # masses are non-negative and sum to 1 per season under net
                # profit, so each value lives in [0, remaining tail budget];
                # boxing it there keeps the amplified-roundoff modes of the
                # forward recurrence from compounding.  A negative beyond the
                # clamp zone means the inputs were not accurate enough for
                # this depth (or the assembly is wrong): raise.
                if val < -MASS_TOL:
                    raise MassBoundsError(
                        f"mass m_{i}^({j + 1}) = {float(val):.3e} below clamp bound; "
                        "inputs too coarse for this extension depth"
                    )
                if val < 0:
                    val = num.real(0.0)
                elif val > remaining[j]:
                    val = remaining[j]
                remaining[j] = remaining[j] - val
                seqs[j].append(val)
                progress = True
    if any(len(s) <= n_max for s in seqs):
        raise ZeroDivisor("mass extension stalled; support pattern not reducible")
    return seqs


def extend_masses(model: RiskModel, b: BoundaryMasses, n_max: int) -> MassSequence:
    """Masses m_n^(j) for n = 0..n_max, extended from the boundary block."""
    if n_max < model.kappa:
        raise ValidationError("n_max must be >= kappa")
    if net_profit_margin(model) <= 0:
        raise NetProfitViolated("mass extension requires the net profit condition")
    seqs = _extend_ctx(model, [list(row) for row in b.m], n_max, FLOAT64)
    return MassSequence(m=np.array(seqs, dtype=float))


# -- ultimate time ------------------------------------------------------------

def _cycle_weights(model: RiskModel, u: int, num: Numerics) -> list:
    """Weights w[t] = P(claim cycle sums to t while staying solvent from u).

    The partial-sum caps i_1 + ... + i_k <= u + kappa*k - 1 make every level
    finite; w has length u + kappa*N (index t <= u + kappa*N - 1).
    """
    kappa, n_seasons = model.kappa, model.n_seasons
    w = [num.real(1.0)]
    for k in range(1, n_seasons + 1):
        cap = u + kappa * k - 1
        xk = model.seasons[k - 1].pmf_table(cap, num)
        w2 = [num.real(0.0)] * (cap + 1)
        for t, wt in enumerate(w):
            if wt == 0:
                continue
            for i in range(0, cap - t + 1):
                if xk[i] != 0:
                    w2[t + i] = w2[t + i] + wt * xk[i]
        w = w2
    return w


def _phi_zero(model: RiskModel, phi, num: Numerics):
    """phi(0) from the one-cycle recurrence, given phi(1)..phi(kappa*N)."""
    kn = model.period_degree
    w = _cycle_weights(model, 0, num)
    acc = num.real(0.0)
    for t in range(len(w)):
        if w[t] != 0:
            acc = acc + w[t] * phi[kn - t]
    return acc


def ultimate_survival(model: RiskModel, u_max: int, precision="auto") -> SurvivalTable:
    """phi(u) for u = 0..u_max, dispatched on the model's regime."""
    if u_max < 0:
        raise ValidationError("u_max must be >= 0")
    regime = classify_regime(model)
    if regime in (Regime.SUPERCRITICAL, Regime.CRITICAL_NONDEGENERATE):
        return SurvivalTable(phi=(0.0,) * (u_max + 1), regime=regime)
    if regime is Regime.DEGENERATE:
        atoms = [d.min_support for d in model.seasons]
        worst = min(
            model.kappa * n - sum(atoms[:n]) for n in range(1, model.n_seasons + 1)
        )
        phi = tuple(1.0 if u + worst > 0 else 0.0 for u in range(u_max + 1))
        return SurvivalTable(phi=phi, regime=regime)

    kn = model.period_degree
    depth = max(u_max, kn)
    rootset = characteristic_roots(model)
    num = pick_numerics(depth, rootset.min_nonzero_abs(), precision)
    phi = _ultimate_ctx(model, rootset, depth, num)
    return SurvivalTable(
        phi=tuple(float(v) for v in phi[: u_max + 1]), regime=Regime.NET_PROFIT
    )


def _ultimate_ctx(model: RiskModel, rootset, depth: int, num: Numerics) -> list:
    """phi(0..depth) as context scalars (net-profit models only)."""
    masses = _solve_ctx(model, rootset, num)
    seqs = _extend_ctx(model, masses, depth - 1, num)
    phi = [num.real(0.0)] * (depth + 1)
    acc = num.real(0.0)
    for u in range(1, depth + 1):
        acc = acc + seqs[0][u - 1]
        phi[u] = acc
    phi[0] = _phi_zero(model, phi, num)
    return phi


def survival_via_block_recurrence(
    model: RiskModel, phi_init: Sequence[float], u_max: int, precision=None
) -> list:
    """phi(0..u_max) from phi(1)..phi(kappa*N) via the one-cycle recurrence.

    An independent cross-check of the mass-extension path: phi(0) is evaluated
    directly and larger arguments are obtained by solving the recurrence for
    its top term (divided by the product of min-support pmf values when S_N
    cannot reach 0).
    """
    kn = model.period_degree
    if len(phi_init) != kn:
        raise ValidationError(f"phi_init must have length kappa*N = {kn}")
    rootset = characteristic_roots(model)
    num = pick_numerics(max(u_max, kn), rootset.min_nonzero_abs(), precision or "auto")
    delta = model.cycle_min_support

    phi = [num.real(0.0)] * (max(u_max, kn) + 1)
    for t in range(1, kn + 1):
        # ctx scalars pass through; deep targets need phi_init at matching
        # precision since the recurrence amplifies input error
        phi[t] = num.real(phi_init[t - 1])
    phi[0] = _phi_zero(model, phi, num)
    for target in range(kn + 1, u_max + 1):
        u = target - kn + delta
        w = _cycle_weights(model, u, num)
        if delta >= len(w) or w[delta] == 0:
            raise ZeroDivisor("top coefficient of the recurrence vanishes")
        acc = phi[u]
        for t in range(delta + 1, len(w)):
            if w[t] != 0:
                acc = acc - w[t] * phi[u + kn - t]
        val = acc / w[delta]
        # phi is non-decreasing and bounded by 1; box the amplified roundoff
        lo, hi = phi[target - 1], num.real(1.0)
        phi[target] = min(max(val, lo), hi)
    return [float(v) for v in phi[: u_max + 1]]


# -- finite time ---------------------------------------------------------------

def finite_survival(model: RiskModel, u_max: int, horizon: int) -> FiniteSurvivalTable:
    """phi(u, t) for u <= u_max and t <= horizon (t counted in periods)."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    if u_max < 0:
        raise ValidationError("u_max must be >= 0")
    kappa, n_seasons = model.kappa, model.n_seasons
    width = u_max + kappa * horizon  # internal surplus range, shrinks kappa per layer
    tables = [np.asarray(truncate(d, 1e-15).probs, dtype=float) for d in model.seasons]
    support = max(max(len(t) for t in tables), kappa + 2)
    pmf = np.zeros((n_seasons, support))
    for j, t in enumerate(tables):
        pmf[j, : len(t)] = t
    cdf = np.cumsum(pmf, axis=1)

    cur = np.empty((n_seasons, width + 1))
    top = np.minimum(np.arange(width + 1) + kappa - 1, support - 1)
    for j in range(n_seasons):
        cur[j] = cdf[j, top]
    grid = np.empty((horizon, u_max + 1))
    grid[0] = cur[0, : u_max + 1]
    valid = width + 1
    for t in range(2, horizon + 1):
        valid -= kappa
        cur = _kernels.finite_dp_layer(cur, pmf, kappa, valid)
        grid[t - 1] = cur[0, : u_max + 1]
    return FiniteSurvivalTable(grid=grid)
