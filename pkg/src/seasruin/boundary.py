"""Assembly and solution of the boundary linear system for m_i^(j) = P(M_j = i).

One row per unit of root multiplicity (a multiplicity-r root contributes its
base equation plus derivative rows of orders 1..r-1), closed by the mean
equation whose right-hand side is the net profit margin.  Block j of a row
carries the coefficients of m_i^(j); blocks j >= 2 are scaled by the prefix
pgf ratio G_{X_N + X_1 + ... + X_{j-2}}(alpha) / alpha**(kappa*(j-1)).

Roots at s = 0 (present when S_N cannot reach small values) contribute no
rows; the columns they would have paid for are identically zero and are
dropped, which keeps the system square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numerics import FLOAT64, Numerics
from .distributions import finite_table, jet_mul, product_pgf_jet
from .errors import (
    DimensionMismatch,
    ImaginaryResidue,
    MassBoundsError,
    NetProfitViolated,
    RootCountMismatch,
    SingularSystem,
    ValidationError,
)
from .model import RiskModel, net_profit_margin
from .roots import RootConfig, RootSet, characteristic_roots, refine_rootset

CONDITION_LIMIT = 1e12
ZERO_COLUMN_TOL = 1e-14
IMAG_TOL = 1e-8
MASS_TOL = 1e-9

__all__ = ["BoundaryMasses", "AssembledSystem", "build_system", "solve_boundary", "probe_conjecture"]


@dataclass(frozen=True)
class BoundaryMasses:
    """m[j-1, i] = P(M_j = i) for j = 1..N, i = 0..kappa-1 (clamped to [0, 1])."""

    m: np.ndarray

    def __post_init__(self):
        if np.min(self.m) < -MASS_TOL or np.max(self.m) > 1 + MASS_TOL:
            raise MassBoundsError(
                f"boundary masses outside [0,1] beyond {MASS_TOL}: "
                f"range [{np.min(self.m):.3e}, {np.max(self.m):.3e}]"
            )
        if np.max(self.m.sum(axis=1)) > 1 + MASS_TOL:
            raise MassBoundsError("a season's boundary masses sum beyond 1")
        clamped = np.clip(self.m, 0.0, 1.0)
        clamped.flags.writeable = False
        object.__setattr__(self, "m", clamped)


@dataclass(frozen=True)
class AssembledSystem:
    matrix: np.ndarray          # reduced square complex matrix
    rhs: np.ndarray
    row_tags: tuple             # "root[g]" / "root[g]:d^n" / "mean"
    column_map: tuple           # column -> (j, i) of m_i^(j), 1-based j

    def __post_init__(self):
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionMismatch(f"system is {self.matrix.shape}, not square")


def _cdf_cache(model: RiskModel, num: Numerics):
    kappa = model.kappa
    cache = []
    for b in range(1, model.n_seasons + 1):
        y = model.prev_season(b)
        cache.append([y.cdf(k, num) for k in range(kappa)])
    return cache


def _row(model: RiskModel, alpha, order: int, num: Numerics, cdfs) -> list:
    """Coefficients of one root equation (order 0) or derivative row (order n)."""
    kappa, n = model.kappa, model.n_seasons
    row = []
    for b in range(1, n + 1):
        prefix = model.block_prefix(b)
        shift = -kappa * (b - 1)
        pz = product_pgf_jet(prefix, alpha, order, num)
        # jets of G_Z(s) * s**(j + shift) at alpha, per power j
        dvals = []
        for j in range(kappa):
            m = j + shift
            pw = [_falling(m, t) * alpha ** (m - t) for t in range(order + 1)]
            dvals.append(jet_mul(pz, pw, num)[order])
        f = cdfs[b - 1]
        for i in range(kappa):
            acc = num.complex(0.0)
            for j in range(i, kappa):
                fy = f[j - i]
                if fy != 0:
                    acc = acc + dvals[j] * fy
            row.append(acc)
    return row


def _falling(m, t):
    out = 1.0
    for k in range(t):
        out *= m - k
    return out


def _mean_row(model: RiskModel, num: Numerics) -> list:
    kappa = model.kappa
    row = []
    for b in range(1, model.n_seasons + 1):
        y = model.prev_season(b)
        for i in range(kappa):
            acc = num.real(0.0)
            for l in range(0, kappa - i):
                p = y.pmf(l, num)
                if p != 0:
                    acc = acc + p * (kappa - i - l)
            row.append(num.complex(acc))
    return row


def _assemble(model: RiskModel, root_values, num: Numerics):
    """Rows, rhs, tags and surviving-column map, in context scalars.

    root_values is [(alpha, multiplicity)] for the nonzero roots.
    """
    kappa, n = model.kappa, model.n_seasons
    kn = kappa * n
    cdfs = _cdf_cache(model, num)
    rows, tags = [], []
    for g, (alpha, mult) in enumerate(root_values):
        for order in range(mult):
            rows.append(_row(model, alpha, order, num, cdfs))
            tags.append(f"root[{g}]" if order == 0 else f"root[{g}]:d^{order}")
    rows.append(_mean_row(model, num))
    tags.append("mean")
    margin = model.period_degree - model.cycle_mean(num)
    rhs = [num.complex(0.0)] * (len(rows) - 1) + [num.complex(margin)]

    keep = [
        c for c in range(kn)
        if max(abs(r[c]) for r in rows) > ZERO_COLUMN_TOL
    ]
    if len(keep) != len(rows):
        raise DimensionMismatch(
            f"{len(rows)} equations for {len(keep)} unknowns after dropping "
            f"{kn - len(keep)} zero columns; support pattern not reducible"
        )
    reduced = [[r[c] for c in keep] for r in rows]
    column_map = tuple((c // kappa + 1, c % kappa) for c in keep)
    return reduced, rhs, tuple(tags), column_map


def build_system(model: RiskModel, roots: RootSet) -> AssembledSystem:
    """Assemble the (reduced) boundary system in float64."""
    values = [(r.value, r.multiplicity) for r in roots.nonzero_roots]
    rows, rhs, tags, column_map = _assemble(model, values, FLOAT64)
    matrix = np.array(rows, dtype=complex)
    system = AssembledSystem(
        matrix=matrix,
        rhs=np.array(rhs, dtype=complex),
        row_tags=tags,
        column_map=column_map,
    )
    _condition_guard(matrix)
    return system


def _condition_guard(matrix: np.ndarray):
    det = np.linalg.det(matrix)
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularSystem(
            f"boundary system condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e} "
            f"(|det| = {abs(det):.3e})",
            determinant=det,
            condition=float(cond),
        )


def _solve_ctx(model: RiskModel, roots: RootSet, num: Numerics,
               cfg: Optional[RootConfig] = None):
    """Solve the boundary system in an arbitrary precision context.

    Returns masses as an N x kappa nested list of context reals, with dropped
    (identically-zero-column) entries set to context zero.
    """
    if num.is_mp:
        values = refine_rootset(model, roots, num, cfg)
    else:
        values = [(r.value, r.multiplicity) for r in roots.nonzero_roots]
    rows, rhs, _, column_map = _assemble(model, values, num)
    _condition_guard(np.array([[complex(v) for v in r] for r in rows], dtype=complex))
    sol = num.solve(rows, rhs)
    worst_imag = max((abs(complex(v).imag) for v in sol), default=0.0)
    if worst_imag > IMAG_TOL:
        raise ImaginaryResidue(
            f"solution has imaginary residue {worst_imag:.3e} > {IMAG_TOL}"
        )
    kappa = model.kappa
    masses = [[num.real(0.0)] * kappa for _ in range(model.n_seasons)]
    for (j, i), v in zip(column_map, sol):
        masses[j - 1][i] = v.real
    return masses


def solve_boundary(model: RiskModel, roots: RootSet) -> BoundaryMasses:
    """Solve in float64 and return real, clamped boundary masses."""
    masses = _solve_ctx(model, roots, FLOAT64)
    return BoundaryMasses(m=np.array(masses, dtype=float))


def probe_conjecture(kappa_max: int, n_max: int, trials: int, seed: int) -> dict:
    """Randomized non-singularity probe of the boundary matrix.

    Samples random net-profit models with x_0 > 0 for every season, assembles
    the system and records determinant/condition statistics.  Never asserts:
    every anomaly is recorded as a finding in the report.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    min_abs_det = math.inf
    max_condition = 0.0
    findings = []
    singular = 0
    for trial in range(trials):
        model = _random_probe_model(rng, kappa_max, n_max)
        try:
            roots = characteristic_roots(model)
            system = build_system(model, roots)
        except (SingularSystem, RootCountMismatch, NetProfitViolated) as exc:
            singular += isinstance(exc, SingularSystem)
            findings.append({"trial": trial, "error": type(exc).__name__, "detail": str(exc)})
            continue
        det = abs(np.linalg.det(system.matrix))
        cond = float(np.linalg.cond(system.matrix))
        min_abs_det = min(min_abs_det, det)
        max_condition = max(max_condition, cond)
        if cond > CONDITION_LIMIT:
            singular += 1
            findings.append({"trial": trial, "error": "ConditionLimit", "condition": cond})
    return {
        "kappa_max": kappa_max,
        "n_max": n_max,
        "trials": trials,
        "seed": seed,
        "singular_count": singular,
        "min_abs_det": None if min_abs_det is math.inf else min_abs_det,
        "max_condition": max_condition,
        "findings": findings,
    }


def _random_probe_model(rng, kappa_max: int, n_max: int) -> RiskModel:
    for _ in range(500):
        kappa = int(rng.integers(1, kappa_max + 1))
        n = int(rng.integers(1, n_max + 1))
        seasons = []
        for _ in range(n):
            size = int(rng.integers(2, 6))
            w = rng.random(size) + 0.05
            w[0] += 0.3  # keep x_0 well away from 0
            seasons.append(finite_table(w / w.sum()))
        model = RiskModel(kappa=kappa, seasons=tuple(seasons))
        if net_profit_margin(model) > 0.05 * model.period_degree:
            return model
    raise RuntimeError("could not sample a net-profit model")
