"""Characteristic roots of s**(kappa*N) = G_{S_N}(s) in the closed unit disk.

Under the net profit condition there are exactly kappa*N - 1 of them (with
multiplicity) once s = 1 is excluded.  Isolation goes through a polynomial
surrogate (truncated pmf of S_N, companion-matrix eigenvalues); every
candidate is then Newton-refined against the exact transcendental
h(s) = G_{S_N}(s) - s**(kappa*N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._numerics import FLOAT64, Numerics
from .errors import NetProfitViolated, RootCountMismatch
from .model import RiskModel, net_profit_margin

__all__ = ["RootConfig", "Root", "RootSet", "characteristic_roots", "cluster_multiplicities"]


@dataclass(frozen=True)
class RootConfig:
    truncation_tail: float = 1e-14   # pmf tail allowed in the polynomial surrogate
    disk_band: float = 1e-6          # keep |s| <= 1 + disk_band (unit-circle roots)
    one_exclusion: float = 1e-8      # drop |s - 1| <= one_exclusion
    cluster_tol: float = 1e-6        # merge refined candidates closer than this
    derivative_tol: float = 1e-5     # |h^(k)| threshold of the multiplicity test
    newton_max_iter: int = 100


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    residual: Optional[float] = None
    at_origin: bool = False
    on_unit_band: bool = False
    multiplicity_confirmed: bool = True


@dataclass(frozen=True)
class RootSet:
    roots: tuple

    @property
    def total_with_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    @property
    def nonzero_roots(self) -> tuple:
        return tuple(r for r in self.roots if not r.at_origin)

    @property
    def origin_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots if r.at_origin)

    def min_nonzero_abs(self) -> Optional[float]:
        vals = [abs(r.value) for r in self.nonzero_roots]
        return min(vals) if vals else None


def _h_jet(model: RiskModel, s, order: int, num: Numerics = FLOAT64) -> list:
    """Derivatives 0..order of h(s) = G_{S_N}(s) - s**(kappa*N)."""
    kn = model.period_degree
    jet = model.cycle_pgf_jet(s, order, num)
    for n in range(min(order, kn) + 1):
        jet[n] = jet[n] - _falling(kn, n) * s ** (kn - n)
    return jet


def _falling(n, k):
    out = 1.0
    for t in range(k):
        out *= n - t
    return out


def _newton(model, z, target_order: int, cfg: RootConfig, num: Numerics = FLOAT64):
    """Newton iteration on h^(target_order); returns the refined point.

    target_order 0 refines a simple root of h; target_order r-1 lands on the
    critical point of a multiplicity-r cluster (its centroid to O(gap^2)).
    """
    tol = 100.0 * num.eps
    fz = None
    for _ in range(cfg.newton_max_iter):
        jet = _h_jet(model, z, target_order + 1, num)
        f, df = jet[target_order], jet[target_order + 1]
        if abs(df) == 0:
            break
        step = f / df
        # damp steps that overshoot (|h| must not grow)
        for _ in range(8):
            z_new = z - step
            f_new = _h_jet(model, z_new, target_order, num)[target_order]
            if fz is None or abs(f_new) <= abs(fz) or abs(step) < tol:
                break
            step = step / 2
        z, fz = z_new, f_new
        if abs(step) <= tol * max(1.0, abs(z)):
            break
    return z


def cluster_multiplicities(raw: Sequence[complex], tol: float) -> RootSet:
    """Greedy union-find clustering; centroid is the mean, multiplicity the size."""
    if tol <= 0:
        raise ValueError("cluster tolerance must be positive")
    vals = [complex(z) for z in raw]
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(vals)):
        groups.setdefault(find(i), []).append(vals[i])
    roots = [
        Root(value=sum(g) / len(g), multiplicity=len(g))
        for g in groups.values()
    ]
    roots.sort(key=lambda r: (r.value.real, r.value.imag))
    return RootSet(roots=tuple(roots))


def characteristic_roots(model: RiskModel, cfg: Optional[RootConfig] = None) -> RootSet:
    """All kappa*N - 1 disk roots of s**(kappa*N) = G_{S_N}(s), s != 1."""
    cfg = cfg or RootConfig()
    margin = net_profit_margin(model)
    if margin <= 0:
        raise NetProfitViolated(f"net profit margin is {margin}, need > 0")
    kn = model.period_degree

    # s=1 is always a simple root of h: h(1)=0 and h'(1) = E S_N - kappa*N < 0
    h1 = _h_jet(model, complex(1.0), 1)
    if not (abs(h1[0]) < 1e-9 and complex(h1[1]).real < 0):
        raise NetProfitViolated(
            f"h(1)={abs(h1[0]):.3e}, h'(1)={complex(h1[1]).real:.3e} fail the sanity check"
        )

    delta = model.cycle_min_support
    poly = model.cycle_pmf_polynomial(cfg.truncation_tail)
    deg = max(len(poly) - 1, kn)
    coeffs = np.zeros(deg + 1)
    coeffs[: len(poly)] = poly
    coeffs[kn] -= 1.0
    # s=0 is a root of known multiplicity delta; factor it out exactly
    if delta and np.max(np.abs(coeffs[:delta])) > 0:
        raise RootCountMismatch("surrogate polynomial lost exact zeros at the origin")
    reduced = coeffs[delta:]

    cand = np.roots(reduced[::-1])
    cand = [z for z in cand if abs(z) <= 1 + 1e-4 and abs(z - 1) > cfg.one_exclusion]
    refined = [_newton(model, complex(z), 0, cfg) for z in cand]
    refined = [
        z
        for z in refined
        if abs(z) <= 1 + cfg.disk_band and abs(z - 1) > cfg.one_exclusion
    ]

    clustered = cluster_multiplicities(refined, cfg.cluster_tol)
    out = []
    for root in clustered.roots:
        z, r = root.value, root.multiplicity
        confirmed = True
        if r > 1:
            z = _newton(model, z, r - 1, cfg)
            jet = _h_jet(model, z, r)
            confirmed = all(abs(jet[k]) <= cfg.derivative_tol for k in range(r)) and abs(
                jet[r]
            ) > cfg.derivative_tol
        residual = abs(_h_jet(model, z, 0)[0])
        out.append(
            Root(
                value=z,
                multiplicity=r,
                residual=residual,
                on_unit_band=abs(abs(z) - 1.0) <= cfg.disk_band,
                multiplicity_confirmed=confirmed,
            )
        )
    if delta:
        out.append(Root(value=0j, multiplicity=delta, residual=0.0, at_origin=True))

    rootset = RootSet(roots=tuple(_conjugate_polish(out)))
    if rootset.total_with_multiplicity != kn - 1:
        raise RootCountMismatch(
            f"found {rootset.total_with_multiplicity} roots with multiplicity, "
            f"expected {kn - 1}; tighten the truncation tail or cluster tolerance"
        )
    return rootset


def _conjugate_polish(roots, pair_tol=1e-5):
    """Pair non-real roots with their conjugates and symmetrise the pairs."""
    out, plus, minus = [], [], []
    for r in sorted(roots, key=lambda r: (r.value.real, abs(r.value.imag))):
        z = r.value
        if r.at_origin:
            out.append(r)
        elif abs(z.imag) <= 1e-9:
            out.append(
                Root(
                    value=complex(z.real, 0.0),
                    multiplicity=r.multiplicity,
                    residual=r.residual,
                    on_unit_band=r.on_unit_band,
                    multiplicity_confirmed=r.multiplicity_confirmed,
                )
            )
        elif z.imag > 0:
            plus.append(r)
        else:
            minus.append(r)
    for r in plus:
        best = None
        for i, m in enumerate(minus):
            if m.multiplicity != r.multiplicity:
                continue
            d = abs(m.value.conjugate() - r.value)
            if best is None or d < best[0]:
                best = (d, i)
        if best is None or best[0] > pair_tol:
            raise RootCountMismatch(
                f"root {r.value} has no conjugate partner within {pair_tol}"
            )
        mate = minus.pop(best[1])
        mean = (r.value + mate.value.conjugate()) / 2
        for val in (mean, mean.conjugate()):
            out.append(
                Root(
                    value=val,
                    multiplicity=r.multiplicity,
                    residual=max(r.residual or 0.0, mate.residual or 0.0),
                    on_unit_band=r.on_unit_band or mate.on_unit_band,
                    multiplicity_confirmed=r.multiplicity_confirmed
                    and mate.multiplicity_confirmed,
                )
            )
    if minus:
        raise RootCountMismatch(f"{len(minus)} non-real roots have no conjugate partner")
    return out


def refine_rootset(model: RiskModel, rootset: RootSet, num: Numerics,
                   cfg: Optional[RootConfig] = None) -> list:
    """Re-refine root values in another precision context.

    Returns [(value, multiplicity)] for the nonzero roots, in rootset order.
    A multiplicity-r cluster is a numerical object: under rounded input data
    an exact multiple root splits into r nearby simple roots (spacing about
    the r-th root of the data error).  When the working precision resolves
    the split, the cluster is replaced by its actual simple roots, which
    removes the O(gap^2) error floor of the confluent derivative rows.
    """
    cfg = cfg or RootConfig()
    out = []
    for r in rootset.nonzero_roots:
        z = num.complex(r.value)
        z = _newton(model, z, r.multiplicity - 1, cfg, num)
        if r.multiplicity == 1:
            out.append((z, 1))
            continue
        split = _split_cluster(model, z, r.multiplicity, cfg, num)
        if split is None:
            out.append((z, r.multiplicity))
        else:
            out.extend((s, 1) for s in split)
    return out


def _split_cluster(model: RiskModel, center, r: int, cfg: RootConfig, num: Numerics):
    """Try to resolve a multiplicity-r cluster into r simple roots of h.

    Seeds come from the local Taylor model  h(c + d) ~ h(c) + h^(r)(c) d^r / r!.
    Returns None when the roots do not separate at working precision (a true
    multiple root), leaving the confluent derivative-row treatment in place.
    """
    if not num.is_mp:
        return None
    jet = _h_jet(model, center, r, num)
    lead = jet[r]
    if abs(lead) == 0:
        return None
    base = -math.factorial(r) * jet[0] / lead
    radius = abs(base) ** (1.0 / r)
    # below this spacing the confluent rows are already accurate to
    # O(radius**2) and splitting would only ill-condition the system
    if radius <= max(1e-11, 10.0 ** (-(num.dps - 10) / r)):
        return None
    if radius > cfg.cluster_tol * 10:
        return None
    phase = _arg(base) / r
    roots = []
    for k in range(r):
        angle = phase + 2 * math.pi * k / r
        seed = center + num.complex(complex(math.cos(angle), math.sin(angle))) * radius
        z = _newton(model, seed, 0, cfg, num)
        if abs(_h_jet(model, z, 0, num)[0]) > 1e-20:
            return None
        roots.append(z)
    # all r must be distinct and stay near the cluster
    for i in range(r):
        for j in range(i + 1, r):
            if abs(roots[i] - roots[j]) <= radius / 8:
                return None
        if abs(roots[i] - center) > cfg.cluster_tol * 20:
            return None
    return roots


def _arg(z):
    c = complex(z)
    return math.atan2(c.imag, c.real)
