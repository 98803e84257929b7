"""Algebra of non-negative integer-valued claim distributions.

Two families cover everything the risk model needs: finite probability tables
and the displaced Poisson P(lambda, xi), i.e. a Poisson(lambda) shifted right
by an integer xi >= 0 (pgf ``s**xi * exp(lambda*(s-1))``).  Values are
immutable and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._numerics import FLOAT64, Numerics
from .errors import DomainError, ValidationError

PROB_SUM_TOL = 1e-12
PGF_DISK_TOL = 1e-9
MIXED_CONV_TAIL = 1e-15

__all__ = [
    "DiscreteDist",
    "TruncatedDist",
    "finite_table",
    "displaced_poisson",
    "convolve",
    "truncate",
    "from_spec",
    "to_spec",
    "product_pgf_jet",
    "jet_mul",
]


def _falling(n: int, k: int) -> float:
    """n * (n-1) * ... * (n-k+1); 1.0 for k == 0."""
    out = 1.0
    for t in range(k):
        out *= n - t
    return out


@dataclass(frozen=True)
class DiscreteDist:
    """A non-negative integer-valued distribution.

    ``kind`` is "table" (finite pmf indexed from 0) or "poisson" (displaced
    Poisson with rate ``lam`` and shift ``shift``).  Use :func:`finite_table`
    and :func:`displaced_poisson` instead of the raw constructor.
    """

    kind: str
    probs: Optional[tuple] = None
    lam: Optional[float] = None
    shift: Optional[int] = None

    def __post_init__(self):
        if self.kind == "table":
            if not self.probs:
                raise ValidationError("finite table must be non-empty")
            if any(p < 0 for p in self.probs):
                raise ValidationError("finite table has a negative entry")
            total = math.fsum(self.probs)
            if abs(total - 1.0) > PROB_SUM_TOL:
                raise ValidationError(
                    f"finite table sums to {total!r}, outside 1 +- {PROB_SUM_TOL}"
                )
            if max(self.probs) <= 0:
                raise ValidationError("finite table has no positive entry")
        elif self.kind == "poisson":
            if self.lam is None or not self.lam > 0:
                raise ValidationError("displaced Poisson needs lambda > 0")
            if self.shift is None or self.shift < 0 or int(self.shift) != self.shift:
                raise ValidationError("displaced Poisson shift must be an integer >= 0")
        else:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")

    # -- basic quantities ------------------------------------------------

    @property
    def min_support(self) -> int:
        """Smallest i with P(X = i) > 0."""
        if self.kind == "table":
            return next(i for i, p in enumerate(self.probs) if p > 0)
        return self.shift

    @property
    def is_degenerate(self) -> bool:
        """True when the distribution is a single atom."""
        return self.kind == "table" and sum(1 for p in self.probs if p > 0) == 1

    def pmf(self, i: int, num: Numerics = FLOAT64):
        """P(X = i); 0 outside the support."""
        if i < 0:
            return num.real(0.0)
        if self.kind == "table":
            p = self.probs[i] if i < len(self.probs) else 0.0
            return num.real(p) if num.is_mp else p
        if i < self.shift:
            return num.real(0.0)
        return num.poisson_pmf(self.lam, i - self.shift)

    def cdf(self, k: int, num: Numerics = FLOAT64):
        """P(X <= k); 0 for k < 0."""
        if k < 0:
            return num.real(0.0)
        if self.kind == "table":
            if num.is_mp:  # sum the binary table values exactly
                acc = num.real(0.0)
                for p in self.probs[: k + 1]:
                    acc = acc + p
                return acc
            return math.fsum(self.probs[: k + 1])
        acc = num.real(0.0)
        for j in range(0, k - self.shift + 1):
            acc += num.poisson_pmf(self.lam, j)
        return acc

    def mean(self, num: Numerics = FLOAT64):
        if self.kind == "table":
            if num.is_mp:
                acc = num.real(0.0)
                for i, p in enumerate(self.probs):
                    acc = acc + i * p
                return acc
            return math.fsum(i * p for i, p in enumerate(self.probs))
        if num.is_mp:
            return num.real(self.lam) + self.shift
        return self.lam + self.shift

    def pmf_array(self, n: int) -> np.ndarray:
        """pmf values for indices 0..n as a float64 array."""
        return np.array([self.pmf(i) for i in range(n + 1)], dtype=float)

    def pmf_table(self, n: int, num: Numerics = FLOAT64) -> list:
        """pmf values for indices 0..n as context scalars."""
        return [self.pmf(i, num) for i in range(n + 1)]

    # -- generating function ---------------------------------------------

    def _check_disk(self, s):
        if self.kind == "poisson" and abs(s) > 1.0 + PGF_DISK_TOL:
            raise DomainError(
                f"pgf of a displaced Poisson is only evaluated for |s| <= 1 + {PGF_DISK_TOL}"
            )

    def pgf(self, s, num: Numerics = FLOAT64):
        """E s**X.  Finite tables accept any s; Poisson is kept on the disk."""
        self._check_disk(s)
        return self._pgf_unchecked(s, num)

    def _pgf_unchecked(self, s, num: Numerics = FLOAT64):
        if self.kind == "table":
            acc = num.real(0.0)
            pw = num.real(1.0) if num.is_mp else 1.0
            for p in self.probs:
                if p:
                    acc = acc + p * pw
                pw = pw * s
            return acc
        out = num.exp(self.lam * (s - 1))
        if self.shift:
            out = out * s**self.shift
        return out

    def pgf_derivative(self, s, n: int, num: Numerics = FLOAT64):
        """d^n/ds^n of the pgf at s, n >= 1; closed-form for both kinds."""
        if n < 1:
            raise ValidationError("derivative order must be >= 1")
        self._check_disk(s)
        return self.pgf_jet(s, n, num)[n]

    def pgf_jet(self, s, order: int, num: Numerics = FLOAT64) -> list:
        """Pgf derivatives of orders 0..order at s (no domain check)."""
        if self.kind == "table":
            out = []
            for n in range(order + 1):
                acc = num.real(0.0)
                for i, p in enumerate(self.probs):
                    if p and i >= n:
                        acc = acc + p * _falling(i, n) * s ** (i - n)
                out.append(acc)
            return out
        lam = self.lam
        base = num.exp(lam * (s - 1))
        exp_jet = [base * lam**n for n in range(order + 1)]
        if not self.shift:
            return exp_jet
        xi = self.shift
        pow_jet = [
            _falling(xi, n) * s ** (xi - n) if n <= xi else num.real(0.0)
            for n in range(order + 1)
        ]
        return jet_mul(pow_jet, exp_jet, num)


@dataclass(frozen=True)
class TruncatedDist:
    """A finite prefix of a distribution plus the mass left beyond the cut."""

    probs: tuple
    tail_mass: float

    def __post_init__(self):
        total = math.fsum(self.probs) + self.tail_mass
        if abs(total - 1.0) > PROB_SUM_TOL or self.tail_mass < 0:
            raise ValidationError("truncation does not preserve total mass")


def finite_table(probs: Sequence[float]) -> DiscreteDist:
    return DiscreteDist(kind="table", probs=tuple(float(p) for p in probs))


def displaced_poisson(lam: float, shift: int = 0) -> DiscreteDist:
    return DiscreteDist(kind="poisson", lam=float(lam), shift=int(shift))


def jet_mul(a: list, b: list, num: Numerics = FLOAT64) -> list:
    """Derivative jet of a product (general Leibniz rule)."""
    order = min(len(a), len(b)) - 1
    out = []
    for n in range(order + 1):
        acc = a[0] * b[n]
        for k in range(1, n + 1):
            acc = acc + math.comb(n, k) * a[k] * b[n - k]
        out.append(acc)
    return out


def product_pgf_jet(dists: Sequence[DiscreteDist], s, order: int, num: Numerics = FLOAT64) -> list:
    """Jet of prod_k G_{X_k} at s; the exact pgf of the independent sum."""
    jet = [num.complex(1.0) if n == 0 else num.complex(0.0) for n in range(order + 1)]
    for d in dists:
        jet = jet_mul(jet, d.pgf_jet(s, order, num), num)
    return jet


def convolve(a: DiscreteDist, b: DiscreteDist) -> DiscreteDist:
    """Distribution of X + Y for independent X, Y.

    Poisson + Poisson stays Poisson (parameters add); a degenerate-at-zero
    factor is the identity; any other mix materialises as a finite table with
    total truncation tail <= 1e-15.
    """
    if a.kind == "poisson" and b.kind == "poisson":
        return displaced_poisson(a.lam + b.lam, a.shift + b.shift)
    for x, y in ((a, b), (b, a)):
        if x.kind == "table" and len(x.probs) == 1:
            return y
    ta = _truncated_probs(a, MIXED_CONV_TAIL / 2)
    tb = _truncated_probs(b, MIXED_CONV_TAIL / 2)
    return finite_table(np.convolve(ta, tb))


def _truncated_probs(d: DiscreteDist, eps: float) -> np.ndarray:
    if d.kind == "table":
        return np.asarray(d.probs, dtype=float)
    return np.asarray(truncate(d, eps).probs, dtype=float)


def truncate(d: DiscreteDist, eps: float) -> TruncatedDist:
    """Smallest prefix of the pmf whose tail mass is <= eps."""
    if not 0 < eps < 1:
        raise ValidationError("truncation epsilon must be in (0, 1)")
    if d.kind == "table":
        return TruncatedDist(probs=d.probs, tail_mass=0.0)
    probs = [0.0] * d.shift
    cum = 0.0
    j = 0
    while 1.0 - cum > eps:
        p = d.pmf(d.shift + j)
        probs.append(p)
        cum += p
        j += 1
    return TruncatedDist(probs=tuple(probs), tail_mass=max(0.0, 1.0 - cum))


def from_spec(spec: dict) -> DiscreteDist:
    """Build a distribution from its JSON fragment; unknown fields rejected."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValidationError("distribution spec must be an object with a 'type' field")
    kind = spec["type"]
    if kind == "poisson":
        extra = set(spec) - {"type", "lambda", "shift"}
        if extra:
            raise ValidationError(f"unknown fields in poisson spec: {sorted(extra)}")
        if "lambda" not in spec:
            raise ValidationError("poisson spec needs 'lambda'")
        return displaced_poisson(spec["lambda"], spec.get("shift", 0))
    if kind == "table":
        extra = set(spec) - {"type", "probs"}
        if extra:
            raise ValidationError(f"unknown fields in table spec: {sorted(extra)}")
        if "probs" not in spec or not isinstance(spec["probs"], (list, tuple)):
            raise ValidationError("table spec needs a 'probs' array")
        return finite_table(spec["probs"])
    raise ValidationError(f"unknown distribution type {kind!r}")


def to_spec(d: DiscreteDist) -> dict:
    if d.kind == "poisson":
        return {"type": "poisson", "lambda": d.lam, "shift": d.shift}
    return {"type": "table", "probs": list(d.probs)}
