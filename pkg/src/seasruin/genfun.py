"""The ultimate-time survival generating function Xi(s) = sum_u phi(u+1) s**u.

Xi(s) = u(s)^T v(s) / (G_{S_N}(s) - s**(kappa*N)) where the vector u holds the
prefix pgf factors s**(kappa*(N-k)) * G_{X_1+...+X_{k-1}}(s) and v holds the
boundary-mass polynomials of the successor seasons.  Series coefficients are
extracted by formal power-series division (numerical differentiation of the
ratio at 0 is hopeless beyond a few terms) and provide an independent
consistency channel: coefficient u equals phi(u+1).
"""

from __future__ import annotations

from typing import Optional

from ._numerics import FLOAT64, Numerics, pick_numerics
from .boundary import BoundaryMasses, _solve_ctx, solve_boundary
from .errors import DomainError, PoleProximity, ValidationError
from .model import RiskModel
from .roots import RootSet, characteristic_roots

__all__ = ["XiFunction", "xi_eval", "xi_series"]


class XiFunction:
    """Evaluator for Xi(s) on |s| < 1, built from a model and its masses."""

    def __init__(self, model: RiskModel, masses: Optional[BoundaryMasses] = None,
                 rootset: Optional[RootSet] = None):
        self.model = model
        self.rootset = rootset if rootset is not None else characteristic_roots(model)
        self.masses = masses if masses is not None else solve_boundary(model, self.rootset)
        # v_k polynomial coefficients: v_k[j] = sum_{i<=j} m_i^(k+1) F_{X_k}(j-i)
        self._v_polys = _v_polynomials(model, [list(r) for r in self.masses.m], FLOAT64)
        self._ctx_cache = {}

    # -- point evaluation ------------------------------------------------

    def eval(self, s: complex) -> complex:
        s = complex(s)
        if abs(s) >= 1:
            raise DomainError("Xi is defined on |s| < 1")
        if s == 0:
            # Xi(0) = phi(1) = m_0^(1) by the mass/series identity
            return complex(self.masses.m[0, 0])
        kn = self.model.period_degree
        den = complex(self.model.cycle_pgf_jet(s, 0)[0]) - s**kn
        if abs(den) <= 1e-12:
            raise PoleProximity(f"|G_SN(s) - s^kN| = {abs(den):.2e} at s = {s}")
        return _numerator(self.model, self._v_polys, s, FLOAT64) / den

    # -- series extraction -------------------------------------------------

    def series(self, n_terms: int, precision="auto") -> list:
        """Taylor coefficients of Xi at 0; coefficient u is phi(u+1)."""
        if n_terms < 1:
            raise ValidationError("n_terms must be >= 1")
        num = pick_numerics(n_terms + 1, self.rootset.min_nonzero_abs(), precision)
        key = num.dps
        if key not in self._ctx_cache:
            if num.is_mp:
                self._ctx_cache[key] = _solve_ctx(self.model, self.rootset, num)
            else:
                self._ctx_cache[key] = [list(r) for r in self.masses.m]
        masses = self._ctx_cache[key]
        return _series(self.model, masses, n_terms, num)


def xi_eval(x: XiFunction, s: complex) -> complex:
    return x.eval(s)


def xi_series(x: XiFunction, n_terms: int) -> list:
    return x.series(n_terms)


# -- internals -----------------------------------------------------------------

def _v_polynomials(model: RiskModel, masses, num: Numerics) -> list:
    """Coefficient lists of the v-vector entries, one per k = 1..N."""
    kappa, n_seasons = model.kappa, model.n_seasons
    polys = []
    for k in range(1, n_seasons + 1):
        succ = masses[k % n_seasons]          # m^(k+1), cyclic
        xk = model.seasons[k - 1]
        coeffs = []
        for j in range(kappa):
            acc = num.real(0.0)
            for i in range(j + 1):
                f = xk.cdf(j - i, num)
                if f != 0:
                    acc = acc + succ[i] * f
            coeffs.append(acc)
        polys.append(coeffs)
    return polys


def _numerator(model: RiskModel, v_polys, s, num: Numerics):
    kappa, n_seasons = model.kappa, model.n_seasons
    total = num.complex(0.0)
    prefix = num.complex(1.0)  # G_{X_1 + ... + X_{k-1}}(s)
    for k in range(1, n_seasons + 1):
        if k > 1:
            prefix = prefix * model.seasons[k - 2]._pgf_unchecked(s, num)
        u_k = prefix * s ** (kappa * (n_seasons - k))
        v_k = num.complex(0.0)
        for j in reversed(range(len(v_polys[k - 1]))):
            v_k = v_k * s + v_polys[k - 1][j]
        total = total + u_k * v_k
    return total


def _pmf_series(dist, length: int, num: Numerics) -> list:
    return dist.pmf_table(length - 1, num)


def _series(model: RiskModel, masses, n_terms: int, num: Numerics) -> list:
    kappa, n_seasons = model.kappa, model.n_seasons
    kn = model.period_degree
    delta = model.cycle_min_support
    length = n_terms + delta

    v_polys = _v_polynomials(model, masses, num)
    numer = [num.real(0.0)] * length
    prefix = [num.real(1.0)] + [num.real(0.0)] * (length - 1)
    for k in range(1, n_seasons + 1):
        if k > 1:
            prefix = _conv(prefix, _pmf_series(model.seasons[k - 2], length, num), length, num)
        shift = kappa * (n_seasons - k)
        for j, c in enumerate(v_polys[k - 1]):
            if c == 0:
                continue
            base = shift + j
            if base >= length:
                continue
            for t in range(length - base):
                if prefix[t] != 0:
                    numer[base + t] = numer[base + t] + c * prefix[t]

    denom = [num.real(1.0)] + [num.real(0.0)] * (length - 1)
    for d in model.seasons:
        denom = _conv(denom, _pmf_series(d, length, num), length, num)
    if kn < length:
        denom[kn] = denom[kn] - 1

    # both sides share the exact factor s**delta when S_N misses small values
    noise = 1e-6 if not num.is_mp else 10.0 ** (-(num.dps // 2))
    for t in range(delta):
        if abs(numer[t]) > noise or abs(denom[t]) > noise:
            raise ValidationError(
                "numerator/denominator fail to vanish at the shared origin root"
            )
    numer, denom = numer[delta:], denom[delta:]

    coeffs = []
    for t in range(n_terms):
        acc = numer[t]
        for k in range(1, t + 1):
            if denom[k] != 0 and coeffs[t - k] != 0:
                acc = acc - denom[k] * coeffs[t - k]
        coeffs.append(acc / denom[0])
    return [float(c) for c in coeffs]


def _conv(a: list, b: list, length: int, num: Numerics) -> list:
    out = [num.real(0.0)] * length
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(min(len(b), length - i)):
            if b[j] != 0:
                out[i + j] = out[i + j] + ai * b[j]
    return out
