"""Precision backends for the analytic pipeline.

The boundary system and the mass-extension recurrences run either in plain
float64/complex128 or in an isolated mpmath context.  The recurrences that
extend ``m_n`` forward amplify perturbations like ``|1/alpha_min|**n`` where
``alpha_min`` is the smallest nonzero characteristic root, so double precision
is only good for shallow tables; deeper tables pick an mpmath context sized to
the requested depth (see :func:`required_digits`).

Each mp ``Numerics`` owns a private ``MPContext`` so its scalars do arithmetic
at the intended precision regardless of the global mpmath state.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import SingularSystem

__all__ = ["Numerics", "FLOAT64", "mp_numerics", "required_digits", "pick_numerics"]


class Numerics:
    """Scalar/linear-algebra operations at a fixed working precision.

    ``dps is None`` selects the float64 backend; otherwise mpmath with the
    given decimal precision.  Scalars produced by one context must not be
    mixed with another context's.
    """

    def __init__(self, dps=None):
        self.dps = dps
        if dps is None:
            self.eps = float(np.finfo(float).eps)
        else:
            from mpmath.ctx_mp import MPContext

            ctx = MPContext()
            ctx.dps = int(dps)
            self._ctx = ctx
            self.eps = 10.0 ** (-dps)

    @property
    def is_mp(self):
        return self.dps is not None

    def real(self, x):
        if self.dps is None:
            return float(x)
        return self._ctx.mpf(x)

    def complex(self, x):
        if self.dps is None:
            return complex(x)
        if isinstance(x, complex):
            return self._ctx.mpc(x.real, x.imag)
        return self._ctx.mpc(x)

    def exp(self, z):
        if self.dps is None:
            return cmath.exp(z) if isinstance(z, complex) else math.exp(z)
        return self._ctx.exp(z)

    def poisson_pmf(self, lam, k):
        """P(Poisson(lam) = k) as a context scalar; exact at working precision."""
        if k < 0:
            return self.real(0.0)
        if self.dps is None:
            # log form avoids overflow of lam**k / k!
            return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))
        lam_ = self._ctx.mpf(lam)
        return self._ctx.exp(-lam_) * lam_**k / self._ctx.factorial(k)

    def solve(self, rows, rhs):
        """Solve a dense complex square system given as nested lists."""
        if self.dps is None:
            a = np.array(rows, dtype=complex)
            b = np.array(rhs, dtype=complex)
            try:
                return list(np.linalg.solve(a, b))
            except np.linalg.LinAlgError as exc:
                raise SingularSystem(str(exc)) from exc
        a = self._ctx.matrix(rows)
        b = self._ctx.matrix(rhs)
        try:
            x = self._ctx.lu_solve(a, b)
        except ZeroDivisionError as exc:
            raise SingularSystem("exact rank deficiency in mp solve") from exc
        return [x[i] for i in range(x.rows)]


FLOAT64 = Numerics()


def mp_numerics(dps):
    return Numerics(dps=int(dps))


def required_digits(depth, min_root_abs):
    """Decimal digits of headroom consumed by extending masses to index `depth`.

    Perturbations grow like (1/min_root_abs)**n; with no root strictly inside
    the unit circle the recurrences do not amplify at all.
    """
    if min_root_abs is None or min_root_abs >= 1.0 or depth <= 0:
        return 0.0
    return depth * math.log10(1.0 / min_root_abs)


def pick_numerics(depth, min_root_abs, precision="auto", guard_digits=25):
    """Choose a working precision for a pipeline that needs masses to `depth`.

    ``precision`` may be "auto", None/"float64", or an int (mp decimal digits).
    """
    if precision is None or precision == "float64":
        return FLOAT64
    if isinstance(precision, (int, np.integer)):
        return mp_numerics(precision)
    if precision != "auto":
        raise ValueError(f"unknown precision {precision!r}")
    digits = required_digits(depth, min_root_abs)
    if digits <= 3.0:
        return FLOAT64
    return mp_numerics(math.ceil(digits) + guard_digits)
