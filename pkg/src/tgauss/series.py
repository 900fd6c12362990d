"""Truncated formal power series with explicit order tags.

A :class:`PowerSeries` of order ``K`` knows the coefficients of
``x^0 .. x^(K-1)``.  Binary operations insist on equal orders: anything
else raises :class:`OrderMismatchError`, and the caller truncates
explicitly.  Coefficients are whatever the inputs are (Fractions stay exact).

The moment generating series of a law is ``M(w) = sum_k m_k w^k`` and its
Cauchy transform is ``G(z) = (1/z) M(1/z)``.  The free R-transform satisfies
``G(R(y) + 1/y) = y``; the conditionally free one is defined by
``G_mu(z) = 1 / (z - R^c(G_nu(z)))``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .scalar import rational_sqrt


class OrderMismatchError(ValueError):
    """Two series of different orders were combined."""


def _zero(c) -> bool:
    return c == 0


def _coef(c):
    # ints become Fractions so that division stays exact
    return Fraction(c) if isinstance(c, int) else c


class PowerSeries:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence, order: int | None = None):
        c = [_coef(x) for x in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("order must be non-negative")
            c = (c + [0] * order)[:order]
        self.coeffs = tuple(c)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def one(cls, order: int):
        return cls([1], order)

    @classmethod
    def variable(cls, order: int):
        return cls([0, 1], order)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def _same(self, other):
        if not isinstance(other, PowerSeries):
            raise TypeError("expected a PowerSeries")
        if other.order != self.order:
            raise OrderMismatchError(f"series orders differ ({self.order} vs {other.order})")

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise OrderMismatchError(f"cannot extend a series of order {self.order} to {order}")
        return PowerSeries(self.coeffs[:order])

    def __add__(self, other):
        if not isinstance(other, PowerSeries):
            if not self.coeffs:
                return self
            return PowerSeries((self.coeffs[0] + other,) + self.coeffs[1:])
        self._same(other)
        return PowerSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries([c * other for c in self.coeffs])
        self._same(other)
        K = self.order
        out = [0] * K
        for i, a in enumerate(self.coeffs):
            if _zero(a):
                continue
            for j in range(K - i):
                b = other.coeffs[j]
                if not _zero(b):
                    out[i + j] = out[i + j] + a * b
        return PowerSeries(out)

    def __rmul__(self, other):
        return self * other

    def valuation(self) -> int:
        """Index of the first nonzero coefficient (``order`` if none is known)."""
        for k, c in enumerate(self.coeffs):
            if not _zero(c):
                return k
        return self.order

    def shift_down(self, v: int) -> "PowerSeries":
        """Divide by ``x^v``; the first ``v`` coefficients must vanish."""
        if any(not _zero(c) for c in self.coeffs[:v]):
            raise ZeroDivisionError(f"series is not divisible by x^{v}")
        return PowerSeries(self.coeffs[v:])

    def shift_up(self, v: int) -> "PowerSeries":
        """Multiply by ``x^v`` (the order grows by ``v``)."""
        return PowerSeries([0] * v + list(self.coeffs))

    def reciprocal(self) -> "PowerSeries":
        c0 = self.coeffs[0] if self.coeffs else 0
        if _zero(c0):
            raise ZeroDivisionError("reciprocal of a series with zero constant term")
        K = self.order
        inv0 = 1 / c0
        out = [inv0] + [0] * (K - 1)
        for k in range(1, K):
            acc = 0
            for j in range(1, k + 1):
                if not _zero(self.coeffs[j]):
                    acc = acc + self.coeffs[j] * out[k - j]
            out[k] = -acc * inv0
        return PowerSeries(out)

    def __truediv__(self, other):
        """Quotient; common leading zeros are cancelled, which lowers the order."""
        if not isinstance(other, PowerSeries):
            return PowerSeries([c / other for c in self.coeffs])
        self._same(other)
        v = other.valuation()
        if v >= other.order:
            raise ZeroDivisionError("division by a series with no known nonzero coefficient")
        a = self.shift_down(v)
        b = other.shift_down(v)
        return a * b.reciprocal()

    def sqrt(self) -> "PowerSeries":
        """Square root with the positive constant term."""
        c0 = self.coeffs[0]
        if isinstance(c0, float):
            r0 = math.sqrt(c0)
        else:
            r0 = rational_sqrt(Fraction(c0))
            if r0 is None:
                raise ValueError(f"constant term {c0} has no rational square root")
        if _zero(r0):
            raise ZeroDivisionError("square root of a series with zero constant term")
        K = self.order
        out = [r0] + [0] * (K - 1)
        for k in range(1, K):
            acc = self.coeffs[k]
            for j in range(1, k):
                acc = acc - out[j] * out[k - j]
            out[k] = acc / (2 * r0)
        return PowerSeries(out)

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """``self(inner(x))``; ``inner`` must have zero constant term."""
        self._same(inner)
        if inner.order and not _zero(inner.coeffs[0]):
            raise ValueError("inner series must have zero constant term")
        K = self.order
        out = PowerSeries([0], K)
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def reversion(self) -> "PowerSeries":
        """Compositional inverse ``f`` with ``self(f(x)) = x``.

        Needs zero constant term and a nonzero linear term.
        """
        K = self.order
        if K < 2 or not _zero(self.coeffs[0]) or _zero(self.coeffs[1]):
            raise ValueError("reversion needs c_0 = 0 and c_1 != 0")
        c1 = self.coeffs[1]
        b = [0, 1 / c1] + [0] * (K - 2)
        for k in range(2, K):
            comp = self.compose(PowerSeries(b))
            b[k] = -comp.coeffs[k] / c1
        return PowerSeries(b)

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"PowerSeries({list(self.coeffs)!r})"


# ---------------------------------------------------------------------------
# transforms between moments and R-series

def free_R_from_moments(moments: Sequence) -> PowerSeries:
    """Free R-series ``R(y) = sum_{k>=1} kappa_k y^(k-1)`` from ``m_0 .. m_K``.

    Returns ``K`` coefficients (the free cumulants ``kappa_1 .. kappa_K``).
    """
    K = len(moments) - 1
    if K < 1:
        return PowerSeries([])
    M = PowerSeries(moments)
    g = M.shift_up(1)                      # order K+2
    h = g.reversion().shift_down(1)        # order K+1
    return ((h.reciprocal() - 1).shift_down(1))


def moments_from_free_R(R: PowerSeries) -> list:
    """Inverse of :func:`free_R_from_moments`: ``m_0 .. m_K`` from ``K`` cumulants."""
    K = R.order
    if K == 0:
        return [1]
    yR = R.shift_up(1)                     # order K+1
    h = (yR + 1).reciprocal()
    g = h.shift_up(1).reversion()          # order K+2
    return list(g.shift_down(1).coeffs)


def cfree_R_from_moments(mu_moments: Sequence, nu_moments: Sequence) -> PowerSeries:
    """Conditionally free R-series of the pair ``(mu, nu)``, ``K`` coefficients."""
    if len(mu_moments) != len(nu_moments):
        raise OrderMismatchError("moment sequences of different lengths")
    K = len(mu_moments) - 1
    if K < 1:
        return PowerSeries([])
    M_mu = PowerSeries(mu_moments)
    T = (1 - M_mu.reciprocal()).shift_down(1)              # order K
    g_nu_inv = PowerSeries(nu_moments).shift_up(1).reversion().truncate(K)
    return T.compose(g_nu_inv)


def moments_from_cfree_R(Rc: PowerSeries, nu_moments: Sequence) -> list:
    """``m_0 .. m_K`` of ``mu`` from its c-free R-series and the moments of ``nu``."""
    K = Rc.order
    if len(nu_moments) != K + 1:
        raise OrderMismatchError("nu needs exactly one more moment than the R-series order")
    g_nu = PowerSeries(nu_moments).shift_up(1).truncate(K)
    inner = Rc.compose(g_nu).shift_up(1)                    # order K+1
    return list((1 - inner).reciprocal().coeffs)
