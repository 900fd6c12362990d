"""Exact scalars of the quadratic field Q(sqrt t).

Every matrix entry of the t-gaussian operators is 0, 1 or sqrt(t), so for
rational ``t`` all vacuum quantities live in ``Q(sqrt t)``.  :class:`Surd`
is that field element; plain ``float`` plays the role of the inexact scalar.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Union

__all__ = ["Surd", "Scalar", "as_fraction", "rational_sqrt", "sqrt_t_power", "to_float"]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and decimal/``"p/q"`` strings to a Fraction.

    Floats are rejected: exact mode never silently absorbs binary rounding.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational number")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected a rational number, got {type(x).__name__}")


def _isqrt_exact(m: int):
    if m < 0:
        return None
    r = math.isqrt(m)
    return r if r * r == m else None


@lru_cache(maxsize=256)
def rational_sqrt(q: Fraction):
    """Return ``sqrt(q)`` as a Fraction when it is rational, else ``None``."""
    q = Fraction(q)
    p, d = _isqrt_exact(q.numerator), _isqrt_exact(q.denominator)
    if p is None or d is None:
        return None
    return Fraction(p, d)


class Surd:
    """The number ``a + b*sqrt(t)`` with ``a, b`` rational and ``t > 0`` rational.

    When ``t`` is a perfect rational square the irrational part is folded into
    ``a`` so that equal numbers have equal representations.
    """

    __slots__ = ("a", "b", "t")

    def __init__(self, a=0, b=0, t=1):
        a = as_fraction(a)
        b = as_fraction(b)
        t = as_fraction(t)
        if t <= 0:
            raise ValueError("t must be positive")
        if b:
            r = rational_sqrt(t)
            if r is not None:
                a += b * r
                b = Fraction(0)
        self.a = a
        self.b = b
        self.t = t

    @classmethod
    def sqrt_t(cls, t) -> "Surd":
        return cls(0, 1, t)

    # coercion -------------------------------------------------------------

    def _parts(self, other):
        """(a, b) of ``other`` in this field, or None if ``other`` is a float."""
        if isinstance(other, Surd):
            if other.b and self.b and other.t != self.t:
                raise ValueError("cannot mix Surds over different fields")
            if other.b and other.t != self.t:
                if self.b:
                    raise ValueError("cannot mix Surds over different fields")
                return None
            return other.a, other.b
        if isinstance(other, float):
            return None
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def _promote(self, other):
        # self is rational but other carries a different sqrt: rebase self
        return Surd(self.a, 0, other.t)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return NotImplemented
        if p is None:
            if isinstance(other, Surd):
                return self._promote(other) + other
            return float(self) + other
        return Surd(self.a + p[0], self.b + p[1], self.t)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.t)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return NotImplemented
        if p is None:
            if isinstance(other, Surd):
                return self._promote(other) * other
            return float(self) * other
        c, d = p
        return Surd(self.a * c + self.b * d * self.t, self.a * d + self.b * c, self.t)

    __rmul__ = __mul__

    def conjugate(self) -> "Surd":
        """Galois conjugate ``a - b*sqrt(t)``."""
        return Surd(self.a, -self.b, self.t)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - b^2 t``."""
        return self.a * self.a - self.b * self.b * self.t

    def inverse(self) -> "Surd":
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("Surd division by zero")
        return Surd(self.a / nrm, -self.b / nrm, self.t)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        if isinstance(other, Surd):
            if other.b and other.t != self.t and not self.b:
                return self._promote(other) / other
            return self * other.inverse()
        p = self._parts(other)
        if p is NotImplemented:
            return NotImplemented
        if p[0] == 0:
            raise ZeroDivisionError("Surd division by zero")
        return Surd(self.a / p[0], self.b / p[0], self.t)

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        return self.inverse() * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return float(self) ** k
        if k < 0:
            return self.inverse() ** (-k)
        out = Surd(1, 0, self.t)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison / conversion ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Surd):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return self.a == other.a and self.b == other.b and self.t == other.t
        if isinstance(other, float):
            return float(self) == other
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.t))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        if not self.b:
            return float(self.a)
        return float(self.a) + float(self.b) * math.sqrt(self.t)

    def _sign(self) -> int:
        # exact sign of a + b sqrt t
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        lhs = self.a * self.a
        rhs = self.b * self.b * self.t
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def __lt__(self, other):
        return (self - other)._sign() < 0 if not isinstance(other, float) else float(self) < other

    def __le__(self, other):
        return (self - other)._sign() <= 0 if not isinstance(other, float) else float(self) <= other

    def __gt__(self, other):
        return (self - other)._sign() > 0 if not isinstance(other, float) else float(self) > other

    def __ge__(self, other):
        return (self - other)._sign() >= 0 if not isinstance(other, float) else float(self) >= other

    def __abs__(self):
        return -self if self._sign() < 0 else self

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        if not self.b:
            return f"Surd({self.a})"
        return f"Surd({self.a} + {self.b}*sqrt({self.t}))"

    def __str__(self):
        if not self.b:
            return str(self.a)
        root = f"sqrt({self.t})" if abs(self.b) == 1 else f"{abs(self.b)}*sqrt({self.t})"
        if not self.a:
            return root if self.b > 0 else f"-{root}"
        return f"{self.a} {'+' if self.b > 0 else '-'} {root}"


Scalar = Union[Surd, float]


def sqrt_t_power(j: int, t):
    """``sqrt(t)**j`` for integer ``j``: a Surd for rational t, else a float."""
    if isinstance(t, float):
        return math.sqrt(t) ** j
    t = as_fraction(t)
    if j % 2 == 0:
        return Surd(t ** (j // 2), 0, t)
    return Surd(0, t ** ((j - 1) // 2), t)


def to_float(x) -> float:
    return float(x)
