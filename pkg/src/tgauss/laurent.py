"""Integer Laurent polynomials in ``s = sqrt(t)``, vectorised.

Exact-mode vectors and operators never substitute a value for ``t`` while
computing.  Every coordinate is kept as ``sum_d c_d s**d / denom`` with
integer ``c_d`` stored in an int64 array of shape ``(ndeg, dim)``; the
creation operator only ever multiplies by 1 or ``s``, so products of
gaussians stay integral and sparse products run through scipy at machine
speed.  Values are recovered exactly, as :class:`~tgauss.scalar.Surd`, only
when a number is actually read out.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .scalar import Surd, as_fraction, rational_sqrt

# headroom kept below 2**63 before a product is attempted
_INT_LIMIT = 2 ** 62


class ExactOverflowError(OverflowError):
    """Exact coefficients left the int64 range; rerun in float precision."""


def scalar_laurent(x):
    """Split a rational or Surd into ``({degree: int}, denom)``."""
    if isinstance(x, Surd):
        a, b = x.a, x.b
    else:
        a, b = as_fraction(x), Fraction(0)
    den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
    terms = {}
    if a:
        terms[0] = a.numerator * (den // a.denominator)
    if b:
        terms[1] = b.numerator * (den // b.denominator)
    return terms, den


def power_table(t: Fraction, exps):
    """Integers ``m_e`` and a denominator ``D`` with ``s**e == m_e / D`` (+ sqrt part).

    Returns ``(table, D)`` where ``table[e] = (m, odd)``; ``odd`` flags that
    the power carries one leftover factor ``sqrt(t)`` (only when ``t`` is not
    a perfect square).
    """
    r = rational_sqrt(t)
    if r is not None:
        p, q = r.numerator, r.denominator
        rat = {e: e for e in exps}
        odd = {e: False for e in exps}
    else:
        p, q = t.numerator, t.denominator
        rat = {e: (e // 2) for e in exps}  # floor division handles negatives
        odd = {e: bool(e % 2) for e in exps}
    lo = min(rat.values(), default=0)
    hi = max(rat.values(), default=0)
    A, B = max(0, -lo), max(0, hi)
    table = {e: (p ** (rat[e] + A) * q ** (B - rat[e]), odd[e]) for e in exps}
    return table, p ** A * q ** B


def evaluate_terms(terms: dict, denom: int, t) -> Surd:
    """Exact value of ``sum_d terms[d] * s**d / denom``."""
    t = as_fraction(t)
    if not terms:
        return Surd(0, 0, t)
    table, D = power_table(t, terms.keys())
    a = b = 0
    for e, c in terms.items():
        m, odd = table[e]
        if odd:
            b += int(c) * m
        else:
            a += int(c) * m
    return Surd(Fraction(a, D * denom), Fraction(b, D * denom), t)


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


class LaurentArray:
    """A length-``dim`` array of integer Laurent polynomials over a common denominator."""

    __slots__ = ("coeffs", "low", "denom")

    def __init__(self, coeffs: np.ndarray, low: int = 0, denom: int = 1):
        coeffs = np.asarray(coeffs, dtype=np.int64)
        if coeffs.ndim != 2:
            raise ValueError("coeffs must have shape (ndeg, dim)")
        self.coeffs = coeffs
        self.low = int(low)
        self.denom = int(denom)

    @classmethod
    def zeros(cls, dim: int) -> "LaurentArray":
        return cls(np.zeros((0, dim), dtype=np.int64), 0, 1)

    @classmethod
    def unit(cls, dim: int, index: int, value=1) -> "LaurentArray":
        terms, den = scalar_laurent(value)
        if not terms:
            return cls.zeros(dim)
        lo, hi = min(terms), max(terms)
        c = np.zeros((hi - lo + 1, dim), dtype=np.int64)
        for d, v in terms.items():
            c[d - lo, index] = v
        return cls(c, lo, den)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def high(self) -> int:
        return self.low + self.coeffs.shape[0] - 1

    def copy(self) -> "LaurentArray":
        return LaurentArray(self.coeffs.copy(), self.low, self.denom)

    def trim(self) -> "LaurentArray":
        """Drop all-zero degree rows and cancel common integer factors."""
        c = self.coeffs
        nz = np.flatnonzero(np.any(c != 0, axis=1))
        if nz.size == 0:
            return LaurentArray.zeros(self.dim)
        c = c[nz[0]:nz[-1] + 1]
        low = self.low + int(nz[0])
        g = int(np.gcd.reduce(np.abs(c).ravel()))
        g = math.gcd(g, self.denom)
        if g > 1:
            return LaurentArray(c // g, low, self.denom // g)
        return LaurentArray(c, low, self.denom)

    def max_abs(self) -> int:
        return int(np.abs(self.coeffs).max()) if self.coeffs.size else 0

    def _aligned(self, other: "LaurentArray"):
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        if self.coeffs.shape[0] == 0:
            return other.low, None, other.coeffs, self.denom, other.denom
        if other.coeffs.shape[0] == 0:
            return self.low, self.coeffs, None, self.denom, other.denom
        lo = min(self.low, other.low)
        hi = max(self.high, other.high)
        a = np.zeros((hi - lo + 1, self.dim), dtype=np.int64)
        b = np.zeros_like(a)
        a[self.low - lo:self.high - lo + 1] = self.coeffs
        b[other.low - lo:other.high - lo + 1] = other.coeffs
        return lo, a, b, self.denom, other.denom

    def __add__(self, other: "LaurentArray") -> "LaurentArray":
        lo, a, b, da, db = self._aligned(other)
        D = _lcm(da, db)
        fa, fb = D // da, D // db
        if max(self.max_abs() * fa, other.max_abs() * fb) >= _INT_LIMIT // 2:
            raise ExactOverflowError("exact coefficients too large; use float precision")
        if a is None:
            return LaurentArray(b * fb, lo, D)
        if b is None:
            return LaurentArray(a * fa, lo, D)
        return LaurentArray(a * fa + b * fb, lo, D).trim()

    def __neg__(self) -> "LaurentArray":
        return LaurentArray(-self.coeffs, self.low, self.denom)

    def __sub__(self, other: "LaurentArray") -> "LaurentArray":
        return self + (-other)

    def shift(self, k: int) -> "LaurentArray":
        """Multiply by ``s**k``."""
        return LaurentArray(self.coeffs, self.low + k, self.denom)

    def scale(self, x) -> "LaurentArray":
        """Multiply by a rational or Surd scalar."""
        terms, den = scalar_laurent(x)
        if not terms or self.coeffs.shape[0] == 0:
            return LaurentArray.zeros(self.dim)
        if self.max_abs() * max(abs(v) for v in terms.values()) * len(terms) >= _INT_LIMIT:
            raise ExactOverflowError("exact coefficients too large; use float precision")
        out = None
        for d, v in terms.items():
            piece = LaurentArray(self.coeffs * v, self.low + d, 1)
            out = piece if out is None else out + piece
        return LaurentArray(out.coeffs, out.low, out.denom * self.denom * den).trim()

    def apply(self, terms: dict, denom: int, row_nnz: int, mat_max: int) -> "LaurentArray":
        """Apply a sparse operator given as ``{degree: csr int64}`` over ``denom``."""
        if self.coeffs.shape[0] == 0 or not terms:
            return LaurentArray.zeros(self.dim)
        if self.max_abs() * max(mat_max, 1) * max(row_nnz, 1) * len(terms) >= _INT_LIMIT:
            raise ExactOverflowError("exact coefficients too large; use float precision")
        olo = self.low + min(terms)
        ohi = self.high + max(terms)
        dim_out = next(iter(terms.values())).shape[0]
        out = np.zeros((ohi - olo + 1, dim_out), dtype=np.int64)
        ct = self.coeffs.T
        for e, mat in terms.items():
            prod = np.asarray(mat @ ct).T
            start = self.low + e - olo
            out[start:start + prod.shape[0]] += prod
        return LaurentArray(out, olo, self.denom * denom).trim()

    def column_terms(self, index: int) -> dict:
        col = self.coeffs[:, index]
        return {self.low + d: int(v) for d, v in enumerate(col) if v}

    def value(self, index: int, t) -> Surd:
        return evaluate_terms(self.column_terms(index), self.denom, t)

    def dot_terms(self, other: "LaurentArray"):
        """Coordinate inner product as ``({degree: int}, denom)``."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        terms: dict[int, int] = {}
        if self.coeffs.shape[0] == 0 or other.coeffs.shape[0] == 0:
            return terms, self.denom * other.denom
        safe = self.max_abs() * other.max_abs() * self.dim < _INT_LIMIT
        for i in range(self.coeffs.shape[0]):
            a = self.coeffs[i]
            if not a.any():
                continue
            for j in range(other.coeffs.shape[0]):
                b = other.coeffs[j]
                if safe:
                    v = int(np.dot(a, b))
                else:
                    v = int(np.dot(a.astype(object), b.astype(object)))
                if v:
                    d = self.low + other.low + i + j
                    terms[d] = terms.get(d, 0) + v
        return terms, self.denom * other.denom

    def evaluate(self, t):
        """Exact values as integer arrays ``(rational_num, sqrt_num, den)``.

        Coordinate ``i`` equals ``(rational_num[i] + sqrt_num[i]*sqrt(t)) / den``.
        """
        t = as_fraction(t)
        dim = self.dim
        rat = np.zeros(dim, dtype=object)
        irr = np.zeros(dim, dtype=object)
        if self.coeffs.shape[0] == 0:
            return rat, irr, 1
        exps = range(self.low, self.high + 1)
        table, D = power_table(t, exps)
        for k, e in enumerate(exps):
            row = self.coeffs[k]
            if not row.any():
                continue
            m, odd = table[e]
            contrib = row.astype(object) * m
            if odd:
                irr = irr + contrib
            else:
                rat = rat + contrib
        return rat, irr, D * self.denom

    def is_zero(self, t) -> bool:
        rat, irr, _ = self.evaluate(t)
        return not any(rat) and not any(irr)

    def to_float(self, t) -> np.ndarray:
        s = math.sqrt(float(t))
        out = np.zeros(self.dim)
        for k in range(self.coeffs.shape[0]):
            out += self.coeffs[k].astype(float) * s ** (self.low + k)
        return out / self.denom
