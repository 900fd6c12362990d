"""Chebyshev polynomials of the second kind and the deformed families u_k, v_k.

``u_k(X) = U_k(X / (2 sqrt t))`` is orthonormal for the semicircle of
variance ``t``; ``v_k`` is orthonormal for the law of ``s^t``.  The ground
truth for ``v_k`` is the monic three-term recursion

    P_0 = 1, P_1 = X, P_2 = X^2 - 1, P_{k+1} = X P_k - t P_{k-1}  (k >= 2)

normalised by ``||P_k|| = t^((k-1)/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .fock import DeformParams, FockVector, TruncationError, runs
from .operators import gaussian
from .scalar import Surd, as_fraction, sqrt_t_power


def _is_zero(c) -> bool:
    return c == 0


class Polynomial:
    """Polynomial in one variable with coefficients in ascending degree.

    Coefficients may be ints, Fractions, :class:`Surd` or floats; arithmetic
    keeps whatever the coefficients support.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):
        c = list(coeffs)
        while c and _is_zero(c[-1]):
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def X(cls):
        return cls((0, 1))

    @classmethod
    def const(cls, c):
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=1):
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __add__(self, other):
        other = _as_poly(other)
        m = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self[k] + other[k] for k in range(m)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        out = Polynomial((1,))
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            other = _as_poly(other)
        return len(self.coeffs) == len(other.coeffs) and all(
            a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self.coeffs), default=0.0)

    def moment(self, moments: Sequence):
        """``sum_j c_j m_j``: the value of a state with moments ``m``."""
        if self.degree >= len(moments):
            raise ValueError(f"need moments up to order {self.degree}, have {len(moments) - 1}")
        acc = 0
        for c, m in zip(self.coeffs, moments):
            if not _is_zero(c):
                acc = acc + c * m
        return acc

    def apply(self, op, vec: FockVector) -> FockVector:
        """``P(op) vec`` by Horner's scheme over sparse applications."""
        if not self.coeffs:
            return FockVector.zeros(vec.params)
        out = vec.scale(self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            out = op @ out
            if not _is_zero(c):
                out = out + vec.scale(c)
        return out

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if _is_zero(c):
                continue
            terms.append(f"({c})" + ("" if k == 0 else "*X" if k == 1 else f"*X^{k}"))
        return " + ".join(terms) or "0"


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial((x,))


def _coerce_t(t):
    return t if isinstance(t, float) else as_fraction(t)


def _sqrt_t_pow(j: int, t):
    return sqrt_t_power(j, t)


@lru_cache(maxsize=None, typed=True)
def chebyshev_U(k: int) -> Polynomial:
    """``U_0 = 1``, ``U_1 = 2y``, ``U_{k+1} = 2y U_k - U_{k-1}`` (integer coefficients)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return Polynomial((1,))
    if k == 1:
        return Polynomial((0, 2))
    return Polynomial((0, 2)) * chebyshev_U(k - 1) - chebyshev_U(k - 2)


@lru_cache(maxsize=None, typed=True)
def u_poly(k: int, t) -> Polynomial:
    """``u_k(X) = U_k(X / (2 sqrt t))``."""
    t = _coerce_t(t)
    U = chebyshev_U(k)
    out = []
    for j, c in enumerate(U.coeffs):
        if c == 0:
            out.append(0)
            continue
        out.append(_sqrt_t_pow(-j, t) * Fraction(c, 2 ** j) if not isinstance(t, float)
                   else c / 2 ** j * math.sqrt(t) ** (-j))
    return Polynomial(out)


@lru_cache(maxsize=None, typed=True)
def monic_P(k: int, t) -> Polynomial:
    """Monic orthogonal polynomials of the law of ``s^t``."""
    t = _coerce_t(t)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return Polynomial((1,))
    if k == 1:
        return Polynomial((0, 1))
    if k == 2:
        return Polynomial((-1, 0, 1))
    return Polynomial.X() * monic_P(k - 1, t) - monic_P(k - 2, t) * t


@lru_cache(maxsize=None, typed=True)
def v_poly(k: int, t) -> Polynomial:
    """Orthonormal polynomials of ``s^t``: ``P_k / t^((k-1)/2)`` for ``k >= 1``."""
    t = _coerce_t(t)
    if k == 0:
        return Polynomial((1,))
    return monic_P(k, t) * _sqrt_t_pow(1 - k, t)


def v_poly_from_u(k: int, t) -> Polynomial:
    """``v_k`` via ``sqrt(t) (u_k - alpha u_{k-2})`` for ``k >= 2``."""
    t = _coerce_t(t)
    if k < 2:
        return v_poly(k, t)
    alpha = 1 / t - 1
    return (u_poly(k, t) - u_poly(k - 2, t) * alpha) * _sqrt_t_pow(1, t)


@dataclass(frozen=True)
class RelationsReport:
    t: object
    up_to: int
    v_from_u: float
    u_even: float
    u_odd: float

    @property
    def max_discrepancy(self) -> float:
        return max(self.v_from_u, self.u_even, self.u_odd)

    @property
    def ok(self) -> bool:
        return self.max_discrepancy == 0.0


def relations_R_check(t, up_to: int) -> RelationsReport:
    """Check the three u/v relations up to degree ``up_to``.

    Returns the largest absolute coefficient of each difference; in exact
    mode these are exactly 0.
    """
    if up_to < 2:
        raise ValueError("up_to must be at least 2")
    t = _coerce_t(t)
    alpha = 1 / t - 1
    inv_s = _sqrt_t_pow(-1, t)
    d1 = max((v_poly(k, t) - v_poly_from_u(k, t)).max_abs_coeff() for k in range(2, up_to + 1))
    d2 = 0.0
    d3 = 0.0
    for m in range(0, up_to // 2 + 1):
        # u_{2m} = alpha^m v_0 + (1/sqrt t) sum_{k=1}^m alpha^{m-k} v_{2k}
        rhs = Polynomial((alpha ** m,))
        for k in range(1, m + 1):
            rhs = rhs + v_poly(2 * k, t) * (alpha ** (m - k) * inv_s)
        d2 = max(d2, (u_poly(2 * m, t) - rhs).max_abs_coeff())
    for m in range(0, (up_to - 1) // 2 + 1):
        # u_{2m+1} = (1/sqrt t) sum_{k=0}^m alpha^{m-k} v_{2k+1}
        rhs = Polynomial()
        for k in range(0, m + 1):
            rhs = rhs + v_poly(2 * k + 1, t) * (alpha ** (m - k) * inv_s)
        d3 = max(d3, (u_poly(2 * m + 1, t) - rhs).max_abs_coeff())
    return RelationsReport(t, up_to, d1, d2, d3)


def apply_word(factors, params: DeformParams, vec: FockVector | None = None) -> FockVector:
    """``P_1(s_{i_1}) ... P_m(s_{i_m}) vec`` for ``factors = [(i_1, P_1), ...]``.

    The rightmost factor is applied first; ``vec`` defaults to the vacuum.
    """
    out = FockVector.vacuum(params) if vec is None else vec
    for letter, poly in reversed(list(factors)):
        out = poly.apply(gaussian(letter, params), out)
    return out


def ident_factors(word, t) -> list:
    """``[(i_1, u_{a_1}), ..., (i_l, v_{a_l})]`` for the run decomposition of ``word``."""
    r = runs(word)
    out = [(i, u_poly(a, t)) for i, a in r[:-1]]
    if r:
        i, a = r[-1]
        out.append((i, v_poly(a, t)))
    return out


def ident_vector(word, params: DeformParams, check: bool = True) -> FockVector:
    """``u_{a_1}(s_{i_1}) ... v_{a_l}(s_{i_l}) Omega``, which equals ``e_word``.

    Needs ``|word| <= L - max(a_j)`` so that no intermediate vector reaches the
    truncation edge.  With ``check`` the result is compared with ``e_word``
    (exactly in exact mode) and a mismatch raises ``AssertionError``.
    """
    word = tuple(word)
    r = runs(word)
    margin = max((a for _, a in r), default=0)
    if len(word) > params.L - margin:
        raise TruncationError(
            f"word of length {len(word)} needs L >= {len(word) + margin}, have L={params.L}")
    vec = apply_word(ident_factors(word, params.t), params)
    if check:
        target = FockVector.basis(word, params)
        if not vec.equals(target):
            raise AssertionError(f"polynomial word does not reproduce e_{word}")
    return vec
