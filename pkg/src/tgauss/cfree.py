"""Conditionally free mixed moments, transforms and the functional phi_r.

Each algebra ``A_i`` carries two states, ``phi_i`` and ``psi_i``, given by
moment sequences.  The mixed moment of an alternating word is evaluated by
recursive centering: a factor ``P`` is split as ``(P - psi_i(P)) + psi_i(P)``;
the scalar part shortens the word, and a word whose factors are all
``psi``-centered factorises into the product of the ``phi_i`` values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .fock import DeformParams, FockVector, TruncationError, inner_product, runs
from .operators import SparseOperator
from .polynomials import Polynomial, apply_word, u_poly, v_poly
from .scalar import Surd, as_fraction, rational_sqrt
from .series import (OrderMismatchError, PowerSeries, cfree_R_from_moments,
                     free_R_from_moments, moments_from_cfree_R, moments_from_free_R)
from .spectra import CauchySeries, closed_form_series, moments_to_jacobi


class InsufficientOrderError(ValueError):
    """A computation needs moments beyond those supplied."""


class DensityError(ValueError):
    """A proposed density is negative on the support or has the wrong mass."""


# ---------------------------------------------------------------------------
# marginals

def _exact_number(x):
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def hankel_psd(moments: Sequence, tol: float = 1e-9) -> bool:
    """Whether the Hankel matrix ``[m_{i+j}]`` (``i, j <= K/2``) is positive semidefinite.

    Rational input is decided exactly by symmetric elimination: a zero pivot
    is allowed only when its whole row vanishes, as happens for laws with
    finite support.
    """
    m = (len(moments) - 1) // 2
    if all(_exact_number(x) for x in moments):
        H = [[Fraction(moments[i + j]) for j in range(m + 1)] for i in range(m + 1)]
        alive = list(range(m + 1))
        while alive:
            k = alive.pop(0)
            d = H[k][k]
            if d < 0:
                return False
            if d == 0:
                if any(H[k][j] != 0 for j in alive):
                    return False
                continue
            for i in alive:
                f = H[i][k] / d
                if f:
                    for j in alive:
                        H[i][j] -= f * H[k][j]
        return True
    H = np.array([[float(moments[i + j]) for j in range(m + 1)] for i in range(m + 1)])
    ev = np.linalg.eigvalsh(H)
    return bool(ev.min() >= -tol * max(1.0, abs(ev).max()))


@dataclass
class MarginalPair:
    """Moments of ``(phi_i, psi_i)`` on a one-generator algebra.

    ``support`` (optional ``(lo, hi)``) is only used to sample density
    positivity in :func:`density_vector_check`.
    """

    phi_moments: list
    psi_moments: list
    label: str = ""
    support: tuple | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.phi_moments = list(self.phi_moments)
        self.psi_moments = list(self.psi_moments)
        if self.phi_moments[0] != 1 or self.psi_moments[0] != 1:
            raise ValueError("moment sequences must start with 1")
        if self.check:
            for name, seq in (("phi", self.phi_moments), ("psi", self.psi_moments)):
                if not hankel_psd(seq):
                    raise ValueError(f"{name} moments of {self.label or 'marginal'} are not Hankel positive")

    @property
    def order(self) -> int:
        return min(len(self.phi_moments), len(self.psi_moments)) - 1

    def phi(self, P: Polynomial):
        if P.degree >= len(self.phi_moments):
            raise InsufficientOrderError(f"phi moments up to {P.degree} needed")
        return P.moment(self.phi_moments)

    def psi(self, P: Polynomial):
        if P.degree >= len(self.psi_moments):
            raise InsufficientOrderError(f"psi moments up to {P.degree} needed")
        return P.moment(self.psi_moments)

    def diagonal(self) -> "MarginalPair":
        """The pair ``(psi, psi)``: conditional freeness becomes freeness."""
        return MarginalPair(self.psi_moments, self.psi_moments, self.label, self.support, False)


def semicircle_moments(variance, K: int) -> list:
    """``m_{2k} = Catalan(k) variance^k``."""
    v = variance if isinstance(variance, float) else as_fraction(variance)
    return [0 if k % 2 else comb(k, k // 2) // (k // 2 + 1) * v ** (k // 2) for k in range(K + 1)]


def gaussian_marginal(t, K: int = 16) -> MarginalPair:
    """``phi`` = law of ``s^t``, ``psi`` = semicircle of variance ``t``."""
    t = t if isinstance(t, float) else as_fraction(t)
    r = 2.0 * math.sqrt(float(t))
    return MarginalPair(closed_form_series("s_t", t, 1, K), semicircle_moments(t, K),
                        label=f"s^t (t={t})", support=(-r, r))


# ---------------------------------------------------------------------------
# alternating words

@dataclass(frozen=True)
class AlternatingWord:
    """``scalar * P_1(X_{i_1}) ... P_m(X_{i_m})`` in adjacent-merge normal form."""

    factors: tuple
    scalar: object = 1

    @classmethod
    def from_factors(cls, factors) -> "AlternatingWord":
        scalar, norm = _normalize(tuple((int(i), p if isinstance(p, Polynomial) else Polynomial(p))
                                        for i, p in factors))
        return cls(tuple((i, P) for i, P, _ in norm), scalar)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


def _unpack(word):
    if isinstance(word, AlternatingWord):
        return word.scalar, tuple(word.factors)
    return 1, tuple(word)


def _normalize(factors: tuple):
    """Merge equal neighbours, pull out constants. Returns ``(scalar, factors)``.

    Factors are ``(index, P)`` or ``(index, P, centered)``; the flag records a
    factor already known to be psi-centered and is dropped by any merge.
    """
    scalar = 1
    out: list = []
    for f in factors:
        i, P = f[0], f[1]
        flag = len(f) > 2 and f[2]
        if out and out[-1][0] == i:
            out[-1] = (i, out[-1][1] * P, False)
        else:
            out.append((i, P, flag))
        # a constant factor may allow its neighbours to merge
        while out and out[-1][1].degree <= 0:
            c = out[-1][1][0] if out[-1][1].degree == 0 else 0
            out.pop()
            scalar = scalar * c
            if scalar == 0:
                return 0, ()
            if len(out) >= 2 and out[-1][0] == out[-2][0]:
                j, Q, _ = out.pop()
                out[-1] = (j, out[-1][1] * Q, False)
    return scalar, tuple(out)


def _key(factors):
    return tuple((i, P.coeffs, c) for i, P, c in factors)


def _mixed(marginals, factors, phi_of, psi_of, memo):
    scalar, factors = _normalize(tuple(factors))
    if scalar == 0:
        return 0
    if not factors:
        return scalar
    key = _key(factors)
    if key in memo:
        return scalar * memo[key]
    for j, (i, P, centered) in enumerate(factors):
        if centered:
            continue
        c = psi_of(i, P)
        if c != 0:
            new = list(factors)
            new[j] = (i, P - c, True)
            rest = factors[:j] + factors[j + 1:]
            val = _mixed(marginals, new, phi_of, psi_of, memo) \
                + c * _mixed(marginals, rest, phi_of, psi_of, memo)
            break
    else:
        val = 1
        for i, P, _ in factors:
            val = val * phi_of(i, P)
    memo[key] = val
    return scalar * val


def _marginal(marginals, i):
    if not 1 <= i <= len(marginals):
        raise ValueError(f"word uses algebra {i}, only {len(marginals)} marginals given")
    return marginals[i - 1]


def cfree_mixed_moment(marginals: Sequence[MarginalPair], word):
    """``phi(P_1(X_{i_1}) ... P_m(X_{i_m}))`` for conditionally free ``(phi_i, psi_i)``.

    ``word`` is an :class:`AlternatingWord` or a list of ``(index, Polynomial)``;
    indices are 1-based.
    """
    scalar, factors = _unpack(word)
    return scalar * _mixed(marginals, factors,
                           lambda i, P: _marginal(marginals, i).phi(P),
                           lambda i, P: _marginal(marginals, i).psi(P), {})


def free_mixed_moment(marginals: Sequence[MarginalPair], word):
    """Free product of the ``psi_i``: the same engine with ``phi_i := psi_i``."""
    scalar, factors = _unpack(word)
    return scalar * _mixed(marginals, factors,
                           lambda i, P: _marginal(marginals, i).psi(P),
                           lambda i, P: _marginal(marginals, i).psi(P), {})


# ---------------------------------------------------------------------------
# psi through the vector eta

def eta_vector(params: DeformParams) -> FockVector:
    """``Omega - sqrt(t) alpha sum_k e_(k,k)``."""
    if params.L < 2:
        raise TruncationError("eta lives on levels <= 2; need L >= 2")
    c = -params.sqrt_t * params.alpha
    items = [((), 1)] + [((k, k), c) for k in range(1, params.n + 1)]
    return FockVector.from_words(items, params)


def psi_state(x, params: DeformParams):
    """``<x Omega, eta>``.

    ``x`` may be a vector (already ``x Omega``), an operator, or a list of
    ``(index, Polynomial)`` factors in the gaussians ``s_i^t``.
    """
    if isinstance(x, FockVector):
        vec = x
    elif isinstance(x, SparseOperator):
        vec = x @ FockVector.vacuum(params)
    else:
        factors = list(x)
        deg = sum(max(P.degree, 0) for _, P in factors)
        if (deg + 2) // 2 > params.L:
            raise TruncationError(f"word of degree {deg} needs L >= {(deg + 2) // 2}")
        vec = apply_word(factors, params)
    return inner_product(vec, eta_vector(params))


# ---------------------------------------------------------------------------
# transforms

def _moments(x, order: int) -> list:
    m = list(x.moments if isinstance(x, CauchySeries) else x)
    if len(m) < order + 1:
        raise OrderMismatchError(f"need moments up to order {order}, have {len(m) - 1}")
    return m[:order + 1]


def free_R(nu, order: int) -> PowerSeries:
    """Free cumulants ``kappa_1 .. kappa_order`` as an R-series."""
    return free_R_from_moments(_moments(nu, order))


def cfree_R(pair, order: int) -> PowerSeries:
    """C-free R-series of ``(mu, nu)`` from ``G_mu(z) = 1/(z - R^c(G_nu(z)))``."""
    mu, nu = pair
    return cfree_R_from_moments(_moments(mu, order), _moments(nu, order))


def free_convolution(nu1, nu2, order: int) -> CauchySeries:
    """Moments ``m_0 .. m_order`` of ``nu1 [+] nu2`` by R-transform addition."""
    R = free_R(nu1, order) + free_R(nu2, order)
    return CauchySeries(moments_from_free_R(R))


def cfree_convolution(pair1, pair2, order: int):
    """``(mu_1, nu_1) [+]_c (mu_2, nu_2) = (mu, nu_1 [+] nu_2)``."""
    nu = free_convolution(pair1[1], pair2[1], order)
    Rc = cfree_R(pair1, order) + cfree_R(pair2, order)
    return CauchySeries(moments_from_cfree_R(Rc, nu.moments)), nu


def cfree_power(pair, N: int, order: int):
    """``N``-fold c-free self-convolution (cumulant series times ``N``)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    nu = CauchySeries(moments_from_free_R(free_R(pair[1], order) * N))
    Rc = cfree_R(pair, order) * N
    return CauchySeries(moments_from_cfree_R(Rc, nu.moments)), nu


def _dilate(moments: list, N: int) -> list:
    """Moments of ``X / sqrt(N)``; exact when the scale factors are rational."""
    r = rational_sqrt(Fraction(N))
    exact = all(_exact_number(m) for m in moments)
    out = []
    for k, m in enumerate(moments):
        if k % 2 == 0:
            out.append(m / Fraction(N) ** (k // 2) if exact else float(m) / N ** (k // 2))
        elif m == 0:
            out.append(m)
        elif exact and r is not None:
            out.append(m / r ** k)
        else:
            out.append(float(m) / math.sqrt(N) ** k)
    return out


def cfree_clt(pair, N: int, order: int) -> CauchySeries:
    """Law of ``(X_1 + ... + X_N) / sqrt(N)`` for c-free copies of ``pair``; the mu slot."""
    mu = _moments(pair[0], order)
    nu = _moments(pair[1], order)
    if order >= 1 and (mu[1] != 0 or nu[1] != 0):
        raise ValueError("cfree_clt needs centered marginals (m_1 = w_1 = 0)")
    if order >= 2 and mu[2] != 1:
        raise ValueError("cfree_clt needs m_2 = 1")
    mu_N, _ = cfree_power((mu, nu), N, order)
    return CauchySeries(_dilate(mu_N.moments, N))


# ---------------------------------------------------------------------------
# the functional phi_r

def phi_r_moments(word, r, t, n: int | None = None):
    """``phi_r(u_{a_1}(X_{i_1}) ... u_{a_l}(X_{i_l}))``.

    ``word`` lists ``(index, a)`` pairs with ``a >= 1`` and neighbouring
    indices distinct.  The value is ``(r^2 alpha)^(sum a / 2)`` when every
    ``a`` is even and 0 otherwise.
    """
    word = [(int(i), int(a)) for i, a in word]
    for (i, a), (j, _) in zip(word, word[1:]):
        if i == j:
            raise ValueError("neighbouring indices must differ")
    if any(a < 1 for _, a in word):
        raise ValueError("exponents must be at least 1")
    if n is not None and any(not 1 <= i <= n for i, _ in word):
        raise ValueError(f"indices must lie in 1..{n}")
    if any(a % 2 for _, a in word):
        return 0
    t = t if isinstance(t, float) else as_fraction(t)
    r = r if isinstance(r, float) else as_fraction(r)
    alpha = 1 / t - 1
    return (r * r * alpha) ** (sum(a for _, a in word) // 2)


def u_expansion(k: int, t) -> list:
    """Coefficients ``c_a`` with ``X^k = sum_a c_a u_a(X)``, ``u_a`` orthonormal for the semicircle of variance t."""
    psi = semicircle_moments(t, 2 * k)
    X_k = Polynomial.monomial(k)
    return [(X_k * u_poly(a, t)).moment(psi) for a in range(k + 1)]


def phi_r_marginal(r, t, K: int) -> list:
    """One-variable moments of ``phi_r``: ``m_k = sum_a c_{k,a} phi_r(u_a)``."""
    t = t if isinstance(t, float) else as_fraction(t)
    out = []
    for k in range(K + 1):
        c = u_expansion(k, t)
        acc = c[0]
        for a in range(2, k + 1, 2):
            acc = acc + c[a] * phi_r_moments([(1, a)], r, t)
        out.append(acc)
    return out


def phi_r_pair(r, t, K: int = 16) -> MarginalPair:
    """``(phi_r, psi)`` on one generator, ``psi`` the semicircle of variance t."""
    t = t if isinstance(t, float) else as_fraction(t)
    return MarginalPair(phi_r_marginal(r, t, K), semicircle_moments(t, K), label=f"phi_r (r={r})",
                        check=False)


# ---------------------------------------------------------------------------
# the orthonormal basis of the conditionally free product

def _sqrt_coeff(x, t=None):
    if _exact_number(x):
        q = rational_sqrt(Fraction(x))
        if q is not None:
            return q
        if t is not None and not isinstance(t, float):
            q = rational_sqrt(Fraction(x) / t)
            if q is not None:
                return Surd(0, q, t)
    return math.sqrt(float(x))


def orthonormal_polys(moments: Sequence, degree: int, t=None) -> list:
    """Orthonormal polynomials ``p_0 .. p_degree`` of a moment sequence.

    Built from the Jacobi recurrence.  Exact when each ``b_k`` is rational
    or a rational multiple of ``sqrt(t)``; otherwise floats are used.
    """
    if len(moments) < 2 * degree + 1:
        raise InsufficientOrderError(f"need moments up to {2 * degree} for degree {degree}")
    jac = moments_to_jacobi(list(moments[:2 * degree + 1]))
    ps = [Polynomial((1,))]
    X = Polynomial.X()
    b = [_sqrt_coeff(v, t) for v in jac.b_squared]
    for k in range(degree):
        nxt = X * ps[k] - ps[k] * jac.a[k]
        if k >= 1:
            nxt = nxt - ps[k - 1] * b[k - 1]
        ps.append(nxt * (1 / b[k]))
    return ps


def run_words(n: int, max_len: int) -> list:
    """All words over ``1..n`` of length ``<= max_len`` in graded-lex order."""
    out = []
    for k in range(max_len + 1):
        out.extend(itertools.product(range(1, n + 1), repeat=k))
    return out


def general_basis_gram(marginals: Sequence[MarginalPair], max_len: int, t=None):
    """Gram matrix of ``e_w = u^{i_1}_{a_1}(X_{i_1}) ... v^{i_l}_{a_l}(X_{i_l}) Omega``.

    ``u^i`` are orthonormal for ``psi_i`` and ``v^i`` for ``phi_i``; inner
    products are evaluated as conditionally free mixed moments.  Returns
    ``(words, gram)`` with ``gram`` a list of lists.
    """
    n = len(marginals)
    U = [orthonormal_polys(m.psi_moments, max(max_len - 1, 0), t) for m in marginals]
    V = [orthonormal_polys(m.phi_moments, max_len, t) for m in marginals]
    words = run_words(n, max_len)
    factors = []
    for w in words:
        r = runs(w)
        f = [(i, U[i - 1][a]) for i, a in r[:-1]]
        if r:
            i, a = r[-1]
            f.append((i, V[i - 1][a]))
        factors.append(f)
    gram = [[None] * len(words) for _ in words]
    for x in range(len(words)):
        for y in range(x, len(words)):
            val = cfree_mixed_moment(marginals, list(reversed(factors[y])) + factors[x])
            gram[x][y] = gram[y][x] = val
    return words, gram


def density_vector_check(marginals: Sequence[MarginalPair], densities: Sequence[Polynomial],
                         word, samples: int = 1001):
    """``(phi(c x), psi(x))`` with ``c = 1 + sum_i (f_i - 1)(X_i)``.

    Each ``f_i`` must be a polynomial with ``phi_i(f_i) = 1`` that is
    non-negative on the marginal's support (when one is given).
    """
    if len(densities) != len(marginals):
        raise ValueError("one density per marginal")
    for m, f in zip(marginals, densities):
        mass = m.phi(f)
        if abs(float(mass) - 1.0) > 1e-12 or (_exact_number(mass) and mass != 1):
            raise DensityError(f"density has phi-mass {mass}, expected 1")
        if m.support is not None:
            xs = np.linspace(m.support[0], m.support[1], samples)
            if min(float(f(float(x))) for x in xs) < -1e-12:
                raise DensityError("density is negative on the support")
    scalar, factors = _unpack(word)
    factors = list(factors)
    lhs = cfree_mixed_moment(marginals, factors)
    for i, f in enumerate(densities, start=1):
        lhs = lhs + cfree_mixed_moment(marginals, [(i, f - 1)] + factors)
    return scalar * lhs, scalar * free_mixed_moment(marginals, factors)
