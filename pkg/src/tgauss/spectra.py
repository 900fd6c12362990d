"""Laws of s^t and c^t: densities, atoms, Cauchy transforms, Jacobi data.

Densities are integrated with :func:`scipy.integrate.quad` after the
substitution ``x = edge +- u^2``, which removes the square-root behaviour
at the edges of the support.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .scalar import Surd, as_fraction
from .series import PowerSeries


class NotAMeasureError(ValueError):
    """A moment sequence failed the Hankel positivity test."""


class DomainError(ValueError):
    """A Cauchy transform was evaluated off the upper half-plane."""


def _exact_t(t):
    """Rational ``t`` as a Fraction, otherwise a float."""
    if isinstance(t, float):
        return t
    try:
        return as_fraction(t)
    except TypeError:
        return float(t)


# ---------------------------------------------------------------------------
# measures

@dataclass
class Measure:
    """Absolutely continuous part on ``support`` plus a list of atoms."""

    density: Callable[[float], float]
    support: tuple
    atoms: list = field(default_factory=list)
    label: str = ""

    def atom_mass(self) -> float:
        return float(sum(w for _, w in self.atoms))

    def total_mass(self) -> float:
        return measure_moment(self, 0)

    def density_nonnegative(self, samples: int = 401) -> bool:
        lo, hi = self.support
        xs = np.linspace(lo, hi, samples + 2)[1:-1]
        return all(self.density(x) >= 0.0 for x in xs)


def _edge_integral(f, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    mid = 0.5 * (lo + hi)
    h = math.sqrt(mid - lo)
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=400)
    left, _ = integrate.quad(lambda u: f(lo + u * u) * 2.0 * u, 0.0, h, **opts)
    right, _ = integrate.quad(lambda u: f(hi - u * u) * 2.0 * u, 0.0, h, **opts)
    return left + right


def measure_moment(m: Measure, k: int) -> float:
    """``int x^k dm`` by edge-substituted adaptive quadrature plus the atoms."""
    if k < 0:
        raise ValueError("k must be non-negative")
    lo, hi = m.support
    cont = _edge_integral(lambda x: m.density(x) * x ** k, lo, hi)
    return cont + sum(float(w) * float(x) ** k for x, w in m.atoms)


def gaussian_atom_weight(t):
    """``(1 - 2t) / (2 - 2t)``, exact for rational ``t``; 0 at ``t = 1/2``."""
    t = _exact_t(t)
    if t == 1:
        return 0 if not isinstance(t, float) else 0.0
    return (1 - 2 * t) / (2 - 2 * t)


def gaussian_measure(t) -> Measure:
    """Law of ``s^t`` in the vacuum state."""
    te = _exact_t(t)
    tf = float(te)
    if not tf > 0:
        raise ValueError("t must be positive")
    r = 2.0 * math.sqrt(tf)

    def density(x):
        v = 4.0 * tf - x * x
        if v <= 0.0:
            return 0.0
        return math.sqrt(v) / (2.0 * math.pi * (1.0 - (1.0 - tf) * x * x))

    atoms = []
    if te < Fraction(1, 2) if not isinstance(te, float) else tf < 0.5:
        w = float(gaussian_atom_weight(te))
        x0 = 1.0 / math.sqrt(1.0 - tf)
        atoms = [(-x0, w), (x0, w)]
    return Measure(density, (-r, r), atoms, label=f"s^t, t={te}")


def c_atom_numerator(t, n: int):
    """``(n-1) t^2 - 2 n t + n``; positive exactly when ``c^t`` has an atom (t != 1).

    Its roots are ``n / (n +- sqrt n)``.  Accepts Fractions, floats and
    :class:`Surd` values (e.g. ``2 - sqrt 2``), evaluated exactly where possible.
    """
    return (n - 1) * t * t - 2 * n * t + n


def c_atom_location(t, n: int):
    """``n + 1/alpha = (n + t(1-n)) / (1 - t)``."""
    t = _exact_t(t) if not isinstance(t, Surd) else t
    if t == 1:
        raise ZeroDivisionError("no atom location at t = 1")
    return (n + t * (1 - n)) / (1 - t)


def c_atom_weight(t, n: int):
    """Mass of the atom of ``c^t`` (the formula value, possibly <= 0)."""
    t = _exact_t(t) if not isinstance(t, Surd) else t
    if t == 1:
        return 0 if not isinstance(t, float) else 0.0
    return c_atom_numerator(t, n) / (n * (1 - t) * (1 - t) + t * (1 - t))


def c_has_atom(t, n: int) -> bool:
    t = _exact_t(t) if not isinstance(t, Surd) else t
    return t != 1 and c_atom_numerator(t, n) > 0


def c_support(t, n: int) -> tuple:
    tf = float(t)
    s = math.sqrt(n)
    return tf * (1.0 - s) ** 2, tf * (1.0 + s) ** 2


def c_measure(t, n: int) -> Measure:
    """Law of ``c^t = sum_i (s_i^t)^2`` in the vacuum state."""
    if n < 1:
        raise ValueError("n must be at least 1")
    te = _exact_t(t)
    tf = float(te)
    a, b = c_support(tf, n)
    c0 = n + tf * (1 - n)

    def density(x):
        v = (x - a) * (b - x)
        if v <= 0.0 or x <= 0.0:
            return 0.0
        return math.sqrt(v) / (2.0 * math.pi * x * ((tf - 1.0) * x + c0))

    atoms = []
    if c_has_atom(te, n):
        atoms = [(float(c_atom_location(te, n)), float(c_atom_weight(te, n)))]
    return Measure(density, (a, b), atoms, label=f"c^t, t={te}, n={n}")


# ---------------------------------------------------------------------------
# Cauchy transforms

KINDS = ("s_t", "c_t", "t_c1")


def _root_pair(z: complex, a: float, b: float) -> complex:
    # sqrt((z-a)(z-b)) analytic off [a, b] and ~ z at infinity
    return cmath.sqrt(z - a) * cmath.sqrt(z - b)


def closed_form_G(kind: str, t, n: int, z: complex) -> complex:
    """Closed-form Cauchy transform of ``s^t``, ``c^t`` or ``t c^1``.

    ``z`` must lie in the open upper half-plane.
    """
    z = complex(z)
    if not z.imag > 0:
        raise DomainError("Cauchy transforms are evaluated for Im z > 0 only")
    tf = float(t)
    if kind == "s_t":
        r = 2.0 * math.sqrt(tf)
        root = _root_pair(z, -r, r)
        return ((0.5 - tf) * z + 0.5 * root) / ((1.0 - tf) * z * z - 1.0)
    a, b = c_support(tf, n)
    root = _root_pair(z, a, b)
    if kind == "c_t":
        c0 = n + tf * (1 - n)
        return ((2.0 * tf - 1.0) * z + (1 - n) * tf - root) / (2.0 * z * ((tf - 1.0) * z + c0))
    if kind == "t_c1":
        return (z + (1 - n) * tf - root) / (2.0 * tf * z)
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def closed_form_series(kind: str, t, n: int, order: int) -> list:
    """Moments ``m_0 .. m_order`` read off the closed forms as power series in ``1/z``.

    Exact (Fractions) for rational ``t``.
    """
    te = _exact_t(t)
    K = order + 3
    w = PowerSeries.variable(K)
    one = PowerSeries.one(K)
    if kind == "s_t":
        root = (one - w * w * (4 * te)).sqrt()
        num = one * (Fraction(1, 2) - te if not isinstance(te, float) else 0.5 - te) + root * Fraction(1, 2)
        den = one * (1 - te) - w * w
    elif kind in ("c_t", "t_c1"):
        root = (one - w * (2 * (n + 1) * te) + w * w * ((n - 1) ** 2 * te * te)).sqrt()
        if kind == "c_t":
            num = one * (2 * te - 1) + w * ((1 - n) * te) - root
            den = (one * (te - 1) + w * (n + te * (1 - n))) * 2
        else:
            num = one + w * ((1 - n) * te) - root
            den = w * (2 * te)
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    M = num / den
    if M.order < order + 1:
        raise ArithmeticError("series lost too many orders while cancelling leading zeros")
    return list(M.coeffs[:order + 1])


@dataclass
class CauchySeries:
    """Moments ``m_0 = 1, m_1, ..., m_K`` of ``G(z) = sum_k m_k z^(-k-1)``."""

    moments: list

    def __post_init__(self):
        if not self.moments or self.moments[0] != 1:
            raise ValueError("a probability moment sequence starts with m_0 = 1")

    @property
    def K(self) -> int:
        return len(self.moments) - 1

    def evaluate(self, z: complex) -> complex:
        z = complex(z)
        return sum(complex(float(m)) / z ** (k + 1) for k, m in enumerate(self.moments))

    def tail_bound(self, z: complex, radius: float) -> float:
        """Bound on the omitted tail for a law supported in ``[-radius, radius]``."""
        q = radius / abs(z)
        if q >= 1.0:
            return math.inf
        return q ** (self.K + 1) / abs(z) / (1.0 - q)

    def power_series(self) -> PowerSeries:
        return PowerSeries(self.moments)


# ---------------------------------------------------------------------------
# Jacobi data and continued fractions

@dataclass
class JacobiCoefficients:
    """``G(z) = 1/(z - a[0] - b[0]^2/(z - a[1] - b[1]^2/(...)))``."""

    a: list
    b_squared: list

    def __post_init__(self):
        for v in self.b_squared:
            if not v > 0:
                raise NotAMeasureError("off-diagonal Jacobi coefficients must be positive")

    @property
    def b(self) -> list:
        return [math.sqrt(float(v)) for v in self.b_squared]

    def __len__(self):
        return len(self.a)


def gaussian_jacobi(t, size: int) -> JacobiCoefficients:
    """``a_k = 0``, ``b = (1, sqrt t, sqrt t, ...)``."""
    te = _exact_t(t)
    return JacobiCoefficients([0] * size, [1] + [te] * (size - 2) if size >= 2 else [])


def g_continued_fraction(jac: JacobiCoefficients, z: complex, depth: int) -> complex:
    """Bottom-up evaluation of the continued fraction truncated after ``depth`` levels."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth > len(jac.a) or depth - 1 > len(jac.b_squared):
        raise ValueError("not enough Jacobi coefficients for this depth")
    z = complex(z)
    acc = z - float(jac.a[depth - 1])
    for k in range(depth - 2, -1, -1):
        acc = z - float(jac.a[k]) - float(jac.b_squared[k]) / acc
    return 1.0 / acc


def convergent_gaps(jac: JacobiCoefficients, z: complex, max_depth: int) -> np.ndarray:
    """``|CF_d - CF_{d+1}|`` for ``d = 1 .. max_depth - 1``."""
    vals = [g_continued_fraction(jac, z, d) for d in range(1, max_depth + 1)]
    return np.abs(np.diff(vals))


def monotone_from(gaps: Sequence[float], tol: float = 1e-15):
    """First index from which ``gaps`` is non-increasing (ignoring values below ``tol``)."""
    g = np.asarray(gaps, dtype=float)
    for d0 in range(len(g)):
        tail = g[d0:]
        if np.all((tail[1:] <= tail[:-1]) | (tail[1:] < tol)):
            return d0
    return None


def moments_to_jacobi(moments, size: int | None = None) -> JacobiCoefficients:
    """Jacobi coefficients from moments by the Chebyshev algorithm.

    ``moments`` is a :class:`CauchySeries` or a sequence ``m_0 .. m_K``.
    Rational input gives exact ``a`` and ``b_squared``.  ``size`` caps the
    number of diagonal coefficients computed (default: all the moments
    determine).  A non-positive pivot means the Hankel matrix is not
    positive definite and raises :class:`NotAMeasureError`.
    """
    mu = list(moments.moments if isinstance(moments, CauchySeries) else moments)
    mu = [Fraction(m) if isinstance(m, int) else m for m in mu]
    K = len(mu) - 1
    N = (K + 1) // 2
    if size is not None:
        N = min(N, size)
    if N < 1:
        return JacobiCoefficients([], [])
    if not mu[0] > 0:
        raise NotAMeasureError("m_0 must be positive")
    # sigma[k][l] = <pi_k, x^l>, valid while k + l <= K
    prev = {}
    cur = {l: mu[l] for l in range(K + 1)}
    a = [mu[1] / mu[0]] if K >= 1 else []
    b2 = []
    k = 0
    while True:
        k += 1
        if 2 * k > K or len(b2) >= N:
            break
        beta = b2[-1] if b2 else 0
        nxt = {l: cur[l + 1] - a[k - 1] * cur[l] - (beta * prev[l] if beta else 0)
               for l in range(k, K - k + 1)}
        if not nxt[k] > 0:
            raise NotAMeasureError(f"Hankel pivot {k} is {nxt[k]} (must be positive)")
        b2.append(nxt[k] / cur[k - 1])
        if 2 * k + 1 > K or len(a) >= N:
            break
        a.append(nxt[k + 1] / nxt[k] - cur[k] / cur[k - 1])
        prev, cur = cur, nxt
    a = a[:N]
    b2 = b2[:max(N - 1, 0)] if size is not None else b2
    return JacobiCoefficients(a, b2)


# ---------------------------------------------------------------------------
# Stieltjes inversion

def stieltjes_invert(G: Callable[[complex], complex], grid, epsilon: float) -> np.ndarray:
    """``-Im G(x + i epsilon) / pi`` at each grid point."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return np.array([-G(complex(x, epsilon)).imag / math.pi for x in grid])


def atom_weight(G: Callable[[complex], complex], x0: float, epsilon: float = 1e-8) -> float:
    """``-epsilon Im G(x0 + i epsilon)``, which tends to the mass at ``x0``."""
    return -epsilon * G(complex(x0, epsilon)).imag


@dataclass(frozen=True)
class AtomEstimate:
    location: float
    weight: float
    coarse: float
    is_atom: bool


def detect_atom(G: Callable[[complex], complex], x0: float, epsilon: float = 1e-6,
                threshold: float = 1e-6) -> AtomEstimate:
    """Decide whether ``x0`` carries a point mass.

    The estimate is taken at ``epsilon`` and at ``epsilon/100``.  A bounded
    density contributes about ``pi * epsilon * f(x0)`` and so shrinks by the
    factor 100, while a point mass does not; an atom is reported when the
    fine estimate exceeds ``threshold`` and keeps at least half of the
    coarse one.
    """
    coarse = atom_weight(G, x0, epsilon)
    fine = atom_weight(G, x0, epsilon / 100.0)
    return AtomEstimate(x0, fine, coarse, bool(fine > threshold and fine >= 0.5 * coarse))
