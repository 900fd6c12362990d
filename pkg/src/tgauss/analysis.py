"""Structural witnesses: regimes, atom eigenvectors, recursions, S, T_k, n -> infinity.

Throughout, ``alpha = 1/t - 1`` and the free-factor window for ``n`` generators
is the closed interval ``[n/(n+sqrt n), n/(n-sqrt n)]``; outside it ``c^t``
has the eigenvalue ``n + 1/alpha``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .fock import (DeformParams, FockVector, TruncationError, _check_size, enumerate_basis,
                   inner_product, level_array, runs, word_index)
from .operators import c_operator, gaussian, vacuum_moment
from .polynomials import Polynomial, apply_word, u_poly, v_poly
from .scalar import Surd, as_fraction, rational_sqrt
from .spectra import c_atom_numerator


class RegimeError(ValueError):
    """The parameters lie outside the regime an operation needs."""


class Regime(str, Enum):
    FREE_FACTOR = "FREE_FACTOR"
    DIRECT_SUM = "DIRECT_SUM"


def _t_value(t):
    if isinstance(t, (float, Surd)):
        return t
    return as_fraction(t)


def _sqrt_n(n: int):
    r = rational_sqrt(Fraction(n))
    return r if r is not None else Surd(0, 1, n)


def window(n: int):
    """Exact endpoints ``n/(n+sqrt n)`` and ``n/(n-sqrt n)`` (Fractions or Surds over sqrt n)."""
    if n < 2:
        raise ValueError("the window is defined for n >= 2")
    s = _sqrt_n(n)
    lo = n / (n + s) if isinstance(s, Fraction) else (n + s).inverse() * n
    hi = n / (n - s) if isinstance(s, Fraction) else (n - s).inverse() * n
    return lo, hi


@dataclass(frozen=True)
class RegimeVerdict:
    regime: Regime
    boundary_distance: float
    interval: tuple
    on_boundary: bool

    @property
    def has_atom(self) -> bool:
        return self.regime is Regime.DIRECT_SUM


def classify_regime(t, n: int) -> RegimeVerdict:
    """FREE_FACTOR iff ``t`` lies in the closed window, else DIRECT_SUM.

    ``boundary_distance`` is the distance to the nearest endpoint, positive
    inside and negative outside; it is exactly 0 at an endpoint (decided in
    exact arithmetic for rational ``t``).
    """
    if n < 2:
        raise ValueError("classification needs n >= 2; for one generator use the t < 1/2 atom test")
    te = _t_value(t)
    lo, hi = window(n)
    inside = c_atom_numerator(te, n) <= 0
    d_lo, d_hi = te - lo, hi - te
    on_boundary = (d_lo == 0) or (d_hi == 0)
    if isinstance(te, float):
        on_boundary = on_boundary or min(abs(d_lo), abs(d_hi)) == 0.0
    dist = 0.0 if on_boundary else min(float(d_lo), float(d_hi))
    if not inside and dist > 0:
        dist = -dist
    if not on_boundary and inside != (dist > 0):
        # float rounding right at an endpoint: trust the exact polynomial sign
        dist = abs(dist) if inside else -abs(dist)
    return RegimeVerdict(Regime.FREE_FACTOR if inside else Regime.DIRECT_SUM, dist,
                         (float(lo), float(hi)), bool(on_boundary))


# ---------------------------------------------------------------------------
# pair words

def pair_words(n: int, k: int) -> list:
    """Words of length ``2k`` with ``i_{2j+1} = i_{2j+2}``."""
    return [tuple(x for i in p for x in (i, i)) for p in itertools.product(range(1, n + 1), repeat=k)]


def pair_vector(k: int, params: DeformParams, suffix: tuple = ()) -> FockVector:
    """``F_k = sum`` of the pair words of length ``2k`` (each followed by ``suffix``)."""
    return FockVector.from_words([(w + tuple(suffix), 1) for w in pair_words(params.n, k)], params)


def f_vector(k: int, params: DeformParams) -> FockVector:
    """``f_k``: the pair words of length ``2k`` followed by the letter 1."""
    return pair_vector(k, params, (1,))


@dataclass(frozen=True)
class FRecursion:
    k: int
    coefficients: tuple      # (on f_{k-1}, on f_k, on f_{k+1}); f_{-1} = 0
    exact_remainder: bool    # c f_k minus the three terms vanishes


def f_recursion(k: int, params: DeformParams) -> FRecursion:
    """Expand ``c^t f_k`` on ``f_{k-1}, f_k, f_{k+1}``.

    In the canonical basis the coefficients are ``(nt+1, t)`` for ``k = 0``
    and ``(nt, (n+1)t, t)`` for ``k >= 1``.  Needs ``2k + 3 <= L``.
    """
    if 2 * k + 3 > params.L:
        raise TruncationError(f"c f_k needs L >= {2 * k + 3}")
    p = params
    image = c_operator(p) @ f_vector(k, p)
    coeffs = []
    rest = image
    for j in (k - 1, k, k + 1):
        if j < 0:
            coeffs.append(p.zero())
            continue
        c = image.coefficient((1,) * (2 * j + 1))
        coeffs.append(c)
        rest = rest - f_vector(j, p).scale(c)
    if p.exact:
        ok = rest.equals(FockVector.zeros(p))
    else:
        ok = rest.norm() <= 1e-12 * max(1.0, image.norm())
    return FRecursion(k, tuple(coeffs), bool(ok))


# ---------------------------------------------------------------------------
# atom eigenvectors

@dataclass(frozen=True)
class EigenReport:
    eigenvalue: float
    residual: float
    residual_unmasked: float
    norm: float


def _masked_norm(vec: np.ndarray, params: DeformParams, top: int) -> float:
    lev = level_array(params.n, params.L)
    return float(np.linalg.norm(vec[lev <= top]))


def xi_vector(t, i: int, params: DeformParams) -> FockVector:
    """``Omega + (1/sqrt(1-t)) sum_{k>=1} alpha^((1-k)/2) e_{i^k}`` truncated at level L (float)."""
    tf = float(t)
    if not tf < 0.5:
        raise RegimeError("xi exists only for t < 1/2 (no atom otherwise)")
    p = params.with_(t=tf)
    _check_size(p)
    alpha = 1.0 / tf - 1.0
    c = 1.0 / math.sqrt(1.0 - tf)
    data = np.zeros(p.dim)
    data[0] = 1.0
    for k in range(1, p.L + 1):
        data[word_index((i,) * k, p)] = c * alpha ** ((1 - k) / 2)
    return FockVector(p, data)


def xi_residual(t, i: int, params: DeformParams) -> EigenReport:
    """Eigen-residual of ``xi`` for ``s_i^t`` and ``1/sqrt(1-t)``, relative to ``||xi||``.

    ``residual`` masks the two top levels touched by the truncation edge.
    """
    xi = xi_vector(t, i, params)
    p = xi.params
    lam = 1.0 / math.sqrt(1.0 - float(t))
    r = (gaussian(i, p) @ xi).to_numpy() - lam * xi.to_numpy()
    nrm = xi.norm()
    return EigenReport(lam, _masked_norm(r, p, p.L - 2) / nrm, float(np.linalg.norm(r)) / nrm, nrm)


def zeta_vector(t, n: int, params: DeformParams) -> FockVector:
    """``sqrt(t) Omega + sum_k (n alpha)^(-k) F_k`` truncated at level L (L even)."""
    te = _t_value(t)
    if params.n != n:
        raise ValueError("params.n must equal n")
    if params.L % 2:
        raise ValueError("zeta needs an even truncation level")
    if n >= 2:
        if classify_regime(te, n).regime is Regime.FREE_FACTOR:
            raise RegimeError("t lies in the closed window: the zeta series diverges")
    elif not te < Fraction(1, 2):
        raise RegimeError("for n = 1 the atom needs t < 1/2")
    p = params.with_(t=te)
    alpha = 1 / te - 1
    out = FockVector.basis((), p, p.sqrt_t)
    for k in range(1, p.L // 2 + 1):
        out = out + pair_vector(k, p).scale((n * alpha) ** (-k))
    return out


@dataclass(frozen=True)
class ZetaReport:
    L: int
    eigenvalue: float
    residual: float           # true operator applied to the truncated vector
    residual_in_space: float  # truncated operator, no masking
    residual_interior: float  # truncated operator, top two levels masked
    rho: float


def zeta_residual(t, n: int, L: int) -> ZetaReport:
    """Residuals of ``zeta_L`` against the eigenvalue ``n + 1/alpha`` (float arithmetic).

    ``residual`` applies ``c^t`` in the space of level ``L + 2``, where its
    action on ``zeta_L`` is exact; it measures how far the truncated series
    is from an eigenvector.
    """
    tf = float(t)
    alpha = 1.0 / tf - 1.0
    lam = n + 1.0 / alpha
    rho = math.sqrt(n) / (n * abs(alpha))
    p = DeformParams(tf, n, L)
    z = zeta_vector(tf, n, p)
    nrm = z.norm()
    r_in = (c_operator(p) @ z).to_numpy() - lam * z.to_numpy()
    big = p.with_(L=L + 2)
    zb = z.to_level(L + 2)
    r_big = (c_operator(big) @ zb).to_numpy() - lam * zb.to_numpy()
    return ZetaReport(L, lam, float(np.linalg.norm(r_big)) / nrm, float(np.linalg.norm(r_in)) / nrm,
                      _masked_norm(r_in, p, L - 2) / nrm, rho)


# ---------------------------------------------------------------------------
# kernel recursion

@dataclass(frozen=True)
class KernelRecursion:
    a: object
    b: object
    summable: bool
    growth: object            # n alpha^2: ratio of the b-branch terms x_k^2 n^k
    degenerate: bool
    x: list = field(repr=False)
    max_residual: object = 0


def kernel_recursion(t, n: int, k_max: int = 20) -> KernelRecursion:
    """Solve ``(n + 1/alpha) x_k = nt x_{k+1} + (n+1)t x_k + t x_{k-1}`` with ``x_0 = 1``.

    The boundary row ``(n + 1/alpha) x_0 = (nt + 1) x_0 + nt x_1`` fixes
    ``x_1``.  The solution is decomposed as ``a (n alpha)^(-k) + b alpha^k``;
    ``sum x_k^2 n^k`` converges only if the surviving branch decays.
    Exact for rational ``t``.
    """
    te = _t_value(t)
    if n < 1:
        raise ValueError("n must be at least 1")
    if te == 1:
        raise RegimeError("t = 1 has alpha = 0 and no eigenvalue n + 1/alpha")
    alpha = 1 / te - 1
    lam = n + 1 / alpha
    x = [1, (lam - n * te - 1) / (n * te)]
    for k in range(1, k_max):
        x.append((lam * x[k] - (n + 1) * te * x[k] - te * x[k - 1]) / (n * te))
    residuals = [lam * x[k] - (n * te * x[k + 1] + (n + 1) * te * x[k] + te * x[k - 1])
                 for k in range(1, k_max)]
    residuals.append(lam * x[0] - ((n * te + 1) * x[0] + n * te * x[1]))
    max_res = max(abs(r) for r in residuals)
    r1, r2 = 1 / (n * alpha), alpha
    growth = n * alpha * alpha
    if r1 == r2:
        return KernelRecursion(None, None, False, growth, True, x, max_res)
    b = (x[1] - r1) / (r2 - r1)
    a = 1 - b
    if b != 0 and a != 0:
        summable = False
    elif b != 0:
        summable = growth < 1
    else:
        summable = growth > 1
    return KernelRecursion(a, b, bool(summable), growth, False, x, max_res)


# ---------------------------------------------------------------------------
# the conjugation S

def _s_factors(word, t, kind: str) -> list:
    r = runs(word)
    if not r:
        return []
    (il, al) = r[-1]
    rest = [(i, u_poly(a, t)) for i, a in reversed(r[:-1])]
    if kind == "S":
        head = v_poly(al, t)
    elif kind == "A":
        head = u_poly(al, t)
    elif kind == "B":
        head = u_poly(al - 2, t) if al >= 2 else Polynomial()
    else:
        raise ValueError(kind)
    return [(il, head)] + rest


def s_image(word, params: DeformParams, kind: str = "S") -> FockVector:
    """``S(e_w) = v_{a_l}(s_{i_l}) u_{a_{l-1}}(s_{i_{l-1}}) ... u_{a_1}(s_{i_1}) Omega``.

    ``kind="A"`` replaces ``v`` by ``u_{a_l}``, ``kind="B"`` by ``u_{a_l - 2}``;
    ``S = sqrt(t) (A - alpha B)``.
    """
    if len(word) > params.L:
        raise TruncationError("S(e_w) needs |w| <= L")
    return apply_word(_s_factors(tuple(word), params.t, kind), params)


def s_matrix(params: DeformParams, max_len: int, kind: str = "S") -> np.ndarray:
    """Dense float matrix of S (or A, B) on the words of length ``<= max_len``."""
    p = params.with_(t=float(params.t), L=max_len)
    words = enumerate_basis(p)
    M = np.zeros((p.dim, p.dim))
    for j, w in enumerate(words):
        M[:, j] = s_image(w, p, kind).to_numpy()
    return M


@dataclass
class SConjugationReport:
    block_level: int
    s_squared_defect: object          # exact 0 in exact mode
    norm_S: float
    bound_S: float
    norm_A: float
    bound_A: float
    commutators: dict                 # margin -> max ||[S x S, s_k] e_w||


def s_bounds(t, n: int):
    """``(bound_A, bound_S)``: ``(1/sqrt t)/(1 - sqrt(n)|alpha|)`` and ``(1 + |alpha|)/(1 - sqrt(n)|alpha|)``."""
    tf = float(t)
    alpha = abs(1.0 / tf - 1.0)
    q = math.sqrt(n) * alpha
    if q >= 1.0:
        return math.inf, math.inf
    bA = 1.0 / math.sqrt(tf) / (1.0 - q)
    return bA, math.sqrt(tf) * (1.0 + alpha) * bA


def s_conjugation(t, n: int, params: DeformParams, margins=(0, 1, 2)):
    """Matrix of S on words of length ``<= L/2`` plus the checks in the report.

    S is antilinear, but every scalar here is real, so it is handled as a
    real-linear map.  ``S^2 = Id`` is checked exactly when ``t`` is rational.
    Commutators ``[S x S, s_k]`` for ``x`` in ``{s_1, v_2(s_2)}`` are measured
    with S built on all words of length ``<= L``, on basis vectors ``w`` at
    level ``L + 1 - deg(x) - margin``: ``x S s_k w`` then reaches level
    ``L + 2 - margin``, so the truncation edge is felt for margins 0 and 1
    and the commutator vanishes from margin 2 on.
    """
    te = _t_value(t)
    if n < 2:
        raise ValueError("S conjugation is studied for n >= 2")
    if classify_regime(te, n).regime is not Regime.FREE_FACTOR or classify_regime(te, n).on_boundary:
        raise RegimeError("S is bounded only for t strictly inside the window")
    p = params.with_(t=te, n=n)
    m = p.L // 2
    if m < 1:
        raise TruncationError("need L >= 2")

    # exact S^2 on the block
    pe = p.with_(L=m)
    words = enumerate_basis(pe)
    cols = {w: s_image(w, pe) for w in words}
    defect = 0
    for w in words:
        acc = FockVector.zeros(pe)
        for v, c in cols[w].nonzero().items():
            acc = acc + cols[v].scale(c)
        diff = acc - FockVector.basis(w, pe)
        if pe.exact:
            if not diff.equals(FockVector.zeros(pe)):
                defect = max(defect, diff.norm())
        else:
            defect = max(defect, diff.norm())

    S_block = s_matrix(p, m, "S")
    A_block = s_matrix(p, m, "A")
    bA, bS = s_bounds(te, n)
    report = SConjugationReport(m, defect, float(np.linalg.norm(S_block, 2)), bS,
                                float(np.linalg.norm(A_block, 2)), bA, {})

    # commutators on the full level-L space
    pf = p.with_(t=float(te))
    S_full = s_matrix(pf, pf.L, "S")
    s_ops = [gaussian(k, pf).to_float() for k in range(1, n + 1)]
    v2 = v_poly(2, pf.t)
    xs = [(1, s_ops[0].toarray()),
          (2, v2[0] * np.eye(pf.dim) + (s_ops[1] @ s_ops[1]).toarray() * v2[2])]
    lev = level_array(n, pf.L)
    for mu in margins:
        worst = 0.0
        for deg, X in xs:
            cols_idx = np.flatnonzero(lev == pf.L + 1 - deg - mu)
            if cols_idx.size == 0:
                continue
            C = S_full @ X @ S_full
            for sk in s_ops:
                W = np.zeros((pf.dim, cols_idx.size))
                W[cols_idx, np.arange(cols_idx.size)] = 1.0
                comm = C @ (sk @ W) - sk @ (C @ W)
                worst = max(worst, float(np.linalg.norm(comm, axis=0).max()))
        report.commutators[mu] = worst
    return S_block, report


# ---------------------------------------------------------------------------
# Khinchine witness

def even_compositions(total: int) -> list:
    """Compositions of ``total`` into even parts ``>= 2``."""
    if total == 0:
        return [()]
    out = []
    for first in range(2, total + 1, 2):
        out.extend((first,) + rest for rest in even_compositions(total - first))
    return out


def khinchine_terms(n: int, k: int) -> list:
    """``[(i_1, k_1), ...]`` for every term of ``T_k``."""
    if k == 0:
        return [[]]
    out = []
    for comp in even_compositions(2 * k):
        for first in range(1, n + 1):
            for tail in itertools.product(range(1, n), repeat=len(comp) - 1):
                idx = [first]
                for step in tail:
                    # the j-th letter different from the previous one
                    nxt = step if step < idx[-1] else step + 1
                    idx.append(nxt)
                out.append(list(zip(idx, comp)))
    return out


def khinchine_count(n: int, k: int) -> int:
    """Number of terms of ``T_k``."""
    if k == 0:
        return 1
    return sum(math.comb(k - 1, p - 1) * n * (n - 1) ** (p - 1) for p in range(1, k + 1))


def _khinchine_vector(k: int, p: DeformParams) -> FockVector:
    """``T_k Omega``, built by the degree of the terms and their leftmost letter.

    ``Y[r][j]`` sums the terms of total degree ``r`` whose leftmost factor
    acts on letter ``j``; prefixes are shared instead of expanding each term.
    """
    vac = FockVector.vacuum(p)
    if k == 0:
        return vac
    Y = {0: None}
    for r in range(2, 2 * k + 1, 2):
        Y[r] = {}
        for j in range(1, p.n + 1):
            s = gaussian(j, p)
            acc = FockVector.zeros(p)
            for a in range(2, r + 1, 2):
                if a == r:
                    inner = vac
                else:
                    inner = FockVector.zeros(p)
                    for jj in range(1, p.n + 1):
                        if jj != j:
                            inner = inner + Y[r - a][jj]
                acc = acc + u_poly(a, p.t).apply(s, inner)
            Y[r][j] = acc
    out = FockVector.zeros(p)
    for j in range(1, p.n + 1):
        out = out + Y[2 * k][j]
    return out


@dataclass(frozen=True)
class KhinchineReport:
    k: int
    phi_value: object
    phi_formula: object
    psi_norm: float
    bound: float
    violated: bool


def khinchine_witness(t, n: int, k: int, params: DeformParams | None = None) -> KhinchineReport:
    """``phi(T_k)`` from the matrix model against the free-model bound ``(2k+1) n^(k/2)``.

    ``||rho(T_k) Omega||`` is computed in the ``t = 1`` model, where
    ``rho(u_a(s_i^t)) = u_a(sqrt(t) s_i^1)`` is the Chebyshev polynomial
    ``U_a(s_i^1 / 2)``.  The vacuum value only involves levels up to ``k``,
    so ``params.L >= k`` suffices.
    """
    te = _t_value(t)
    if k < 0:
        raise ValueError("k must be non-negative")
    p = DeformParams(te, n, max(k, 1)) if params is None else params.with_(t=te, n=n)
    if p.L < k:
        raise TruncationError(f"phi(T_k) needs L >= k = {k}")
    phi = inner_product(_khinchine_vector(k, p), FockVector.vacuum(p))
    alpha = 1 / te - 1
    formula = (n * alpha) ** k
    # free model at t = 1
    p1 = DeformParams(1.0, n, 2 * k)
    if p1.dim <= 200_000:
        psi_norm = _khinchine_vector(k, p1).norm()
    else:
        # each term is a distinct basis vector of the free Fock space
        psi_norm = math.sqrt(khinchine_count(n, k))
    bound = (2 * k + 1) * n ** (k / 2)
    return KhinchineReport(k, phi, formula, psi_norm, bound, bool(abs(float(phi)) > bound))


# ---------------------------------------------------------------------------
# n -> infinity

def infinite_n_limit(t, k: int, probe, params: DeformParams) -> float:
    """``||(1/k) sum_{i<=k} (s_i^t)^2 probe - ((1-t)P + t) probe||``, P the vacuum projection.

    ``probe`` is a vector of the ambient space or a mapping ``{word: coefficient}``;
    its support must stay at levels ``<= L - 2``.  The computation runs in
    the prefix space of level ``support + 2``, where the squares act exactly.
    """
    if not 1 <= k <= params.n:
        raise ValueError(f"k must lie in 1..{params.n}")
    if isinstance(probe, FockVector):
        items = list(probe.nonzero().items())
    else:
        items = list(dict(probe).items())
    top = max((len(w) for w, _ in items), default=0)
    if top > params.L - 2:
        raise TruncationError("probe must be supported on levels <= L - 2")
    tf = float(t)
    p = DeformParams(tf, params.n, top + 2, params.size_cap)
    v = FockVector.from_words([(w, float(c)) for w, c in items], p)
    acc = FockVector.zeros(p)
    for i in range(1, k + 1):
        s = gaussian(i, p)
        acc = acc + (s @ (s @ v))
    acc = acc.scale(1.0 / k)
    target = v.scale(tf)
    target = target + FockVector.vacuum(p).scale((1.0 - tf) * v.coefficient(()))
    return (acc - target).norm()
