"""Sparse matrix models of creation, annihilation and the t-gaussians.

In the canonical basis the creation operator of letter ``i`` sends the
vacuum to ``e_(i)`` with coefficient 1 and ``e_w`` (``|w| >= 1``) to
``sqrt(t) e_(i w)``.  Words of the top length ``L`` are sent to 0, so the
gaussians become compressions of the true operators; every routine that
reads out a number checks that no contributing path touches that edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fock import (DeformParams, FockVector, TruncationError, _check_size,
                   inner_product, level_array, level_offsets)
from .laurent import ExactOverflowError, _INT_LIMIT, evaluate_terms, scalar_laurent
from .scalar import Surd


class OrthogonalityError(ValueError):
    """The matrix handed to :func:`first_quantization` is not orthogonal."""


def _csr(data, rows, cols, dim, dtype):
    return sp.csr_matrix((np.asarray(data, dtype=dtype), (rows, cols)), shape=(dim, dim))


class SparseOperator:
    """A linear map on the truncated Fock space.

    Exact operators hold ``{degree: csr int64}`` over an integer ``denom``,
    the matrix being ``sum_d terms[d] * sqrt(t)**d / denom``.  Float
    operators hold one float csr matrix.  ``shift`` bounds how far a single
    application moves a vector between levels.
    """

    __slots__ = ("params", "matrix", "terms", "denom", "shift", "symmetric", "_stats")

    def __init__(self, params: DeformParams, *, matrix=None, terms=None, denom: int = 1,
                 shift: int = 0, symmetric: bool = False):
        self.params = params
        self.shift = int(shift)
        self.symmetric = bool(symmetric)
        self.denom = int(denom)
        if params.exact:
            if terms is None:
                raise TypeError("exact operators need integer terms")
            self.terms = {int(d): m.tocsr() for d, m in terms.items() if m.nnz}
            self.matrix = None
        else:
            if matrix is None:
                raise TypeError("float operators need a matrix")
            self.matrix = sp.csr_matrix(matrix, dtype=float)
            self.terms = None
        self._stats = None

    # construction helpers -------------------------------------------------

    @classmethod
    def from_entries(cls, params, rows, cols, degrees, values=None, *, shift, symmetric=False):
        """Entries ``values[k] * sqrt(t)**degrees[k]`` at ``(rows[k], cols[k])``."""
        dim = params.dim
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        degrees = np.asarray(degrees, dtype=np.int64)
        values = np.ones(len(rows), dtype=np.int64) if values is None else np.asarray(values)
        if params.exact:
            terms = {}
            for d in np.unique(degrees):
                m = degrees == d
                terms[int(d)] = _csr(values[m], rows[m], cols[m], dim, np.int64)
            return cls(params, terms=terms, shift=shift, symmetric=symmetric)
        s = math.sqrt(params.t)
        data = values.astype(float) * s ** degrees.astype(float)
        return cls(params, matrix=_csr(data, rows, cols, dim, float), shift=shift,
                   symmetric=symmetric)

    @classmethod
    def identity(cls, params: DeformParams) -> "SparseOperator":
        idx = np.arange(params.dim)
        return cls.from_entries(params, idx, idx, np.zeros_like(idx), shift=0, symmetric=True)

    # bookkeeping ------------------------------------------------------------

    def _exact_stats(self):
        if self._stats is None:
            nnz = 0
            mx = 0
            for m in self.terms.values():
                if m.nnz:
                    nnz = max(nnz, int(np.diff(m.indptr).max()))
                    mx = max(mx, int(np.abs(m.data).max()))
            self._stats = (nnz * max(len(self.terms), 1), mx)
        return self._stats

    def _like(self, *, matrix=None, terms=None, denom=1, shift=None, symmetric=None):
        return SparseOperator(self.params, matrix=matrix, terms=terms, denom=denom,
                              shift=self.shift if shift is None else shift,
                              symmetric=self.symmetric if symmetric is None else symmetric)

    def _check(self, other):
        if other.params != self.params:
            raise ValueError("operators act on different truncated spaces")

    # algebra ------------------------------------------------------------------

    def apply(self, vec: FockVector) -> FockVector:
        if vec.params != self.params:
            raise ValueError("vector and operator live in different spaces")
        if self.params.exact:
            nnz, mx = self._exact_stats()
            return FockVector(self.params, vec.data.apply(self.terms, self.denom, nnz, mx))
        return FockVector(self.params, self.matrix @ vec.data)

    def __matmul__(self, other):
        if isinstance(other, FockVector):
            return self.apply(other)
        if not isinstance(other, SparseOperator):
            return NotImplemented
        self._check(other)
        sym = self.symmetric and other is self
        if self.params.exact:
            n1, m1 = self._exact_stats()
            n2, m2 = other._exact_stats()
            if m1 * m2 * max(n1, 1) >= _INT_LIMIT:
                raise ExactOverflowError("operator product overflows int64")
            terms = {}
            for d1, a in self.terms.items():
                for d2, b in other.terms.items():
                    prod = a @ b
                    d = d1 + d2
                    terms[d] = terms[d] + prod if d in terms else prod
            return self._like(terms=terms, denom=self.denom * other.denom,
                              shift=self.shift + other.shift, symmetric=sym)
        return self._like(matrix=self.matrix @ other.matrix, shift=self.shift + other.shift,
                          symmetric=sym)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        sym = self.symmetric and other.symmetric
        shift = max(self.shift, other.shift)
        if self.params.exact:
            D = self.denom * other.denom // math.gcd(self.denom, other.denom)
            fa, fb = D // self.denom, D // other.denom
            terms = {d: m * fa for d, m in self.terms.items()}
            for d, m in other.terms.items():
                terms[d] = terms[d] + m * fb if d in terms else m * fb
            return self._like(terms=terms, denom=D, shift=shift, symmetric=sym)
        return self._like(matrix=self.matrix + other.matrix, shift=shift, symmetric=sym)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SparseOperator":
        if self.params.exact:
            parts, den = scalar_laurent(c)
            terms = {}
            for e, v in parts.items():
                for d, m in self.terms.items():
                    terms[d + e] = terms[d + e] + m * v if d + e in terms else m * v
            return self._like(terms=terms, denom=self.denom * den)
        return self._like(matrix=self.matrix * float(c))

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    @property
    def T(self) -> "SparseOperator":
        if self.params.exact:
            return self._like(terms={d: m.T.tocsr() for d, m in self.terms.items()},
                              denom=self.denom)
        return self._like(matrix=self.matrix.T.tocsr())

    # readout -----------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.params.dim

    def to_float(self) -> sp.csr_matrix:
        if not self.params.exact:
            return self.matrix
        s = math.sqrt(self.params.t)
        out = sp.csr_matrix((self.dim, self.dim))
        for d, m in self.terms.items():
            out = out + m.astype(float) * (s ** d)
        return (out / self.denom).tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_float().toarray()

    def entries(self) -> list:
        """``[(row, col, value)]`` over the structurally nonzero entries."""
        if not self.params.exact:
            m = self.matrix.tocoo()
            return [(int(r), int(c), float(v)) for r, c, v in zip(m.row, m.col, m.data) if v]
        collected: dict = {}
        for d, m in self.terms.items():
            coo = m.tocoo()
            for r, c, v in zip(coo.row, coo.col, coo.data):
                if v:
                    collected.setdefault((int(r), int(c)), {})[d] = int(v)
        out = []
        for (r, c), terms in sorted(collected.items()):
            val = evaluate_terms(terms, self.denom, self.params.t)
            if val:
                out.append((r, c, val))
        return out

    def value(self, row: int, col: int):
        if not self.params.exact:
            return float(self.matrix[row, col])
        terms = {d: int(m[row, col]) for d, m in self.terms.items() if m[row, col]}
        return evaluate_terms(terms, self.denom, self.params.t)

    def equals(self, other: "SparseOperator", tol: float = 1e-12) -> bool:
        """Exact entrywise equality (float mode: max deviation <= tol)."""
        self._check(other)
        diff = self - other
        if self.params.exact:
            return not diff.entries()
        return bool(abs(diff.matrix).max(initial=0.0) <= tol) if diff.matrix.nnz else True

    def __repr__(self):
        mode = "exact" if self.params.exact else "float"
        return f"SparseOperator(dim={self.dim}, {mode}, shift={self.shift}, symmetric={self.symmetric})"


def _check_letter(i: int, params: DeformParams):
    if int(i) != i or not 1 <= i <= params.n:
        raise ValueError(f"letter {i} outside 1..{params.n}")


@lru_cache(maxsize=128)
def creation(i: int, params: DeformParams) -> SparseOperator:
    """``l_t(e_i)``: ``Omega -> e_(i)``, ``e_w -> sqrt(t) e_(i w)``; top level -> 0."""
    _check_letter(i, params)
    _check_size(params)
    n, L = params.n, params.L
    off = level_offsets(n, L)
    rows, cols, degs = [], [], []
    for k in range(L):
        src = np.arange(off[k], off[k + 1], dtype=np.int64)
        rows.append(off[k + 1] + (i - 1) * n ** k + (src - off[k]))
        cols.append(src)
        degs.append(np.full(src.size, 0 if k == 0 else 1, dtype=np.int64))
    if rows:
        rows, cols, degs = np.concatenate(rows), np.concatenate(cols), np.concatenate(degs)
    else:
        rows = cols = degs = np.zeros(0, dtype=np.int64)
    return SparseOperator.from_entries(params, rows, cols, degs, shift=1)


@lru_cache(maxsize=128)
def annihilation(i: int, params: DeformParams) -> SparseOperator:
    """``l_t(e_i)^*``, the transpose of :func:`creation` in the canonical basis."""
    return creation(i, params).T


@lru_cache(maxsize=128)
def gaussian(i: int, params: DeformParams) -> SparseOperator:
    """The t-gaussian ``s_i^t = l_t(e_i) + l_t(e_i)^*``."""
    op = creation(i, params) + annihilation(i, params)
    op.symmetric = True
    return op


def gaussian_combination(coeffs, params: DeformParams) -> SparseOperator:
    """``s^t(e)`` for ``e = sum_i coeffs[i-1] e_i``."""
    if len(coeffs) != params.n:
        raise ValueError("need one coefficient per generator")
    out = None
    for i, c in enumerate(coeffs, start=1):
        if c == 0:
            continue
        term = gaussian(i, params).scale(c)
        out = term if out is None else out + term
    if out is None:
        out = gaussian(1, params).scale(0)
    out.symmetric = True
    return out


@lru_cache(maxsize=32)
def c_operator(params: DeformParams) -> SparseOperator:
    """``c^t = (s_1^t)^2 + ... + (s_n^t)^2`` by explicit sparse products."""
    out = None
    for i in range(1, params.n + 1):
        s = gaussian(i, params)
        sq = s @ s
        out = sq if out is None else out + sq
    out.symmetric = True
    return out


def first_quantization(U, params: DeformParams) -> SparseOperator:
    """``Gamma(U)``: identity on the vacuum, ``U^{(x)k}`` on words of length ``k``.

    Exact mode accepts signed permutation matrices only.
    """
    n = params.n
    if params.exact:
        Ui = np.array([[int(x) if int(x) == x else None for x in row] for row in U], dtype=object)
        if Ui.shape != (n, n) or any(v is None for v in Ui.ravel()):
            raise OrthogonalityError("exact first quantization needs an integer (signed permutation) matrix")
        Ui = Ui.astype(np.int64)
        if not np.array_equal(Ui.T @ Ui, np.eye(n, dtype=np.int64)):
            raise OrthogonalityError("matrix is not orthogonal")
        base = sp.csr_matrix(Ui)
    else:
        Uf = np.asarray(U, dtype=float)
        if Uf.shape != (n, n):
            raise OrthogonalityError(f"expected a {n}x{n} matrix")
        if np.max(np.abs(Uf.T @ Uf - np.eye(n))) > 1e-12:
            raise OrthogonalityError("matrix is not orthogonal within 1e-12")
        base = sp.csr_matrix(Uf)
    _check_size(params)
    blocks = [sp.csr_matrix(np.ones((1, 1), dtype=base.dtype))]
    cur = blocks[0]
    for _ in range(params.L):
        cur = sp.kron(cur, base, format="csr")
        blocks.append(cur)
    mat = sp.block_diag(blocks, format="csr")
    if params.exact:
        return SparseOperator(params, terms={0: mat.astype(np.int64)}, shift=0)
    return SparseOperator(params, matrix=mat, shift=0)


def vacuum_moment(op: SparseOperator, k: int):
    """``<op^k Omega, Omega>``, exact in exact mode.

    Symmetric operators are evaluated as ``<op^a Omega, op^b Omega>`` with
    ``a = ceil(k/2)``, so truncation is harmless as long as
    ``shift * a <= L``; other operators need ``shift * k <= L``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    p = op.params
    a, b = ((k + 1) // 2, k // 2) if op.symmetric else (k, 0)
    if op.shift * a > p.L:
        raise TruncationError(
            f"moment of order {k} reaches level {op.shift * a} > L={p.L}; truncation would bias it")
    v = FockVector.vacuum(p)
    powers = [v]
    for _ in range(a):
        powers.append(op @ powers[-1])
    if op.symmetric:
        return inner_product(powers[a], powers[b])
    return powers[a].coefficient(0)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    residual: float
    converged: bool
    iterations: int

    def __float__(self):
        return self.value


def operator_norm_estimate(op, iterations: int = 5000, seed: int = 0,
                           tol: float = 1e-12) -> NormEstimate:
    """Spectral norm lower bound by power iteration on ``op^T op``.

    ``op`` may be a :class:`SparseOperator`, a scipy sparse matrix or a dense
    array.  The start vector is drawn from ``numpy.random.default_rng(seed)``.
    The relative eigen-residual of the last iterate is reported; if it never
    falls below ``tol`` the estimate is flagged as not converged.
    """
    A = op.to_float() if isinstance(op, SparseOperator) else op
    A = sp.csr_matrix(A) if not sp.issparse(A) else A.tocsr()
    dim = A.shape[1]
    if dim == 0:
        return NormEstimate(0.0, 0.0, True, 0)
    AT = A.T.tocsr()
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    mu = 0.0
    res = np.inf
    for it in range(1, iterations + 1):
        w = AT @ (A @ v)
        mu = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return NormEstimate(0.0, 0.0, True, it)
        res = float(np.linalg.norm(w - mu * v)) / max(abs(mu), 1e-300)
        if res < tol:
            return NormEstimate(math.sqrt(max(mu, 0.0)), res, True, it)
        v = w / nw
    return NormEstimate(math.sqrt(max(mu, 0.0)), res, False, iterations)


def level_mask(params: DeformParams, max_level: int) -> np.ndarray:
    """Boolean mask of the coordinates at levels ``<= max_level``."""
    return level_array(params.n, params.L) <= max_level
