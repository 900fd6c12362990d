"""Truncated t-deformed Fock space in its canonical orthonormal basis.

Basis vectors are indexed by words over the letters ``1..n`` of length at
most ``L``, enumerated by length and then lexicographically, so the empty
word (the vacuum) has index 0.  Because that enumeration is graded, the
space truncated at a smaller level is a prefix of the bigger one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .laurent import LaurentArray
from .scalar import Surd, as_fraction

Word = tuple

DEFAULT_SIZE_CAP = 2_000_000


class TruncationError(ValueError):
    """A word or computation reaches beyond the truncation level."""


class DimensionError(ValueError):
    """The requested truncation has more basis vectors than the size cap."""


def _coerce_t(t):
    if isinstance(t, float):
        return t
    if isinstance(t, str):
        return Fraction(t)
    return as_fraction(t)


@dataclass(frozen=True)
class DeformParams:
    """Deformation ``t``, generator count ``n`` and truncation level ``L``.

    A rational ``t`` (int, Fraction or ``"p/q"`` string) selects exact
    arithmetic; a float ``t`` selects double precision.
    """

    t: Fraction | float
    n: int = 1
    L: int = 8
    size_cap: int = field(default=DEFAULT_SIZE_CAP, compare=False)
    # keeps t = 1/2 and t = 0.5 apart in equality and hashing (operator caches)
    _exact: bool = field(default=False, init=False, repr=False)

    def __post_init__(self):
        t = _coerce_t(self.t)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "_exact", isinstance(t, Fraction))
        if not t > 0:
            raise ValueError(f"t must be positive, got {t}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if int(self.L) != self.L or self.L < 0:
            raise ValueError(f"L must be a non-negative integer, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", int(self.L))

    @property
    def exact(self) -> bool:
        return isinstance(self.t, Fraction)

    @property
    def alpha(self):
        """``1/t - 1``."""
        return 1 / self.t - 1

    @property
    def sqrt_t(self):
        return Surd.sqrt_t(self.t) if self.exact else math.sqrt(self.t)

    @property
    def dim(self) -> int:
        return basis_dimension(self.n, self.L)

    def with_(self, **changes) -> "DeformParams":
        data = dict(t=self.t, n=self.n, L=self.L, size_cap=self.size_cap)
        data.update(changes)
        return DeformParams(**data)

    def zero(self):
        return Surd(0, 0, self.t) if self.exact else 0.0

    def one(self):
        return Surd(1, 0, self.t) if self.exact else 1.0


def basis_dimension(n: int, L: int) -> int:
    if n == 1:
        return L + 1
    return (n ** (L + 1) - 1) // (n - 1)


@lru_cache(maxsize=None)
def level_offsets(n: int, L: int) -> tuple:
    """Index of the first word of each length ``0..L+1``."""
    off = [0]
    for k in range(L + 1):
        off.append(off[-1] + n ** k)
    return tuple(off)


@lru_cache(maxsize=64)
def level_array(n: int, L: int) -> np.ndarray:
    off = level_offsets(n, L)
    lev = np.empty(off[-1], dtype=np.int64)
    for k in range(L + 1):
        lev[off[k]:off[k + 1]] = k
    return lev


def _check_size(params: DeformParams):
    if params.dim > params.size_cap:
        raise DimensionError(
            f"truncation n={params.n}, L={params.L} has {params.dim} basis vectors, "
            f"above the size cap {params.size_cap}")


def enumerate_basis(params: DeformParams) -> list:
    """All words of length <= L, graded then lexicographic; the vacuum first."""
    _check_size(params)
    letters = range(1, params.n + 1)
    out = []
    for k in range(params.L + 1):
        out.extend(itertools.product(letters, repeat=k))
    return out


def word_index(word: Sequence[int], params: DeformParams) -> int:
    """Position of ``word`` in :func:`enumerate_basis`."""
    word = tuple(word)
    k = len(word)
    if k > params.L:
        raise TruncationError(f"word of length {k} exceeds truncation level {params.L}")
    n = params.n
    r = 0
    for letter in word:
        if not 1 <= letter <= n:
            raise ValueError(f"letter {letter} outside 1..{n}")
        r = r * n + (letter - 1)
    return level_offsets(n, params.L)[k] + r


def index_word(index: int, params: DeformParams) -> Word:
    off = level_offsets(params.n, params.L)
    if not 0 <= index < off[-1]:
        raise IndexError(index)
    k = int(np.searchsorted(off, index, side="right")) - 1
    r = index - off[k]
    letters = []
    for _ in range(k):
        r, d = divmod(r, params.n)
        letters.append(d + 1)
    return tuple(reversed(letters))


def runs(word: Sequence[int]) -> list:
    """Run-length encoding ``[(letter, multiplicity), ...]`` of a word."""
    return [(k, len(list(g))) for k, g in itertools.groupby(word)]


class FockVector:
    """A vector of the truncated space, coordinates in the canonical basis.

    Exact vectors store integer Laurent polynomials in ``sqrt(t)``
    (see :mod:`tgauss.laurent`); float vectors store a numpy array.
    """

    __slots__ = ("params", "data")

    def __init__(self, params: DeformParams, data):
        self.params = params
        if params.exact:
            if not isinstance(data, LaurentArray):
                raise TypeError("exact FockVector needs LaurentArray data")
        else:
            data = np.asarray(data, dtype=float)
        dim = data.dim if params.exact else data.shape[-1]
        if dim != params.dim:
            raise ValueError(f"data has dimension {dim}, space has {params.dim}")
        self.data = data

    # constructors ----------------------------------------------------------

    @classmethod
    def zeros(cls, params: DeformParams) -> "FockVector":
        _check_size(params)
        if params.exact:
            return cls(params, LaurentArray.zeros(params.dim))
        return cls(params, np.zeros(params.dim))

    @classmethod
    def basis(cls, word: Sequence[int], params: DeformParams, value=1) -> "FockVector":
        _check_size(params)
        idx = word_index(word, params)
        if params.exact:
            return cls(params, LaurentArray.unit(params.dim, idx, value))
        data = np.zeros(params.dim)
        data[idx] = float(value)
        return cls(params, data)

    @classmethod
    def vacuum(cls, params: DeformParams) -> "FockVector":
        return cls.basis((), params)

    @classmethod
    def from_words(cls, items: dict | Iterable, params: DeformParams) -> "FockVector":
        """Build ``sum value * e_word`` from a mapping or (word, value) pairs."""
        pairs = items.items() if isinstance(items, dict) else items
        out = cls.zeros(params)
        for w, v in pairs:
            out = out + cls.basis(w, params, v)
        return out

    @classmethod
    def from_numpy(cls, arr, params: DeformParams) -> "FockVector":
        if params.exact:
            raise TypeError("from_numpy builds float vectors only")
        return cls(params, np.array(arr, dtype=float))

    # arithmetic ------------------------------------------------------------

    def _check(self, other: "FockVector"):
        if not isinstance(other, FockVector):
            raise TypeError("expected a FockVector")
        if other.params != self.params:
            raise ValueError("FockVectors live in different truncated spaces")

    def __add__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        return FockVector(self.params, self.data + other.data)

    def __sub__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        return FockVector(self.params, self.data - other.data)

    def __neg__(self) -> "FockVector":
        return FockVector(self.params, -self.data)

    def scale(self, c) -> "FockVector":
        if self.params.exact:
            return FockVector(self.params, self.data.scale(c))
        return FockVector(self.params, self.data * float(c))

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    # readout ---------------------------------------------------------------

    def coefficient(self, word_or_index) -> "Surd | float":
        idx = word_or_index if isinstance(word_or_index, (int, np.integer)) \
            else word_index(word_or_index, self.params)
        if self.params.exact:
            return self.data.value(int(idx), self.params.t)
        return float(self.data[idx])

    def to_numpy(self) -> np.ndarray:
        if self.params.exact:
            return self.data.to_float(self.params.t)
        return self.data.copy()

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_numpy()))

    def level_norms(self) -> np.ndarray:
        x = self.to_numpy()
        lev = level_array(self.params.n, self.params.L)
        return np.sqrt(np.bincount(lev, weights=x * x, minlength=self.params.L + 1))

    def support_level(self) -> int:
        """Highest level carrying a nonzero coordinate (-1 for the zero vector)."""
        if self.params.exact:
            rat, irr, _ = self.data.evaluate(self.params.t)
            nz = [i for i in range(self.params.dim) if rat[i] or irr[i]]
        else:
            nz = np.flatnonzero(self.data)
        if len(nz) == 0:
            return -1
        return int(level_array(self.params.n, self.params.L)[max(nz)])

    def nonzero(self) -> dict:
        """``{word: coefficient}`` over the nonzero coordinates."""
        p = self.params
        if p.exact:
            rat, irr, den = self.data.evaluate(p.t)
            return {index_word(i, p): Surd(Fraction(rat[i], den), Fraction(irr[i], den), p.t)
                    for i in range(p.dim) if rat[i] or irr[i]}
        return {index_word(int(i), p): float(self.data[i]) for i in np.flatnonzero(self.data)}

    def equals(self, other: "FockVector", tol: float = 1e-9) -> bool:
        """Exact equality in exact mode, ``max|diff| <= tol`` in float mode."""
        self._check(other)
        diff = self.data - other.data
        if self.params.exact:
            return diff.is_zero(self.params.t)
        return bool(np.max(np.abs(diff), initial=0.0) <= tol)

    def to_level(self, L: int) -> "FockVector":
        """Same coordinates in the space truncated at ``L`` (must hold the support)."""
        p = self.params.with_(L=L)
        if L >= self.params.L:
            if self.params.exact:
                c = np.zeros((self.data.coeffs.shape[0], p.dim), dtype=np.int64)
                c[:, :self.params.dim] = self.data.coeffs
                return FockVector(p, LaurentArray(c, self.data.low, self.data.denom))
            data = np.zeros(p.dim)
            data[:self.params.dim] = self.data
            return FockVector(p, data)
        if self.support_level() > L:
            raise TruncationError("vector has components above the requested level")
        if self.params.exact:
            d = self.data
            return FockVector(p, LaurentArray(d.coeffs[:, :p.dim].copy(), d.low, d.denom))
        return FockVector(p, self.data[:p.dim].copy())

    def __repr__(self):
        return f"FockVector(n={self.params.n}, L={self.params.L}, t={self.params.t}, nnz={len(self.nonzero())})"


def inner_product(u: FockVector, v: FockVector):
    """Coordinate inner product (the canonical basis is orthonormal; scalars are real)."""
    u._check(v)
    if u.params.exact:
        from .laurent import evaluate_terms
        terms, den = u.data.dot_terms(v.data)
        return evaluate_terms(terms, den, u.params.t)
    return float(np.dot(u.data, v.data))
