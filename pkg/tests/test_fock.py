from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tgauss.fock import (DeformParams, DimensionError, FockVector, TruncationError, basis_dimension,
                         enumerate_basis, index_word, inner_product, runs, word_index)
from tgauss.laurent import ExactOverflowError, LaurentArray
from tgauss.scalar import Surd, as_fraction, rational_sqrt

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=40)
radicands = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20)
# sqrt(t) irrational, so a + b sqrt(t) has a genuine conjugate a - b sqrt(t)
irrational_radicands = radicands.filter(lambda t: rational_sqrt(t) is None)


# --- DeformParams -----------------------------------------------------------

def test_params_alpha_exact():
    p = DeformParams("2/5", 2, 4)
    assert p.exact
    assert p.alpha == Fraction(3, 2)


def test_params_float_mode():
    p = DeformParams(0.4, 2, 4)
    assert not p.exact
    assert p.alpha == pytest.approx(1.5)


def test_params_reject_bad_values():
    with pytest.raises(ValueError):
        DeformParams(0)
    with pytest.raises(ValueError):
        DeformParams("1/2", n=0)
    with pytest.raises(ValueError):
        DeformParams("1/2", L=-1)


def test_params_exact_and_float_are_distinct():
    # 1/2 and 0.5 compare equal as numbers but select different arithmetic
    assert DeformParams(Fraction(1, 2)) != DeformParams(0.5)


# --- enumeration ------------------------------------------------------------

def test_enumerate_n2_L1():
    assert enumerate_basis(DeformParams(1, 2, 1)) == [(), (1,), (2,)]


def test_enumerate_n2_L2():
    words = enumerate_basis(DeformParams(1, 2, 2))
    assert len(words) == 7
    assert words[-4:] == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_enumerate_n3_L3_count():
    # independent count: sum of 3^k
    assert len(enumerate_basis(DeformParams(1, 3, 3))) == sum(3 ** k for k in range(4)) == 40


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("L", range(9))
def test_dimension_formula(n, L):
    expected = L + 1 if n == 1 else (n ** (L + 1) - 1) // (n - 1)
    assert basis_dimension(n, L) == expected
    if expected <= 5000:
        assert len(enumerate_basis(DeformParams(1, n, L))) == expected


@pytest.mark.parametrize("n,L", [(1, 6), (2, 5), (3, 3), (4, 3)])
def test_word_index_roundtrip(n, L):
    p = DeformParams(1, n, L)
    for k, w in enumerate(enumerate_basis(p)):
        assert word_index(w, p) == k
        assert index_word(k, p) == w


def test_word_index_examples():
    p = DeformParams(1, 2, 3)
    assert word_index((), p) == 0
    assert word_index((2,), p) == 2
    assert word_index((1, 2), p) == 4


def test_word_index_too_long():
    with pytest.raises(TruncationError):
        word_index((1, 1, 1), DeformParams(1, 2, 2))


def test_size_cap():
    with pytest.raises(DimensionError):
        enumerate_basis(DeformParams(1, 2, 12, size_cap=1000))


def test_runs():
    assert runs(()) == []
    assert runs((1, 1, 2, 1, 1, 1)) == [(1, 2), (2, 1), (1, 3)]


# --- vectors and inner product ---------------------------------------------

def test_inner_product_examples():
    p = DeformParams("1/3", 2, 3)
    e11 = FockVector.basis((1, 1), p)
    assert inner_product(e11, e11) == 1
    assert inner_product(FockVector.basis((1,), p), FockVector.basis((2,), p)) == 0
    v = FockVector.vacuum(p) + FockVector.basis((1,), p, 2)
    assert inner_product(v, FockVector.vacuum(p)) == 1


def test_inner_product_param_mismatch():
    with pytest.raises(ValueError):
        inner_product(FockVector.vacuum(DeformParams("1/3", 2, 3)),
                      FockVector.vacuum(DeformParams("1/3", 2, 4)))


def test_vector_arithmetic_and_levels():
    p = DeformParams(0.5, 2, 3)
    v = FockVector.from_words([((), 1.0), ((1, 2), 3.0)], p)
    assert v.support_level() == 2
    assert v.coefficient((1, 2)) == 3.0
    assert np.allclose(v.level_norms(), [1.0, 0.0, 3.0, 0.0])
    assert v.norm() == pytest.approx(np.sqrt(10))
    w = v.to_level(5)
    assert w.params.L == 5 and w.coefficient((1, 2)) == 3.0


# --- exact scalars ----------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(rationals, rationals, irrational_radicands)
def test_surd_conjugate_product_is_rational(a, b, t):
    x = Surd(a, b, t)
    prod = x * x.conjugate()
    assert prod.b == 0
    assert prod.a == a * a - b * b * t


@settings(max_examples=100, deadline=None)
@given(rationals, rationals, rationals, rationals, radicands)
def test_surd_multiplication_rule(a, b, c, d, t):
    got = Surd(a, b, t) * Surd(c, d, t)
    want = Surd(a * c + b * d * t, a * d + b * c, t)
    assert got == want


@settings(max_examples=60, deadline=None)
@given(rationals, rationals, radicands)
def test_surd_inverse(a, b, t):
    x = Surd(a, b, t)
    if x == 0:
        return
    assert x * x.inverse() == 1


@settings(max_examples=60, deadline=None)
@given(rationals, rationals, radicands)
def test_surd_order_matches_float(a, b, t):
    x = Surd(a, b, t)
    fx = float(a) + float(b) * float(t) ** 0.5
    if abs(fx) > 1e-9:
        assert (x > 0) == (fx > 0)


def test_surd_square_radicand_conjugate_is_itself():
    x = Surd(0, 1, Fraction(1, 4))
    assert x == Fraction(1, 2) and x.conjugate() == x


def test_surd_perfect_square_folds():
    assert Surd(1, 2, Fraction(9, 4)) == Surd(4)
    assert Surd(1, 2, Fraction(9, 4)).is_rational


def test_surd_str():
    assert str(Surd(2, -1, 2)) == "2 - sqrt(2)"
    assert str(Surd(0, Fraction(1, 2), 3)) == "1/2*sqrt(3)"


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(Fraction(2)) is None
    assert as_fraction("0.25") == Fraction(1, 4)


def test_laurent_overflow_guard():
    # coefficients are int64; growth past the guard must raise, never wrap
    big = LaurentArray.unit(3, 0, 2 ** 61)
    with pytest.raises(ExactOverflowError):
        big + big
