import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tgauss.analysis import (Regime, RegimeError, classify_regime, f_recursion, infinite_n_limit,
                             kernel_recursion, khinchine_count, khinchine_terms, khinchine_witness,
                             pair_vector, pair_words, s_bounds, s_conjugation, s_image, window,
                             xi_residual, xi_vector, zeta_residual, zeta_vector)
from tgauss.fock import DeformParams, FockVector, TruncationError, inner_product
from tgauss.operators import gaussian
from tgauss.polynomials import apply_word, u_poly
from tgauss.scalar import Surd
from tgauss.spectra import c_has_atom


# --- regime ---------------------------------------------------------------------

def test_classify_examples():
    assert classify_regime(1, 2).regime is Regime.FREE_FACTOR
    v = classify_regime(0.4, 2)
    assert v.regime is Regime.DIRECT_SUM and v.has_atom
    assert v.interval == pytest.approx((0.5858, 3.4142), abs=1e-4)
    assert v.boundary_distance < 0
    e = classify_regime(Fraction(2, 3), 4)
    assert e.regime is Regime.FREE_FACTOR
    assert e.on_boundary and e.boundary_distance == 0


def test_classify_irrational_endpoint_exact():
    v = classify_regime(Surd(2, -1, 2), 2)
    assert v.regime is Regime.FREE_FACTOR and v.on_boundary
    assert classify_regime(Surd(2, 1, 2), 2).on_boundary


def test_window_exact():
    assert window(4) == (Fraction(2, 3), Fraction(2))
    lo, hi = window(2)
    assert lo == Surd(2, -1, 2) and hi == Surd(2, 1, 2)
    with pytest.raises(ValueError):
        window(1)


def test_classify_rejects_one_generator():
    with pytest.raises(ValueError):
        classify_regime(0.3, 1)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 8.0), st.integers(2, 6))
def test_classify_agrees_with_atoms(t, n):
    v = classify_regime(t, n)
    assert (v.regime is Regime.DIRECT_SUM) == c_has_atom(t, n)
    assert (v.boundary_distance >= 0) == (v.regime is Regime.FREE_FACTOR)


# --- pair words and the f recursion --------------------------------------------------

@pytest.mark.parametrize("n,k", [(2, 1), (2, 3), (3, 2)])
def test_pair_family_size_and_norm(n, k):
    assert len(pair_words(n, k)) == n ** k
    p = DeformParams("1/2", n, 2 * k)
    v = pair_vector(k, p)
    assert inner_product(v, v) == n ** k


@pytest.mark.parametrize("t,n", [("2/5", 2), ("3/2", 3)])
def test_f_recursion_coefficients(t, n):
    tt = Fraction(t)
    p = DeformParams(tt, n, 5 if n == 3 else 7)
    r0 = f_recursion(0, p)
    assert r0.coefficients == (0, n * tt + 1, tt) and r0.exact_remainder
    for k in range(1, (p.L - 3) // 2 + 1):
        r = f_recursion(k, p)
        assert r.coefficients == (n * tt, (n + 1) * tt, tt)
        assert r.exact_remainder


def test_f_recursion_truncation():
    with pytest.raises(TruncationError):
        f_recursion(2, DeformParams("1/2", 2, 6))


# --- xi ------------------------------------------------------------------------------

def test_xi_constant_term_and_eigenvalue():
    p = DeformParams(0.25, 1, 30)
    xi = xi_vector(0.25, 1, p)
    assert xi.coefficient(()) == 1.0
    rep = xi_residual(0.25, 1, p)
    assert rep.eigenvalue == pytest.approx(2 / math.sqrt(3))
    assert rep.eigenvalue > 2 * math.sqrt(0.25)
    assert rep.residual < 1e-6


def test_xi_matches_tridiagonal_eigenvector():
    p = DeformParams(0.25, 1, 30)
    M = gaussian(1, p).to_dense()
    w, V = np.linalg.eigh(M)
    top = V[:, -1] * np.sign(V[0, -1])
    assert w[-1] == pytest.approx(2 / math.sqrt(3), abs=1e-8)
    xi = xi_vector(0.25, 1, p).to_numpy()
    assert np.allclose(xi / np.linalg.norm(xi), top, atol=1e-6)


def test_xi_other_letter():
    p = DeformParams(0.3, 2, 10)
    rep = xi_residual(0.3, 2, p)
    assert rep.residual < 1e-8
    assert rep.residual_unmasked > rep.residual


def test_xi_needs_atom():
    with pytest.raises(RegimeError):
        xi_vector(0.5, 1, DeformParams(0.5, 1, 10))


# --- zeta ----------------------------------------------------------------------------

def test_zeta_components():
    t = Fraction(2, 5)
    p = DeformParams(t, 2, 6)
    z = zeta_vector(t, 2, p)
    alpha = 1 / t - 1
    assert z.coefficient(()) == p.sqrt_t
    assert z.coefficient((1, 1)) == 1 / (2 * alpha)
    assert z.coefficient((2, 2)) == 1 / (2 * alpha)
    assert z.coefficient((1, 2)) == 0
    assert z.coefficient((1, 1, 2, 2)) == 1 / (2 * alpha) ** 2


def test_zeta_errors():
    with pytest.raises(RegimeError):
        zeta_vector(1, 2, DeformParams(1, 2, 6))
    with pytest.raises(ValueError):
        zeta_vector(0.4, 2, DeformParams(0.4, 2, 7))
    with pytest.raises(ValueError):
        zeta_vector(0.4, 2, DeformParams(0.4, 3, 6))


def test_zeta_interior_residual_vanishes():
    for L in (6, 8, 10):
        assert zeta_residual(0.4, 2, L).residual_interior < 1e-12


def test_zeta_residual_decreasing():
    rs = [zeta_residual(0.4, 2, L).residual for L in (6, 8, 10, 12)]
    assert all(a > b for a, b in zip(rs, rs[1:]))


def test_zeta_residual_ratio_bound():
    # stated contract: r(L+2)/r(L) <= rho^2 + 0.1
    reps = [zeta_residual(0.4, 2, L) for L in (6, 8, 10, 12)]
    rho = reps[0].rho
    for a, b in zip(reps, reps[1:]):
        assert b.residual / a.residual <= rho ** 2 + 0.1


def test_zeta_residual_ratio_is_rho():
    # measured rate: the dropped level L + 2 term gives r(L+2)/r(L) -> rho
    reps = [zeta_residual(0.4, 2, L) for L in (8, 10, 12, 14)]
    rho = reps[0].rho
    for a, b in zip(reps, reps[1:]):
        assert b.residual / a.residual == pytest.approx(rho, abs=0.02)


# --- kernel recursion ------------------------------------------------------------------

def test_kernel_n2():
    kr = kernel_recursion("2/5", 2)
    assert kr.max_residual == 0
    assert kr.a == Fraction(5, 14) and kr.b == Fraction(9, 14)
    assert kr.growth == Fraction(9, 2)
    assert not kr.summable and not kr.degenerate


def test_kernel_decomposition_oracle():
    t, n = Fraction(2, 5), 2
    alpha = 1 / t - 1
    kr = kernel_recursion(t, n, 20)
    for k, x in enumerate(kr.x):
        assert x == kr.a * (n * alpha) ** (-k) + kr.b * alpha ** k


def test_kernel_n1_admits_b_zero():
    kr = kernel_recursion("1/4", 1)
    assert kr.b == 0 and kr.summable
    assert kr.max_residual == 0


def test_kernel_errors():
    with pytest.raises(RegimeError):
        kernel_recursion(1, 2)
    with pytest.raises(ValueError):
        kernel_recursion("1/2", 0)


# --- the conjugation S ----------------------------------------------------------------------

def test_s_image_examples():
    p = DeformParams("4/5", 2, 4)
    assert s_image((), p).equals(FockVector.vacuum(p))
    assert s_image((1, 2), p).equals(FockVector.basis((2, 1), p))


def test_s_decomposition():
    p = DeformParams("4/5", 2, 6)
    for w in [(1,), (1, 1), (2, 1, 1), (1, 1, 1, 2)]:
        lhs = s_image(w, p)
        rhs = (s_image(w, p, "A") - s_image(w, p, "B").scale(p.alpha)).scale(p.sqrt_t)
        assert lhs.equals(rhs)


def test_s_bounds_values():
    bA, bS = s_bounds(0.8, 2)
    assert bA == pytest.approx((1 / math.sqrt(0.8)) / (1 - math.sqrt(2) * 0.25))
    assert bA == pytest.approx(1.7295, abs=1e-4)
    assert s_bounds(0.4, 2) == (math.inf, math.inf)


@pytest.fixture(scope="module")
def s_report():
    return s_conjugation(Fraction(4, 5), 2, DeformParams(Fraction(4, 5), 2, 10))


def test_s_squared_identity(s_report):
    _, rep = s_report
    assert rep.block_level == 5
    assert rep.s_squared_defect == 0


def test_s_norms_within_bounds(s_report):
    S, rep = s_report
    assert rep.norm_A <= rep.bound_A
    assert rep.norm_S <= rep.bound_S
    assert rep.norm_S == pytest.approx(np.linalg.norm(S, 2))


def test_s_commutators_shrink(s_report):
    _, rep = s_report
    c = rep.commutators
    assert c[0] > c[1] > c[2]
    assert c[2] < 1e-10


def test_s_regime_error():
    with pytest.raises(RegimeError):
        s_conjugation(0.4, 2, DeformParams(0.4, 2, 6))
    with pytest.raises(RegimeError):
        s_conjugation(Fraction(2, 3), 4, DeformParams(Fraction(2, 3), 4, 4))


# --- Khinchine ----------------------------------------------------------------------------

@pytest.mark.parametrize("n,k", [(2, 3), (3, 2), (3, 4)])
def test_khinchine_count(n, k):
    assert khinchine_count(n, k) == len(khinchine_terms(n, k))
    assert khinchine_count(n, k) == n ** k


def test_khinchine_t1():
    for k in range(1, 5):
        r = khinchine_witness(1, 2, k)
        assert r.phi_value == 0 and not r.violated


def test_khinchine_phi_t1_matrix():
    t = Fraction(2, 5)
    r = khinchine_witness(t, 2, 1)
    assert r.phi_value == 2 * (1 / t - 1)


@pytest.mark.parametrize("t,n", [("2/5", 2), ("3/2", 3)])
def test_khinchine_term_expansion_oracle(t, n):
    # independent route: sum the terms one at a time
    tt = Fraction(t)
    for k in range(1, 4):
        p = DeformParams(tt, n, k)
        phi = 0
        for term in khinchine_terms(n, k):
            phi = phi + inner_product(apply_word([(i, u_poly(a, tt)) for i, a in term], p),
                                      FockVector.vacuum(p))
        r = khinchine_witness(tt, n, k)
        assert r.phi_value == phi == r.phi_formula


def test_khinchine_psi_norm():
    for n, k in [(2, 4), (3, 3)]:
        r = khinchine_witness(Fraction(1, 3), n, k)
        assert r.psi_norm == pytest.approx(n ** (k / 2))
        assert r.bound == pytest.approx((2 * k + 1) * n ** (k / 2))


def test_khinchine_violation_at_03():
    assert any(khinchine_witness(Fraction(3, 10), 2, k).violated for k in range(1, 7))


@pytest.mark.parametrize("t,n", [("1/10", 2), ("2/5", 2), ("1/5", 3), ("2/5", 3), ("20", 3),
                                 ("1/5", 4), ("10", 4)])
def test_khinchine_violated_outside(t, n):
    assert any(khinchine_witness(Fraction(t), n, k).violated for k in range(1, 9))


@pytest.mark.parametrize("t,n,kmax", [("4/5", 2, 8), ("1", 2, 8), ("2", 2, 8), ("1", 3, 8),
                                      ("3/2", 3, 8), ("1", 4, 6)])
def test_khinchine_not_violated_inside(t, n, kmax):
    for k in range(1, kmax + 1):
        r = khinchine_witness(Fraction(t), n, k)
        assert not r.violated
        assert r.phi_value == r.phi_formula


def test_khinchine_one_sided_above_window_n2():
    # (n|alpha|/sqrt n)^k < sqrt(2)^k <= 16 < 17 for k <= 8: the witness cannot fire
    for t in ("10", "100"):
        assert not any(khinchine_witness(Fraction(t), 2, k).violated for k in range(1, 9))


def test_khinchine_truncation():
    with pytest.raises(TruncationError):
        khinchine_witness(Fraction(1, 2), 2, 4, DeformParams(Fraction(1, 2), 2, 3))


# --- n -> infinity ----------------------------------------------------------------------------

def test_infinite_n_vacuum_probe():
    p = DeformParams(0.5, 64, 4)
    vals = [infinite_n_limit(0.5, k, {(): 1.0}, p) for k in (1, 4, 16, 64)]
    assert vals == pytest.approx([math.sqrt(0.5 / k) for k in (1, 4, 16, 64)])


def test_infinite_n_t1_level_two_leakage():
    p = DeformParams(1.0, 8, 4)
    assert infinite_n_limit(1.0, 4, {(): 1.0}, p) == pytest.approx(0.5)


def test_infinite_n_k1_direct():
    t = 0.3
    p = DeformParams(t, 3, 4)
    probe = FockVector.from_words([((), 0.5), ((2,), 1.0), ((1, 2), -0.7)], p)
    s = gaussian(1, p)
    target = probe.scale(t) + FockVector.vacuum(p).scale((1 - t) * 0.5)
    want = ((s @ (s @ probe)) - target).norm()
    assert infinite_n_limit(t, 1, probe, p) == pytest.approx(want)


def test_infinite_n_trend():
    p = DeformParams(0.4, 32, 4)
    probe = {(1,): 1.0, (3, 2): 0.5}
    vals = [infinite_n_limit(0.4, k, probe, p) for k in (4, 8, 16, 32)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_infinite_n_errors():
    p = DeformParams(0.5, 4, 3)
    with pytest.raises(ValueError):
        infinite_n_limit(0.5, 5, {(): 1.0}, p)
    with pytest.raises(TruncationError):
        infinite_n_limit(0.5, 2, {(1, 2): 1.0}, p)
