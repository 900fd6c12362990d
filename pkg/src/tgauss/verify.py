"""Invariant suites run by ``tgauss verify``.

Each check returns a :class:`Check`; exact-mode checks use tolerance 0 and
compare with ``==``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .analysis import (Regime, classify_regime, f_recursion, kernel_recursion, khinchine_witness,
                       s_conjugation, xi_residual, zeta_residual)
from .cfree import (AlternatingWord, cfree_mixed_moment, cfree_power, gaussian_marginal,
                    psi_state, free_mixed_moment)
from .fock import DeformParams, FockVector, enumerate_basis, inner_product, runs
from .operators import c_operator, gaussian, vacuum_moment
from .polynomials import ident_vector, relations_R_check, u_poly
from .spectra import (c_has_atom, c_measure, closed_form_G, closed_form_series, gaussian_jacobi,
                      gaussian_measure, g_continued_fraction, measure_moment, moments_to_jacobi)

SUITES = ("fock", "polys", "spectra", "cfree", "analysis")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    discrepancy: float
    tolerance: float


def _gap(a, b) -> float:
    return abs(float(a) - float(b)) / max(1.0, abs(float(b)))


def _compare(suite, name, a, b, exact: bool, tol: float) -> Check:
    if exact:
        ok = a == b
        return Check(suite, name, bool(ok), 0.0 if ok else _gap(a, b), 0.0)
    g = _gap(a, b)
    return Check(suite, name, g <= tol, g, tol)


def _kmax(params: DeformParams, cap: int = 8) -> int:
    return min(cap, 2 * params.L)


def fock_checks(params: DeformParams, seed: int) -> list:
    exact = params.exact
    out = []
    s = gaussian(1, params)
    out.append(Check("fock", "s_1 symmetric", s.equals(s.T), 0.0, 0.0))
    K = _kmax(params)
    series_s = closed_form_series("s_t", params.t, 1, K)
    series_c = closed_form_series("c_t", params.t, params.n, K)
    c = c_operator(params)
    for k in range(K + 1):
        out.append(_compare("fock", f"phi(s^k) series k={k}", vacuum_moment(s, k), series_s[k], exact, 1e-12))
    for k in range(min(K, params.L) + 1):
        out.append(_compare("fock", f"phi(c^k) series k={k}", vacuum_moment(c, k), series_c[k], exact, 1e-12))
    # the canonical basis is orthonormal: check words of length <= 2
    words = enumerate_basis(params.with_(L=min(params.L, 2)))
    for u, w in itertools.combinations_with_replacement(words, 2):
        val = inner_product(FockVector.basis(u, params), FockVector.basis(w, params))
        out.append(_compare("fock", f"<e_{u}, e_{w}>", val, 1 if u == w else 0, exact, 1e-12))
    return out


def polys_checks(params: DeformParams, seed: int) -> list:
    out = []
    rep = relations_R_check(params.t, min(params.L, 10))
    tol = 0.0 if params.exact else 1e-9
    out.append(Check("polys", "u/v relations", rep.max_discrepancy <= tol, rep.max_discrepancy, tol))
    max_len = min(3, params.L - 2)
    for length in range(1, max_len + 1):
        for w in itertools.product(range(1, params.n + 1), repeat=length):
            margin = max(a for _, a in runs(w))
            if length + margin > params.L:
                continue
            vec = ident_vector(w, params, check=False)
            ok = vec.equals(FockVector.basis(w, params))
            out.append(Check("polys", f"ident {w}", ok, 0.0 if ok else 1.0, tol))
    return out


def spectra_checks(params: DeformParams, seed: int) -> list:
    out = []
    t, n = params.t, params.n
    K = 8
    ms = closed_form_series("s_t", t, 1, K)
    mc = closed_form_series("c_t", t, n, K)
    gm, cm = gaussian_measure(t), c_measure(t, n)
    for k in range(K + 1):
        out.append(_compare("spectra", f"s^t quadrature k={k}", measure_moment(gm, k), ms[k], False, 1e-7))
        out.append(_compare("spectra", f"c^t quadrature k={k}", measure_moment(cm, k), mc[k], False, 1e-7))
    jac = moments_to_jacobi(ms, 4)
    ref = gaussian_jacobi(t, 4)
    d = max(_gap(a, b) for a, b in zip(jac.b_squared, ref.b_squared))
    tol = 0.0 if params.exact else 1e-9
    out.append(Check("spectra", "Jacobi from moments", d <= tol, d, tol))
    z = 2j + 0.3
    cf = g_continued_fraction(gaussian_jacobi(float(t), 400), z, 400)
    g = abs(cf - closed_form_G("s_t", t, 1, z))
    out.append(Check("spectra", "continued fraction vs closed form", g <= 1e-10, g, 1e-10))
    return out


def cfree_checks(params: DeformParams, seed: int) -> list:
    out = []
    t, n = params.t, max(params.n, 2)
    exact = params.exact
    alpha = 1 / t - 1
    mg = gaussian_marginal(t)
    word = AlternatingWord([(1, u_poly(2, t)), (2, u_poly(2, t))])
    out.append(_compare("cfree", "phi(u_2 u_2) = alpha^2", cfree_mixed_moment([mg, mg], word),
                        alpha ** 2, exact, 1e-12))
    p = params.with_(n=n, L=max(params.L, 8))
    rng = random.Random(seed)
    for trial in range(5):
        factors, prev = [], None
        for _ in range(rng.randint(1, 3)):
            i = rng.choice([j for j in (1, 2) if j != prev])
            factors.append((i, u_poly(rng.randint(0, 2), t)))
            prev = i
        w = AlternatingWord(factors)
        # the Fock-space state psi via eta against the free model
        x = [(i, P) for i, P in factors]
        out.append(_compare("cfree", f"psi via eta word {trial}", psi_state(x, p),
                            free_mixed_moment([mg, mg], w), exact, 1e-10))
    # n-fold c-free power of (law of s_i^2, law of t (s^1)^2) against G_{c^t}
    sq = [closed_form_series("s_t", t, 1, 16)[2 * k] for k in range(9)]
    tsq = [closed_form_series("s_t", 1, 1, 16)[2 * k] * t ** k for k in range(9)]
    mu, _ = cfree_power((sq, tsq), n, 8)
    target = closed_form_series("c_t", t, n, 8)
    for k in range(9):
        out.append(_compare("cfree", f"c-free power vs G_c k={k}", mu.moments[k], target[k], exact, 1e-9))
    return out


def analysis_checks(params: DeformParams, seed: int) -> list:
    out = []
    t, n = params.t, params.n
    exact = params.exact
    tf = float(t)
    if n >= 2:
        v = classify_regime(t, n)
        agree = v.has_atom == c_has_atom(t, n)
        out.append(Check("analysis", "regime agrees with c^t atom", agree, 0.0, 0.0))
        fr = f_recursion(1, params.with_(L=max(params.L, 5)))
        target = (n * t, (n + 1) * t, t)
        d = max(_gap(a, b) for a, b in zip(fr.coefficients, target))
        ok = fr.exact_remainder and (d == 0 if exact else d <= 1e-12)
        out.append(Check("analysis", "f_k recursion", ok, d, 0.0 if exact else 1e-12))
        kh = khinchine_witness(t, n, 1)
        out.append(_compare("analysis", "phi(T_1) = n alpha", kh.phi_value, n * (1 / t - 1), exact, 1e-12))
        if v.regime is Regime.DIRECT_SUM:
            rs = [zeta_residual(tf, n, L).residual for L in (6, 8, 10, 12)]
            ok = all(a > b for a, b in zip(rs, rs[1:]))
            out.append(Check("analysis", "zeta residual decreasing", ok, rs[-1], 0.0))
            kr = kernel_recursion(t, n, 20)
            tol = 0.0 if exact else 1e-9
            res = float(abs(kr.max_residual))
            out.append(Check("analysis", "kernel recursion residual", res <= tol, res, tol))
            out.append(Check("analysis", "kernel not summable", not kr.summable, 0.0, 0.0))
        elif not v.on_boundary:
            _, rep = s_conjugation(t, n, params.with_(L=6))
            tol = 0.0 if exact else 1e-9
            d = float(rep.s_squared_defect)
            out.append(Check("analysis", "S^2 = Id", d <= tol, d, tol))
            out.append(Check("analysis", "||S|| below bound", rep.norm_S <= rep.bound_S, rep.norm_S, rep.bound_S))
    if tf < 0.5:
        r = xi_residual(tf, 1, params.with_(t=tf, n=1, L=max(params.L, 30)))
        out.append(Check("analysis", "xi eigen-residual", r.residual <= 1e-6, r.residual, 1e-6))
    return out


_RUNNERS = {"fock": fock_checks, "polys": polys_checks, "spectra": spectra_checks,
            "cfree": cfree_checks, "analysis": analysis_checks}


def run_suite(suite: str, params: DeformParams, seed: int = 0) -> list:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {name!r}")
        out.extend(_RUNNERS[name](params, seed))
    return out
