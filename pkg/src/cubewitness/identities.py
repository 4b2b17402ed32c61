"""Executable versions of the classical orthogonal-polynomial identities.

Each check returns a dict ``{name, pass, lhs, rhs, margin}``.  Checks on
rational quantities compare exactly; checks involving e^x, sqrt(pi) or
Hermite functions compare in binary64 at 1e-10 (relative where the
magnitudes grow).  ``run_suite`` runs everything.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction
from typing import Callable

import numpy as np

from .cube import _cube
from .orthopoly import (
    binom,
    gamma_half,
    hermite_eval,
    hermite_fn,
    hermite_fn_deriv,
    hermite_fns,
    hermite_packet,
    hermite_poly,
    hermite_scaling_report,
    krawtchouk,
    krawtchouk_normalized,
    krawtchouk_poly,
    krawtchouk_sum,
    krawtchouk_table,
    laguerre_eval,
    laguerre_moment,
    laguerre_moment_direct,
    laguerre_poly,
    packet_constant,
)

__all__ = ["run_suite", "CHECKS", "check"]

TOL = 1e-10


def check(name: str, ok: bool, lhs=None, rhs=None, margin=None) -> dict:
    return {"name": name, "pass": bool(ok), "lhs": _fmt(lhs), "rhs": _fmt(rhs), "margin": _fmt(margin)}


def _fmt(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# Hermite


def hermite_generating_function() -> dict:
    worst = 0.0
    for x, t in [(0.3, 0.2), (1.0, 0.5), (-1.2, 0.4), (2.0, -0.3)]:
        total, term_fact = 0.0, 1.0
        for k in range(80):
            if k:
                term_fact *= t / k
            total += hermite_eval(k, x) * term_fact
        closed = math.exp(2 * x * t - t * t)
        worst = max(worst, abs(total - closed) / closed)
    return check("Hermite generating function", worst < TOL, margin=worst)


def hermite_orthogonality(kmax: int = 12) -> dict:
    # int x^(2i) e^{-x^2} dx = Gamma(i + 1/2); everything is rational * sqrt(pi)
    ok = True
    for j in range(kmax + 1):
        for k in range(j, kmax + 1):
            prod = _poly_mul(hermite_poly(j), hermite_poly(k))
            val = Fraction(0)
            for i, c in enumerate(prod):
                if i % 2 == 0 and c:
                    q, _ = gamma_half(Fraction(i + 1, 2))
                    val += c * q
            expected = 2**k * math.factorial(k) if j == k else 0
            ok &= val == expected
    return check("Hermite orthogonality (exact, sqrt(pi) factored)", ok)


def hermite_function_definition(kmax: int = 30) -> dict:
    x = np.linspace(-6, 6, 241)
    phis = hermite_fns(kmax, x)
    worst = 0.0
    for k in range(kmax + 1):
        norm = (2.0**k * math.factorial(k) * math.sqrt(math.pi)) ** -0.5
        direct = norm * hermite_eval(k, x) * np.exp(-x * x / 2)
        worst = max(worst, float(np.max(np.abs(direct - phis[k]))))
    return check("Hermite function normalisation", worst < TOL, margin=worst)


def hermite_ladder(kmax: int = 40) -> dict:
    x = np.linspace(-8, 8, 321)
    phis = hermite_fns(kmax + 1, x)
    worst = 0.0
    for k in range(kmax + 1):
        lower = phis[k - 1] if k else 0.0
        rhs = math.sqrt((k + 1) / 2) * phis[k + 1] + math.sqrt(k / 2) * lower
        worst = max(worst, float(np.max(np.abs(x * phis[k] - rhs))))
    return check("ladder identity x Phi_k", worst < TOL, margin=worst)


def hermite_derivative_ladder(kmax: int = 25) -> dict:
    x = np.linspace(-6, 6, 241)
    phis = hermite_fns(kmax + 1, x)
    worst = 0.0
    for k in range(kmax + 1):
        lower = phis[k - 1] if k else 0.0
        rhs = math.sqrt(k / 2) * lower - math.sqrt((k + 1) / 2) * phis[k + 1]
        worst = max(worst, float(np.max(np.abs(hermite_fn_deriv(k, x) - rhs))))
    return check("derivative ladder", worst < TOL, margin=worst)


# ---------------------------------------------------------------------------
# Laguerre


def _falling(z: Fraction, i: int) -> Fraction:
    out = Fraction(1)
    for j in range(i):
        out *= z - j
    return out


def laguerre_rodrigues(mmax: int = 12) -> dict:
    """(1/m!) x^-a e^x D^m(x^(m+a) e^-x) expanded by Leibniz, coefficientwise."""
    ok = True
    for alpha in (Fraction(-1, 2), Fraction(1, 2), Fraction(0), Fraction(3, 2)):
        for m in range(mmax + 1):
            rod = [Fraction(0)] * (m + 1)
            for i in range(m + 1):
                # D^i x^(m+a) = falling(m+a, i) x^(m+a-i); D^(m-i) e^-x = (-1)^(m-i) e^-x
                rod[m - i] += binom(m, i) * _falling(m + alpha, i) * (-1) ** (m - i)
            rod = [c / math.factorial(m) for c in rod]
            poly = laguerre_poly(m, alpha)
            ok &= list(poly.coefficients) == rod
            ok &= poly.leading == Fraction((-1) ** m, math.factorial(m))
    return check("Laguerre Rodrigues formula (exact)", ok)


def laguerre_generating_function() -> dict:
    x, z = 1.0, 0.5
    worst = 0.0
    for alpha in (-0.5, 0.5):
        closed = (1 - z) ** (-alpha - 1) * math.exp(-x * z / (1 - z))
        total = 0.0
        for m in range(80):
            total += laguerre_eval(m, Fraction(alpha), x) * z**m
        worst = max(worst, abs(total - closed))
    return check("Laguerre generating function at (1, 1/2)", worst < TOL, margin=worst)


def _gamma_ratio_poch(base: Fraction, i: int) -> Fraction:
    out = Fraction(1)
    for j in range(i):
        out *= base + j
    return out


def laguerre_orthogonality(mmax: int = 10) -> dict:
    ok = True
    for alpha in (Fraction(-1, 2), Fraction(1, 2)):
        # int x^(i+alpha) e^-x = Gamma(alpha+1) (alpha+1)_i
        for j in range(mmax + 1):
            for m in range(j, mmax + 1):
                prod = _poly_mul(laguerre_poly(j, alpha).coefficients, laguerre_poly(m, alpha).coefficients)
                val = sum(c * _gamma_ratio_poch(alpha + 1, i) for i, c in enumerate(prod))
                # Gamma(m+alpha+1)/m! relative to Gamma(alpha+1)
                expected = _gamma_ratio_poch(alpha + 1, m) / math.factorial(m) if j == m else 0
                ok &= val == expected
    return check("Laguerre orthogonality (exact)", ok)


def laguerre_moment_identity(mmax: int = 10) -> dict:
    ok = True
    for alpha in (Fraction(-1, 2), Fraction(1, 2)):
        for ap in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(7, 2), Fraction(5)):
            for m in range(mmax + 1):
                # int x^(a'-1) e^-x L = Gamma(a') sum_i c_i (a')_i
                lhs = sum(c * _gamma_ratio_poch(ap, i) for i, c in enumerate(laguerre_poly(m, alpha).coefficients))
                z = alpha - ap + m
                rhs = _falling(z, m) / math.factorial(m)
                ok &= lhs == rhs
    return check("Laguerre moment identity (exact)", ok)


def laguerre_moment_closed_form(mmax: int = 10, rmax: int = 12) -> dict:
    ok = True
    for alpha in (Fraction(-1, 2), Fraction(1, 2)):
        for m in range(mmax + 1):
            for r in range(rmax + 1):
                ok &= laguerre_moment(m, alpha, r) == laguerre_moment_direct(m, alpha, r)
    return check("Laguerre moments (-1)^m C(r,m) Gamma(r+a+1)", ok)


def quadratic_transformations(mmax: int = 10) -> dict:
    ok = True
    for m in range(mmax + 1):
        even = [Fraction(c) for c in hermite_poly(2 * m)]
        lag = laguerre_poly(m, Fraction(-1, 2)).coefficients
        rhs = [Fraction(0)] * (2 * m + 1)
        for i, c in enumerate(lag):
            rhs[2 * i] = (-1) ** m * 4**m * math.factorial(m) * c
        ok &= even == rhs
        odd = [Fraction(c) for c in hermite_poly(2 * m + 1)]
        lag = laguerre_poly(m, Fraction(1, 2)).coefficients
        rhs = [Fraction(0)] * (2 * m + 2)
        for i, c in enumerate(lag):
            rhs[2 * i + 1] = (-1) ** m * 2 ** (2 * m + 1) * math.factorial(m) * c
        ok &= odd == rhs
    # pointwise in binary64, relative to the size of the values
    x = np.linspace(-5, 5, 201)
    worst = 0.0
    for m in range(mmax + 1):
        h2 = hermite_eval(2 * m, x)
        l2 = (-1) ** m * 4**m * math.factorial(m) * laguerre_eval(m, Fraction(-1, 2), x * x)
        h3 = hermite_eval(2 * m + 1, x)
        l3 = (-1) ** m * 2 ** (2 * m + 1) * math.factorial(m) * x * laguerre_eval(m, Fraction(1, 2), x * x)
        scale = max(1.0, float(np.max(np.abs(h2))), float(np.max(np.abs(h3))))
        worst = max(worst, float(np.max(np.abs(h2 - l2))) / scale, float(np.max(np.abs(h3 - l3))) / scale)
    return check("quadratic transformations", ok and worst < TOL, margin=worst)


def packet_factorisation(nmax: int = 30) -> dict:
    grid = np.linspace(-6, 6, 121)
    worst = 0.0
    for n in range(1, nmax + 1):
        pk = hermite_packet(n, grid)
        worst = max(worst, pk.max_factorization_error())
    return check("packet factorisation A_n = d_n x Phi_2n", worst < TOL, margin=worst)


def packet_constant_square(nmax: int = 200) -> dict:
    worst = 0.0
    for n in range(1, nmax + 1):
        lhs = packet_constant(n) ** 2
        rhs = math.sqrt(math.pi) * math.exp(math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - n * math.log(4))
        worst = max(worst, abs(lhs - rhs) / rhs)
    return check("d_n^2 = sqrt(pi) C(2n,n)/4^n", worst < TOL, margin=worst)


# ---------------------------------------------------------------------------
# Krawtchouk


def krawtchouk_definitions(nmax: int = 20) -> dict:
    ok = True
    for n in range(1, nmax + 1):
        for k in range(n + 1):
            for d in range(n + 1):
                ok &= krawtchouk(k, d, n) == krawtchouk_sum(k, d, n)
                # alternating-sum form in r = 1 - 2d/n
                r = 1 - Fraction(2 * d, n)
                a, b = n * (1 - r) / 2, n * (1 + r) / 2
                assert a.denominator == 1 and b.denominator == 1
                s = sum((-1) ** j * binom(int(a), j) * binom(int(b), k - j) for j in range(k + 1))
                ok &= Fraction(s, binom(n, k)) == krawtchouk_normalized(k, d, n)
        ok &= all(krawtchouk_normalized(k, 0, n) == 1 for k in range(n + 1))
    return check("Krawtchouk definitions agree (exact)", ok)


def krawtchouk_generating_function(nmax: int = 20) -> dict:
    ok = True
    for n in range(1, nmax + 1):
        for d in range(n + 1):
            poly = [1]
            for _ in range(d):
                poly = _poly_mul(poly, [1, -1])
            for _ in range(n - d):
                poly = _poly_mul(poly, [1, 1])
            ok &= poly == [krawtchouk(k, d, n) for k in range(n + 1)]
    return check("Krawtchouk generating function", ok)


def krawtchouk_symmetries(nmax: int = 20) -> list[dict]:
    refl = dual = ortho = parity = True
    for n in range(1, nmax + 1):
        res = krawtchouk_table(n).check()
        refl &= res["reflection"] and res["first_column"]
        dual &= res["duality"]
        ortho &= res["orthogonality"]
        for k in range(n + 1):
            for d in range(n + 1):
                parity &= krawtchouk_normalized(k, n - d, n) == (-1) ** k * krawtchouk_normalized(k, d, n)
    return [
        check("reflection", refl),
        check("normalised parity", parity),
        check("duality", dual),
        check("orthogonality", ortho),
    ]


def krawtchouk_recurrences(nmax: int = 20) -> list[dict]:
    raw = norm = True
    for n in range(1, nmax + 1):
        for d in range(n + 1):
            vals = [krawtchouk_sum(k, d, n) for k in range(n + 1)] + [0]
            for k in range(n + 1):
                lower = vals[k - 1] if k else 0
                raw &= (n - 2 * d) * vals[k] == (k + 1) * vals[k + 1] + (n - k + 1) * lower
            r = 1 - Fraction(2 * d, n)
            nv = [krawtchouk_normalized(k, d, n) for k in range(n + 1)] + [Fraction(0)]
            for k in range(n + 1):
                lower = nv[k - 1] if k else 0
                norm &= n * r * nv[k] == (n - k) * nv[k + 1] + k * lower
                norm &= krawtchouk_poly(k, n, r) == nv[k]
    return [check("degree recurrence", raw), check("normalised recurrence", norm)]


def _elementary(points: np.ndarray) -> np.ndarray:
    """e_l(x) = sum over |S| = l of chi_S(x) for every row, exact int64."""
    N, n = points.shape
    E = np.zeros((N, n + 1), dtype=np.int64)
    E[:, 0] = 1
    for i in range(n):
        col = points[:, i].astype(np.int64)
        E[:, 1:] = E[:, 1:] + col[:, None] * E[:, :-1]
    return E


def character_sums(nmax: int = 10, pairs: int = 20, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    ok = True
    for n in range(2, nmax + 1):
        for _ in range(pairs):
            x = rng.choice([-1, 1], size=n)
            y = rng.choice([-1, 1], size=n)
            D = int((x != y).sum())
            e = _elementary((x * y)[None, :])[0]  # chi_S(x) chi_S(y) = chi_S(x*y)
            ok &= all(int(e[l]) == krawtchouk(l, D, n) for l in range(n + 1))
    return check("character sums", ok)


def addition_formula(ns=range(3, 13), pairs: int = 100, seed: int = 1) -> dict:
    rng = np.random.default_rng(seed)
    ok = True
    count = 0
    for n in ns:
        pts = _cube(n).astype(np.int64)
        for _ in range(max(1, pairs // len(ns)) + 1):
            u = rng.choice([-1, 1], size=n)
            v = rng.choice([-1, 1], size=n)
            Eu = _elementary(pts * u)
            Ev = _elementary(pts * v)
            G = Eu.T @ Ev  # sum_x e_l(u x) e_l'(v x)
            D = int((u != v).sum())
            for l in range(n + 1):
                for lp in range(n + 1):
                    # E[Psi_l Psi_l'] = G / (2^n sqrt(C_l C_l')) should be K_l(<u,v>/n) [l = l']
                    want = 2**n * krawtchouk(l, D, n) if l == lp else 0
                    ok &= int(G[l, lp]) == want
            count += 1
    return check("addition formula (brute force)", ok and count >= 100, lhs=count)


# ---------------------------------------------------------------------------
# norms and scaling


def hermite_norms(nmax: int = 50) -> list[dict]:
    X = math.sqrt(2 * nmax + 1) + 12
    from .orthopoly import gauss_panels

    x, w = gauss_panels(-X, X, 256)
    phis = hermite_fns(nmax, x)
    l2 = max(abs(math.sqrt(float(np.dot(w, phis[n] ** 2))) - 1) for n in range(nmax + 1))
    xl2 = max(abs(float(np.dot(w, (x * phis[n]) ** 2)) - (n + 0.5)) for n in range(nmax + 1))
    return [
        check("||Phi_n||_2 = 1 for n <= 50", l2 < 1e-8, margin=l2),
        check("||x Phi_n||_2^2 = n + 1/2 (ladder consequence)", xl2 < 1e-6, margin=xl2),
    ]


def scaling_slopes(max_index: int = 1000) -> list[dict]:
    rep = hermite_scaling_report(max_index)
    d1 = abs(rep["slope_l1"] - rep["predicted_l1"])
    d2 = abs(rep["slope_x_dphi_sup"] - rep["predicted_x_dphi_sup"])
    return [
        check("slope of ||Phi_n||_1", d1 <= 0.05, rep["slope_l1"], 0.25, 0.05 - d1),
        check("slope of ||x Phi_n'||_inf", d2 <= 0.05, rep["slope_x_dphi_sup"], 0.75, 0.05 - d2),
    ]


CHECKS: list[Callable[[], object]] = [
    hermite_generating_function,
    hermite_orthogonality,
    hermite_function_definition,
    hermite_ladder,
    hermite_derivative_ladder,
    laguerre_rodrigues,
    laguerre_generating_function,
    laguerre_orthogonality,
    laguerre_moment_identity,
    laguerre_moment_closed_form,
    quadratic_transformations,
    packet_factorisation,
    packet_constant_square,
    krawtchouk_definitions,
    krawtchouk_generating_function,
    krawtchouk_symmetries,
    krawtchouk_recurrences,
    character_sums,
    addition_formula,
    hermite_norms,
    scaling_slopes,
]


def run_suite() -> dict:
    """Run every check; returns {checks, pass, seconds}."""
    start = time.perf_counter()
    results = []
    for fn in CHECKS:
        out = fn()
        results.extend(out if isinstance(out, list) else [out])
    return {"checks": results, "pass": all(r["pass"] for r in results), "seconds": time.perf_counter() - start}
