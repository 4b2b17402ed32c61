import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubewitness.cube import (
    NoiseParam,
    RootRational,
    SymmetricFn,
    brute_force_levels,
    enumerate_points,
    format_scalar,
    inner_product,
    majority_fourier,
    majority_levels,
    noise_apply,
    noise_apply_bruteforce,
    parse_scalar,
)
from cubewitness.orthopoly import DomainError, krawtchouk

fractions = st.fractions(min_value=-4, max_value=4, max_denominator=50)


@st.composite
def symmetric_fns(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    vals = draw(st.lists(fractions, min_size=n + 1, max_size=n + 1))
    return SymmetricFn.from_values(n, vals)


@given(symmetric_fns())
def test_values_round_trip(f):
    assert SymmetricFn.from_values(f.n, f.values()) == f


@given(symmetric_fns())
def test_parseval_exact(f):
    vals = f.values()
    by_values = sum(math.comb(f.n, j) * v * v for j, v in enumerate(vals)) / Fraction(2**f.n)
    assert f.norm2_sq() == by_values


@given(symmetric_fns(), st.fractions(min_value=0, max_value=1, max_denominator=20))
def test_noise_matches_flip_average(f, rho):
    assert noise_apply(rho, f) == noise_apply_bruteforce(rho, f)


@given(symmetric_fns(max_n=8))
def test_levels_match_bruteforce(f):
    assert brute_force_levels(f, f.n) == f


@given(symmetric_fns(), st.fractions(0, 1, max_denominator=10), st.fractions(0, 1, max_denominator=10))
def test_noise_semigroup(f, a, b):
    assert noise_apply(a, noise_apply(b, f)) == noise_apply(a * b, f)


@given(symmetric_fns(), symmetric_fns())
def test_inner_product_paths(f, g):
    if f.n == g.n:
        inner_product(f, g, debug=True)
    else:
        with pytest.raises(DomainError):
            inner_product(f, g)


def test_majority_matches_bruteforce():
    for n in range(1, 12, 2):
        brute = brute_force_levels(lambda x: 1 if sum(x) > 0 else -1, n)
        assert brute.fourier == majority_fourier(n)
        assert majority_levels(n).norm2_sq() == 1
        assert majority_levels(n).parity() == "odd"


def test_majority_level_one_closed_form():
    # degree-1 weight of Maj_n is n C(n-1, (n-1)/2)^2 / 4^(n-1)
    for n in (3, 5, 11, 21):
        w1 = majority_levels(n).level_squares[1]
        assert w1 == Fraction(n * math.comb(n - 1, (n - 1) // 2) ** 2, 4 ** (n - 1))


def test_mode_is_averaged_character():
    n = 7
    modes = [SymmetricFn.mode(d, n) for d in range(n + 1)]
    for a in range(n + 1):
        assert modes[a].values() == tuple(Fraction(krawtchouk(a, j, n), math.comb(n, a)) for j in range(n + 1))
        for b in range(n + 1):
            assert inner_product(modes[a], modes[b], debug=True) == (Fraction(1, math.comb(n, a)) if a == b else 0)


def test_call_and_value_at_sum():
    f = majority_levels(5)
    assert f((1, 1, -1, 1, -1)) == 1
    assert f.value_at_sum(-3) == -1
    with pytest.raises(DomainError):
        f.value_at_sum(2)


def test_json_round_trip():
    f = noise_apply(Fraction(1, 3), majority_levels(7))
    assert SymmetricFn.from_json(f.to_json()) == f


def test_scalar_format_round_trip():
    for v in (Fraction(-3, 7), RootRational(Fraction(2, 5), 6), Fraction(4)):
        assert parse_scalar(format_scalar(v)) == v
    assert float(RootRational(Fraction(1, 2), 2)) == pytest.approx(math.sqrt(0.5))


def test_noise_param():
    assert NoiseParam(Fraction(1, 4)).rho == Fraction(1, 2)
    with pytest.raises(DomainError):
        NoiseParam(Fraction(1, 2))


def test_float_mode_agrees_with_exact():
    f = majority_levels(9)
    g = SymmetricFn.from_values(9, [float(v) for v in f.values()])
    assert np.allclose(g.fourier, [float(a) for a in f.fourier], atol=1e-14)


def test_enumerate_points_count():
    assert len(list(enumerate_points(4))) == 16
