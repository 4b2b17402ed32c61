import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubewitness.cube import SymmetricFn, brute_force_levels, majority_levels, noise_apply
from cubewitness.orthopoly import DomainError
from cubewitness.witness import (
    WitnessSpec,
    build_witness,
    correlation_kappa,
    dual_feasibility,
    kappa_ratio,
    moment_constant,
    sup_norm,
    sup_norm_scan,
    witness_profile_float,
    witness_value_quadrature,
)

specs = st.builds(
    lambda n, m: (n, m),
    st.integers(2, 10).map(lambda h: 2 * h + 1),
    st.integers(1, 5),
).filter(lambda nm: (nm[1] + 1) // 2 <= (nm[0] - 1) // 2)


@given(specs)
def test_dual_feasibility_exact(nm):
    w = build_witness(WitnessSpec(*nm))
    feas = dual_feasibility(w)
    assert feas["sup_is_one"] and feas["orthogonal"]
    assert w.psi.parity() == "odd"


def test_even_n_rejected():
    with pytest.raises(DomainError, match="odd"):
        WitnessSpec(14, 2)
    with pytest.raises(DomainError):
        WitnessSpec(5, 5)  # k = 3 > 2


def test_k_from_m():
    assert [WitnessSpec(21, m).k for m in range(1, 7)] == [1, 1, 2, 2, 3, 3]


@pytest.mark.parametrize("n", [5, 7, 9])
def test_levels_match_bruteforce_of_values(n):
    w = build_witness(WitnessSpec(n, 2))
    vals = w.psi_values()
    brute = brute_force_levels(lambda x: vals[sum(1 for v in x if v < 0)], n)
    assert brute == w.psi


def test_quadrature_matches_exact_profile():
    w = build_witness(WitnessSpec(11, 3))
    scale = math.sqrt(math.pi / 11)
    for s in (1, 3, 7, 11):
        exact = float(w.profile[(11 - s) // 2]) * scale
        assert witness_value_quadrature(w.spec, s) == pytest.approx(exact, abs=1e-9)


def test_float_profile_matches_exact():
    for n in (21, 41):
        w = build_witness(WitnessSpec(n, 2))
        # float path lists s = 1, 3, ..., n, i.e. weights j = (n - s)/2
        exact = np.array([float(w.profile[(n - s) // 2]) for s in range(1, n + 1, 2)]) * math.sqrt(math.pi / n)
        assert np.allclose(witness_profile_float(w.k, n), exact, atol=1e-10)


@given(specs, st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20))
def test_kappa_equals_noisy_majority_correlation(nm, rho):
    w = build_witness(WitnessSpec(*nm))
    kap = correlation_kappa(rho, w.spec, w)
    f = noise_apply(rho, majority_levels(nm[0]))
    direct = sum(math.comb(nm[0], d) * a * b for d, (a, b) in enumerate(zip(f.fourier, w.psi.fourier)))
    assert kap.value == direct == kap.via_series


def test_kappa_float_path():
    spec = WitnessSpec(13, 2)
    exact = correlation_kappa(Fraction(1, 2), spec).value
    assert correlation_kappa(0.5, spec).value == pytest.approx(float(exact), rel=1e-10)


def test_kappa_ratio_positive_and_large_for_small_n():
    spec = WitnessSpec(9, 1)
    kap = correlation_kappa(Fraction(1, 4), spec).value
    assert kappa_ratio(kap, Fraction(1, 4), 1) > 1


def test_kappa_rho_domain():
    with pytest.raises(DomainError):
        correlation_kappa(Fraction(1), WitnessSpec(9, 1))


def test_sup_norm_paths_agree():
    for k in (1, 2):
        assert sup_norm(k, 63, exact_limit=64) == pytest.approx(sup_norm(k, 63, exact_limit=0), rel=1e-10)


def test_sup_norm_scan_shape():
    scan = sup_norm_scan(2, [101, 201, 301])
    assert len(scan["rows"]) == 3 and scan["max_over_min"] >= 1


def test_moment_constant_dominates():
    w = build_witness(WitnessSpec(15, 2))
    mom = moment_constant(w)
    assert mom["parseval"] == w.norm2_sq()
    for q, ratio in mom["ratios"].items():
        assert float(ratio) <= mom["A"] ** q * (1 + 1e-12)
