import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubewitness.cube import SymmetricFn, _cube
from cubewitness.orthopoly import DomainError
from cubewitness.planted import Direction, PlantedDist, generate_packing, pairwise_chi
from cubewitness.sqlab import (
    OracleConfig,
    Query,
    SQOracle,
    average_correlation,
    correlation_attack,
    exact_expectation,
    largest_hard_degree,
    max_average_correlation_by_size,
    reference_expectation,
    sda_bruteforce,
    select_hardness_degree,
    solution_counts,
)
from cubewitness.witness import WitnessSpec, build_witness

W7 = build_witness(WitnessSpec(7, 2))
signs7 = st.lists(st.sampled_from([-1, 1]), min_size=7, max_size=7).map(lambda u: Direction(tuple(u)))


@given(signs7, signs7)
def test_correlation_query_matches_raw_table(u, frame):
    dist = PlantedDist(u, W7)
    q = Query.correlation(W7.psi, frame)
    pts = _cube(7)
    h = np.array([W7.psi(tuple(int(v) for v in row * np.array(frame.u))) for row in pts], dtype=object)
    table = np.stack([(1 + h) / 2, (1 - h) / 2], axis=1)
    assert exact_expectation(dist, q) == exact_expectation(dist, Query.raw(table))


def test_matching_frame_expectation():
    u = Direction((1, -1, 1, 1, -1, 1, 1))
    q = Query.correlation(W7.psi, u)
    assert exact_expectation(PlantedDist(u, W7), q) == Fraction(1, 2) + W7.norm2_sq() / 2
    assert reference_expectation(q) == Fraction(1, 2)


def test_query_validation():
    with pytest.raises(DomainError):
        Query.raw(np.full((8, 2), 2.0))
    with pytest.raises(DomainError):
        Query.correlation(SymmetricFn(7, (Fraction(2),) + (Fraction(0),) * 7), Direction((1,) * 7))


@pytest.mark.parametrize("adversary", ["honest", "reference-pull"])
@pytest.mark.parametrize("mode,param", [("STAT", 0.05), ("VSTAT", 30.0)])
def test_oracle_answers_are_legal(adversary, mode, param):
    rng = np.random.default_rng(0)
    dist = PlantedDist(Direction(tuple(rng.choice([-1, 1], 7))), W7)
    oracle = SQOracle(OracleConfig(mode, param, adversary, seed=1), dist)
    for _ in range(10):
        oracle.answer(Query.correlation(W7.psi, Direction(tuple(rng.choice([-1, 1], 7)))))
    oracle.answer(Query.raw(rng.uniform(size=(128, 2))))
    assert oracle.transcript.query_count == 11 and oracle.transcript.verify()


def test_vstat_tolerance_formula():
    cfg = OracleConfig("VSTAT", 100)
    assert cfg.tolerance(Fraction(1, 2)) == pytest.approx(0.05)
    assert cfg.tolerance(0) == pytest.approx(0.01)


def test_average_correlation_two_members():
    a, b = Direction((1,) * 7), Direction((1, 1, 1, 1, 1, -1, -1))
    mem = [PlantedDist(a, W7), PlantedDist(b, W7)]
    expected = (2 * W7.norm2_sq() + 2 * pairwise_chi(a, b, W7)) / 4
    assert average_correlation(mem) == expected


def test_sda_bruteforce_extremes():
    fam = generate_packing(7, 1.0, 6, seed=0)
    mem = [PlantedDist(u, W7) for u in fam.members]
    best = max_average_correlation_by_size(mem)
    assert best[1] == W7.norm2_sq()
    assert sda_bruteforce(mem, W7.norm2_sq()) == math.inf
    assert sda_bruteforce(mem, Fraction(0)) == 0
    # threshold between size-6 and smaller-subset values gives a finite answer
    mid = (best[len(mem)] + best[1]) / 2
    d = sda_bruteforce(mem, mid)
    assert 0 < d < math.inf


def test_attack_regimes():
    n = 11
    w = build_witness(WitnessSpec(n, 2))
    fam = generate_packing(n, n ** -0.25, 20, seed=0)
    psi2 = float(w.norm2_sq())
    fine = correlation_attack(fam, w, 7, OracleConfig("VSTAT", 4 / psi2**2))
    assert fine.detected and fine.found_index == 7 and fine.queries_used == 8
    coarse = correlation_attack(fam, w, 7, OracleConfig("VSTAT", 1 / psi2**2))
    assert not coarse.detected and coarse.queries_used == 20


def test_solution_counts_small():
    n = 9
    w = build_witness(WitnessSpec(n, 2))
    fam = generate_packing(n, 0.6, 10, seed=0)
    rep = solution_counts(fam, w, Fraction(1, 4))
    assert rep["frames"] == 2**n and rep["pass"]


def test_degree_selection():
    assert select_hardness_degree(0.25, 0.25) == math.floor(math.log1p(4) / 0.25)
    with pytest.raises(DomainError):
        select_hardness_degree(0.6, 0.1)
    assert largest_hard_degree(21, Fraction(1, 2), Fraction(1, 1000)) == 2
