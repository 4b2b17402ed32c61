from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubewitness.cube import _cube
from cubewitness.learner import (
    BudgetError,
    Hypothesis,
    best_threshold,
    degree_for_eps,
    draw_samples,
    exact_error,
    train,
    truncation_bound,
)
from cubewitness.orthopoly import DomainError
from cubewitness.planted import Direction, PlantedDist
from cubewitness.witness import WitnessSpec, build_witness

W7 = build_witness(WitnessSpec(7, 2))
U7 = Direction((1, -1, 1, 1, -1, -1, 1))
D7 = PlantedDist(U7, W7)


def test_degree_for_eps():
    assert degree_for_eps(Fraction(1, 4), Fraction(1, 2)) == 1
    assert degree_for_eps(0.25, 0.1) == 4
    with pytest.raises(DomainError):
        degree_for_eps(Fraction(1, 2), Fraction(1, 10))


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=30), st.data())
def test_best_threshold_is_optimal(vals, data):
    labels = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(vals), max_size=len(vals))))
    v = np.array(vals, dtype=float)
    t, err = best_threshold(v, labels)
    assert err == int((np.where(v >= t, 1, -1) != labels).sum())
    brute = min(int((np.where(v >= c, 1, -1) != labels).sum()) for c in np.concatenate([v, [v.max() + 1]]))
    assert err == brute


def test_exact_error_matches_enumeration():
    rng = np.random.default_rng(0)
    preds = rng.choice([-1, 1], size=2**7)
    rep = exact_error(preds, D7)
    pts = _cube(7)
    psi = D7.psi_u_array(pts, exact=True)
    brute = sum((1 - p * int(h)) / 2 for p, h in zip(psi, preds)) / Fraction(2**7)
    assert rep.err == brute and rep.identity_holds


def test_labels_follow_planted_probabilities():
    s = draw_samples(D7, 40_000, seed=5)
    weights = ((s.X * np.array(U7.u)) < 0).sum(axis=1)
    vals = W7.psi_values()
    for j in range(8):
        mask = weights == j
        if mask.sum() > 2000:
            freq = (s.y[mask] > 0).mean()
            p = float((1 + vals[j]) / 2)
            # psi = +-1 on some classes, where the label is deterministic
            assert abs(freq - p) <= 5 * np.sqrt(p * (1 - p) / mask.sum())


def test_draw_samples_deterministic():
    a, b = draw_samples(D7, 100, seed=2), draw_samples(D7, 100, seed=2)
    assert (a.X == b.X).all() and (a.y == b.y).all()


def test_train_beats_trivial_on_small_instance():
    s = draw_samples(D7, 5000, seed=1)
    h = train(s, degree=3)
    rep = exact_error(h, D7)
    assert rep.identity_holds
    assert rep.err < Fraction(1, 2)


def test_budget_enforced():
    s = draw_samples(D7, 50, seed=0)
    with pytest.raises(BudgetError):
        train(s, degree=3, budget=10)


def test_hypothesis_sign_convention():
    h = Hypothesis(2, 0, np.array([0.5]), 0.5)
    assert (h.predict(_cube(2)) == 1).all()


def test_truncation_bound():
    for d in (0, 1, 3, 5):
        assert truncation_bound(11, Fraction(1, 2), d)["pass"]
