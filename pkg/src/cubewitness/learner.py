"""L1 polynomial regression learner with exact evaluation on planted instances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cube import SymmetricFn, _cube, majority_levels, noise_apply
from .l1lp import l1_fit, multilinear_features
from .orthopoly import DomainError, binom
from .planted import PlantedDist

__all__ = [
    "Sample",
    "SampleSet",
    "Hypothesis",
    "BudgetError",
    "degree_for_eps",
    "draw_samples",
    "train",
    "best_threshold",
    "exact_error",
    "ErrorReport",
    "truncation_bound",
    "FEATURE_BUDGET",
]

FEATURE_BUDGET = 50_000


class BudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class Sample:
    x: tuple
    y: int


@dataclass(frozen=True)
class SampleSet:
    """N samples as arrays: X (N, n) int8 in {-1,1}, y (N,) int8."""

    X: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)

    def __iter__(self):
        for row, label in zip(self.X, self.y):
            yield Sample(tuple(int(v) for v in row), int(label))

    @property
    def n(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class Hypothesis:
    n: int
    degree: int
    coefficients: np.ndarray
    threshold: float

    def poly(self, X: np.ndarray) -> np.ndarray:
        return multilinear_features(X, self.degree) @ self.coefficients

    def predict(self, X: np.ndarray) -> np.ndarray:
        """sign(p(x) - t) with sign(0) = +1."""
        return np.where(self.poly(X) >= self.threshold, 1, -1).astype(np.int8)


def degree_for_eps(sigma, epsilon) -> int:
    """Smallest d >= 0 with rho^(d+1) <= eps/2, rho = 1 - 2 sigma."""
    sigma = Fraction(str(sigma)) if isinstance(sigma, float) else Fraction(sigma)
    epsilon = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    if not 0 < sigma < Fraction(1, 2):
        raise DomainError(f"sigma must lie in (0, 1/2), got {sigma}")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    rho = 1 - 2 * sigma
    d = 0
    while rho ** (d + 1) > epsilon / 2:
        d += 1
    return d


def draw_samples(dist: PlantedDist, N: int, seed: int) -> SampleSet:
    """x uniform, y = +1 with probability (1 + psi(u * x))/2.

    The label coin is a 53-bit dyadic uniform compared exactly against the
    rational probability.
    """
    if N < 1:
        raise DomainError("need N >= 1 samples")
    n = dist.n
    rng = np.random.default_rng(seed)
    X = rng.choice(np.array([-1, 1], dtype=np.int8), size=(N, n))
    coins = rng.integers(0, 2**53, size=N, dtype=np.int64)
    vals = dist.witness.psi_values()
    # y = +1 iff coin < ceil(2^53 (1 + psi)/2)
    cut = []
    for v in vals:
        prob = (1 + v) / 2
        num = prob.numerator << 53
        cut.append(-(-num // prob.denominator))
    cut = np.array(cut, dtype=np.int64)
    weights = (X * np.array(dist.direction.u, dtype=np.int8) < 0).sum(axis=1)
    y = np.where(coins < cut[weights], 1, -1).astype(np.int8)
    return SampleSet(X, y)


def best_threshold(values: np.ndarray, labels: np.ndarray) -> tuple[float, int]:
    """Exhaustive cut search minimising empirical 0/1 error of sign(v - t).

    Cuts sit below the minimum, between consecutive distinct values and
    above the maximum; ties go to the smaller |t|.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    yl = labels[order]
    distinct, start = np.unique(v, return_index=True)
    # errors when everything at or above cut i predicts +1
    pos_below = np.concatenate([[0], np.cumsum(yl > 0)])  # +1 labels predicted -1
    neg_total = int((yl < 0).sum())
    neg_below = np.concatenate([[0], np.cumsum(yl < 0)])
    idx = np.concatenate([start, [len(v)]])
    errs = pos_below[idx] + (neg_total - neg_below[idx])
    cuts = np.concatenate([[distinct[0] - 1.0], (distinct[:-1] + distinct[1:]) / 2, [distinct[-1] + 1.0]])
    best = int(errs.min())
    cand = np.nonzero(errs == best)[0]
    i = cand[np.argmin(np.abs(cuts[cand]))]
    return float(cuts[i]), best


def train(samples: SampleSet, degree: int, budget: int = FEATURE_BUDGET, solver: str = "ipm") -> Hypothesis:
    """Fit p by L1 regression on all monomials of degree <= d, then threshold."""
    n = samples.n
    p = sum(binom(n, j) for j in range(degree + 1))
    if p > budget:
        raise BudgetError(f"{p} features exceed the budget of {budget}")
    feats = multilinear_features(samples.X, degree)
    fit = l1_fit(feats, samples.y.astype(float), solver=solver)
    if fit.status != "optimal":
        raise ArithmeticError(f"L1 fit did not converge: {fit.status}")
    t, _ = best_threshold(feats @ fit.coefficients, samples.y)
    return Hypothesis(n, degree, fit.coefficients, t)


@dataclass(frozen=True)
class ErrorReport:
    err: Fraction
    corr: Fraction
    identity_holds: bool


def exact_error(h: Hypothesis | np.ndarray, dist: PlantedDist) -> ErrorReport:
    """Pr[h(X) != Y] under D_u by enumerating {-1,1}^n.

    ``h`` is a Hypothesis or a length-2^n array of +-1 predictions in
    ``_cube`` order.  The error is assembled from per-class disagreement
    probabilities and the correlation E[Y h(X)] separately; the identity
    err = (1 - corr)/2 is then checked exactly.
    """
    n = dist.n
    if n > 20:
        raise DomainError("exact error limited to n <= 20")
    pts = _cube(n)
    preds = h.predict(pts) if isinstance(h, Hypothesis) else np.asarray(h)
    if not np.isin(preds, (-1, 1)).all():
        raise DomainError("hypothesis must be +-1 valued")
    weights = (pts * np.array(dist.direction.u, dtype=np.int8) < 0).sum(axis=1)
    plus = np.bincount(weights[preds > 0], minlength=n + 1)
    minus = np.bincount(weights[preds < 0], minlength=n + 1)
    vals = dist.witness.psi_values()
    scale = Fraction(1, 2**n)
    err = scale * sum(int(plus[j]) * (1 - v) / 2 + int(minus[j]) * (1 + v) / 2 for j, v in enumerate(vals))
    corr = scale * sum((int(plus[j]) - int(minus[j])) * v for j, v in enumerate(vals))
    return ErrorReport(err, corr, err == (1 - corr) / 2)


def truncation_bound(n: int, rho, degree: int) -> dict:
    """||T_rho Maj_n - (degree-d part)||_2^2 against rho^(2(d+1)), exactly."""
    rho = Fraction(rho)
    f = noise_apply(rho, majority_levels(n))
    tail = sum(b2 for d, b2 in enumerate(f.level_squares) if d > degree)
    bound = rho ** (2 * (degree + 1))
    return {"tail": tail, "bound": bound, "pass": tail <= bound}
