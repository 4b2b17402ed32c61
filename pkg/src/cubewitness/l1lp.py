"""Weighted L1 approximation by linear programming.

The core is a dense two-phase simplex with Bland's rule that runs either
on Fractions (exact certification) or on floats.  ``l1_distance`` solves
the symmetric problem inf_p sum_d w_d |f_d - p(r_d)| in the normalised
Krawtchouk basis; ``l1_fit`` is the empirical regression used by the
learner.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cube import SymmetricFn, _cube
from .orthopoly import DomainError, binom, krawtchouk_table

__all__ = [
    "LPInstance",
    "LPResult",
    "SimplexResult",
    "simplex",
    "build_instance",
    "l1_distance",
    "l1_fit",
    "FitResult",
    "multilinear_features",
    "l1_distance_multilinear",
]


# ---------------------------------------------------------------------------
# dense simplex


@dataclass
class SimplexResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: list
    objective: object
    duals: list
    reduced_costs: list
    iterations: int


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] = T[r] / T[r, c]
    col = T[:, c].copy()
    col[r] = 0
    nz = np.nonzero(col)[0] if T.dtype == object else np.nonzero(col != 0.0)[0]
    for i in nz:
        T[i] = T[i] - col[i] * T[r]


def _run_phase(T, basis, allowed, eps, max_iter, it0):
    """Iterate on tableau T whose last row holds reduced costs (objective row)."""
    m = T.shape[0] - 1
    it = it0
    while True:
        cost = T[m, :-1]
        enter = next((j for j in range(len(cost)) if allowed[j] and cost[j] < -eps), None)
        if enter is None:
            return "optimal", it
        if it >= max_iter:
            return "iteration-limit", it
        best, leave = None, None
        for i in range(m):
            a = T[i, enter]
            if a > eps:
                ratio = T[i, -1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded", it
        _pivot(T, leave, enter)
        basis[leave] = enter
        it += 1


def simplex(c: Sequence, A: Sequence[Sequence], b: Sequence, exact: bool = True,
            max_iter: int = 100_000, eps: float = 1e-10) -> SimplexResult:
    """Minimise c.x subject to A x = b, x >= 0.

    Two phases with artificial variables and Bland's anti-cycling rule.
    ``duals`` are y with A^T y <= c and b.y equal to the optimum.
    """
    if exact:
        conv = Fraction
        dtype = object
        eps = 0
    else:
        conv = float
        dtype = float
    A = [[conv(v) for v in row] for row in A]
    b = [conv(v) for v in b]
    c = [conv(v) for v in c]
    m, n = len(A), len(c)
    sign = [1] * m
    for i in range(m):
        if b[i] < 0:
            sign[i] = -1
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
    zero = conv(0)
    one = conv(1)
    T = np.empty((m + 1, n + m + 1), dtype=dtype)
    T[:, :] = zero
    for i in range(m):
        T[i, :n] = A[i]
        T[i, n + i] = one
        T[i, -1] = b[i]
    # phase 1: minimise the sum of artificials
    for i in range(m):
        T[m] = T[m] - T[i]
    T[m, n:n + m] = zero
    basis = list(range(n, n + m))
    allowed = [True] * (n + m)
    status, it = _run_phase(T, basis, allowed, eps, max_iter, 0)
    if status == "iteration-limit":
        return SimplexResult(status, [], None, [], [], it)
    if -T[m, -1] > (eps * max(1, m) if not exact else 0):
        return SimplexResult("infeasible", [], None, [], [], it)
    # drive zero-level artificials out where possible
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if abs(T[i, j]) > eps), None)
            if col is not None:
                _pivot(T, i, col)
                basis[i] = col
    # phase 2
    T[m] = zero
    T[m, :n] = c
    for i in range(m):
        if basis[i] < n and c[basis[i]] != 0:
            T[m] = T[m] - c[basis[i]] * T[i]
    allowed = [True] * n + [False] * m
    status, it = _run_phase(T, basis, allowed, eps, max_iter, it)
    x = [zero] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    obj = sum((ci * xi for ci, xi in zip(c, x)), zero)
    # artificial column i starts as e_i with cost 0: reduced cost = -y_i
    duals = [-T[m, n + i] * sign[i] for i in range(m)]
    reduced = list(T[m, :n])
    return SimplexResult(status, x, obj, duals, reduced, it)


# ---------------------------------------------------------------------------
# symmetric weighted L1


@dataclass(frozen=True)
class LPInstance:
    """inf over degree <= m symmetric p of sum_d w_d |f_d - p(r_d)|."""

    n: int
    m: int
    weights: tuple
    target: tuple
    design: tuple  # design[d][j] = normalised Krawtchouk K_j(r_d)

    def __post_init__(self):
        if sum(self.weights) != 1 and abs(float(sum(self.weights)) - 1) > 1e-12:
            raise DomainError("row weights must sum to 1")

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.target)

    def objective(self, coefficients: Sequence):
        fitted = self.evaluate(coefficients)
        return sum(w * abs(f - p) for w, f, p in zip(self.weights, self.target, fitted))

    def evaluate(self, coefficients: Sequence) -> list:
        return [sum(cj * row[j] for j, cj in enumerate(coefficients)) for row in self.design]


@dataclass
class LPResult:
    optimum: object
    coefficients: list
    status: str
    certificate: list | None = None  # dual values y_d, |y_d| <= w_d
    residual: object = 0
    iterations: int = 0
    flags: list = field(default_factory=list)

    def dual_witness(self, inst: LPInstance) -> list:
        """Profile y_d / w_d: bounded by 1 and orthogonal to degree <= m."""
        return [y / w for y, w in zip(self.certificate, inst.weights)]


def build_instance(target: SymmetricFn, m: int, exact: bool | None = None) -> LPInstance:
    n = target.n
    if not 0 <= m <= n:
        raise DomainError(f"degree m={m} outside [0, {n}]")
    exact = target.exact if exact is None else exact
    K = krawtchouk_table(n).entries
    vals = target.values()
    if exact:
        weights = tuple(Fraction(binom(n, d), 2**n) for d in range(n + 1))
        design = tuple(tuple(Fraction(K[j][d], binom(n, j)) for j in range(m + 1)) for d in range(n + 1))
        tgt = tuple(Fraction(v) for v in vals)
    else:
        weights = tuple(math.exp(math.lgamma(n + 1) - math.lgamma(d + 1) - math.lgamma(n - d + 1) - n * math.log(2))
                        for d in range(n + 1))
        design = tuple(tuple(K[j][d] / binom(n, j) for j in range(m + 1)) for d in range(n + 1))
        tgt = tuple(float(v) for v in vals)
    return LPInstance(n, m, weights, tgt, design)


def _solve_weighted_l1(weights, target, design, exact, max_iter):
    """Split-variable LP: design c + e+ - e- = f, minimise sum w (e+ + e-)."""
    rows = len(target)
    p = len(design[0])
    zero = Fraction(0) if exact else 0.0
    A = []
    for i in range(rows):
        row = list(design[i]) + [-v for v in design[i]]
        slack = [zero] * (2 * rows)
        slack[i] = 1
        slack[rows + i] = -1
        A.append(row + slack)
    c = [zero] * (2 * p) + list(weights) + list(weights)
    res = simplex(c, A, list(target), exact=exact, max_iter=max_iter)
    if res.status != "optimal":
        return res, [], None
    coef = [res.x[j] - res.x[p + j] for j in range(p)]
    return res, coef, res.duals


def l1_distance(target: SymmetricFn, m: int, exact: bool | None = None, max_iter: int = 100_000) -> LPResult:
    """Best weighted L1 error of a degree <= m symmetric polynomial.

    Exact (Fraction) pivoting when the target is exact and n <= 25.
    """
    exact = target.exact and target.n <= 25 if exact is None else exact
    inst = build_instance(target, m, exact)
    res, coef, duals = _solve_weighted_l1(inst.weights, inst.target, inst.design, exact, max_iter)
    if res.status != "optimal":
        best = res.objective if res.objective is not None else None
        return LPResult(best, coef, res.status, None, None, res.iterations)
    # complementary slackness: primal objective minus dual objective
    dual_obj = sum(y * f for y, f in zip(duals, inst.target))
    resid = abs(res.objective - dual_obj)
    if exact and resid != 0:
        raise ArithmeticError(f"exact LP duality gap {resid}")
    if not exact and resid > 1e-9:
        raise ArithmeticError(f"float LP duality gap {resid}")
    recomputed = inst.objective(coef)
    if (exact and recomputed != res.objective) or abs(float(recomputed) - float(res.objective)) > 1e-9:
        raise ArithmeticError("reported optimum does not match re-evaluated residual")
    return LPResult(res.objective, coef, "optimal", list(duals), resid, res.iterations)


# ---------------------------------------------------------------------------
# full multilinear basis (symmetrisation check) and empirical fits


def multilinear_features(points: np.ndarray, degree: int) -> np.ndarray:
    """Columns chi_S(x) for all |S| <= degree, in order of (|S|, S)."""
    points = np.asarray(points, dtype=np.int8)
    n = points.shape[1]
    cols = [np.ones(len(points), dtype=np.int8)]
    for size in range(1, degree + 1):
        for S in itertools.combinations(range(n), size):
            cols.append(np.prod(points[:, S], axis=1, dtype=np.int8))
    return np.stack(cols, axis=1)


def l1_distance_multilinear(target: SymmetricFn, m: int) -> float:
    """Same optimum as l1_distance, but over all multilinear p of degree <= m.

    Used to check numerically that restricting to symmetric p loses
    nothing.  Float LP over 2^n rows, so n <= 10.
    """
    n = target.n
    if n > 10:
        raise DomainError("full multilinear LP limited to n <= 10")
    pts = _cube(n)
    vals = np.array([float(v) for v in target.values()])
    y = vals[(pts < 0).sum(axis=1)]
    feats = multilinear_features(pts, m).astype(float)
    fit = l1_fit(feats, y)
    return fit.objective


@dataclass
class FitResult:
    coefficients: np.ndarray
    objective: float
    status: str
    flags: list = field(default_factory=list)


def _aggregate(features: np.ndarray, labels: np.ndarray):
    """Merge identical (features, label) rows into weights."""
    key = np.concatenate([features, labels[:, None]], axis=1)
    uniq, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return uniq[:, :-1], uniq[:, -1], counts.astype(float)


def _bound(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    return float(np.min(-v[neg] / dv[neg])) if neg.any() else math.inf


def _lad_ipm(X: np.ndarray, y: np.ndarray, w: np.ndarray, tol: float, max_iter: int):
    """Frisch-Newton primal-dual interior point for weighted LAD.

    Solves min c1.x s.t. A x = b, 0 <= x <= 1 with A = (W X)^T,
    c1 = -W y, b = A 1 / 2; the regression coefficients are minus the
    equality multipliers.  Mehrotra predictor-corrector steps.  Rows that
    share a feature vector share one row of the normal matrix.
    """
    beta = 0.99995
    U, inv = np.unique(X, axis=0, return_inverse=True)
    inv = inv.ravel()
    R, p = X.shape

    def At_mul(vec):  # A vec = X^T (w * vec)
        return U.T @ np.bincount(inv, weights=w * vec, minlength=len(U))

    def A_t_mul(vec):  # A^T vec = w * (X vec)
        return w * (U @ vec)[inv]

    def factor(d):
        M = U.T @ (np.bincount(inv, weights=d * w * w, minlength=len(U))[:, None] * U)
        try:
            return np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            raise DomainError("rank-deficient design; use solver='highs'") from None

    def solve(cf, rhs_vec):
        t = np.linalg.solve(cf, At_mul(rhs_vec))
        return np.linalg.solve(cf.T, t)

    c1 = -w * y
    b = 0.5 * At_mul(np.ones(R))
    x = np.full(R, 0.5)
    s = 1.0 - x
    dual = solve(factor(np.ones(R)), c1 / w)  # least squares start
    r = c1 - A_t_mul(dual)
    r = r + 0.001 * (r == 0)
    z = np.where(r > 0, r, 0.0)
    v = z - r
    gap = c1 @ x - dual @ b + v.sum()
    it = 0
    while gap > tol and it < max_iter:
        it += 1
        q = 1.0 / (z / x + v / s)
        r = z - v
        cf = factor(q)
        dy = solve(cf, q * r)
        dx = q * (A_t_mul(dy) - r)
        ds = -dx
        dz = -z * (dx / x + 1)
        dv = -v * (ds / s + 1)
        fp = min(beta * min(_bound(x, dx), _bound(s, ds)), 1.0)
        fd = min(beta * min(_bound(v, dv), _bound(z, dz)), 1.0)
        if min(fp, fd) < 1:
            mu = z @ x + v @ s
            g = (z + fd * dz) @ (x + fp * dx) + (v + fd * dv) @ (s + fp * ds)
            mu = mu * (g / mu) ** 3 / (2 * R)
            dxdz = dx * dz
            dsdw = ds * dv
            xinv = 1.0 / x
            sinv = 1.0 / s
            xi = mu * (xinv - sinv)
            dy = solve(cf, q * r + q * (dxdz - dsdw - xi))
            dx = q * (A_t_mul(dy) + xi - r - dxdz + dsdw)
            ds = -dx
            dz = mu * xinv - z - xinv * z * dx - dxdz
            dv = mu * sinv - v - sinv * v * ds - dsdw
            fp = min(beta * min(_bound(x, dx), _bound(s, ds)), 1.0)
            fd = min(beta * min(_bound(v, dv), _bound(z, dz)), 1.0)
        x += fp * dx
        s += fp * ds
        dual += fd * dy
        v += fd * dv
        z += fd * dz
        gap = c1 @ x - dual @ b + v.sum()
    return -dual, gap, it


def l1_fit(features, labels, weights=None, solver: str = "ipm", tol: float = 1e-10,
           max_iter: int = 200) -> FitResult:
    """argmin_c sum_i w_i |<c, phi_i> - y_i| / sum_i w_i.

    Duplicate (phi, y) rows are merged into weights first.  Solvers:
    ``"ipm"`` (default) is a primal-dual interior point on normal
    equations, ``"highs"`` hands the dual LP to scipy, and ``"simplex"``
    uses the dense float simplex above (small instances only).
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise DomainError("features must be (N, p) with N labels")
    N, p = X.shape
    if p > N:
        raise DomainError(f"feature count {p} exceeds sample count {N}")
    if weights is None:
        X, y, w = _aggregate(X, y)
    else:
        w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    flags = []
    if solver == "simplex":
        res, coef, _ = _solve_weighted_l1(list(w), list(y), [list(r) for r in X], False, 200_000)
        if res.status != "optimal":
            return FitResult(np.zeros(p), math.nan, res.status, flags)
        coef = np.array([float(v) for v in coef])
        return FitResult(coef, float(np.dot(w, np.abs(X @ coef - y))), "optimal", flags)
    if solver == "ipm":
        coef, gap, it = _lad_ipm(X, y, w, tol, max_iter)
        status = "optimal" if gap <= tol else "iteration-limit"
        return FitResult(coef, float(np.dot(w, np.abs(X @ coef - y))), status, flags)
    if solver != "highs":
        raise DomainError(f"unknown solver {solver!r}")
    from scipy.optimize import linprog

    if np.linalg.matrix_rank(X) < p:
        flags.append("rank-deficient")
    # dual: max y.lam  s.t.  X^T lam = 0, -w <= lam <= w
    out = linprog(-y, A_eq=X.T, b_eq=np.zeros(p), bounds=np.stack([-w, w], axis=1), method="highs")
    if out.status != 0:
        return FitResult(np.zeros(p), math.nan, "iteration-limit" if out.status == 1 else "infeasible", flags)
    # primal coefficients are minus the equality-row marginals
    coef = -np.asarray(out.eqlin.marginals)
    obj = float(np.dot(w, np.abs(X @ coef - y)))
    if abs(obj - (-out.fun)) > 1e-7 * max(1.0, obj):
        flags.append("primal-recovery-mismatch")
    return FitResult(coef, obj, "optimal", flags)
