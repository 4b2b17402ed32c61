"""The sine-Laguerre dual witness for smoothed majority.

The averaged witness of order k has only odd levels d = 2r + 1 >= 2k + 1.
On the single-character scale its coefficients are

    sqrt(pi/n) * (1/2) (-1)^r C(r+1, k+1) Gamma(r+3/2)/sqrt(pi) * n^-r,

so up to the common factor sqrt(pi/n) everything is rational.  The common
factor cancels when normalising by the sup norm, which makes the
normalised witness psi, its profile and its level squares exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cube import NoiseParam, RootRational, SymmetricFn, majority_fourier
from .orthopoly import (
    DomainError,
    QuadratureError,
    binom,
    composite_gauss,
    gamma_half,
    gauss_panels,
    krawtchouk_table,
    laguerre_eval,
    laguerre_poly,
)

__all__ = [
    "WitnessSpec",
    "WitnessLevels",
    "QuadratureParams",
    "ConsistencyError",
    "build_witness",
    "witness_value_quadrature",
    "witness_profile_float",
    "correlation_kappa",
    "kappa_series_terms",
    "kappa_mgf",
    "sup_norm_scan",
    "kappa_ratio",
    "sup_norm",
    "moment_constant",
    "dual_feasibility",
]


class ConsistencyError(ArithmeticError):
    """Two independent computations of the same quantity disagree."""


@dataclass(frozen=True)
class WitnessSpec:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise DomainError(f"witness needs odd n, got n={self.n}")
        if self.m < 1:
            raise DomainError(f"target degree must be >= 1, got m={self.m}")
        if self.k > (self.n - 1) // 2:
            raise DomainError(
                f"k = {self.k} exceeds (n-1)/2 = {(self.n - 1) // 2}; the witness vanishes"
            )

    @property
    def k(self) -> int:
        return (self.m + 1) // 2

    @classmethod
    def from_k(cls, n: int, k: int) -> "WitnessSpec":
        return cls(n, 2 * k)


def _gamma_r(r: int) -> Fraction:
    # Gamma(r + 3/2) / sqrt(pi)
    q, has_pi = gamma_half(Fraction(2 * r + 3, 2))
    assert has_pi
    return q


@dataclass(frozen=True)
class WitnessLevels:
    """Exact data of Omega~_{k,n} and of psi_{k,n} = Omega~ / ||Omega~||_inf.

    ``raw[d]`` is the rational R_d with level coefficient
    R_d * sqrt(pi) * n^{-d/2} * sqrt(C(n,d)).  ``profile[j]`` is the value of
    Omega~ / sqrt(pi/n) at Hamming weight j, and ``sup_rational`` its
    maximum modulus, so ||Omega~||_inf = sup_rational * sqrt(pi/n).
    """

    spec: WitnessSpec
    raw: dict
    profile: tuple
    sup_rational: Fraction
    argmax_sum: int
    psi: SymmetricFn = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def sup_norm(self) -> float:
        return float(self.sup_rational) * math.sqrt(math.pi / self.n)

    def raw_level(self, d: int) -> float:
        """Level coefficient of Omega~ on Psi_{d,n} in binary64."""
        if d not in self.raw:
            return 0.0
        logmag = 0.5 * math.log(math.pi) - 0.5 * d * math.log(self.n) + 0.5 * (
            math.lgamma(self.n + 1) - math.lgamma(d + 1) - math.lgamma(self.n - d + 1)
        )
        return float(self.raw[d]) * math.exp(logmag)

    @property
    def levels(self) -> tuple:
        """Normalised b_{d,n} as RootRational (rational times sqrt C(n,d))."""
        return self.psi.levels

    @property
    def level_squares(self) -> tuple:
        return self.psi.level_squares

    def psi_values(self) -> tuple:
        return tuple(v / self.sup_rational for v in self.profile)

    def norm2_sq(self) -> Fraction:
        return sum(self.psi.level_squares)


def build_witness(spec: WitnessSpec) -> WitnessLevels:
    """Closed-form construction, everything exact."""
    n, k = spec.n, spec.k
    N = (n - 1) // 2
    raw = {}
    char = [Fraction(0)] * (n + 1)
    for r in range(k, N + 1):
        d = 2 * r + 1
        R = Fraction((-1) ** r * binom(r + 1, k + 1), 2) * _gamma_r(r)
        raw[d] = R
        char[d] = R / Fraction(n) ** r
    K = krawtchouk_table(n).entries
    profile = tuple(sum(char[d] * K[d][j] for d in raw) for j in range(n + 1))
    # odd function: scanning s = n - 2j >= 1 covers the sup
    best_j = max(range(N + 1), key=lambda j: (abs(profile[j]), -j))
    sup = abs(profile[best_j])
    if sup == 0:
        raise DomainError("witness vanishes identically")
    psi = SymmetricFn(n, tuple(c / sup for c in char))
    return WitnessLevels(spec, raw, profile, sup, n - 2 * best_j, psi)


# ---------------------------------------------------------------------------
# quadrature path


@dataclass(frozen=True)
class QuadratureParams:
    tolerance: float = 1e-10
    max_subdivisions: int = 1 << 14
    y_max: float | None = None

    def __post_init__(self):
        if self.tolerance <= 0:
            raise DomainError("tolerance must be positive")


def _tail_cutoff(ell: int, tol: float) -> float:
    # |L_ell^(1/2)(y)| e^-y (1+y/n)^{n/2} <= sum_i |c_i| y^i e^{-y/2}
    from scipy.special import gammaincc, gammaln

    coeffs = [abs(float(c)) for c in laguerre_poly(ell, Fraction(1, 2)).coefficients]
    y = 10.0
    while True:
        tail = sum(
            c * math.exp((i + 1) * math.log(2) + gammaln(i + 1)) * gammaincc(i + 1, y / 2)
            for i, c in enumerate(coeffs)
        )
        if tail < tol / 10:
            return y
        y *= 1.25


def witness_value_quadrature(spec: WitnessSpec, s: int, q: QuadratureParams | None = None) -> float:
    """Omega~_{k,n} at coordinate sum s by direct numerical integration.

    Averages the two single-order integrals with integrand
    (-1)^l L_l^(1/2)(y) [sqrt(y) e^-y / W_n(y)] sin(theta_n(y) s),
    theta_n(y) = arctan sqrt(y/n), W_n(y) = sqrt(y) (1 + y/n)^{-n/2}.
    """
    q = q or QuadratureParams()
    n, k = spec.n, spec.k
    if abs(s) > n:
        raise DomainError(f"|s| must not exceed n={n}")
    total = 0.0
    for ell in (k, k + 1):
        ymax = q.y_max or _tail_cutoff(ell, q.tolerance)

        def integrand(u, ell=ell):
            # y = u^2 removes the sqrt(y) kink at 0; dy = 2u du
            y = u * u
            # sqrt(y) e^-y / W_n(y) = e^-y (1+y/n)^{n/2}
            weight = np.exp(-y + 0.5 * n * np.log1p(y / n))
            return (-1) ** ell * laguerre_eval(ell, Fraction(1, 2), y) * weight * np.sin(
                np.arctan(u / math.sqrt(n)) * s
            ) * 2 * u

        try:
            total += composite_gauss(integrand, 0.0, math.sqrt(ymax), q.tolerance, q.max_subdivisions)
        except QuadratureError as exc:
            exc.diagnostics.update({"n": n, "k": k, "s": s, "ell": ell})
            raise
    return 0.5 * total


def witness_profile_float(k: int, n: int, panels: int | None = None) -> np.ndarray:
    """Omega~_{k,n} at s = 1, 3, ..., n in binary64.

    Uses the single-integral form with kernel (-1)^{k+1}/2 L_{k+1}^(-1/2),
    substituted y = n tan^2(v / sqrt n) so the integrand is sin(v s/sqrt n)
    against a smooth envelope of width O(1) in v; one Gauss rule serves all
    s at once.  The level series is useless here: its terms reach e^{0.1 n}
    and cancel.
    """
    if n % 2 == 0 or not 1 <= k <= (n - 1) // 2:
        raise DomainError(f"need odd n and 1 <= k <= (n-1)/2; got k={k}, n={n}")
    rt = math.sqrt(n)
    vmax = min(0.5 * math.pi * rt * 0.999, 12.0 + 3.0 * math.sqrt(k + 1))
    if panels is None:
        panels = int(32 + vmax * rt / (2 * math.pi))
    v, w = gauss_panels(0.0, vmax, panels)
    th = v / rt
    tan = np.tan(th)
    y = n * tan * tan
    # e^-y sec^{n+2}(theta) * dy/dv, dy/dtheta = 2 n tan sec^2
    env = np.exp(-y - (n + 2) * np.log(np.cos(th))) * 2.0 * rt * tan
    kernel = 0.5 * (-1) ** (k + 1) * laguerre_eval(k + 1, Fraction(-1, 2), y) * env
    s = np.arange(1, n + 1, 2, dtype=float)
    return np.sin(np.outer(s, th)) @ (w * kernel)


# ---------------------------------------------------------------------------
# correlation with smoothed majority


def _as_rho(rho):
    if isinstance(rho, NoiseParam):
        return rho.rho
    return Fraction(rho) if isinstance(rho, (int, Fraction)) else rho


def kappa_series_terms(rho, spec: WitnessSpec, q: int):
    """I_q / sqrt(pi), the Pascal-split piece of <T_rho Maj, Omega~>.

    Returns the rational R with I_q = R * sqrt(pi) * n^{1/2} (scale chosen
    so that dividing by the sup norm leaves a rational).
    """
    rho = _as_rho(rho)
    n = spec.n
    N = (n - 1) // 2
    central = Fraction(math.comb(2 * N, N), 4**N)
    one = Fraction(1) if isinstance(rho, Fraction) else 1.0
    total = 0 * one
    for r in range(q, N + 1):
        total += (
            rho ** (2 * r + 1) * one / Fraction(n) ** r / (2 * r + 1)
            * math.comb(N, r) * binom(r, q) * _gamma_r(r)
        )
    return central * total


def kappa_mgf(rho, spec: WitnessSpec, q: int):
    """I_q through the Gamma-moment closed form, same scale as above.

    I_q = C(2N,N)/4^N * (rho sqrt n / 2) C(N,q) (rho^2/n)^q Gamma(q+1/2)
          * E[(1 + rho^2 X / n)^{N-q}],  X ~ Gamma(q + 1/2, 1).
    """
    rho = _as_rho(rho)
    n = spec.n
    N = (n - 1) // 2
    lam = rho * rho / Fraction(n) if isinstance(rho, Fraction) else rho * rho / n
    central = Fraction(math.comb(2 * N, N), 4**N)
    a = Fraction(2 * q + 1, 2)
    moment, poch = 0 * lam, Fraction(1)
    for j in range(N - q + 1):
        moment += math.comb(N - q, j) * lam**j * poch
        poch *= a + j
    gq, _ = gamma_half(a)
    return central * rho / 2 * math.comb(N, q) * lam**q * gq * moment


@dataclass(frozen=True)
class KappaResult:
    value: object
    via_levels: object
    via_series: object
    i_k: object
    i_k1: object

    def __float__(self):
        return float(self.value)


def correlation_kappa(rho, spec: WitnessSpec, witness: WitnessLevels | None = None) -> KappaResult:
    """kappa = <T_rho Maj_n, psi_{k,n}>, computed two ways.

    (a) sum over levels rho^d b_d(Maj) b_d(psi);
    (b) (I_k + I_{k+1}) / 2 / ||Omega~||_inf from the Pascal-split series.
    Exact for rational rho; raises ConsistencyError if they differ.
    """
    rho = _as_rho(rho)
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    w = witness or build_witness(spec)
    n = spec.n
    maj = majority_fourier(n)
    via_levels = sum(
        binom(n, d) * rho**d * maj[d] * w.psi.fourier[d] for d in range(1, n + 1, 2)
    )
    ik = kappa_series_terms(rho, spec, spec.k)
    ik1 = kappa_series_terms(rho, spec, spec.k + 1)
    # I_q carries sqrt(pi) sqrt(n) n^{-1}... on this scale: I_q = R sqrt(pi n);
    # sup = sup_rational sqrt(pi / n); ratio = R n / sup_rational
    via_series = (ik + ik1) / 2 * n / w.sup_rational
    if isinstance(rho, Fraction):
        if via_levels != via_series:
            raise ConsistencyError(f"kappa paths disagree: {via_levels} vs {via_series}")
    elif abs(via_levels - via_series) > 1e-9 * max(1.0, abs(via_levels)):
        raise ConsistencyError(f"kappa paths disagree: {via_levels} vs {via_series}")
    return KappaResult(via_levels, via_levels, via_series, ik, ik1)


def kappa_ratio(kappa, rho, m: int) -> float:
    """kappa * 16 sqrt(2m) / rho^(2m+1), which is >= 1 asymptotically."""
    return float(kappa) * 16 * math.sqrt(2 * m) / float(rho) ** (2 * m + 1)


# ---------------------------------------------------------------------------
# sup-norm scans and coefficient checks


def sup_norm(k: int, n: int, exact_limit: int = 64) -> float:
    if n <= exact_limit:
        return build_witness(WitnessSpec.from_k(n, k)).sup_norm
    return float(np.max(np.abs(witness_profile_float(k, n))))


def sup_norm_scan(m: int, n_grid, exact_limit: int = 64) -> dict:
    """||Omega~_{k,n}||_inf over a grid of odd n, with a log-log slope fit."""
    k = (m + 1) // 2
    rows = []
    for n in n_grid:
        WitnessSpec(n, m)  # validates
        rows.append({"n": int(n), "sup_norm": sup_norm(k, n, exact_limit), "exact": n <= exact_limit})
    ns = np.array([r["n"] for r in rows], float)
    vals = np.array([r["sup_norm"] for r in rows])
    slope = float(np.polyfit(np.log(ns), np.log(vals), 1)[0]) if len(rows) > 1 else 0.0
    return {
        "m": m,
        "k": k,
        "rows": rows,
        "slope": slope,
        "max": float(vals.max()),
        "min": float(vals.min()),
        "max_over_min": float(vals.max() / vals.min()),
    }


def moment_constant(w: WitnessLevels, qmax: int | None = None) -> dict:
    """Smallest A with sum_d b_d^2 d^{2q} <= A^q k^{2q} for 1 <= q <= qmax.

    ``qmax`` defaults to k + 2.  Returned A is a float upper rounding of the
    exact per-q ratios, which are reported too.
    """
    k = w.k
    qmax = k + 2 if qmax is None else qmax
    sq = w.level_squares
    ratios = {}
    for q in range(1, qmax + 1):
        mom = sum(b2 * d ** (2 * q) for d, b2 in enumerate(sq))
        ratios[q] = Fraction(mom, k ** (2 * q))
    A = max(float(r) ** (1.0 / q) for q, r in ratios.items())
    A = math.nextafter(A, math.inf) * (1 + 1e-12)
    return {"A": A, "ratios": ratios, "parseval": sum(sq)}


def dual_feasibility(w: WitnessLevels) -> dict:
    """Exact checks: ||psi||_inf = 1 and psi orthogonal to Psi_d, d <= 2k.

    Orthogonality is evaluated from the value profile (binomially weighted
    Krawtchouk sums), not read off the stored levels.
    """
    n, k = w.n, w.k
    vals = w.psi_values()
    K = krawtchouk_table(n).entries
    sup = max(abs(v) for v in vals)
    ortho = {
        d: sum(binom(n, j) * vals[j] * K[d][j] for j in range(n + 1)) == 0
        for d in range(0, 2 * k + 1)
    }
    return {"sup_is_one": sup == 1, "orthogonal": all(ortho.values()), "per_level": ortho}
