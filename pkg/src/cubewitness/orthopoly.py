"""Hermite, Laguerre and binary Krawtchouk polynomials.

Two numeric paths are kept side by side.  Integer/rational routines
(``krawtchouk``, ``laguerre_poly``, ``hermite_poly`` ...) are exact and are
what the identity checks run on.  Float routines (``hermite_fn``,
``packet_eval``, ``composite_gauss``) are for grids and large indices and
carry their normalisation in the log domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "QuadratureError",
    "KrawtchoukTable",
    "LaguerrePoly",
    "HermitePacket",
    "binom",
    "gen_binom",
    "gamma_half",
    "krawtchouk",
    "krawtchouk_sum",
    "krawtchouk_table",
    "krawtchouk_normalized",
    "krawtchouk_poly",
    "laguerre_poly",
    "laguerre_eval",
    "laguerre_moment",
    "hermite_poly",
    "hermite_eval",
    "hermite_fn",
    "hermite_fns",
    "hermite_fn_deriv",
    "packet_eval",
    "packet_constant",
    "hermite_packet",
    "composite_gauss",
    "gauss_panels",
    "hermite_scaling_report",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ---------------------------------------------------------------------------
# small exact helpers


def binom(a: int, b: int) -> int:
    """C(a, b) with the convention C(a, b) = 0 outside 0 <= b <= a."""
    if b < 0 or a < 0 or b > a:
        return 0
    return math.comb(a, b)


def gen_binom(z: Rational, m: int) -> Fraction:
    """Generalised binomial z(z-1)...(z-m+1)/m! for rational z."""
    out = Fraction(1)
    for i in range(m):
        out *= Fraction(z) - i
    return out / math.factorial(m)


def gamma_half(arg: Fraction) -> tuple[Fraction, bool]:
    """Gamma at a positive integer or half-integer, as ``(q, sqrt_pi)``.

    The value is ``q * sqrt(pi)`` when the flag is set and ``q`` otherwise.
    """
    arg = Fraction(arg)
    if arg <= 0:
        raise DomainError(f"Gamma argument must be positive, got {arg}")
    if arg.denominator == 1:
        return Fraction(math.factorial(arg.numerator - 1)), False
    if arg.denominator != 2:
        raise DomainError(f"only integer or half-integer arguments, got {arg}")
    j = (arg.numerator - 1) // 2  # arg = j + 1/2
    return Fraction(math.factorial(2 * j), 4**j * math.factorial(j)), True


def _gamma_float(q: Fraction, sqrt_pi: bool) -> float:
    return float(q) * (math.sqrt(math.pi) if sqrt_pi else 1.0)


# ---------------------------------------------------------------------------
# Krawtchouk


def _check_kdn(k: int, d: int, n: int) -> None:
    if n < 1:
        raise DomainError(f"dimension must be positive, got n={n}")
    if not (0 <= k <= n and 0 <= d <= n):
        raise DomainError(f"need 0 <= k, d <= n; got k={k}, d={d}, n={n}")


@lru_cache(maxsize=None)
def _krawtchouk_column(d: int, n: int) -> tuple[int, ...]:
    # degree recurrence: (k+1) K_{k+1} = (n-2d) K_k - (n-k+1) K_{k-1}
    col = [1]
    if n >= 1:
        col.append(n - 2 * d)
    for k in range(1, n):
        num = (n - 2 * d) * col[k] - (n - k + 1) * col[k - 1]
        q, rem = divmod(num, k + 1)
        assert rem == 0
        col.append(q)
    return tuple(col)


def krawtchouk(k: int, d: int, n: int) -> int:
    """Unnormalised binary Krawtchouk polynomial K_k(d; n).

    Evaluated with the three-term recurrence in the degree; everything
    stays an integer, so no cancellation.
    """
    _check_kdn(k, d, n)
    return _krawtchouk_column(d, n)[k]


def krawtchouk_sum(k: int, d: int, n: int) -> int:
    """K_k(d; n) from the alternating binomial double sum (cross-check only)."""
    _check_kdn(k, d, n)
    return sum((-1) ** b * binom(d, b) * binom(n - d, k - b) for b in range(k + 1))


@dataclass(frozen=True)
class KrawtchoukTable:
    """All K_k(d; n), 0 <= k, d <= n, as exact integers (``entries[k][d]``)."""

    n: int
    entries: tuple[tuple[int, ...], ...]

    def __call__(self, k: int, d: int) -> int:
        return self.entries[k][d]

    def column(self, d: int) -> tuple[int, ...]:
        return tuple(row[d] for row in self.entries)

    def check(self) -> dict[str, bool]:
        """Reflection, duality and orthogonality, all in integers."""
        n, K = self.n, self.entries
        rng = range(n + 1)
        return {
            "first_column": all(K[k][0] == binom(n, k) for k in rng),
            "reflection": all(K[k][n - d] == (-1) ** k * K[k][d] for k in rng for d in rng),
            "duality": all(binom(n, d) * K[k][d] == binom(n, k) * K[d][k] for k in rng for d in rng),
            "orthogonality": all(
                sum(binom(n, d) * K[k][d] * K[kk][d] for d in rng)
                == (2**n * binom(n, k) if k == kk else 0)
                for k in rng
                for kk in rng
            ),
        }


@lru_cache(maxsize=64)
def krawtchouk_table(n: int) -> KrawtchoukTable:
    if n < 1:
        raise DomainError(f"dimension must be positive, got n={n}")
    cols = [_krawtchouk_column(d, n) for d in range(n + 1)]
    entries = tuple(tuple(cols[d][k] for d in range(n + 1)) for k in range(n + 1))
    return KrawtchoukTable(n, entries)


def krawtchouk_normalized(k: int, d: int, n: int) -> Fraction:
    """K_k(d; n) / C(n, k), i.e. the normalised polynomial at r = 1 - 2d/n."""
    return Fraction(krawtchouk(k, d, n), binom(n, k))


def krawtchouk_poly(k: int, n: int, r):
    """Normalised Krawtchouk polynomial of degree k at an arbitrary real r.

    Uses the normalised recurrence n r K_k = (n-k) K_{k+1} + k K_{k-1}.
    Off the lattice r in {1 - 2d/n} this is the polynomial extension.
    Exact when ``r`` is a Fraction or int.
    """
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if isinstance(r, (int, Fraction)):
        r = Fraction(r)
    prev, cur = 0, 1
    for j in range(k):
        prev, cur = cur, (n * r * cur - j * prev) / (n - j)
    return cur


# ---------------------------------------------------------------------------
# Laguerre


@dataclass(frozen=True)
class LaguerrePoly:
    """Generalised Laguerre polynomial with exact monomial coefficients."""

    degree: int
    alpha: Fraction
    coefficients: tuple[Fraction, ...]

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
            acc = Fraction(0)
        else:
            acc = 0.0
            coeffs = [float(c) for c in self.coefficients]
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    @property
    def leading(self) -> Fraction:
        return self.coefficients[-1]


@lru_cache(maxsize=None)
def laguerre_poly(m: int, alpha) -> LaguerrePoly:
    """L_m^(alpha) via its explicit coefficients (-1)^i C(m+alpha, m-i)/i!."""
    alpha = Fraction(alpha)
    if alpha <= -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    if m < 0:
        raise DomainError(f"degree must be nonnegative, got {m}")
    coeffs = tuple(
        (-1) ** i * gen_binom(m + alpha, m - i) / math.factorial(i) for i in range(m + 1)
    )
    return LaguerrePoly(m, alpha, coeffs)


def laguerre_eval(m: int, alpha, x):
    """Value of L_m^(alpha)(x).

    Rational ``x`` gives an exact Fraction; floats (and numpy arrays) go
    through the three-term recurrence.
    """
    alpha = Fraction(alpha)
    if alpha <= -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    if isinstance(x, (int, Fraction)):
        return laguerre_poly(m, alpha)(x)
    a = float(alpha)
    prev = np.zeros_like(x, dtype=float) if isinstance(x, np.ndarray) else 0.0
    cur = np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else 1.0
    for j in range(m):
        prev, cur = cur, ((2 * j + 1 + a - x) * cur - (j + a) * prev) / (j + 1)
    return cur


def laguerre_moment(m: int, alpha, r: int) -> tuple[Fraction, Fraction]:
    """Integral of L_m^(alpha)(x) x^(r+alpha) e^-x over [0, inf).

    Returned as ``(c, a)`` meaning ``c * Gamma(a)``; closed form
    (-1)^m C(r, m) Gamma(r + alpha + 1).
    """
    alpha = Fraction(alpha)
    if alpha <= -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    if r < 0:
        raise DomainError(f"r must be a nonnegative integer, got {r}")
    return Fraction((-1) ** m * binom(r, m)), r + alpha + 1


def laguerre_moment_direct(m: int, alpha, r: int) -> tuple[Fraction, Fraction]:
    """Same integral, term by term from the monomial coefficients."""
    alpha = Fraction(alpha)
    base = r + alpha + 1
    total = Fraction(0)
    for i, c in enumerate(laguerre_poly(m, alpha).coefficients):
        # Gamma(base + i) = Gamma(base) * (base)_i
        poch = Fraction(1)
        for j in range(i):
            poch *= base + j
        total += c * poch
    return total, base


# ---------------------------------------------------------------------------
# Hermite


@lru_cache(maxsize=None)
def hermite_poly(k: int) -> tuple[int, ...]:
    """Integer monomial coefficients of the physicists' H_k."""
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    prev: list[int] = []
    cur = [1]
    for j in range(k):
        nxt = [0] * (len(cur) + 1)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= 2 * j * c
        prev, cur = cur, nxt
    return tuple(cur)


def hermite_eval(k: int, x):
    """H_k(x) by the recurrence H_{j+1} = 2x H_j - 2j H_{j-1}."""
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    if isinstance(x, (int, Fraction)):
        return sum(c * Fraction(x) ** i for i, c in enumerate(hermite_poly(k)))
    prev, cur = 0.0 * x, 1.0 + 0.0 * x
    for j in range(k):
        prev, cur = cur, 2 * x * cur - 2 * j * prev
    return cur


_RESCALE = 1e150


def hermite_fns(kmax: int, x) -> np.ndarray:
    """Phi_0..Phi_kmax on ``x``, shape (kmax+1, len(x)).

    Normalised three-term recurrence started without the Gaussian factor;
    the running scale is tracked as a log and e^{-x^2/2} is applied at the
    end, so large |x| does not underflow mid-recurrence.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((kmax + 1, x.size))
    logscale = np.zeros_like(x)
    prev = np.zeros_like(x)
    cur = np.full_like(x, math.pi**-0.25)
    rows = [cur.copy()]
    logs = [logscale.copy()]
    for j in range(kmax):
        nxt = math.sqrt(2.0 / (j + 1)) * x * cur - math.sqrt(j / (j + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            cur[big] /= _RESCALE
            prev[big] /= _RESCALE
            logscale[big] += math.log(_RESCALE)
        rows.append(cur.copy())
        logs.append(logscale.copy())
    for j in range(kmax + 1):
        with np.errstate(under="ignore"):
            out[j] = rows[j] * np.exp(logs[j] - 0.5 * x * x)
    return out


def hermite_fn(k: int, x):
    """Normalised Hermite function Phi_k(x)."""
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    vals = hermite_fns(k, x)[k]
    return float(vals[0]) if np.ndim(x) == 0 else vals


def hermite_fn_deriv(k: int, x):
    """Phi_k'(x) from the exact derivative of H_k (independent of the ladder)."""
    x = np.asarray(x, dtype=float)
    coeffs = hermite_poly(k)
    h = np.polynomial.polynomial.polyval(x, coeffs)
    dh = np.polynomial.polynomial.polyval(x, [i * c for i, c in enumerate(coeffs)][1:] or [0])
    lognorm = -0.5 * (k * math.log(2) + math.lgamma(k + 1) + 0.5 * math.log(math.pi))
    return math.exp(lognorm) * (dh - x * h) * np.exp(-0.5 * x * x)


def packet_constant(n: int) -> float:
    """d_n = (2^{2n} (2n)! sqrt(pi))^{1/2} / (2^{2n} n!), in logs."""
    log_d = 0.5 * (2 * n * math.log(2) + math.lgamma(2 * n + 1) + 0.5 * math.log(math.pi))
    log_d -= 2 * n * math.log(2) + math.lgamma(n + 1)
    return math.exp(log_d)


def packet_eval(n: int, x):
    """A_n(x) = (-1)^n x L_n^(-1/2)(x^2) e^{-x^2/2}."""
    x = np.asarray(x, dtype=float)
    return (-1) ** n * x * laguerre_eval(n, Fraction(-1, 2), x * x) * np.exp(-0.5 * x * x)


@dataclass(frozen=True)
class HermitePacket:
    index: int
    grid: tuple[float, ...]
    packet: tuple[float, ...]
    factorized: tuple[float, ...]
    d_n: float

    def max_factorization_error(self) -> float:
        return max((abs(a - b) for a, b in zip(self.packet, self.factorized)), default=0.0)


def hermite_packet(n: int, grid: Sequence[float]) -> HermitePacket:
    """A_n on a grid together with d_n x Phi_{2n}(x) for comparison."""
    x = np.asarray(grid, dtype=float)
    d = packet_constant(n)
    return HermitePacket(
        n,
        tuple(x.tolist()),
        tuple(np.atleast_1d(packet_eval(n, x)).tolist()),
        tuple(np.atleast_1d(d * x * hermite_fn(2 * n, x)).tolist()),
        d,
    )


# ---------------------------------------------------------------------------
# quadrature

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def gauss_panels(a: float, b: float, panels: int, order: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre on ``panels`` equal panels."""
    if order == 20:
        t, w = _GL_NODES, _GL_WEIGHTS
    else:
        t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def composite_gauss(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_subdivisions: int = 1 << 14,
    start: int = 4,
) -> float:
    """Integrate a vectorised ``f`` over [a, b], halving panels until stable.

    Raises QuadratureError if two successive estimates still differ by
    more than ``tol`` once ``max_subdivisions`` panels are reached.
    """
    panels = start
    nodes, weights = gauss_panels(a, b, panels)
    prev = float(np.dot(weights, f(nodes)))
    history = [prev]
    while panels < max_subdivisions:
        panels *= 2
        nodes, weights = gauss_panels(a, b, panels)
        est = float(np.dot(weights, f(nodes)))
        history.append(est)
        if abs(est - prev) < tol:
            return est
        prev = est
    raise QuadratureError(
        f"no convergence to {tol:g} on [{a}, {b}] with {panels} panels",
        {"estimates": history, "panels": panels},
    )


# ---------------------------------------------------------------------------
# scaling experiments


def _loglog_slope(ns: Sequence[int], vals: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float) + 1), np.log(vals), 1)[0])


def hermite_scaling_report(max_index: int, points_per_unit: int = 64) -> dict:
    """Grid estimates of ||Phi_n||_1, ||Phi_n||_2, ||x Phi_n||_2^2 and
    ||x Phi_n'||_inf for n up to ``max_index``, with log-log slopes.

    The fitted slopes are compared against 1/4 (L1 norm) and 3/4
    (a = b = 1 in the sup-norm estimate).  Raises QuadratureError when the
    grid cannot reproduce ||Phi_n||_2 = 1.
    """
    if max_index < 4:
        raise DomainError("max_index must be at least 4")
    ns = sorted({int(v) for v in np.geomspace(4, max_index, num=min(12, max_index - 3))})
    X = math.sqrt(2 * max_index + 1) + 12.0
    panels = max(64, int(2 * X * points_per_unit / 20))
    x, w = gauss_panels(-X, X, panels)
    phis = hermite_fns(max_index, x)
    rows = []
    for n in ns:
        phi = phis[n]
        l2 = float(np.sqrt(np.dot(w, phi * phi)))
        if abs(l2 - 1.0) > 1e-8:
            raise QuadratureError(
                f"grid too coarse: ||Phi_{n}||_2 = {l2!r}", {"n": n, "panels": panels, "X": X}
            )
        l1 = float(np.dot(w, np.abs(phi)))
        xphi2 = float(np.dot(w, (x * phi) ** 2))
        # sup-norm estimated on a fine uniform grid (Gauss nodes cluster)
        rows.append({"n": n, "l1": l1, "l2": l2, "x_phi_l2sq": xphi2})
    fine = np.linspace(-X, X, int(2 * X * points_per_unit * 4) + 1)
    for row in rows:
        n = row["n"]
        row["x_dphi_sup"] = float(np.max(np.abs(fine * hermite_fn_deriv_stable(n, fine))))
    slope_l1 = _loglog_slope([r["n"] for r in rows], [r["l1"] for r in rows])
    slope_sup = _loglog_slope([r["n"] for r in rows], [r["x_dphi_sup"] for r in rows])
    return {
        "rows": rows,
        "slope_l1": slope_l1,
        "predicted_l1": 0.25,
        "slope_x_dphi_sup": slope_sup,
        "predicted_x_dphi_sup": 0.75,
    }


def hermite_fn_deriv_stable(k: int, x) -> np.ndarray:
    """Phi_k' via sqrt(k/2) Phi_{k-1} - sqrt((k+1)/2) Phi_{k+1}, stable for large k."""
    phis = hermite_fns(k + 1, x)
    lower = phis[k - 1] if k >= 1 else 0.0
    return math.sqrt(k / 2) * lower - math.sqrt((k + 1) / 2) * phis[k + 1]
