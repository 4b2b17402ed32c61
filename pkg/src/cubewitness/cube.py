"""Symmetric functions on the Boolean cube {-1, 1}^n.

A symmetric f is stored through its Fourier coefficient on a single
level-d character, ``fourier[d] = E[f(x) x_1 ... x_d]``.  The coefficient
on the orthonormal mode Psi_{d,n} is then ``sqrt(C(n,d)) * fourier[d]``,
so in exact mode every level coefficient is a rational times the square
root of a binomial.  Values are indexed by the Hamming profile
d = #{i : x_i = -1}, with coordinate sum s = n - 2d.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .orthopoly import DomainError, binom, krawtchouk_table

__all__ = [
    "RootRational",
    "NoiseParam",
    "SymmetricFn",
    "psi_mode_value",
    "noise_apply",
    "noise_apply_bruteforce",
    "majority_levels",
    "majority_fourier",
    "brute_force_levels",
    "inner_product",
    "parse_scalar",
    "format_scalar",
]


@dataclass(frozen=True)
class RootRational:
    """The real number ``q * sqrt(radicand)``."""

    q: Fraction
    radicand: int

    def __post_init__(self):
        if self.radicand < 0:
            raise DomainError("radicand must be nonnegative")
        object.__setattr__(self, "q", Fraction(self.q))

    def square(self) -> Fraction:
        return self.q * self.q * self.radicand

    def __float__(self) -> float:
        return float(self.q) * math.sqrt(self.radicand)

    def __neg__(self) -> "RootRational":
        return RootRational(-self.q, self.radicand)

    def __mul__(self, other):
        if isinstance(other, RootRational):
            if other.radicand == self.radicand:
                return Fraction(self.q * other.q * self.radicand)
            return RootRational(self.q * other.q, self.radicand * other.radicand)
        return RootRational(self.q * Fraction(other), self.radicand)

    __rmul__ = __mul__

    def sign(self) -> int:
        if self.q == 0 or self.radicand == 0:
            return 0
        return 1 if self.q > 0 else -1

    def __eq__(self, other) -> bool:
        if isinstance(other, RootRational):
            return self.sign() == other.sign() and self.square() == other.square()
        if isinstance(other, (int, Fraction)):
            o = Fraction(other)
            return self.sign() == (o > 0) - (o < 0) and self.square() == o * o
        return NotImplemented

    def __hash__(self):
        return hash((self.sign(), self.square()))

    def __str__(self) -> str:
        if self.radicand == 1:
            return str(self.q)
        return f"{self.q}*sqrt({self.radicand})"


def parse_scalar(text):
    """Inverse of ``format_scalar``: "p/q", "p/q*sqrt(R)" or a JSON number."""
    if isinstance(text, (int, float)):
        return text
    if "*sqrt(" in text:
        head, rad = text.split("*sqrt(")
        return RootRational(Fraction(head), int(rad.rstrip(")")))
    return Fraction(text)


def format_scalar(v):
    if isinstance(v, (Fraction, RootRational)):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return float(v)


@dataclass(frozen=True)
class NoiseParam:
    """Bit-flip rate sigma in (0, 1/2) and correlation rho = 1 - 2 sigma."""

    sigma: Fraction | float

    def __post_init__(self):
        if not 0 < self.sigma < Fraction(1, 2):
            raise DomainError(f"sigma must lie in (0, 1/2), got {self.sigma}")

    @property
    def rho(self):
        return 1 - 2 * self.sigma

    @classmethod
    def from_rho(cls, rho) -> "NoiseParam":
        if isinstance(rho, (int, Fraction)):
            return cls((1 - Fraction(rho)) / 2)
        return cls((1 - rho) / 2)


def _is_exact(seq) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in seq)


@dataclass(frozen=True)
class SymmetricFn:
    """Symmetric real function on {-1,1}^n, canonical form = level data.

    ``fourier[d]`` is the Fourier coefficient of any single degree-d
    character; entries are Fractions (exact mode) or floats.
    """

    n: int
    fourier: tuple

    def __post_init__(self):
        if len(self.fourier) != self.n + 1:
            raise DomainError(f"need {self.n + 1} coefficients, got {len(self.fourier)}")
        if _is_exact(self.fourier):
            object.__setattr__(self, "fourier", tuple(Fraction(v) for v in self.fourier))

    # -- constructors --------------------------------------------------------
    @classmethod
    def from_values(cls, n: int, values: Sequence) -> "SymmetricFn":
        """From the Hamming profile v_0..v_n."""
        if len(values) != n + 1:
            raise DomainError(f"need {n + 1} profile values, got {len(values)}")
        K = krawtchouk_table(n).entries
        if _is_exact(values):
            scale = Fraction(1, 2**n)
            vals = [Fraction(v) for v in values]
            four = [scale * sum(vals[j] * K[j][d] for j in range(n + 1)) for d in range(n + 1)]
        else:
            # K_j(d) can be huge; use normalised columns times binomial weights in floats
            w = np.array([math.exp(math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) - n * math.log(2)) for j in range(n + 1)])
            vals = np.asarray(values, dtype=float)
            four = []
            for d in range(n + 1):
                kn = np.array([K[d][j] / binom(n, d) for j in range(n + 1)], dtype=float)
                four.append(float(np.dot(w * vals, kn)))
        return cls(n, tuple(four))

    @classmethod
    def from_levels(cls, n: int, levels: Sequence) -> "SymmetricFn":
        """From coefficients on the orthonormal modes Psi_{d,n}."""
        four = []
        for d, b in enumerate(levels):
            c = binom(n, d)
            if isinstance(b, RootRational):
                if b.radicand == c:
                    four.append(b.q)
                    continue
                b = float(b)
            if isinstance(b, (int, Fraction)):
                r = math.isqrt(c)
                if r * r != c:
                    if b != 0:
                        raise DomainError("rational level needs sqrt(C(n,d)) factor; pass RootRational")
                    four.append(Fraction(0))
                else:
                    four.append(Fraction(b) / r)
            else:
                four.append(float(b) / math.sqrt(c))
        return cls(n, tuple(four))

    @classmethod
    def mode(cls, d: int, n: int) -> "SymmetricFn":
        """Psi_{d,n} / sqrt(C(n,d)), the average of the degree-d characters.

        Its profile is the normalised Krawtchouk column K_d / C(n,d); Psi_{d,n}
        itself has an irrational character coefficient unless C(n,d) is square.
        """
        c = binom(n, d)
        return cls.from_levels(n, [RootRational(Fraction(1, c), c) if j == d else Fraction(0) for j in range(n + 1)])

    # -- views --------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return _is_exact(self.fourier)

    @property
    def levels(self) -> tuple:
        """Coefficients b_d on Psi_{d,n} (RootRational in exact mode)."""
        if self.exact:
            return tuple(RootRational(a, binom(self.n, d)) for d, a in enumerate(self.fourier))
        return tuple(a * math.sqrt(binom(self.n, d)) for d, a in enumerate(self.fourier))

    @property
    def level_squares(self) -> tuple:
        """b_d^2 = C(n,d) fourier[d]^2, exact in rational mode."""
        return tuple(binom(self.n, d) * a * a for d, a in enumerate(self.fourier))

    def values(self) -> tuple:
        """Hamming-profile values v_0..v_n."""
        n = self.n
        K = krawtchouk_table(n).entries
        if self.exact:
            return tuple(sum(self.fourier[d] * K[d][j] for d in range(n + 1)) for j in range(n + 1))
        return tuple(
            math.fsum(self.fourier[d] * K[d][j] for d in range(n + 1)) for j in range(n + 1)
        )

    def value_at_sum(self, s: int):
        if abs(s) > self.n or (self.n - s) % 2:
            raise DomainError(f"coordinate sum {s} incompatible with n={self.n}")
        return self.values()[(self.n - s) // 2]

    def __call__(self, x: Sequence[int]):
        return self.values()[sum(1 for xi in x if xi < 0)]

    def parity(self) -> str | None:
        odd = all(a == 0 for d, a in enumerate(self.fourier) if d % 2 == 0)
        even = all(a == 0 for d, a in enumerate(self.fourier) if d % 2 == 1)
        if odd and not even:
            return "odd"
        if even and not odd:
            return "even"
        return None

    def norm2_sq(self):
        return sum(self.level_squares)

    def to_float(self) -> "SymmetricFn":
        return SymmetricFn(self.n, tuple(float(a) for a in self.fourier))

    def scale(self, c) -> "SymmetricFn":
        return SymmetricFn(self.n, tuple(c * a for a in self.fourier))

    def truncate(self, degree: int) -> "SymmetricFn":
        zero = Fraction(0) if self.exact else 0.0
        return SymmetricFn(self.n, tuple(a if d <= degree else zero for d, a in enumerate(self.fourier)))

    # -- JSON ---------------------------------------------------------------
    def to_json(self, basis: str = "levels") -> str:
        if basis == "levels":
            data = [format_scalar(b) for b in self.levels]
        elif basis == "values":
            data = [format_scalar(v) for v in self.values()]
        else:
            raise DomainError(f"unknown basis {basis!r}")
        return json.dumps({"n": self.n, "basis": basis, "data": data})

    @classmethod
    def from_json(cls, text: str) -> "SymmetricFn":
        doc = json.loads(text)
        data = [parse_scalar(v) for v in doc["data"]]
        if doc["basis"] == "levels":
            return cls.from_levels(doc["n"], data)
        if doc["basis"] == "values":
            return cls.from_values(doc["n"], data)
        raise DomainError(f"unknown basis {doc['basis']!r}")


def psi_mode_value(d: int, n: int, s: int, exact: bool = True):
    """Psi_{d,n}(x) at any x with coordinate sum s.

    Exact result is ``RootRational(K_d(j;n)/C(n,d), C(n,d))`` with
    j = (n - s)/2.
    """
    if not 0 <= d <= n:
        raise DomainError(f"level {d} outside [0, {n}]")
    if abs(s) > n or (n - s) % 2:
        raise DomainError(f"coordinate sum {s} has the wrong parity or size for n={n}")
    c = binom(n, d)
    k = krawtchouk_table(n)(d, (n - s) // 2)
    val = RootRational(Fraction(k, c), c)
    return val if exact else float(val)


def noise_apply(rho, f: SymmetricFn) -> SymmetricFn:
    """T_rho f: damp level d by rho^d."""
    if isinstance(rho, NoiseParam):
        rho = rho.rho
    if f.exact and isinstance(rho, (int, Fraction)):
        rho = Fraction(rho)
        return SymmetricFn(f.n, tuple(rho**d * a for d, a in enumerate(f.fourier)))
    return SymmetricFn(f.n, tuple(float(rho) ** d * float(a) for d, a in enumerate(f.fourier)))


def majority_fourier(n: int) -> tuple[Fraction, ...]:
    """Single-character Fourier coefficients of Maj_n (n odd)."""
    if n < 1 or n % 2 == 0:
        raise DomainError(f"majority needs odd n, got {n}")
    N = (n - 1) // 2
    central = Fraction(math.comb(2 * N, N), 4**N)
    out = [Fraction(0)] * (n + 1)
    for r in range(N + 1):
        out[2 * r + 1] = (-1) ** r * Fraction(math.comb(N, r), math.comb(2 * N, 2 * r)) * central
    return tuple(out)


def majority_levels(n: int) -> SymmetricFn:
    return SymmetricFn(n, majority_fourier(n))


def _cube(n: int) -> np.ndarray:
    """All points of {-1,1}^n as an int8 array of shape (2^n, n)."""
    idx = np.arange(2**n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def brute_force_levels(func: Callable[[tuple], object], n: int, check_symmetry: bool = True) -> SymmetricFn:
    """Fourier data of a symmetric ``func`` by enumerating all 2^n points.

    ``func`` receives a tuple of +-1 ints.  Every point is evaluated; with
    ``check_symmetry`` the function must be constant on each weight class,
    and the level-d coefficient is checked on a second, disjoint-ish set.
    """
    if n > 20:
        raise DomainError("brute force limited to n <= 20")
    pts = _cube(n)
    vals = [func(tuple(int(v) for v in row)) for row in pts]
    weights = (pts < 0).sum(axis=1)
    if check_symmetry:
        seen: dict[int, object] = {}
        for w, v in zip(weights.tolist(), vals):
            if w in seen and seen[w] != v:
                raise DomainError(f"function is not symmetric (weight class {w})")
            seen.setdefault(w, v)
    exact = _is_exact(vals)
    vals_arr = np.array(vals, dtype=object if exact else float)
    chi = np.ones(2**n, dtype=np.int8)
    four = [None] * (n + 1)
    for d in range(n + 1):
        if d:
            chi = chi * pts[:, d - 1]
        plus = vals_arr[chi > 0].sum()
        minus = vals_arr[chi < 0].sum()
        four[d] = (Fraction(plus - minus) / 2**n) if exact else float(plus - minus) / 2**n
    if check_symmetry and n >= 2:
        # same level, shifted coordinate block, must agree
        for d in range(1, n):
            chi2 = np.prod(pts[:, n - d:], axis=1)
            plus = vals_arr[chi2 > 0].sum()
            minus = vals_arr[chi2 < 0].sum()
            alt = (Fraction(plus - minus) / 2**n) if exact else float(plus - minus) / 2**n
            if (alt != four[d]) if exact else abs(alt - four[d]) > 1e-12:
                raise DomainError(f"function is not symmetric (level {d})")
    return SymmetricFn(n, tuple(four))


def inner_product(f: SymmetricFn, g: SymmetricFn, debug: bool = False):
    """<f, g> under the uniform measure, computed on levels.

    With ``debug`` the value-side formula sum_d C(n,d) 2^-n v_d(f) v_d(g)
    is evaluated as well and must agree.
    """
    if f.n != g.n:
        raise DomainError(f"dimension mismatch: {f.n} vs {g.n}")
    n = f.n
    lv = sum(binom(n, d) * a * b for d, (a, b) in enumerate(zip(f.fourier, g.fourier)))
    if debug:
        vf, vg = f.values(), g.values()
        vv = sum(binom(n, j) * a * b for j, (a, b) in enumerate(zip(vf, vg)))
        if f.exact and g.exact:
            vv = Fraction(vv, 2**n)
            if vv != lv:
                raise ArithmeticError(f"inner product paths disagree: {lv} vs {vv}")
        else:
            vv = vv / 2**n
            if abs(vv - lv) > 1e-9 * max(1.0, abs(lv)):
                raise ArithmeticError(f"inner product paths disagree: {lv} vs {vv}")
    return lv


def noise_apply_bruteforce(rho: Fraction, f: SymmetricFn) -> SymmetricFn:
    """T_rho f from the flip-average definition, exactly, for small n.

    For one representative x per weight class, all 2^n flip patterns z are
    enumerated; pattern z has probability p^|z| (1-p)^(n-|z|) with
    p = (1 - rho)/2, and contributes f(x * z).
    """
    n = f.n
    if n > 20:
        raise DomainError("brute force limited to n <= 20")
    rho = Fraction(rho)
    p = (1 - rho) / 2
    q = 1 - p
    v = f.values()
    flips = _cube(n) < 0  # True where the pattern flips coordinate i
    nflips = flips.sum(axis=1)
    out = []
    for j in range(n + 1):
        x_neg = np.zeros(n, dtype=bool)
        x_neg[:j] = True
        y_weight = (x_neg[None, :] ^ flips).sum(axis=1)
        # histogram over (number of flips, resulting weight)
        hist = np.zeros((n + 1, n + 1), dtype=np.int64)
        np.add.at(hist, (nflips, y_weight), 1)
        acc = Fraction(0)
        for a, w in zip(*np.nonzero(hist)):
            acc += int(hist[a, w]) * p ** int(a) * q ** (n - int(a)) * v[int(w)]
        out.append(acc)
    return SymmetricFn.from_values(n, out)


def enumerate_points(n: int):
    """Iterator over {-1,1}^n as tuples (small n only)."""
    return itertools.product((1, -1), repeat=n)
