"""Hidden-direction family: packings, planted densities, pairwise correlations.

A direction u in {-1,1}^n plants the label distribution
D_u(x, y) = 2^-(n+1) (1 + y psi(u * x)).  Pairwise correlations relative
to the uniform reference reduce to sum_d b_d^2 K_d(<u,v>/n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cube import NoiseParam, _cube
from .orthopoly import DomainError, binom, krawtchouk_poly, krawtchouk_table
from .witness import WitnessLevels, WitnessSpec, build_witness, correlation_kappa, moment_constant

__all__ = [
    "Direction",
    "PackingFamily",
    "PackingError",
    "PlantedDist",
    "generate_packing",
    "theoretical_packing_size",
    "pairwise_chi",
    "pairwise_chi_bruteforce",
    "krawtchouk_bound_rhs",
    "krawtchouk_bound_check",
    "bound_D_rhs",
    "check_bound_D",
    "smoothed_benchmark",
    "restrict",
]


@dataclass(frozen=True)
class Direction:
    u: tuple

    def __post_init__(self):
        u = tuple(int(v) for v in self.u)
        if not u or any(v not in (-1, 1) for v in u):
            raise DomainError("direction entries must be +-1")
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return len(self.u)

    def dot(self, other: "Direction") -> int:
        if other.n != self.n:
            raise DomainError(f"dimension mismatch: {self.n} vs {other.n}")
        return sum(a * b for a, b in zip(self.u, other.u))

    def __str__(self) -> str:
        return "".join("+" if v > 0 else "-" for v in self.u)

    @classmethod
    def parse(cls, text: str) -> "Direction":
        return cls(tuple(1 if c == "+" else -1 for c in text))


@dataclass(frozen=True)
class PackingFamily:
    n: int
    delta: float
    members: tuple
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.members)

    def verify(self) -> int:
        """Re-check the delta constraint with integer inner products.

        Returns the largest |<u,v>| over distinct pairs.
        """
        if not self.members:
            return 0
        U = np.array([m.u for m in self.members], dtype=np.int64)
        G = U @ U.T
        np.fill_diagonal(G, 0)
        worst = int(np.abs(G).max()) if len(U) > 1 else 0
        if worst > self.delta * self.n:
            raise DomainError(f"packing violates |<u,v>| <= delta n: {worst} > {self.delta * self.n}")
        if len({m.u for m in self.members}) != len(self.members):
            raise DomainError("packing has repeated members")
        return worst


class PackingError(RuntimeError):
    def __init__(self, message: str, partial_size: int):
        super().__init__(f"{message} (reached {partial_size} members)")
        self.partial_size = partial_size


def theoretical_packing_size(n: int, delta: float) -> int:
    """Largest M with M^2 exp(-n delta^2 / 2) < 1 (the union-bound size)."""
    return max(1, math.ceil(math.exp(n * delta * delta / 4)) - 1)


def generate_packing(n: int, delta: float, size: int, seed: int, budget: int | None = None) -> PackingFamily:
    """Rejection-sample ``size`` directions with pairwise |<u,v>| <= delta n.

    ``budget`` counts candidate draws and defaults to 10 * size^2.
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if size < 1 or n < 1:
        raise DomainError("need n >= 1 and size >= 1")
    budget = 10 * size * size if budget is None else budget
    limit = delta * n
    rng = np.random.default_rng(seed)
    accepted = np.empty((size, n), dtype=np.int64)
    count = 0
    seen = set()
    for _ in range(budget):
        cand = rng.choice(np.array([-1, 1]), size=n)
        key = cand.tobytes()
        if key in seen:
            continue
        if count and np.abs(accepted[:count] @ cand).max() > limit:
            continue
        accepted[count] = cand
        seen.add(key)
        count += 1
        if count == size:
            fam = PackingFamily(n, delta, tuple(Direction(tuple(row)) for row in accepted), seed)
            fam.verify()
            return fam
    raise PackingError(f"draw budget {budget} exhausted", count)


def restrict(family: PackingFamily, n_new: int) -> PackingFamily:
    """Drop trailing coordinates, recomputing the achieved delta.

    Used to run an odd-n witness on an even-n packing.
    """
    members = tuple(Direction(m.u[:n_new]) for m in family.members)
    U = np.array([m.u for m in members], dtype=np.int64)
    G = U @ U.T
    np.fill_diagonal(G, 0)
    worst = int(np.abs(G).max()) if len(U) > 1 else 0
    if len({m.u for m in members}) != len(members):
        raise DomainError("restriction produced repeated members")
    return PackingFamily(n_new, max(worst, 1) / n_new, members, family.seed)


@dataclass(frozen=True)
class PlantedDist:
    """D_u(x, y) = 2^-(n+1) (1 + y psi(u * x)) with uniform x-marginal."""

    direction: Direction
    witness: WitnessLevels

    def __post_init__(self):
        if self.direction.n != self.witness.n:
            raise DomainError(f"direction has n={self.direction.n}, witness n={self.witness.n}")

    @property
    def n(self) -> int:
        return self.witness.n

    def psi_u(self, x: Sequence[int]) -> Fraction:
        """psi(u * x), looked up by the Hamming weight of u * x."""
        vals = self.witness.psi_values()
        return vals[sum(1 for a, b in zip(self.direction.u, x) if a * b < 0)]

    def density(self, x: Sequence[int], y: int) -> Fraction:
        return Fraction(1, 2 ** (self.n + 1)) * (1 + y * self.psi_u(x))

    def psi_u_array(self, X: np.ndarray, exact: bool = False) -> np.ndarray:
        vals = self.witness.psi_values()
        table = np.array(vals, dtype=object) if exact else np.array([float(v) for v in vals])
        weights = ((np.asarray(X) * np.array(self.direction.u)) < 0).sum(axis=1)
        return table[weights]

    def check(self, brute: bool | None = None) -> dict:
        """Exact nonnegativity and normalisation.

        Via weight classes always; by enumerating {-1,1}^(n+1) when
        ``brute`` (default for n <= 12).
        """
        n = self.n
        vals = self.witness.psi_values()
        nonneg = all(abs(v) <= 1 for v in vals)
        scale = Fraction(1, 2 ** (n + 1))
        total = sum(binom(n, j) * scale * ((1 + v) + (1 - v)) for j, v in enumerate(vals))
        out = {"nonnegative": nonneg, "total": total, "normalised": total == 1}
        if brute if brute is not None else n <= 12:
            pts = _cube(n)
            psi = self.psi_u_array(pts, exact=True)
            dens = [scale * (1 + y * p) for y in (1, -1) for p in psi]
            out["brute_total"] = sum(dens)
            out["brute_nonnegative"] = min(dens) >= 0
            out["normalised"] = out["normalised"] and out["brute_total"] == 1
            out["nonnegative"] = nonneg and out["brute_nonnegative"]
        return out


# ---------------------------------------------------------------------------
# correlations


def pairwise_chi(a: Direction, b: Direction, w: WitnessLevels) -> Fraction:
    """|<psi^(a), psi^(b)>| = |sum_d b_d^2 K_d(<a,b>/n)|, exact."""
    if a.n != b.n or a.n != w.n:
        raise DomainError(f"dimension mismatch: {a.n}, {b.n}, witness {w.n}")
    n = w.n
    dist = (n - a.dot(b)) // 2
    K = krawtchouk_table(n).entries
    return abs(sum(b2 * Fraction(K[d][dist], binom(n, d)) for d, b2 in enumerate(w.level_squares) if b2))


def pairwise_chi_bruteforce(a: Direction, b: Direction, w: WitnessLevels) -> Fraction:
    """Same quantity by enumerating all x in {-1,1}^n (n <= 16)."""
    n = w.n
    if n > 16:
        raise DomainError("brute-force correlation limited to n <= 16")
    pts = _cube(n)
    wa = ((pts * np.array(a.u)) < 0).sum(axis=1)
    wb = ((pts * np.array(b.u)) < 0).sum(axis=1)
    hist = np.zeros((n + 1, n + 1), dtype=np.int64)
    np.add.at(hist, (wa, wb), 1)
    vals = w.psi_values()
    total = sum(int(hist[i, j]) * vals[i] * vals[j] for i, j in zip(*np.nonzero(hist)))
    return abs(Fraction(total, 2**n))


# ---------------------------------------------------------------------------
# Krawtchouk pointwise bound and the pairwise correlation bound


def _c(p: int) -> Fraction:
    return Fraction(2**p, math.factorial(p))


def _tail_constant(P: int) -> float:
    return 2 ** (P + 1) * math.e**2


def krawtchouk_bound_rhs(d: int, n: int, r, P: int) -> float:
    """|r|^d + sum_{p<=P} (2^p/p!) (d^2/n)^p |r|^max(0,d-2p) + 2^(P+1) e^2 (d^2/n)^(P+1)."""
    x = Fraction(d * d, n)
    ar = abs(Fraction(r)) if isinstance(r, (int, Fraction)) else abs(r)
    head = ar**d + sum(_c(p) * x**p * ar ** max(0, d - 2 * p) for p in range(1, P + 1))
    return float(head) + _tail_constant(P) * float(x) ** (P + 1)


def krawtchouk_bound_check(n: int = 100, dmax: int = 10, points: int = 41, P_values=range(0, 6)) -> dict:
    """Pointwise |K_d(r)| <= rhs on an r-grid in [-1, 1], all d <= dmax.

    Grid points off the lattice 1 - 2j/n use the polynomial extension;
    the recurrence-based argument behind the bound is valid for every real
    |r| <= 1.  Left sides are exact rationals.
    """
    if dmax * dmax > n:
        raise DomainError(f"bound is stated for d <= sqrt(n); got d={dmax}, n={n}")
    grid = [Fraction(-1) + Fraction(2 * i, points - 1) for i in range(points)]
    worst = None
    failures = []
    for P in P_values:
        for d in range(0, dmax + 1):
            for r in grid:
                lhs = abs(krawtchouk_poly(d, n, r))
                rhs = krawtchouk_bound_rhs(d, n, r, P)
                margin = rhs - float(lhs)
                if worst is None or margin < worst[0]:
                    worst = (margin, d, r, P)
                if margin < 0:
                    failures.append({"d": d, "r": str(r), "P": P, "lhs": float(lhs), "rhs": rhs})
    return {
        "pass": not failures,
        "failures": failures,
        "min_margin": worst[0],
        "argmin": {"d": worst[1], "r": str(worst[2]), "P": worst[3]},
        "evaluations": len(grid) * (dmax + 1) * len(list(P_values)),
    }


def bound_D_rhs(k: int, n: int, delta: float, A: float) -> float:
    """Right side of the pairwise-correlation bound with explicit constants.

    delta^(2k+1) + sum_{p=1}^k (2^p/p!) A^p k^2p / n^p delta^max(0,2k+1-2p)
      + (2^(k+1) e^2 + 1) A^(k+1) k^(2k+2) / n^(k+1),
    A being the coefficient-moment constant of the witness.
    """
    out = delta ** (2 * k + 1)
    for p in range(1, k + 1):
        out += float(_c(p)) * A**p * k ** (2 * p) / n**p * delta ** max(0, 2 * k + 1 - 2 * p)
    out += (_tail_constant(k) + 1) * A ** (k + 1) * k ** (2 * k + 2) / n ** (k + 1)
    return out


def check_bound_D(k: int, n: int, delta: float, family: PackingFamily | None = None,
                  witness: WitnessLevels | None = None) -> dict:
    """Assert pairwise_chi <= bound_D_rhs for all pairs of ``family``.

    Without a family only the right side (gamma bar) is returned.
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    w = witness or build_witness(WitnessSpec.from_k(n, k))
    mom = moment_constant(w, k + 1)
    A = mom["A"]
    rhs = bound_D_rhs(k, n, delta, A)
    report = {"k": k, "n": n, "delta": delta, "A_mom": A, "rhs": rhs, "pairs": 0,
              "max_chi": 0.0, "pass": True, "violation": None}
    if family is None:
        return report
    if family.n != n:
        raise DomainError(f"family has n={family.n}, witness n={n}")
    members = family.members
    # chi depends on the pair only through <u,v>
    U = np.array([m.u for m in members], dtype=np.int64)
    G = U @ U.T
    cache: dict[int, Fraction] = {}
    worst = Fraction(0)
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            ip = int(G[i, j])
            if abs(ip) > delta * n:
                raise DomainError(f"pair ({i},{j}) has |<u,v>|={abs(ip)} > delta n")
            if ip not in cache:
                cache[ip] = pairwise_chi(members[i], members[j], w)
            chi = cache[ip]
            report["pairs"] += 1
            if chi > worst:
                worst = chi
            if float(chi) > rhs and report["violation"] is None:
                report["pass"] = False
                report["violation"] = {"pair": [i, j], "inner_product": ip, "chi": float(chi), "rhs": rhs}
    report["max_chi"] = float(worst)
    report["max_chi_exact"] = worst
    report["margin"] = rhs - float(worst)
    return report


def smoothed_benchmark(u: Direction, w: WitnessLevels, rho) -> object:
    """Upper bound (1 - kappa)/2 on the smoothed error of sign(<u, x>).

    kappa = <T_rho Maj_n, psi> does not depend on u (rotation invariance).
    """
    if u.n != w.n:
        raise DomainError(f"direction has n={u.n}, witness n={w.n}")
    if isinstance(rho, NoiseParam):
        rho = rho.rho
    kappa = correlation_kappa(rho, w.spec, w).value
    return (1 - kappa) / 2
