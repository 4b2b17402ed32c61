"""Statistical-query oracles over planted distributions.

The oracle answers expectation queries within the STAT or VSTAT
tolerance.  The reference-pull adversary answers with the value the
query would have under the uniform reference D_0 whenever that value is
legal, which is the mechanism behind correlation-based lower bounds.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cube import SymmetricFn, _cube
from .orthopoly import DomainError, binom, krawtchouk_table
from .planted import Direction, PackingFamily, PlantedDist, pairwise_chi
from .witness import WitnessLevels, WitnessSpec, correlation_kappa

__all__ = [
    "Query",
    "OracleConfig",
    "TranscriptRow",
    "SQTranscript",
    "SQOracle",
    "exact_expectation",
    "reference_expectation",
    "answer",
    "average_correlation",
    "max_average_correlation_by_size",
    "sda_bruteforce",
    "select_hardness_degree",
    "largest_hard_degree",
    "correlation_attack",
    "AttackResult",
    "solution_counts",
]


@dataclass(frozen=True)
class Query:
    """Either a raw truth table q(x, y) or a correlation query.

    Raw tables have shape (2^n, 2), rows in ``_cube`` order and columns
    y = +1, -1.  A correlation query is q(x, y) = (1 + y h(frame * x)) / 2
    for a symmetric h with |h| <= 1.
    """

    kind: str
    n: int
    table: np.ndarray | None = field(default=None, compare=False, repr=False)
    h: SymmetricFn | None = None
    frame: Direction | None = None

    def __post_init__(self):
        if self.kind == "raw":
            if self.n > 20:
                raise DomainError("raw queries limited to n <= 20")
            t = np.asarray(self.table)
            if t.shape != (2**self.n, 2):
                raise DomainError(f"raw table must have shape {(2**self.n, 2)}")
            if (t < 0).any() or (t > 1).any():
                raise DomainError("query values must lie in [0, 1]")
        elif self.kind == "correlation":
            if self.h is None or self.frame is None or self.h.n != self.n or self.frame.n != self.n:
                raise DomainError("correlation query needs h and frame of dimension n")
            if max(abs(v) for v in self.h.values()) > 1:
                raise DomainError("correlation query needs |h| <= 1")
        else:
            raise DomainError(f"unknown query kind {self.kind!r}")

    @classmethod
    def correlation(cls, h: SymmetricFn, frame: Direction) -> "Query":
        return cls("correlation", h.n, h=h, frame=frame)

    @classmethod
    def raw(cls, table) -> "Query":
        t = np.asarray(table)
        return cls("raw", int(round(math.log2(t.shape[0]))), table=t)

    @property
    def id(self) -> str:
        if self.kind == "raw":
            payload = np.ascontiguousarray(np.asarray(self.table, dtype=object).astype(str)).tobytes()
        else:
            payload = json.dumps({"frame": str(self.frame), "h": self.h.to_json()}).encode()
        return hashlib.sha256(self.kind.encode() + payload).hexdigest()[:16]


@dataclass(frozen=True)
class OracleConfig:
    mode: str  # "STAT" or "VSTAT"
    param: object  # tau for STAT, t for VSTAT
    adversary: str = "reference-pull"
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in ("STAT", "VSTAT"):
            raise DomainError(f"mode must be STAT or VSTAT, got {self.mode!r}")
        if not self.param > 0:
            raise DomainError("tolerance parameter must be positive")
        if self.adversary not in ("honest", "reference-pull"):
            raise DomainError(f"unknown adversary {self.adversary!r}")

    def tolerance(self, p) -> float:
        if self.mode == "STAT":
            return float(self.param)
        t = float(self.param)
        p = float(p)
        return max(1 / t, math.sqrt(max(p * (1 - p), 0.0) / t))


@dataclass(frozen=True)
class TranscriptRow:
    query_id: str
    true_value: object
    returned: float
    tolerance: float


@dataclass
class SQTranscript:
    rows: list = field(default_factory=list)
    final_answer: object = None

    @property
    def query_count(self) -> int:
        return len(self.rows)

    def verify(self) -> bool:
        """Every returned value lies within its tolerance of the truth."""
        return all(abs(r.returned - float(r.true_value)) <= r.tolerance * (1 + 1e-12) for r in self.rows)


def _correlation_inner(h: SymmetricFn, frame: Direction, dist: PlantedDist):
    """<h(frame * .), psi(u * .)> by levels and the addition formula."""
    n = dist.n
    dist_h = (n - frame.dot(dist.direction)) // 2
    K = krawtchouk_table(n).entries
    psi = dist.witness.psi.fourier
    return sum(binom(n, d) * h.fourier[d] * psi[d] * Fraction(K[d][dist_h], binom(n, d))
               for d in range(n + 1) if h.fourier[d] and psi[d])


def exact_expectation(dist: PlantedDist, q: Query):
    """E_{D_u}[q] exactly."""
    if q.n != dist.n:
        raise DomainError(f"query on n={q.n}, distribution on n={dist.n}")
    if q.kind == "correlation":
        return Fraction(1, 2) + _correlation_inner(q.h, q.frame, dist) / 2
    pts = _cube(q.n)
    psi = dist.psi_u_array(pts, exact=True)
    t = np.asarray(q.table, dtype=object)
    scale = Fraction(1, 2 ** (q.n + 1))
    return scale * (np.dot(t[:, 0], 1 + psi) + np.dot(t[:, 1], 1 - psi))


def reference_expectation(q: Query):
    """E_{D_0}[q] under the uniform reference."""
    if q.kind == "correlation":
        return Fraction(1, 2)
    t = np.asarray(q.table, dtype=object)
    return Fraction(sum(t.ravel())) / t.size if all(isinstance(v, (int, Fraction)) for v in t.ravel()) \
        else float(np.mean(np.asarray(q.table, dtype=float)))


class SQOracle:
    """Answers queries about one planted distribution and logs a transcript.

    Not thread-safe: one oracle per experiment.
    """

    def __init__(self, config: OracleConfig, dist: PlantedDist):
        self.config = config
        self.dist = dist
        self.transcript = SQTranscript()
        self._rng = np.random.default_rng(config.seed) if config.seed is not None else None

    def answer(self, q: Query) -> float:
        p = exact_expectation(self.dist, q)
        tau = self.config.tolerance(p)
        if self.config.adversary == "reference-pull":
            ref = float(reference_expectation(q))
            value = min(max(ref, float(p) - tau), float(p) + tau)
        elif self._rng is not None:
            value = float(p) + float(self._rng.uniform(-tau, tau))
        else:
            value = float(p)
        row = TranscriptRow(q.id, p, value, tau)
        if abs(value - float(p)) > tau * (1 + 1e-12):
            raise ArithmeticError("oracle produced an illegal answer")
        self.transcript.rows.append(row)
        return value


def answer(oracle: SQOracle, q: Query) -> float:
    return oracle.answer(q)


# ---------------------------------------------------------------------------
# correlation statistics


def _pair_matrix(members: Sequence[PlantedDist]) -> list:
    w = members[0].witness
    if any(m.witness is not w and m.witness.spec != w.spec for m in members):
        raise DomainError("members must share one witness")
    t = len(members)
    diag = w.norm2_sq()
    M = [[Fraction(0)] * t for _ in range(t)]
    for i in range(t):
        M[i][i] = diag
        for j in range(i + 1, t):
            M[i][j] = M[j][i] = pairwise_chi(members[i].direction, members[j].direction, w)
    return M


def average_correlation(members: Sequence[PlantedDist]) -> Fraction:
    """(1/t^2) sum over ordered pairs of chi, diagonal terms ||psi||^2."""
    if not members:
        raise DomainError("need at least one member")
    M = _pair_matrix(members)
    return sum(sum(row) for row in M) / len(members) ** 2


def max_average_correlation_by_size(members: Sequence[PlantedDist]) -> dict:
    """For each subset size t, the largest average correlation (|family| <= 12)."""
    if len(members) > 12:
        raise DomainError("subset enumeration limited to 12 members")
    M = _pair_matrix(members)
    out = {}
    for t in range(1, len(members) + 1):
        best = Fraction(0)
        for S in itertools.combinations(range(len(members)), t):
            g = sum(M[i][j] for i in S for j in S) / (t * t)
            best = max(best, g)
        out[t] = best
    return out


def sda_bruteforce(members: Sequence[PlantedDist], gamma_bar) -> float:
    """Largest d with gamma(D') <= gamma_bar for all |D'| >= |D|/d."""
    best = max_average_correlation_by_size(members)
    N = len(members)
    t_star = None
    for t in range(N, 0, -1):
        if best[t] <= gamma_bar:
            t_star = t
        else:
            break
    if t_star is None:
        return 0
    if t_star == 1:
        return math.inf
    # need ceil(N/d) >= t_star, i.e. d < N/(t_star-1)
    return math.ceil(Fraction(N, t_star - 1)) - 1


# ---------------------------------------------------------------------------
# degree selection


def select_hardness_degree(sigma: float, epsilon: float, a0: float = 1.0) -> int:
    """m = floor(a0 log(1 + sigma/eps^2) / sigma)."""
    if not 0 < sigma <= 0.499:
        raise DomainError(f"sigma must lie in (0, 0.499], got {sigma}")
    if not 0 < epsilon <= 0.25:
        raise DomainError(f"epsilon must lie in (0, 1/4], got {epsilon}")
    if a0 <= 0:
        raise DomainError("a0 must be positive")
    m = math.floor(a0 * math.log1p(sigma / epsilon**2) / sigma)
    if m < 1:
        raise DomainError("no hard degree at these parameters")
    return m


def largest_hard_degree(n: int, rho, epsilon) -> int | None:
    """Largest m with kappa_m >= 4 eps, by a descending scan over m."""
    if n % 2 == 0:
        raise DomainError("need odd n")
    for m in range(2 * ((n - 1) // 2), 0, -1):
        if correlation_kappa(rho, WitnessSpec(n, m)).value >= 4 * epsilon:
            return m
    return None


# ---------------------------------------------------------------------------
# the scan attack


@dataclass
class AttackResult:
    transcript: SQTranscript
    detected: bool
    found_index: int | None
    planted_index: int
    threshold: float

    @property
    def queries_used(self) -> int:
        return self.transcript.query_count


def correlation_attack(family: PackingFamily, witness: WitnessLevels, planted_index: int,
                       config: OracleConfig) -> AttackResult:
    """Query h = psi in each family frame in turn until one answer moves.

    The attacker's threshold is the oracle tolerance at p = 1/2; a frame is
    declared found when its answer deviates from 1/2 by more than that.
    """
    if family.n != witness.n:
        raise DomainError(f"family n={family.n}, witness n={witness.n}")
    dist = PlantedDist(family.members[planted_index], witness)
    oracle = SQOracle(config, dist)
    threshold = config.tolerance(Fraction(1, 2))
    found = None
    for idx, v in enumerate(family.members):
        ans = oracle.answer(Query.correlation(witness.psi, v))
        if abs(ans - 0.5) > threshold:
            found = idx
            break
    oracle.transcript.final_answer = None if found is None else str(family.members[found])
    return AttackResult(oracle.transcript, found is not None, found, planted_index, threshold)


def solution_counts(family: PackingFamily, witness: WitnessLevels, epsilon, frames=None) -> dict:
    """|S_h| = #{u : <h, psi^(u)> >= eps} for h = psi in each frame.

    ``frames`` defaults to all of {-1,1}^n.  The count depends on a frame
    only through its inner products with the members.
    """
    n = family.n
    U = np.array([m.u for m in family.members], dtype=np.int64)
    if frames is None:
        if n > 20:
            raise DomainError("exhaustive frames limited to n <= 20")
        F = _cube(n).astype(np.int64)
    else:
        F = np.array([f.u for f in frames], dtype=np.int64)
    K = krawtchouk_table(n).entries
    sq = witness.level_squares
    # inner product <psi^(v), psi^(u)> as a function of Hamming distance
    by_dist = [sum(b2 * Fraction(K[d][j], binom(n, d)) for d, b2 in enumerate(sq) if b2) for j in range(n + 1)]
    good = np.array([v >= epsilon for v in by_dist])
    worst = 0
    chunk = 4096
    for start in range(0, len(F), chunk):
        G = F[start:start + chunk] @ U.T
        dist = (n - G) // 2
        counts = good[dist].sum(axis=1)
        worst = max(worst, int(counts.max()))
    return {"max_count": worst, "bound": 2 / float(epsilon) ** 2, "frames": len(F),
            "pass": worst <= 2 / float(epsilon) ** 2}
