"""Acceptance criteria, each at its stated tolerance and time limit.

Every test records one PASS/FAIL line (shown in the terminal summary)
before asserting, so a failing criterion still reports its numbers.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cubewitness.cube import brute_force_levels, majority_fourier, majority_levels, noise_apply, noise_apply_bruteforce
from cubewitness.identities import run_suite
from cubewitness.l1lp import l1_distance
from cubewitness.learner import degree_for_eps, draw_samples, exact_error, train
from cubewitness.planted import (
    Direction,
    PlantedDist,
    check_bound_D,
    generate_packing,
    krawtchouk_bound_check,
    pairwise_chi,
    pairwise_chi_bruteforce,
    restrict,
    smoothed_benchmark,
)
from cubewitness.sqlab import OracleConfig, correlation_attack, solution_counts
from cubewitness.witness import (
    WitnessSpec,
    build_witness,
    correlation_kappa,
    dual_feasibility,
    kappa_ratio,
    sup_norm_scan,
)

GRID_N = (9, 11, 13, 15)
GRID_RHO = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
GRID_M = (1, 2, 3)


def _valid(n, m):
    return (m + 1) // 2 <= (n - 1) // 2


def test_criterion_1_exact_dual_feasibility(report_criterion):
    start = time.perf_counter()
    cells = bad = 0
    for n in range(5, 26, 2):
        for m in range(1, 6):
            if not _valid(n, m):
                continue
            feas = dual_feasibility(build_witness(WitnessSpec(n, m)))
            cells += 1
            bad += not (feas["sup_is_one"] and feas["orthogonal"])
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 30
    report_criterion(1, ok, f"{cells} (n, m) cells, {bad} infeasible, {elapsed:.1f}s (limit 30s)")
    assert ok


def test_criterion_2_oracle_equivalence(report_criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    mismatches = []
    for n in range(3, 16, 2):
        maj = majority_levels(n)
        if brute_force_levels(lambda x: 1 if sum(x) > 0 else -1, n).fourier != majority_fourier(n):
            mismatches.append(("majority", n))
        if maj.norm2_sq() != 1:
            mismatches.append(("parseval", n))
        for rho in (Fraction(1, 2), Fraction(1, 3)):
            if noise_apply(rho, maj) != noise_apply_bruteforce(rho, maj):
                mismatches.append(("noise", n, rho))
        for m in (1, 2, 3):
            if not _valid(n, m):
                continue
            w = build_witness(WitnessSpec(n, m))
            vals = w.psi_values()
            if brute_force_levels(lambda x: vals[sum(1 for v in x if v < 0)], n) != w.psi:
                mismatches.append(("witness", n, m))
            for _ in range(4):
                a = Direction(tuple(rng.choice([-1, 1], n)))
                b = Direction(tuple(rng.choice([-1, 1], n)))
                if pairwise_chi(a, b, w) != pairwise_chi_bruteforce(a, b, w):
                    mismatches.append(("chi", n, m))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 120
    report_criterion(2, ok, f"n = 3..15 odd, {len(mismatches)} mismatches {mismatches[:3]}, {elapsed:.1f}s (limit 120s)")
    assert ok


def test_criterion_3_weak_duality_gap(report_criterion):
    start = time.perf_counter()
    gaps = {}
    for n in GRID_N:
        maj = majority_levels(n)
        for rho in GRID_RHO:
            target = noise_apply(rho, maj)
            for m in GRID_M:
                res = l1_distance(target, m, exact=True)
                kappa = correlation_kappa(rho, WitnessSpec(n, m)).value
                assert res.status == "optimal" and isinstance(res.optimum, Fraction)
                gaps[(n, rho, m)] = res.optimum - kappa
    elapsed = time.perf_counter() - start
    worst = min(gaps, key=gaps.get)
    ok = all(g > 0 for g in gaps.values()) and elapsed < 300
    report_criterion(3, ok, f"{len(gaps)} cells, min gap {float(gaps[worst]):.3e} at (n, rho, m) = "
                            f"({worst[0]}, {worst[1]}, {worst[2]}), {elapsed:.1f}s (limit 300s)")
    assert ok


def test_criterion_4_correlation_ratio_trend(report_criterion):
    start = time.perf_counter()
    low, non_monotone, attained = [], [], 0
    lines = []
    for rho in GRID_RHO:
        for m in GRID_M:
            ratios = [kappa_ratio(correlation_kappa(rho, WitnessSpec(n, m)).value, rho, m) for n in GRID_N]
            attained += sum(r >= 1 for r in ratios)
            low += [(n, rho, m, r) for n, r in zip(GRID_N, ratios) if r < 0.9]
            if any(b < a for a, b in zip(ratios, ratios[1:])):
                non_monotone.append((rho, m))
            lines.append(f"rho={rho} m={m}: " + ", ".join(f"{r:.3f}" for r in ratios))
    elapsed = time.perf_counter() - start
    for line in lines:
        print(line)
    ok = not low and not non_monotone and elapsed < 60
    report_criterion(4, ok, f"ratio >= 0.9 in {36 - len(low)}/36 cells, >= 1 attained in {attained}/36; "
                            f"nondecreasing in n for {9 - len(non_monotone)}/9 (rho, m) rows; {elapsed:.1f}s (limit 60s)")
    assert ok


def test_criterion_5_sup_norm_boundedness(report_criterion):
    start = time.perf_counter()
    summary = []
    ok = True
    for m in (1, 2, 3):
        scan = sup_norm_scan(m, range(101, 2002, 2))
        good = abs(scan["slope"]) < 0.05 and scan["max_over_min"] < 2
        ok &= good
        summary.append(f"m={m}: slope {scan['slope']:+.4f}, max/min {scan['max_over_min']:.3f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report_criterion(5, ok, "; ".join(summary) + f"; {elapsed:.1f}s (limit 120s)")
    assert ok


def test_criterion_6_krawtchouk_and_pairwise_bounds(report_criterion):
    start = time.perf_counter()
    b5 = krawtchouk_bound_check(n=100, dmax=10, points=41)
    n = 64
    fam = generate_packing(n, n ** -0.25, 200, seed=0)
    odd = restrict(fam, n - 1)  # odd witness on the first 63 coordinates
    reports = [check_bound_D(k, odd.n, odd.delta, odd) for k in (1, 2, 3)]
    elapsed = time.perf_counter() - start
    ok = b5["pass"] and all(r["pass"] for r in reports) and elapsed < 120
    detail = ", ".join(f"k={r['k']}: max chi {r['max_chi']:.2e} <= {r['rhs']:.3g}" for r in reports)
    report_criterion(6, ok, f"pointwise bound {b5['evaluations']} evaluations, min margin {b5['min_margin']:.3g}; "
                            f"{reports[0]['pairs']} pairs, {detail}; {elapsed:.1f}s (limit 120s)")
    assert ok


def test_criterion_7_sq_phenomenology(report_criterion):
    start = time.perf_counter()
    n, M = 15, 100
    w = build_witness(WitnessSpec(n, 2))
    fam = generate_packing(n, n ** -0.25, M, seed=0)
    gamma_bar = max(pairwise_chi(fam.members[i], fam.members[j], w) for i in range(M) for j in range(i + 1, M))
    psi2 = float(w.norm2_sq())
    fine = OracleConfig("VSTAT", 1 / (6 * float(gamma_bar)))
    tau = fine.tolerance(Fraction(1, 2))
    counts, wrong = [], 0
    for s in range(50):
        planted = int(np.random.default_rng(s).integers(M))
        res = correlation_attack(fam, w, planted, fine)
        counts.append(res.queries_used)
        wrong += res.found_index != planted
    mean = float(np.mean(counts))
    detections = 0
    for t in (1 / psi2**2, 0.5 / psi2**2, 0.1 / psi2**2):
        coarse = OracleConfig("VSTAT", t)
        assert coarse.tolerance(Fraction(1, 2)) >= psi2 / 2
        for s in range(50):
            detections += correlation_attack(fam, w, int(np.random.default_rng(s).integers(M)), coarse).detected
    sols = [solution_counts(fam, w, eps) for eps in (math.sqrt(2 * float(gamma_bar)), 0.1, psi2 / 2)]
    elapsed = time.perf_counter() - start
    ok = (0.4 * M <= mean <= 0.6 * M and tau < psi2 / 2 and wrong == 0 and detections == 0
          and all(s["pass"] for s in sols) and elapsed < 300)
    report_criterion(7, ok, f"gamma_bar {float(gamma_bar):.4g}, fine tau {tau:.4f} < ||psi||^2/2 = {psi2 / 2:.4f}; "
                            f"mean queries {mean:.2f} in [{0.4 * M:.0f}, {0.6 * M:.0f}], {wrong} misidentified; "
                            f"{detections} coarse detections in 150 runs; max |S_h| "
                            f"{[s['max_count'] for s in sols]} vs 2/eps^2 {[round(s['bound'], 1) for s in sols]}; "
                            f"{elapsed:.1f}s (limit 300s)")
    assert ok


def test_criterion_8_learner_end_to_end(report_criterion):
    start = time.perf_counter()
    n, m, sigma, eps, N = 13, 2, Fraction(1, 4), Fraction(1, 10), 50_000
    w = build_witness(WitnessSpec(n, m))
    d = degree_for_eps(sigma, eps)
    rho = 1 - 2 * sigma
    passed, identity, errs = 0, True, []
    for seed in range(5):
        u = Direction(tuple(np.random.default_rng(seed).choice([-1, 1], n)))
        dist = PlantedDist(u, w)
        h = train(draw_samples(dist, N, seed), d)
        rep = exact_error(h, dist)
        bound = smoothed_benchmark(u, w, rho) + eps
        passed += rep.err <= bound
        identity &= rep.identity_holds and rep.err == (1 - rep.corr) / 2
        errs.append(float(rep.err))
    elapsed = time.perf_counter() - start
    ok = passed >= 4 and identity and elapsed < 300
    report_criterion(8, ok, f"d={d}, err {['%.4f' % e for e in errs]} vs bound {float(bound):.4f}: "
                            f"{passed}/5 seeds pass; identity exact on all runs: {identity}; {elapsed:.1f}s (limit 300s)")
    assert ok


def test_criterion_9_identity_suite(report_criterion):
    start = time.perf_counter()
    suite = run_suite()
    elapsed = time.perf_counter() - start
    failed = [c["name"] for c in suite["checks"] if not c["pass"]]
    slopes = {c["name"]: c["lhs"] for c in suite["checks"] if c["name"].startswith("slope")}
    ok = not failed and elapsed < 120
    report_criterion(9, ok, f"{len(suite['checks'])} checks, failed {failed}; slopes "
                            + ", ".join(f"{k} = {v:.4f}" for k, v in slopes.items()) + f"; {elapsed:.1f}s (limit 120s)")
    assert ok
