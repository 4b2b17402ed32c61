"""Command-line front end: one JSON report per run, CSV for sweeps.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or domain
error, 3 internal inconsistency, 4 budget or search limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .cube import RootRational, majority_levels, noise_apply
from .orthopoly import DomainError

SCHEMA_VERSION = "1.0.0"
SCHEMA_PATH = Path(__file__).with_name("report.schema.json")
MODE_ENV = "CUBE_WITNESS_MODE"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONSISTENCY, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialisation


def jsonable(v):
    """Rationals become "p/q" strings; numpy scalars become Python ones."""
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, RootRational):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [jsonable(x) for x in v]
    return str(v)


def check(name: str, ok: bool, lhs=None, rhs=None, margin=None) -> dict:
    return {"name": name, "pass": bool(ok), "lhs": lhs, "rhs": rhs, "margin": margin}


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _mode(explicit: str | None) -> str:
    mode = explicit or os.environ.get(MODE_ENV, "exact")
    if mode not in ("exact", "float"):
        raise UsageError(f"{MODE_ENV} must be 'exact' or 'float', got {mode!r}")
    return mode


def _rho(value: Fraction, mode: str):
    return value if mode == "exact" else float(value)


# ---------------------------------------------------------------------------
# subcommands; each returns (results, checks)


def cmd_identities(args, mode):
    from .identities import run_suite

    suite = run_suite()
    return {"count": len(suite["checks"])}, suite["checks"]


def _witness(n: int, m: int):
    from .witness import WitnessSpec, build_witness

    if n % 2 == 0:
        raise DomainError(f"witness needs odd n (got n={n}); even n reduces to n-1 by dropping a coordinate")
    return build_witness(WitnessSpec(n, m))


def cmd_witness(args, mode):
    from .witness import correlation_kappa, dual_feasibility, kappa_ratio

    w = _witness(args.n, args.m)
    rho = _rho(args.rho, mode)
    kap = correlation_kappa(rho, w.spec, w)
    feas = dual_feasibility(w)
    ratio = kappa_ratio(kap.value, rho, args.m)
    sq = w.level_squares
    levels = [{"d": d, "b": w.levels[d], "b_squared": b2} for d, b2 in enumerate(sq) if b2]
    results = {
        "n": w.n, "m": args.m, "k": w.k, "rho": rho,
        "levels": levels,
        "sup_norm": w.sup_norm,
        "argmax_sum": w.argmax_sum,
        "psi_norm2_sq": w.norm2_sq(),
        "kappa": kap.value,
        "kappa_float": float(kap.value),
        "ratio": ratio,
    }
    checks = [
        check("orthogonality", feas["orthogonal"]),
        check("sup_is_one", feas["sup_is_one"]),
        check("parity", all(b2 == 0 for d, b2 in enumerate(sq) if d % 2 == 0)),
        check("kappa_paths_agree", kap.via_levels == kap.via_series or abs(float(kap.via_levels) - float(kap.via_series)) < 1e-9,
              kap.via_levels, kap.via_series),
        check("ratio", ratio >= 0.9, ratio, 0.9, ratio - 0.9),
    ]
    return results, checks


def cmd_l1(args, mode):
    from .l1lp import l1_distance
    from .witness import correlation_kappa

    w = _witness(args.n, args.m)
    rho = _rho(args.rho, mode)
    target = noise_apply(rho, majority_levels(args.n))
    res = l1_distance(target, args.m, exact=(mode == "exact"))
    if res.status != "optimal":
        raise ArithmeticError(f"LP ended with status {res.status}")
    kappa = correlation_kappa(rho, w.spec, w).value
    gap = res.optimum - kappa
    results = {"n": args.n, "m": args.m, "rho": rho, "optimum": res.optimum, "kappa_lower_bound": kappa,
               "gap": gap, "gap_float": float(gap), "coefficients": res.coefficients, "iterations": res.iterations}
    checks = [
        check("weak_duality", res.optimum >= kappa, res.optimum, kappa, gap),
        check("lp_duality_gap_zero", res.residual == 0 or float(res.residual) < 1e-9, res.residual, 0),
    ]
    return results, checks


def _family(n: int, delta: float | None, size: int, seed: int):
    from .planted import generate_packing

    delta = n ** -0.25 if delta is None else delta
    return generate_packing(n, delta, size, seed)


def cmd_family(args, mode):
    from .planted import check_bound_D, restrict

    fam = _family(args.n, args.delta, args.size, args.seed)
    max_ip = fam.verify()
    work = fam if args.n % 2 else restrict(fam, args.n - 1)
    w = _witness(work.n, args.m)
    rep = check_bound_D(w.k, work.n, work.delta, work, w)
    results = {
        "n": args.n, "m": args.m, "delta": fam.delta, "size": len(fam), "seed": args.seed,
        "max_inner_product": max_ip,
        "witness_n": work.n, "effective_delta": work.delta,
        "directions": [str(u) for u in fam.members],
        "max_pairwise_chi": rep["max_chi_exact"],
        "max_pairwise_chi_float": rep["max_chi"],
        "A_mom": rep["A_mom"],
        "bound_D": rep["rhs"],
        "margin": rep["margin"],
        "pairs": rep["pairs"],
    }
    checks = [
        check("packing_delta", max_ip <= fam.delta * fam.n, max_ip, fam.delta * fam.n),
        check("bound_D", rep["pass"], rep["max_chi"], rep["rhs"], rep["margin"]),
    ]
    return results, checks


def cmd_sq(args, mode):
    from .planted import pairwise_chi
    from .sqlab import OracleConfig, correlation_attack

    fam = _family(args.n, None, args.family_size, args.family_seed)
    w = _witness(args.n, args.m)
    U = np.array([m.u for m in fam.members], dtype=np.int64)
    G = U @ U.T
    np.fill_diagonal(G, args.n + 1)
    ips = sorted({int(v) for v in np.abs(G).ravel() if v <= args.n})
    # chi depends only on the inner product, and is even in it
    gamma_bar = max((pairwise_chi(fam.members[0], _with_ip(fam.members[0], ip), w) for ip in ips), default=Fraction(0))
    t = float(args.t) if args.t is not None else 1 / (6 * float(gamma_bar))
    planted = int(np.random.default_rng(args.seed).integers(len(fam)))
    config = OracleConfig("VSTAT", t, args.adversary, args.seed)
    res = correlation_attack(fam, w, planted, config)
    psi2 = w.norm2_sq()
    transcript = [{"query_id": r.query_id, "true_value": r.true_value, "returned": r.returned,
                   "tolerance": r.tolerance} for r in res.transcript.rows]
    results = {
        "transcript": transcript,
        "summary": {
            "queries_used": res.queries_used, "detected": res.detected, "found_index": res.found_index,
            "planted_index": planted, "gamma_bar": gamma_bar, "gamma_bar_float": float(gamma_bar),
            "t": t, "tolerance": config.tolerance(Fraction(1, 2)), "psi_norm2_sq": psi2,
            "family_size": len(fam), "adversary": args.adversary,
        },
    }
    tau = config.tolerance(Fraction(1, 2))
    checks = [check("answers_within_tolerance", res.transcript.verify())]
    if res.detected:
        checks.append(check("found_is_planted", res.found_index == planted, res.found_index, planted))
    if args.adversary == "reference-pull" and tau >= float(psi2) / 2:
        checks.append(check("no_detection_in_coarse_regime", not res.detected, tau, float(psi2) / 2))
    return results, checks


def _with_ip(u, ip: int):
    """A direction whose inner product with ``u`` is ``ip``."""
    from .planted import Direction

    flips = (u.n - ip) // 2
    return Direction(tuple(-v if i < flips else v for i, v in enumerate(u.u)))


def cmd_learn(args, mode):
    from .learner import degree_for_eps, draw_samples, exact_error, train
    from .planted import Direction, PlantedDist, smoothed_benchmark

    if not 0 < args.sigma < Fraction(1, 2):
        raise DomainError(f"sigma must lie in (0, 1/2), got {args.sigma}")
    w = _witness(args.n, args.m)
    d = degree_for_eps(args.sigma, args.eps)
    rho = 1 - 2 * args.sigma
    runs = []
    for seed in range(args.seed, args.seed + args.repeats):
        rng = np.random.default_rng(seed)
        u = Direction(tuple(rng.choice([-1, 1], size=args.n)))
        dist = PlantedDist(u, w)
        bench = smoothed_benchmark(u, w, rho)
        h = train(draw_samples(dist, args.samples, seed), d, solver=args.solver)
        rep = exact_error(h, dist)
        margin = bench + args.eps - rep.err
        runs.append({"seed": seed, "direction": str(u), "err": rep.err, "corr": rep.corr,
                     "identity_holds": rep.identity_holds, "margin": margin, "passed": margin >= 0})
    passed = sum(r["passed"] for r in runs)
    bench = runs[0]["err"] + runs[0]["margin"] - args.eps
    results = {
        "n": args.n, "m": args.m, "sigma": args.sigma, "eps": args.eps, "samples": args.samples,
        "d": d, "benchmark": bench, "err": runs[0]["err"], "corr": runs[0]["corr"],
        "margin": runs[0]["margin"], "seeds_passed": passed, "runs": runs,
    }
    need = Fraction(4, 5)
    checks = [
        check("identity_err_eq_half_one_minus_corr", all(r["identity_holds"] for r in runs)),
        check("success_fraction", Fraction(passed, len(runs)) >= need, Fraction(passed, len(runs)), need),
    ]
    return results, checks


COMMANDS = {
    "identities": cmd_identities,
    "witness": cmd_witness,
    "l1": cmd_l1,
    "family": cmd_family,
    "sq": cmd_sq,
    "learn": cmd_learn,
}


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubewitness", description=__doc__.splitlines()[0])
    p.add_argument("--mode", choices=("exact", "float"), help=f"numeric mode (default from ${MODE_ENV}, else exact)")
    p.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("identities", help="classical orthogonal-polynomial identity suite")

    s = sub.add_parser("witness", help="exact dual witness and correlation kappa")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--rho", type=_rational, default=Fraction(1, 2))

    s = sub.add_parser("l1", help="exact L1 distance of smoothed majority to degree m")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--rho", type=_rational, default=Fraction(1, 2))

    s = sub.add_parser("family", help="random packing and pairwise correlation bound")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--delta", type=float, default=None, help="default n^(-1/4)")
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("sq", help="scan attack against a VSTAT oracle")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--family-size", type=int, default=100)
    s.add_argument("--family-seed", type=int, default=0)
    s.add_argument("--t", type=_rational, default=None, help="VSTAT parameter (default 1/(6 gamma_bar))")
    s.add_argument("--adversary", choices=("reference-pull", "honest"), default="reference-pull")
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("learn", help="L1 polynomial regression on a planted instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--sigma", type=_rational, required=True)
    s.add_argument("--eps", type=_rational, required=True)
    s.add_argument("--samples", type=int, default=50_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--repeats", type=int, default=1, help="run seeds seed..seed+repeats-1")
    s.add_argument("--solver", choices=("ipm", "highs", "simplex"), default="ipm")

    s = sub.add_parser("sweep", help="Cartesian grid of one subcommand, written as CSV")
    s.add_argument("grid", help="YAML file: 'command: name' plus 'flag: [values]' lines")
    s.add_argument("--csv", required=True, help="output CSV path")
    s.add_argument("--log", help="completed-cell log (default: CSV path + .log)")
    s.add_argument("--workers", type=int, default=1)
    return p


# ---------------------------------------------------------------------------
# dispatch


def _exit_code(exc: BaseException) -> int:
    from .learner import BudgetError
    from .planted import PackingError
    from .witness import ConsistencyError

    if isinstance(exc, (UsageError, DomainError)):
        return EXIT_USAGE
    if isinstance(exc, (BudgetError, PackingError)):
        return EXIT_BUDGET
    if isinstance(exc, (ConsistencyError, ArithmeticError)):
        return EXIT_CONSISTENCY
    raise exc


def dispatch(argv: list[str]) -> tuple[dict, int, argparse.Namespace]:
    """Parse and run one subcommand; returns (report, exit code, args).

    Raises UsageError, DomainError and friends; ``main`` maps them.
    """
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        raise UsageError("sweep is not a single-report command")
    mode = _mode(args.mode)
    start = time.perf_counter()
    results, checks = COMMANDS[args.command](args, mode)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "output", "mode")}
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": {"name": args.command, "mode": mode, "params": jsonable(params), "argv": list(argv)},
        "results": jsonable(results),
        "checks": jsonable(checks),
        "wall_time": time.perf_counter() - start,
    }
    ok = all(c["pass"] for c in checks)
    return report, EXIT_OK if ok else EXIT_FAIL, args


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


# ---------------------------------------------------------------------------
# sweep


def parse_grid(text: str) -> tuple[str, list[dict]]:
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict) or "command" not in data:
        raise UsageError("grid file needs a 'command' key")
    command = str(data.pop("command"))
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r} in grid file")
    keys = sorted(data)
    values = [v if isinstance(v, list) else [v] for v in (data[k] for k in keys)]
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*values)]
    return command, cells


def cell_argv(command: str, cell: dict) -> list[str]:
    argv = [command]
    for k, v in cell.items():
        argv += [f"--{str(k).replace('_', '-')}", str(v)]
    return argv


def cell_key(argv: list[str]) -> str:
    return hashlib.sha256(json.dumps(argv).encode()).hexdigest()[:16]


def _flatten(prefix: str, obj, out: dict) -> None:
    """Scalar leaves of nested dicts under dotted keys; lists are dropped."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif not isinstance(obj, list):
        out[prefix] = obj


def run_cell(argv: list[str]) -> dict:
    row = {"cell": cell_key(argv), "argv": " ".join(argv)}
    try:
        report, code, _ = dispatch(argv)
    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the sweep
        try:
            code = _exit_code(exc)
        except Exception:
            code = EXIT_CONSISTENCY
        row.update(status="failed", exit_code=code, error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(status="ok" if code == EXIT_OK else "checks_failed", exit_code=code, error="")
    flat: dict = {}
    _flatten("", report["results"], flat)
    row.update({f"results.{k}": v for k, v in flat.items()})
    row.update({f"check.{c['name']}": c["pass"] for c in report["checks"]})
    return row


def sweep(grid_path: str, csv_path: str, log_path: str | None = None, workers: int = 1) -> list[dict]:
    """Run every grid cell, skipping cells already in the log."""
    command, cells = parse_grid(Path(grid_path).read_text())
    log = Path(log_path or csv_path + ".log")
    done = {}
    if log.exists():
        for line in log.read_text().splitlines():
            if line.strip():
                row = json.loads(line)
                done[row["cell"]] = row
    todo = [a for a in (cell_argv(command, c) for c in cells) if cell_key(a) not in done]
    rows = dict(done)
    with log.open("a") as fh:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(run_cell, todo)
                for row in results:
                    fh.write(json.dumps(row) + "\n")
                    fh.flush()
                    rows[row["cell"]] = row
        else:
            for argv in todo:
                row = run_cell(argv)
                fh.write(json.dumps(row) + "\n")
                fh.flush()
                rows[row["cell"]] = row
    ordered = [rows[cell_key(cell_argv(command, c))] for c in cells]
    fields: list[str] = []
    for row in ordered:
        fields += [k for k in row if k not in fields]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(ordered)
    return ordered


# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if argv and argv[0] == "sweep":
            args = build_parser().parse_args(argv)
            _mode(args.mode)
            rows = sweep(args.grid, args.csv, args.log, args.workers)
            failed = sum(r["status"] != "ok" for r in rows)
            print(f"{len(rows)} cells, {failed} not ok -> {args.csv}", file=sys.stderr)
            return EXIT_OK if failed == 0 else EXIT_FAIL
        report, code, args = dispatch(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code
    out = dumps(report)
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
