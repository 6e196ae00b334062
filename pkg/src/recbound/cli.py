"""Command line entry point.

    recbound estimate problem.json [--eta F] [--tol F] [--max-iters N] [--out PATH]
    recbound bench --qubits 2,3,4 --lambdas 1,2,3 --trials 100 --seed S
    recbound oracle-scatter --points 500 --dim 4 --extra 1 --seed S
    recbound simulate scenario.json [--out PATH]

Exit codes: 0 success, 1 non-convergence, 2 input error, 3 oracle failure.
"""
import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, replace

from recbound import dual, harness, oracle

EXIT_OK, EXIT_NONCONVERGED, EXIT_INPUT, EXIT_ORACLE = 0, 1, 2, 3


def _int_list(s: str):
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {s!r}")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="recbound", description="Lower bounds on the relative entropy of coherence.")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--workers", type=int, default=None, help=f"worker processes (default ${harness.WORKERS_ENV} or 1)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="compute beta for a problem file")
    p.add_argument("file")
    p.add_argument("--eta", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--line-search", action="store_true", help="backtracking steps with exact trace multiplier")
    p.add_argument("--out")

    p = sub.add_parser("bench", help="iteration counts versus qubit number and multiplier count")
    p.add_argument("--qubits", type=_int_list, default=[2, 3, 4])
    p.add_argument("--lambdas", type=_int_list, default=[1, 2, 3])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    p.add_argument("--out", default="bench.csv")

    p = sub.add_parser("oracle-scatter", help="alpha versus beta on random instances")
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--extra", type=int, default=1)
    p.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    p.add_argument("--restarts", type=int, default=oracle.OracleConfig.restarts)
    p.add_argument("--out", default="scatter.csv")

    p = sub.add_parser("simulate", help="simulated Werner-state experiment")
    p.add_argument("scenario")
    p.add_argument("--out", default="simulate.csv")
    return ap


def _estimate(args) -> int:
    try:
        record, overrides = harness.load_problem(args.file)
        config = harness.solver_config_from(overrides)
        cli = {"learning_rate": args.eta, "tolerance": args.tol, "max_iters": args.max_iters}
        cli = {k: v for k, v in cli.items() if v is not None}
        if args.line_search:
            cli.update(line_search=True, exact_trace_step=True)
        config = replace(config, **cli)
    except harness.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report, res = harness.estimate_report(record, config)
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if res.status is dual.Status.DIVERGED:
        print("dual diverged: the data look infeasible (no state reproduces them)", file=sys.stderr)
        return EXIT_NONCONVERGED
    if res.status is dual.Status.MAX_ITERS:
        print(f"not converged after {res.iterations} iterations (|grad| = {res.grad_norm:.3e})", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _bench(args, workers) -> int:
    started = time.time()
    try:
        rows, summary = harness.bench(args.qubits, args.lambdas, args.trials, args.eta, args.tol, args.seed, workers)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = {"qubits": args.qubits, "lambdas": args.lambdas, "trials": args.trials, "eta": args.eta, "tol": args.tol}
    summary_path = args.out[:-4] + "_summary.csv" if args.out.endswith(".csv") else args.out + "_summary.csv"
    harness.write_csv(args.out, harness.BENCH_COLUMNS, rows)
    harness.write_manifest(args.out, "bench", cfg, args.seed, started)
    harness.write_csv(summary_path, harness.BENCH_SUMMARY_COLUMNS, summary)
    harness.write_manifest(summary_path, "bench", cfg, args.seed, started)
    for s in summary:
        print(f"N={s['N']} |lambda|={s['lambda_count']} mean_T={s['mean_T']:.1f} std_T={s['std_T']:.1f}")
    return EXIT_OK


def _scatter(args, workers) -> int:
    started = time.time()
    ocfg = oracle.OracleConfig(restarts=args.restarts)
    try:
        rows, summary, failures = harness.oracle_scatter(args.points, args.dim, args.extra, args.seed, ocfg, workers)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = {"points": args.points, "dim": args.dim, "extra": args.extra, "oracle": asdict(ocfg)}
    harness.write_csv(args.out, harness.SCATTER_COLUMNS, rows)
    harness.write_manifest(args.out, "oracle-scatter", cfg, args.seed, started,
                           {"summary": summary, "failures": failures})
    print(json.dumps(summary, indent=2))
    for s, reason in failures:
        print(f"oracle failure at seed {s}: {reason}", file=sys.stderr)
    return EXIT_ORACLE if failures else EXIT_OK


def _simulate(args, workers) -> int:
    started = time.time()
    try:
        scenario = harness.load_scenario(args.scenario)
    except harness.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rows = harness.simulate(scenario, workers)
    harness.write_csv(args.out, harness.SIMULATE_COLUMNS, rows)
    harness.write_manifest(args.out, "simulate", harness.scenario_dict(scenario), scenario.seed, started)
    for r in rows:
        print(f"p={r['p']:.4f} {r['obs_set']:<9} beta={r['beta_mean']:.5f}±{r['beta_std']:.1e} "
              f"qst={r['rec_qst_mean']:.5f}±{r['rec_qst_std']:.1e} ideal={r['rec_ideal']:.5f}")
    return EXIT_NONCONVERGED if any(r["n_excluded"] for r in rows) else EXIT_OK


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    workers = harness.resolve_workers(args.workers)
    if args.command == "estimate":
        return _estimate(args)
    if args.command == "bench":
        return _bench(args, workers)
    if args.command == "oracle-scatter":
        return _scatter(args, workers)
    return _simulate(args, workers)


if __name__ == "__main__":
    sys.exit(main())
