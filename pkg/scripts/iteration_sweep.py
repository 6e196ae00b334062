"""Iterations to converge versus qubit count and number of multipliers.

    python3 scripts/iteration_sweep.py --qubits 2,3,4,5 --trials 100 --out results/bench.csv
"""
import argparse
import os
import time

from recbound import harness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", default="2,3,4,5")
    ap.add_argument("--lambdas", default="1,2,3")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default="results/bench.csv")
    args = ap.parse_args()

    qubits = [int(x) for x in args.qubits.split(",")]
    lambdas = [int(x) for x in args.lambdas.split(",")]
    started = time.time()
    rows, summary = harness.bench(qubits, lambdas, args.trials, seed=args.seed,
                                  workers=harness.resolve_workers(args.workers))
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    harness.write_csv(args.out, harness.BENCH_COLUMNS, rows)
    cfg = {"qubits": qubits, "lambdas": lambdas, "trials": args.trials}
    harness.write_manifest(args.out, "iteration_sweep", cfg, args.seed, started)

    print("N  " + "".join(f"   |lambda|={k:<8}" for k in lambdas))
    for n in qubits:
        cells = [s for s in summary if s["N"] == n]
        print(f"{n:<3}" + "".join(f"  {s['mean_T']:7.1f} ± {s['std_T']:5.1f}" for s in cells))
    print(f"{time.time() - started:.1f}s")


if __name__ == "__main__":
    main()
