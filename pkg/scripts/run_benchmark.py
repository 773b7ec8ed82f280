"""Timing table and timing-versus-p curve for the exact solver and the approximation.

Usage: python scripts/run_benchmark.py [--p-list 100,200,400] [--curve 50,100,200,400,1000] [--out-dir results]
"""

import argparse
import csv
import os

from covlasso.glasso import Mode
from covlasso.synth import Scenario, run_benchmark, timing_table


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p-list", default="100,200,400")
    ap.add_argument("--curve", default="50,100,200,400,1000")
    ap.add_argument("--repetitions", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    ps = [int(x) for x in args.p_list.split(",")]
    scns = [Scenario(k, p, seed=args.seed) for p in ps for k in ("sparse", "dense")]
    table = timing_table(run_benchmark(scns, [Mode.EXACT, Mode.MB_OR], args.repetitions))
    write_rows(os.path.join(args.out_dir, "timing_table.csv"), table)
    for row in table:
        print(row)

    curve = []
    for p in (int(x) for x in args.curve.split(",")):
        rec = run_benchmark([Scenario("dense", p, seed=args.seed)], [Mode.EXACT], repetitions=1,
                            max_bisections=12)[0]
        curve.append({"p": p, "rho": float(rec.rho), "seconds": rec.wall_seconds,
                      "outer_sweeps": rec.outer_sweeps, "nonzeros": rec.nonzeros_found})
        print(curve[-1])
    write_rows(os.path.join(args.out_dir, "timing_curve.csv"), curve)


if __name__ == "__main__":
    main()
