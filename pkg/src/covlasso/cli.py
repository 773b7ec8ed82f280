"""Command line entry point: ``covlasso <command> [options]``.

Exit codes
----------
0 success, 2 usage / invalid configuration, 3 unreadable or malformed
input, 4 degenerate data, 5 not positive definite, 6 no convergence (the
best iterate is still written), 7 calibration bounds do not bracket the
target, 1 anything else.  Every failure prints one JSON line on stderr:
``{"error": <type>, "exit_code": <n>, "message": <text>}``.
"""

import argparse
import json
import sys

import numpy as np

from . import io as cio
from .errors import (AsymmetricInput, BoundsDoNotBracket, CovLassoError, DegenerateData,
                     NonConvergence, NotPositiveDefinite, NonPositivePivot, ParseError)
from .glasso import GlassoConfig, Mode, glasso_fit, kkt_check
from .selection import Dataset, cv_run, default_rho_grid, empirical_covariance, path_run
from .synth import Scenario, calibrate_for, run_benchmark, sample_gaussian, true_precision

EXIT_CODES = [
    (NonConvergence, 6),
    (BoundsDoNotBracket, 7),
    ((NotPositiveDefinite, NonPositivePivot), 5),
    (DegenerateData, 4),
    ((ParseError, AsymmetricInput, OSError), 3),
    (ValueError, 2),
]


class UsageError(Exception):
    pass


def exit_code_for(exc):
    for types, code in EXIT_CODES:
        if isinstance(exc, types):
            return code
    return 1


def diagnostic(exc, code):
    msg = " ".join(str(exc).split())
    return json.dumps({"error": type(exc).__name__, "exit_code": code, "message": msg})


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _positive(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser():
    parser = _Parser(prog="covlasso", description="Sparse inverse covariance estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, default_format):
        p.add_argument("--output", "-o", default="-", help="output file (default stdout)")
        p.add_argument("--format", choices=formats, default=default_format)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)

    def solver(p):
        p.add_argument("--tol", type=_positive, default=1e-4)
        p.add_argument("--max-iter", type=int, default=100)

    def data_input(p, default_kind="observations_csv"):
        p.add_argument("--input", "-i", required=True)
        p.add_argument("--input-kind", choices=["observations_csv", "covariance_csv"],
                       default=default_kind)

    fit = sub.add_parser("fit", help="fit one penalty")
    data_input(fit)
    g = fit.add_mutually_exclusive_group(required=True)
    g.add_argument("--rho", type=float)
    g.add_argument("--rho-auto", action="store_true",
                   help="calibrate rho to --target-nonzeros off-diagonal nonzeros")
    fit.add_argument("--target-nonzeros", type=int)
    fit.add_argument("--mode", choices=["exact", "mb-or", "mb-and"], default="exact")
    solver(fit)
    common(fit, ["json", "csv", "dot"], "json")

    path = sub.add_parser("path", help="regularization path")
    data_input(path)
    path.add_argument("--rho-grid", type=_floats)
    solver(path)
    common(path, ["json", "csv"], "json")

    cv = sub.add_parser("cv", help="k-fold cross-validation over a penalty grid")
    data_input(cv)
    cv.add_argument("--rho-grid", type=_floats)
    cv.add_argument("--folds", type=int, default=10)
    cv.add_argument("--scheme", choices=["regression", "likelihood"], default="likelihood")
    cv.add_argument("--mode", choices=["exact", "mb-or", "mb-and"], default="exact")
    solver(cv)
    common(cv, ["json", "csv"], "csv")

    bench = sub.add_parser("bench", help="timing benchmark on synthetic scenarios")
    bench.add_argument("--p-list", type=_floats, default=[100.0, 200.0, 400.0])
    bench.add_argument("--kinds", default="sparse,dense")
    bench.add_argument("--methods", default="exact,mb-or")
    bench.add_argument("--n", type=int, help="sample size (default 2p)")
    bench.add_argument("--repetitions", type=int, default=3)
    bench.add_argument("--rho", type=float, help="fixed penalty instead of calibration")
    bench.add_argument("--omit-timing", action="store_true",
                       help="leave timing columns empty (byte-reproducible output)")
    solver(bench)
    common(bench, ["json", "csv"], "csv")

    sim = sub.add_parser("simulate", help="sample observations from a scenario")
    sim.add_argument("--scenario", choices=["sparse", "dense"], default="sparse")
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--n", type=int, required=True)
    common(sim, ["csv"], "csv")

    inv = sub.add_parser("invert", help="invert a covariance matrix with one sweep at rho = 0")
    data_input(inv, default_kind="covariance_csv")
    common(inv, ["json", "csv"], "json")
    return parser


def _load_covariance(args):
    obj = cio.ingest(args.input, args.input_kind)
    if isinstance(obj, Dataset):
        return obj.names, empirical_covariance(obj), obj
    names, S = obj
    return names, S, None


def _edge_list(names, sol):
    return [{"i": i, "j": j, "source": names[i], "target": names[j],
             "theta": None if sol.Theta is None else sol.Theta[i, j]}
            for i, j in sorted(sol.edges())]


def _solution_payload(names, S, sol, tol):
    payload = {
        "rho": sol.rho, "mode": sol.mode.value, "approximate": sol.approximate,
        "converged": sol.converged, "outer_sweeps": sol.outer_sweeps,
        "final_change": sol.final_change, "variables": names,
        "W": sol.W, "Theta": sol.Theta, "edges": _edge_list(names, sol),
    }
    if sol.mode is Mode.EXACT:
        rep = kkt_check(S, sol, 10 * tol)
        payload["kkt"] = {"passed": rep.passed, "eps": 10 * tol,
                          "max_sign_violation": rep.max_sign_violation,
                          "max_offdiag_violation": rep.max_offdiag_violation,
                          "max_diag_violation": rep.max_diag_violation}
    return payload


def cmd_fit(args):
    names, S, _ = _load_covariance(args)
    rho = args.rho
    if args.rho_auto:
        if args.target_nonzeros is None:
            raise ValueError("--rho-auto needs --target-nonzeros")
        rho = calibrate_for(S, args.target_nonzeros, outer_tol=args.tol,
                            max_outer_sweeps=args.max_iter)
    cfg = GlassoConfig(rho=rho, outer_tol=args.tol, max_outer_sweeps=args.max_iter, mode=args.mode)
    failure = None
    try:
        sol = glasso_fit(S, cfg)
    except NonConvergence as exc:
        sol, failure = exc.result, exc
    if args.format == "csv":
        if sol.Theta is None:
            raise NonPositivePivot("approximation produced no positive definite precision estimate")
        text = cio.matrix_csv(names, sol.Theta)
    elif args.format == "dot":
        Theta = sol.Theta if sol.Theta is not None else np.zeros_like(sol.W)
        text = cio.to_dot(names, sol.edges(), Theta)
    else:
        text = cio.to_json(_solution_payload(names, S, sol, args.tol))
    return text, failure


def cmd_path(args):
    names, S, _ = _load_covariance(args)
    grid = args.rho_grid or default_rho_grid(S)
    res = path_run(S, grid, outer_tol=args.tol, max_outer_sweeps=args.max_iter)
    if args.format == "csv":
        rows = []
        for pt in res.solutions:
            for (i, j), v in sorted(pt.coefficients.items()):
                rows.append([pt.rho, pt.l1_norm, f"{names[i]}-{names[j]}", names[i], names[j], v,
                             int((i, j) in set(pt.edges))])
        return cio.to_csv(["rho", "l1_norm", "pair", "var_i", "var_j", "theta", "edge"], rows), None
    points = []
    for pt in res.solutions:
        points.append({
            "rho": pt.rho, "l1_norm": pt.l1_norm, "converged": pt.converged,
            "kkt_passed": pt.kkt_passed, "outer_sweeps": pt.outer_sweeps, "error": pt.error,
            "edges": [[names[i], names[j]] for i, j in pt.edges],
            "coefficients": {f"{names[i]}-{names[j]}": v for (i, j), v in sorted(pt.coefficients.items())},
        })
    return cio.to_json({"variables": names, "rho_grid": res.rho_grid, "points": points}), None


def cmd_cv(args):
    obj = cio.ingest(args.input, args.input_kind)
    if not isinstance(obj, Dataset):
        raise ValueError("cross-validation needs observations (--input-kind observations_csv)")
    grid = args.rho_grid or default_rho_grid(empirical_covariance(obj))
    res = cv_run(obj, grid, folds=args.folds, scheme=args.scheme, seed=args.seed,
                 threads=args.threads, outer_tol=args.tol, max_outer_sweeps=args.max_iter,
                 mode=args.mode)
    mean, se = res.mean_scores, res.std_errors
    if args.format == "csv":
        rows = [[rho, mean[r], se[r], res.scheme.value, args.mode,
                 int(np.isnan(res.scores[:, r]).sum())] for r, rho in enumerate(res.rho_grid)]
        return cio.to_csv(["rho", "mean_score", "std_error", "scheme", "mode", "failed_folds"], rows), None
    return cio.to_json({
        "scheme": res.scheme.value, "mode": args.mode, "folds": res.folds, "seed": args.seed,
        "rho_grid": res.rho_grid, "scores": res.scores, "mean_scores": mean, "std_errors": se,
        "best_rho": res.best_rho, "failed": [list(f) for f in res.failed],
    }), None


BENCH_HEADER = ["p", "kind", "n", "seed", "method", "rho", "wall_seconds", "outer_sweeps",
                "nonzeros_found", "nonzeros_true", "ratio_exact_to_method", "error"]


def cmd_bench(args):
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    methods = [Mode(m.strip()) for m in args.methods.split(",") if m.strip()]
    scenarios = [Scenario(kind=k, p=int(p), n=args.n, seed=args.seed) for p in args.p_list for k in kinds]
    recs = run_benchmark(scenarios, methods, repetitions=args.repetitions, tol=args.tol, rho=args.rho)
    exact_time = {rec.scenario: rec.wall_seconds for rec in recs if rec.method is Mode.EXACT}
    rows = []
    for rec in recs:
        scn = rec.scenario
        ratio = exact_time.get(scn, float("nan")) / rec.wall_seconds if rec.wall_seconds else float("nan")
        secs = rec.wall_seconds
        if args.omit_timing:
            secs, ratio = "", ""
        rows.append([scn.p, scn.kind.value, scn.n, scn.seed, rec.method.value, rec.rho, secs,
                     rec.outer_sweeps, rec.nonzeros_found, rec.nonzeros_true, ratio, rec.error or ""])
    if args.format == "json":
        return cio.to_json([dict(zip(BENCH_HEADER, r)) for r in rows]), None
    return cio.to_csv(BENCH_HEADER, rows), None


def cmd_simulate(args):
    scn = Scenario(kind=args.scenario, p=args.p, n=args.n, seed=args.seed)
    data = sample_gaussian(true_precision(scn), scn.n, scn.seed)
    return cio.to_csv(data.names, [list(map(float, r)) for r in data.rows]), None


def cmd_invert(args):
    names, S, _ = _load_covariance(args)
    sol = glasso_fit(S, GlassoConfig(rho=0.0, mode=Mode.INVERT_ONLY))
    if args.format == "csv":
        return cio.matrix_csv(names, sol.Theta), None
    return cio.to_json({"variables": names, "outer_sweeps": sol.outer_sweeps, "Theta": sol.Theta}), None


COMMANDS = {"fit": cmd_fit, "path": cmd_path, "cv": cmd_cv, "bench": cmd_bench,
            "simulate": cmd_simulate, "invert": cmd_invert}


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise ValueError("--threads must be >= 1")
        text, failure = COMMANDS[args.command](args)
        _write(args.output, text)
    except UsageError as exc:
        print(diagnostic(exc, 2), file=sys.stderr)
        return 2
    except (CovLassoError, ValueError, OSError) as exc:
        code = exit_code_for(exc)
        print(diagnostic(exc, code), file=sys.stderr)
        return code
    if failure is not None:
        code = exit_code_for(failure)
        print(diagnostic(failure, code), file=sys.stderr)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
