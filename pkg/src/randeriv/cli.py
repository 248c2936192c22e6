"""Command-line entry point: simulate, figures, oracle, selftest."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .errors import BadManifest, NoConvergence
from .experiments import (ExperimentManifest, failure_budget_exceeded, run_convergence,
                          run_figures, write_outputs)
from .numerics import ToleranceConfig
from .rmt import coupled_check, haar_unitary
from .sampling import MeasureSpec, RngStream, sample_points
from .selftest import run_selftest

EXIT_OK, EXIT_INVARIANT, EXIT_MANIFEST, EXIT_SOLVER = 0, 1, 2, 3


def cmd_simulate(args) -> int:
    man = ExperimentManifest.load(args.manifest)
    series = run_convergence(man, threads=args.threads)
    paths = write_outputs(man, series, args.output_dir)
    for key, p in paths.items():
        print(f"{key}: {p}")
    if series.failures:
        print(f"solver failures: {len(series.failures)} of {len(man.n_grid) * man.trials} tasks")
    if failure_budget_exceeded(man, series):
        print("solver failure budget exceeded", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_figures(args) -> int:
    man = ExperimentManifest.load(args.manifest)
    try:
        paths = run_figures(man, args.output_dir)
    except NoConvergence as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_oracle(args) -> int:
    root = RngStream(args.seed, 0)
    spec = MeasureSpec("uniform_disk")
    dists = []
    for d in range(args.draws):
        diag = sample_points(spec, args.n, root.child("diag", d))
        u = haar_unitary(args.n, root.child("haar", d), beta=args.beta)
        dists.append(coupled_check(diag, u))
    dists = np.array(dists)
    report = {
        "n": args.n, "draws": args.draws, "beta": args.beta, "seed": args.seed,
        "max_matched_distance": float(dists.max()),
        "median_matched_distance": float(np.median(dists)),
        "threshold": args.threshold,
        "passed": bool(dists.max() <= args.threshold),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["passed"] else EXIT_INVARIANT


def cmd_selftest(args) -> int:
    tol = ToleranceConfig(residual_tol=args.residual_tol) if args.residual_tol else None
    results = run_selftest(tol, seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}" + (f": {r.detail}" if r.detail else ""))
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"first failing invariant: {failed[0].name}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="randeriv", description="Randomized derivative experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a convergence study from a manifest")
    s.add_argument("manifest")
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--output-dir", default=None, help="override the manifest output_dir")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("figures", help="emit scatter SVGs and point CSVs")
    f.add_argument("manifest")
    f.add_argument("--output-dir", default=None)
    f.set_defaults(func=cmd_figures)

    o = sub.add_parser("oracle", help="compare zeros with Haar-minor spectra")
    o.add_argument("--n", type=int, default=32)
    o.add_argument("--draws", type=int, default=20)
    o.add_argument("--beta", type=int, choices=(1, 2), default=2)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--threshold", type=float, default=1e-8)
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("selftest", help="run the fixed-seed invariant suite")
    t.add_argument("--residual-tol", type=float, default=None)
    t.add_argument("--seed", type=int, default=20240601)
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BadManifest as e:
        print(f"bad manifest: {e}", file=sys.stderr)
        return EXIT_MANIFEST


if __name__ == "__main__":
    sys.exit(main())
