"""Command-line driver: ``synth``, ``run`` and ``sweep``.

Exit codes: 0 success, 2 usage / validation / I-O errors, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .classify import KnnConfig, KrrConfig
from .dataset import load_csv, synth_faces, write_csv
from .errors import CsvParseError, InvalidInputError, NumericalError, OverShrinkageError
from .pipeline import (
    PAPER_D_VALUES, BenchReport, Classifier, ExperimentSpec, SweepError, emit_table, emit_timing_table,
    run_experiment, run_sweep,
)
from .spca import Method, SolverConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

METHOD_CHOICES = [m.value for m in (Method.PCA_BASELINE, Method.ISTA, Method.RK_COARSE, Method.RK4)]
CLASSIFIER_CHOICES = [c.value for c in Classifier]


class UsageError(Exception):
    pass


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    # None/False defaults are either described in the help text or meaningless
    def _get_help_string(self, action):
        if action.default is None or action.default is False:
            return action.help
        return super()._get_help_string(action)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_float(s):
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {s}")
    return v


def _csv_list(kind, choices=None):
    def parse(s):
        items = [x.strip() for x in s.split(",") if x.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        if choices is not None:
            bad = [x for x in items if x not in choices]
            if bad:
                raise argparse.ArgumentTypeError(f"invalid choice(s) {bad}; choose from {choices}")
            return items
        try:
            vals = [kind(x) for x in items]
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        return vals
    return parse


def _add_experiment_flags(p):
    solver = SolverConfig()
    p.add_argument("--train", required=True, type=Path, help="training CSV (label,f1,...,fp)")
    p.add_argument("--test", required=True, type=Path, help="test CSV")
    p.add_argument("--lambda", dest="lam", type=_nonneg_float, default=None,
                   help="l1 penalty; required for sparse methods (threshold per iteration is lambda*step)")
    p.add_argument("--step", type=_positive_float, default=None,
                   help="step size t (default: 1/(2*sigma_max(D)^2) from 50 power-iteration steps)")
    p.add_argument("--tol", type=_nonneg_float, default=solver.tol, help="stop when ||x_{k+1}-x_k|| < tol")
    p.add_argument("--max-iters", type=_positive_int, default=solver.max_iters, help="iteration cap per component")
    p.add_argument("--no-normalize", action="store_true",
                   help="do not rescale the iterate to unit norm after each update")
    p.add_argument("--seed", type=int, default=solver.seed, help="seed for all randomness")
    p.add_argument("--k", type=_positive_int, default=KnnConfig().k, help="neighbours for kNN")
    p.add_argument("--gamma", type=_positive_float, default=None,
                   help="RBF width for KRR (default: 1/(d*median feature variance))")
    p.add_argument("--alpha", type=_positive_float, default=KrrConfig().alpha, help="KRR ridge regulariser")
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown", help="table format")


def build_parser():
    fmt = _HelpFormatter
    parser = argparse.ArgumentParser(prog="rkspca", description="Sparse PCA (ISTA / Runge-Kutta) benchmarks",
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write synthetic train/test CSVs", formatter_class=fmt)
    s.add_argument("--classes", type=_positive_int, default=15, help="number of classes")
    s.add_argument("--train-per-class", type=_positive_int, default=8, help="training samples per class")
    s.add_argument("--test-per-class", type=_positive_int, default=3, help="test samples per class")
    s.add_argument("--dim", type=_positive_int, default=1024, help="feature dimension")
    s.add_argument("--noise", type=_nonneg_float, default=1.0, help="per-feature Gaussian noise std")
    s.add_argument("--seed", type=int, default=0, help="random seed")
    s.add_argument("--out", type=Path, default=Path("."), help="output directory")

    r = sub.add_parser("run", help="run one reduction + classifier experiment", formatter_class=fmt)
    _add_experiment_flags(r)
    r.add_argument("--method", choices=METHOD_CHOICES, default="ista", help="rk2 = coarse Runge-Kutta")
    r.add_argument("--d", type=_positive_int, default=20, help="number of components")
    r.add_argument("--classifier", choices=CLASSIFIER_CHOICES, default="knn", help="classifier")

    w = sub.add_parser("sweep", help="run the method x d x classifier grid", formatter_class=fmt)
    _add_experiment_flags(w)
    w.add_argument("--methods", type=_csv_list(str, METHOD_CHOICES), default=",".join(METHOD_CHOICES),
                   help="comma-separated reductions")
    w.add_argument("--d-list", type=_csv_list(_positive_int), default=",".join(map(str, PAPER_D_VALUES)),
                   help="comma-separated component counts")
    w.add_argument("--classifiers", type=_csv_list(str, CLASSIFIER_CHOICES), default=",".join(CLASSIFIER_CHOICES),
                   help="comma-separated classifiers")
    w.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")
    w.add_argument("--sequential-timing", action="store_true",
                   help="fit sequentially and also print the sparse-PCA timing table")
    w.add_argument("--out", type=Path, default=None, help="also write the report as CSV here")
    return parser


def _base_spec(args, methods):
    sparse = [m for m in methods if Method(m) is not Method.PCA_BASELINE]
    if sparse and args.lam is None:
        raise UsageError(f"--lambda is required for sparse methods ({', '.join(sparse)})")
    if not sparse and args.lam is not None:
        print("warning: --lambda is ignored for pca", file=sys.stderr)
    solver = SolverConfig(
        step_t=args.step, lam=args.lam if args.lam is not None else 0.0, max_iters=args.max_iters,
        tol=args.tol, seed=args.seed, normalize_each_iter=not args.no_normalize,
    )
    return ExperimentSpec(solver=solver, knn=KnnConfig(args.k), krr=KrrConfig(args.gamma, args.alpha))


def _load(args):
    return load_csv(args.train), load_csv(args.test)


def cmd_synth(args):
    train, test = synth_faces(args.classes, args.train_per_class, args.test_per_class,
                              args.dim, args.noise, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(train, args.out / "train.csv")
    write_csv(test, args.out / "test.csv")
    print(f"wrote {args.out / 'train.csv'} ({train.n} rows)")
    print(f"wrote {args.out / 'test.csv'} ({test.n} rows)")


def cmd_run(args):
    base = _base_spec(args, [args.method])
    spec = replace(base, reduction=args.method, d=args.d, classifier=args.classifier)
    train, test = _load(args)
    row = run_experiment(train, test, spec)
    sys.stdout.write(emit_table(BenchReport([row]), args.format))


def cmd_sweep(args):
    base = _base_spec(args, args.methods)
    train, test = _load(args)
    report = run_sweep(train, test, base, args.d_list, args.methods, args.classifiers,
                       jobs=args.jobs, sequential_timing=args.sequential_timing)
    sys.stdout.write(emit_table(report, args.format))
    if args.sequential_timing and report.timing_rows():
        sys.stdout.write("\n")
        sys.stdout.write(emit_timing_table(report, args.format))
    if args.out is not None:
        args.out.write_text(emit_table(report, "csv"), encoding="utf-8")


COMMANDS = {"synth": cmd_synth, "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc.cause, ArithmeticError) else EXIT_USAGE
    except (OverShrinkageError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, InvalidInputError, CsvParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
