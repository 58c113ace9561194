"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric or invariant
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import calibrate, harness
from .errors import DataError, SpherePathError
from .generators import example
from .model import ScoreFunction, TestConfig, stable_hash

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

_CENTER = {"known": "known_origin", "split": "sample_split", "spatial-median": "spatial_median"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _stat_list(text):
    return [harness.normalize_stat(v) for v in text.split(",") if v.strip()]


def _add_test_options(p, stat_flag="--stat", default_stats="sign,runs"):
    p.add_argument(stat_flag, dest="stats", type=_stat_list, default=_stat_list(default_stats))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--calibration", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--path", choices=("heuristic", "exact"), default="heuristic")
    p.add_argument("--center", choices=tuple(_CENTER), default="known")
    p.add_argument("--enumeration-cap", type=int, default=8)
    p.add_argument("--scores", help="file of whitespace or comma separated scores for lr")
    p.add_argument("--allow-asymmetric-scores", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _test_config(args, stats=None) -> TestConfig:
    scores = None
    if args.scores:
        text = open(args.scores).read().replace(",", " ").split()
        try:
            scores = ScoreFunction(np.array([float(v) for v in text]))
        except ValueError as exc:
            raise DataError(f"{args.scores}: {exc}") from None
    return TestConfig(
        alpha=args.alpha,
        statistics=tuple(stats if stats is not None else args.stats),
        calibration=args.calibration,
        path_method=args.path,
        center_mode=_CENTER[args.center],
        seed=args.seed,
        scores=scores,
        enumeration_cap=args.enumeration_cap,
        allow_asymmetric_scores=args.allow_asymmetric_scores,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spherepath", description="Distribution-free tests of spherical symmetry.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="test one data file, JSON report on stdout")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    _add_test_options(p)

    p = sub.add_parser("simulate", help="Monte Carlo power for a built-in example")
    p.add_argument("--example", required=True)
    p.add_argument("--n", default="50", help='sample size or expression in d, e.g. "d+20"')
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    _add_test_options(p, stat_flag="--tests")

    p = sub.add_parser("oracle-compare", help="heuristic vs exhaustive path statistics")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enumeration-cap", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("null-table", help="exact cutoffs and sizes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")

    p = sub.add_parser("subsample", help="power over random subsamples of a data file")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--proportions", type=_float_list, required=True)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    _add_test_options(p)
    return parser


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x):
    return repr(float(x))


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_test(args):
    data = harness.ingest_csv(args.input, args.header)
    report = harness.run_test(data, _test_config(args))
    _emit(report.to_json() + "\n", None)


def _cmd_simulate(args):
    spec = example(args.example)
    cfg = harness.ExperimentConfig(
        generator=spec,
        dims=tuple(args.dims),
        n=args.n,
        reps=args.reps,
        tests=tuple(args.stats),
        test=_test_config(args),
        seed=args.seed,
        label=args.example,
        workers=args.workers,
    )
    chash = cfg.config_hash()
    rows = [
        [args.example, e.test.replace("_", "-"), e.n, e.d, e.reps, _fmt(e.rate), _fmt(e.mc_se), args.seed, chash]
        for e in harness.estimate_power(cfg)
    ]
    header = ["example", "test", "n", "d", "reps", "power", "mc_se", "seed", "config_hash"]
    _emit(_csv_text(header, rows), args.out)


def _cmd_oracle(args):
    recs = harness.oracle_compare(args.n, args.dims, args.reps, args.seed, args.enumeration_cap, args.workers)
    chash = stable_hash(
        {"n": args.n, "dims": args.dims, "reps": args.reps, "seed": args.seed, "cap": args.enumeration_cap}
    )
    rows = [
        [args.n, r.d, r.replicate, r.sign_heuristic, r.sign_exact, r.sign_diff,
         r.runs_heuristic, r.runs_exact, r.runs_diff, args.seed, chash]
        for r in recs
    ]
    header = ["n", "d", "replicate", "sign_heuristic", "sign_exact", "sign_diff",
              "runs_heuristic", "runs_exact", "runs_diff", "seed", "config_hash"]
    _emit(_csv_text(header, rows), args.out)


def _cmd_null_table(args):
    try:
        rows = calibrate.null_table(args.n, args.alpha)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    _emit(calibrate.null_table_csv(rows), args.out)


def _cmd_subsample(args):
    data = harness.ingest_csv(args.input, args.header)
    config = _test_config(args)
    chash = stable_hash({"test": config.to_dict(), "proportions": args.proportions, "reps": args.reps})
    ests = harness.subsample_power(data, args.proportions, args.reps, config, workers=args.workers)
    per_p = len(config.statistics)
    rows = []
    for i, e in enumerate(ests):
        p = args.proportions[i // per_p]
        rows.append([_fmt(p), e.test.replace("_", "-"), e.n, e.d, e.reps, _fmt(e.rate), _fmt(e.mc_se),
                     args.seed, chash])
    header = ["proportion", "test", "n", "d", "reps", "power", "mc_se", "seed", "config_hash"]
    _emit(_csv_text(header, rows), args.out)


_COMMANDS = {
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "oracle-compare": _cmd_oracle,
    "null-table": _cmd_null_table,
    "subsample": _cmd_subsample,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SpherePathError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # configuration values rejected by the domain types
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
