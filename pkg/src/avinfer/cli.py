"""Command-line front end.

Two subcommands:

* ``monitor`` consumes a stream (stdin or a file) and emits one CSV record
  per observation from the start index m onward: the running mean and
  variance together with the current anytime p-value, confidence sequence,
  and reject flag.  ``--mode mean`` expects one numeric column;
  ``--mode cit`` expects triplet rows ``x,y,z1,...,z_d`` with the training
  stream either interleaved (train,eval,train,eval, ...) or in a separate
  file.  With ``--stop-on-reject`` the process exits with status 3 at the
  first rejection.
* ``experiment`` runs a Monte Carlo configuration file and writes curve
  CSV(s) plus a metadata sidecar.

Exit status: 0 success, 1 input/parse error, 2 invalid configuration or
usage, 3 stopped on first rejection.

Everything is a deterministic function of inputs, flags, and the seed;
numbers are printed with 17 significant digits so records round-trip.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .gcm import GcmState, Triplet, gcm_update
from .harness import REGRESSORS, ConfigError, ExperimentConfig, write_experiment
from .mean import evaluate
from .streaming import MomentAccumulator

MONITOR_HEADER = "k,mean,variance,p_value,lower,upper,reject,degenerate"
EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_REJECTED = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class _InputError(Exception):
    pass


def _parse_float(token: str, lineno: int, path: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise _InputError(
            f"{path}:{lineno}: expected a number, got {token.strip()!r}"
        ) from None


def _numeric_lines(fh, path: str):
    """Yield (lineno, fields) rows, skipping blanks and a single leading
    header line if it is non-numeric."""
    for lineno, line in enumerate(fh, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if lineno == 1:
            try:
                float(parts[0])
            except ValueError:
                continue  # header row
        yield lineno, parts


def _emit(out, record: str) -> None:
    out.write(record + "\n")
    out.flush()


def _monitor_mean(args, source, path: str, out) -> int:
    stats = MomentAccumulator()
    _emit(out, MONITOR_HEADER)
    for lineno, parts in _numeric_lines(source, path):
        if len(parts) != 1:
            raise _InputError(
                f"{path}:{lineno}: mean mode expects one numeric column, got {len(parts)}"
            )
        stats.update(_parse_float(parts[0], lineno, path))
        if stats.count < args.m:
            if args.warmup_echo:
                _emit(out, f"{stats.count},{_fmt(stats.mean)},{_fmt(stats.variance)},,,,0,"
                           f"{int(stats.variance == 0.0)}")
            continue
        res = evaluate(stats, args.m, args.alpha)
        _emit(out, f"{res.k},{_fmt(stats.mean)},{_fmt(stats.variance)},{_fmt(res.p_value)},"
                   f"{_fmt(res.lower)},{_fmt(res.upper)},{int(res.reject)},{int(res.degenerate)}")
        if res.reject and args.stop_on_reject:
            return EXIT_REJECTED
    return EXIT_OK


def _parse_triplet(parts, lineno: int, path: str, d: int | None):
    if len(parts) < 3:
        raise _InputError(
            f"{path}:{lineno}: triplet rows need x,y,z1[,...], got {len(parts)} columns"
        )
    if d is not None and len(parts) - 2 != d:
        raise _InputError(
            f"{path}:{lineno}: expected z of dimension {d}, got {len(parts) - 2}"
        )
    vals = [_parse_float(p, lineno, path) for p in parts]
    return Triplet(vals[0], vals[1], np.array(vals[2:]))


def _cit_pairs(args, source, path: str):
    """Yield (train, eval) triplet pairs according to the layout."""
    d = None
    if args.layout == "interleaved":
        pending = None
        for lineno, parts in _numeric_lines(source, path):
            t = _parse_triplet(parts, lineno, path, d)
            d = t.z.size
            if pending is None:
                pending = t
            else:
                yield pending, t
                pending = None
    else:
        with open(args.train_file) as tf:
            train_rows = iter(_numeric_lines(tf, args.train_file))
            for lineno, parts in _numeric_lines(source, path):
                ev = _parse_triplet(parts, lineno, path, d)
                d = ev.z.size
                try:
                    tl, tparts = next(train_rows)
                except StopIteration:
                    raise _InputError(
                        f"{args.train_file}: training stream exhausted before "
                        f"evaluation row {path}:{lineno}"
                    ) from None
                yield _parse_triplet(tparts, tl, args.train_file, d), ev


def _monitor_cit(args, source, path: str, out) -> int:
    factory = REGRESSORS[args.regressor]
    state = GcmState(factory(), factory())
    _emit(out, MONITOR_HEADER)
    for train, ev in _cit_pairs(args, source, path):
        gcm_update(state, ev, train)
        stats = state.residual_stats
        if stats.count < args.m:
            if args.warmup_echo:
                _emit(out, f"{stats.count},{_fmt(stats.mean)},{_fmt(stats.variance)},,,,0,"
                           f"{int(state.degenerate)}")
            continue
        res = evaluate(stats, args.m, args.alpha)
        _emit(out, f"{res.k},{_fmt(stats.mean)},{_fmt(stats.variance)},{_fmt(res.p_value)},"
                   f"{_fmt(res.lower)},{_fmt(res.upper)},{int(res.reject)},{int(res.degenerate)}")
        if res.reject and args.stop_on_reject:
            return EXIT_REJECTED
    return EXIT_OK


def cmd_monitor(args) -> int:
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.input == "-":
            source, path = sys.stdin, "<stdin>"
            return (_monitor_mean if args.mode == "mean" else _monitor_cit)(
                args, source, path, out
            )
        with open(args.input) as fh:
            return (_monitor_mean if args.mode == "mean" else _monitor_cit)(
                args, fh, args.input, out
            )
    finally:
        if args.out:
            out.close()


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed}).validate()
    written = write_experiment(cfg, args.out, workers=args.workers)
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avinfer",
        description="Anytime-valid stream monitoring and Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mon = sub.add_parser("monitor", help="monitor a stream of observations")
    mon.add_argument("input", nargs="?", default="-",
                     help="input file, or '-' for stdin (default)")
    mon.add_argument("--mode", choices=("mean", "cit"), default="mean")
    mon.add_argument("--m", type=int, default=300,
                     help="start index of the anytime guarantee (default 300)")
    mon.add_argument("--alpha", type=float, default=0.05)
    mon.add_argument("--stop-on-reject", action="store_true",
                     help="exit with status 3 at the first rejection")
    mon.add_argument("--layout", choices=("interleaved", "two-files"),
                     default="interleaved",
                     help="cit mode: train/eval rows alternate, or eval rows "
                          "here with --train-file supplying the training rows")
    mon.add_argument("--train-file", help="training triplets (cit, two-files layout)")
    mon.add_argument("--regressor", choices=sorted(REGRESSORS), default="knn")
    mon.add_argument("--warmup-echo", action="store_true",
                     help="emit raw running stats for k < m")
    mon.add_argument("--out", help="write records to this file instead of stdout")
    mon.set_defaults(func=cmd_monitor)

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment config")
    exp.add_argument("config", help="flat key = value configuration file")
    exp.add_argument("--out", required=True, help="output CSV path (basename for CIT curves)")
    exp.add_argument("--seed", type=int, default=None, help="override the config seed")
    exp.add_argument("--workers", type=int, default=None,
                     help="worker processes (default: all cores)")
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "monitor":
        if args.m < 1:
            parser.error("--m must be >= 1")
        if not 0.0 < args.alpha < 1.0:
            parser.error("--alpha must lie in (0, 1)")
        if args.mode == "cit" and args.layout == "two-files" and not args.train_file:
            parser.error("--layout two-files requires --train-file")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except _InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
