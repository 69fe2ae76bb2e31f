"""Command-line front end.

::

    wedge wedge [INPUT]        CSV a1,b1,a2,b2 -> probabilities
    wedge ks [A ...]           Kolmogorov distribution function
    wedge table                thresholds and precisions, N = 2..8
    wedge bcp CONFIG           Monte Carlo boundary crossing
    wedge bench                convergence study CSV + summary
    wedge time                 batch timing CSV

Probabilities are written with 17 significant digits.  File outputs are
written to a temporary file and renamed, so a failed run leaves nothing
behind.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import __version__
from .batch import ParamTable, ResourceError, batch_wedge, timing_csv, timing_harness
from .bcp import BoundaryError, bcp_montecarlo, load_config
from .bench import convergence_study
from .core import DEFAULT_TERMS, MAX_TERMS, MIN_TERMS, Formula, kolmogorov_cdf, threshold_table

WEDGE_COLUMNS = ("a1", "b1", "a2", "b2")


class CliError(Exception):
    pass


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8", newline="") as f:
            return f.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".wedge-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(tok: str, line: int, column: str) -> float:
    try:
        v = float(tok.strip())
    except ValueError:
        raise CliError(f"line {line}: column {column}: not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise CliError(f"line {line}: column {column}: value must be finite, got {tok!r}")
    return v


def read_csv_columns(text: str, columns) -> list[list[float]]:
    """Parse a headed CSV and return the requested numeric columns row by row."""
    rows = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(rows)]
    except StopIteration:
        raise CliError("line 1: missing header") from None
    missing = [c for c in columns if c not in header]
    if missing:
        raise CliError(f"line 1: header lacks column(s) {', '.join(missing)}")
    idx = [header.index(c) for c in columns]
    out = []
    for line, row in enumerate(rows, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise CliError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        out.append([_parse_float(row[i], line, c) for i, c in zip(idx, columns)])
    return out


def cmd_wedge(args) -> None:
    rows = read_csv_columns(_read_text(args.input), WEDGE_COLUMNS)
    cols = list(zip(*rows)) if rows else [(), (), (), ()]
    res = batch_wedge(ParamTable(*cols), args.terms, args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*WEDGE_COLUMNS, "prob", "formula", "terms", "remainder_bound"])
    for i, r in enumerate(rows):
        w.writerow(
            [*(repr(v) for v in r), _fmt(res.value[i]), Formula.from_code(res.formula[i]).value,
             int(res.terms[i]), _fmt(res.remainder_bound[i])]
        )
    _write_text(args.output, buf.getvalue())


def cmd_ks(args) -> None:
    if args.values:
        values = [_parse_float(v, i, "a") for i, v in enumerate(args.values, start=1)]
    else:
        values = [r[0] for r in read_csv_columns(_read_text(args.input), ("a",))]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "cdf"])
    for a in values:
        w.writerow([repr(a), _fmt(kolmogorov_cdf(a, args.terms))])
    _write_text(args.output, buf.getvalue())


def cmd_table(args) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "tau", "epsilon", "log10_epsilon"])
    for e in threshold_table():
        w.writerow([e.n_terms, f"{e.tau:.6f}", f"{e.epsilon:.6g}", f"{e.log_epsilon / math.log(10):.6f}"])
    _write_text(args.output, buf.getvalue())


def cmd_bcp(args) -> None:
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        raise CliError(f"cannot read {args.config}: {exc.strerror}") from None
    samples = args.samples if args.samples is not None else cfg.samples
    seed = args.seed if args.seed is not None else cfg.seed
    est = bcp_montecarlo(cfg.bounds, samples, seed, args.terms, args.workers)
    _write_text(args.output, json.dumps(est.as_dict(), indent=2) + "\n")


def cmd_bench(args) -> None:
    seed = 0 if args.seed is None else args.seed
    study = convergence_study(args.samples, args.eps, seed, workers=args.workers)
    _write_text(args.output, study.to_csv())
    summary = study.summary_text() + "\n"
    if args.summary:
        _write_text(args.summary, summary)
    else:
        sys.stderr.write(summary)


def cmd_time(args) -> None:
    seed = 0 if args.seed is None else args.seed
    workers = args.workers_list or [1, 4, 8]
    rows = timing_harness(args.sizes, workers, seed=seed, n_terms=args.terms, repeats=args.repeats)
    _write_text(args.output, timing_csv(rows))


def _terms(s: str) -> int:
    n = int(s)
    if not MIN_TERMS <= n <= MAX_TERMS:
        raise argparse.ArgumentTypeError(f"must be in {MIN_TERMS}..{MAX_TERMS}")
    return n


def _positive_int(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _int_list(s: str) -> list[int]:
    try:
        return [_positive_int(tok) for tok in s.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated positive integers, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--terms", type=_terms, default=DEFAULT_TERMS, help="series terms N (2..8)")
    common.add_argument("--workers", type=_positive_int, default=None,
                        help="worker threads (default: $WEDGE_WORKERS or core count)")
    common.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")

    parser = argparse.ArgumentParser(prog="wedge", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wedge", parents=[common], help="wedge probabilities for CSV rows a1,b1,a2,b2")
    p.add_argument("input", nargs="?", default="-", help="input CSV, '-' for stdin")
    p.set_defaults(func=cmd_wedge)

    p = sub.add_parser("ks", parents=[common], help="Kolmogorov distribution function")
    p.add_argument("values", nargs="*", help="points a; if omitted read a CSV with column 'a'")
    p.add_argument("--input", default="-", help="input CSV when no values are given")
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("table", parents=[common], help="threshold tau_N and precision eps_N for N=2..8")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bcp", parents=[common], help="Monte Carlo boundary crossing from a JSON config")
    p.add_argument("config", help="boundary specification (JSON)")
    p.add_argument("--samples", type=_positive_int, default=None, help="override config samples")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.set_defaults(func=cmd_bcp)

    p = sub.add_parser("bench", parents=[common], help="terms-to-convergence study")
    p.add_argument("--samples", type=_positive_int, default=100_000, help="number of sampled tuples")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--eps", type=float, default=1e-16)
    p.add_argument("--summary", default=None, help="summary JSON path (default: stderr)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("time", parents=[common], help="batch timing harness")
    p.add_argument("--sizes", type=_int_list, default=[1_000_000])
    p.add_argument("--workers-list", type=_int_list, default=None, help="e.g. 1,4,8")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--repeats", type=_positive_int, default=1)
    p.set_defaults(func=cmd_time)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CliError, BoundaryError, ResourceError, ValueError) as exc:
        print(f"wedge {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
