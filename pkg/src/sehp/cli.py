"""Command-line front end: ``sehp {simulate|filter|fit|predict|evaluate}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager

import numpy as np

from .cascades import (
    Cascade,
    CascadeFormatError,
    FilterCriteria,
    SehpParams,
    filter_cascades,
    parse_cascades,
    write_cascades,
)
from .estimation import FitConfig, FitError, UnfittableCascadeError, fit
from .evaluation import DEFAULT_EPSILON, metrics_at_horizon
from .prediction import predict
from .simulation import SimConfig, simulate_corpus

FIT_HEADER = [
    "id", "v", "alpha", "beta", "log_likelihood", "gradient_norm", "iterations", "converged", "status",
]
PREDICT_HEADER = ["id", "horizon_seconds", "predicted_count", "status"]

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class RuntimeFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    x = float(text)
    if not (math.isfinite(x) and x > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return x


def _non_negative(text):
    x = float(text)
    if not (math.isfinite(x) and x >= 0):
        raise argparse.ArgumentTypeError(f"must be a non-negative number, got {text}")
    return x


def _count(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text}")
    return n


def _seed(text):
    n = int(text)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return n


def _fmt(x: float) -> str:
    return repr(float(x))


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load_cascades(path) -> list[Cascade]:
    errors: list[CascadeFormatError] = []
    try:
        with open(path, encoding="utf-8") as fh, warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cascades = parse_cascades(fh, errors)
    except OSError as exc:
        raise RuntimeFailure(f"cannot read {path}: {exc.strerror}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for err in errors:
        print(f"skipped malformed record: {err}", file=sys.stderr)
    return cascades


# simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    params = SehpParams(args.v, args.alpha, args.beta)
    configs = [
        SimConfig(params, args.horizon, seed=args.seed + i, max_events=args.max_events)
        for i in range(args.count)
    ]
    cascades, truth = simulate_corpus(configs)
    truth_path = args.truth or f"{args.out}.truth.jsonl"
    with _output(args.out) as fh:
        write_cascades(cascades, fh)
    with open(truth_path, "w", encoding="utf-8") as fh:
        for rec in truth:
            fh.write(json.dumps(rec) + "\n")
    n_trunc = sum(c.id.endswith("#truncated") for c in cascades)
    print(f"simulated={len(cascades)} truncated={n_trunc} truth={truth_path}", file=sys.stderr)
    return EXIT_OK


# filter -------------------------------------------------------------------

def cmd_filter(args) -> int:
    try:
        criteria = FilterCriteria(
            early_window=args.early_window_s,
            min_early=args.min_early,
            total_window=args.total_window_s,
            min_total=args.min_total,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cascades = _load_cascades(args.input)
    kept = filter_cascades(cascades, criteria)
    with _output(args.out) as fh:
        write_cascades(kept, fh)
    print(f"kept={len(kept)} dropped={len(cascades) - len(kept)}", file=sys.stderr)
    return EXIT_OK


# fit ----------------------------------------------------------------------

def _fit_row(job):
    cascade, train_t, config = job
    row = {"id": cascade.id}
    if train_t is not None:
        if cascade.horizon < train_t:
            return {**row, "status": "horizon_too_short"}
        cascade = cascade.truncate(train_t)
    try:
        res = fit(cascade, config)
    except UnfittableCascadeError:
        return {**row, "status": "unfittable"}
    except FitError:
        return {**row, "status": "failed"}
    p = res.params
    return {
        **row,
        "v": _fmt(p.v),
        "alpha": _fmt(p.alpha),
        "beta": _fmt(p.beta),
        "log_likelihood": _fmt(res.log_likelihood),
        "gradient_norm": _fmt(res.gradient_norm),
        "iterations": str(res.iterations),
        "converged": "true" if res.converged else "false",
        "status": "ok",
    }


def cmd_fit(args) -> int:
    cascades = _load_cascades(args.input)
    if not cascades:
        raise RuntimeFailure("no cascades")
    config = FitConfig(
        max_iterations=args.max_iterations,
        gradient_tolerance=args.gradient_tolerance,
        n_restarts=args.restarts,
        seed=args.seed,
    )
    jobs = [(c, args.train_t, config) for c in cascades]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_fit_row, jobs, chunksize=max(1, len(jobs) // (4 * args.jobs))))
    else:
        rows = [_fit_row(j) for j in jobs]
    with _output(args.out) as fh:
        writer = csv.DictWriter(fh, FIT_HEADER, restval="", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    n_ok = sum(r["status"] == "ok" for r in rows)
    print(f"fitted={n_ok} not_fitted={len(rows) - n_ok}", file=sys.stderr)
    return EXIT_OK


# predict ------------------------------------------------------------------

def _read_params(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "v", "alpha", "beta", "status"} <= set(reader.fieldnames):
                raise RuntimeFailure(f"{path}: not a parameter table")
            return list(reader)
    except OSError as exc:
        raise RuntimeFailure(f"cannot read {path}: {exc.strerror}") from None


def horizon_grid_seconds(from_h: float, to_h: float, step_h: float) -> np.ndarray:
    """Offsets ``from_h, from_h + step_h, ... <= to_h`` in hours, returned in seconds."""
    if to_h < from_h:
        raise UsageError("--to-h must be >= --from-h")
    n = int(math.floor((to_h - from_h) / step_h + 1e-9)) + 1
    return (from_h + step_h * np.arange(n)) * 3600.0


def cmd_predict(args) -> int:
    offsets = horizon_grid_seconds(args.from_h, args.to_h, args.step_h)
    table = _read_params(args.params)
    by_id = {c.id: c for c in _load_cascades(args.input)}
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICT_HEADER)
        for row in table:
            cid = row["id"]
            status = row.get("status") or "ok"
            cascade = by_id.get(cid)
            preds = None
            if status == "ok" and cascade is None:
                status = "missing_cascade"
            elif status == "ok":
                train_t = cascade.horizon if args.train_t is None else args.train_t
                if cascade.horizon < train_t:
                    status = "horizon_too_short"
                else:
                    try:
                        params = SehpParams(float(row["v"]), float(row["alpha"]), float(row["beta"]))
                    except ValueError:
                        status = "bad_params"
                    else:
                        observed = cascade.truncate(train_t)
                        preds = np.atleast_1d(predict(params, observed, observed.horizon + offsets))
            for k, off in enumerate(offsets):
                value = _fmt(preds[k]) if preds is not None else ""
                writer.writerow([cid, _fmt(off), value, status])
    return EXIT_OK


# evaluate -----------------------------------------------------------------

def _read_predictions(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "horizon_seconds", "predicted_count"} <= set(reader.fieldnames):
                raise RuntimeFailure(f"{path}: not a prediction table")
            return list(reader)
    except OSError as exc:
        raise RuntimeFailure(f"cannot read {path}: {exc.strerror}") from None


def cmd_evaluate(args) -> int:
    rows = _read_predictions(args.predictions)
    by_id = {c.id: c for c in _load_cascades(args.input)}
    grouped: dict[float, list[dict]] = {}
    for row in rows:
        grouped.setdefault(float(row["horizon_seconds"]), []).append(row)
    if args.epsilon == 0:
        print("warning: --epsilon 0 only counts exact predictions as accurate", file=sys.stderr)

    with _output(args.out) as fh:
        for h in sorted(grouped):
            predicted, actual, skipped = [], [], 0
            t = args.train_t + h
            for row in grouped[h]:
                cascade = by_id.get(row["id"])
                ok = (row.get("status") or "ok") == "ok" and row["predicted_count"] != ""
                if not ok or cascade is None or cascade.horizon < t:
                    skipped += 1
                    continue
                predicted.append(float(row["predicted_count"]))
                actual.append(cascade.count_until(t))
            report = metrics_at_horizon(h, predicted, actual, args.epsilon, skipped)
            rec = report.to_record()
            if args.epsilon == 0:
                rec["degenerate_epsilon"] = True
            fh.write(json.dumps(rec) + "\n")
    return EXIT_OK


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sehp", description="Self-excited Hawkes popularity model for cascades.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw synthetic cascades by thinning")
    p.add_argument("--v", type=_positive, required=True, help="initial triggering strength (1/s)")
    p.add_argument("--alpha", type=_non_negative, required=True, help="per-event triggering strength (1/s)")
    p.add_argument("--beta", type=_positive, required=True, help="decay rate (1/s)")
    p.add_argument("--horizon", type=_positive, required=True, help="observation window T (s)")
    p.add_argument("--count", type=_count, default=1, help="number of cascades")
    p.add_argument("--seed", type=_seed, default=0, help="seed of the first cascade; cascade i uses seed+i")
    p.add_argument("--max-events", type=int, default=1_000_000, help="per-cascade event cap")
    p.add_argument("--out", required=True, help="cascade JSONL output")
    p.add_argument("--truth", help="truth sidecar path (default: OUT.truth.jsonl)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("filter", help="keep cascades with enough early and total events")
    p.add_argument("--in", dest="input", required=True, help="cascade JSONL input")
    p.add_argument("--out", default="-", help="filtered JSONL output (default stdout)")
    p.add_argument("--min-early", type=_count, default=10)
    p.add_argument("--early-window-s", type=_non_negative, default=3600.0)
    p.add_argument("--min-total", type=_count, default=100)
    p.add_argument("--total-window-s", type=_non_negative, default=172800.0)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("fit", help="maximum-likelihood parameters per cascade")
    p.add_argument("--in", dest="input", required=True, help="cascade JSONL input")
    p.add_argument("--out", default="-", help="parameter CSV output (default stdout)")
    p.add_argument("--train-t", type=_positive, help="fit only events <= this time (s)")
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--gradient-tolerance", type=_positive, default=1e-6)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="expected counts after the training window")
    p.add_argument("--params", required=True, help="parameter CSV from `fit`")
    p.add_argument("--in", dest="input", required=True, help="cascade JSONL input")
    p.add_argument("--out", default="-", help="prediction CSV output (default stdout)")
    p.add_argument("--train-t", type=_positive, help="training window used by `fit` (default: each cascade's horizon)")
    p.add_argument("--from-h", type=_non_negative, default=1.0)
    p.add_argument("--to-h", type=_non_negative, default=42.0)
    p.add_argument("--step-h", type=_positive, default=1.0)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="MAPE and accuracy per horizon")
    p.add_argument("--predictions", required=True, help="prediction CSV from `predict`")
    p.add_argument("--in", dest="input", required=True, help="full cascade JSONL")
    p.add_argument("--train-t", type=_positive, required=True, help="training window (s)")
    p.add_argument("--epsilon", type=_non_negative, default=DEFAULT_EPSILON)
    p.add_argument("--out", default="-", help="metrics JSONL output (default stdout)")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("max_events", "max_iterations", "restarts", "jobs"):
        if getattr(args, name, 1) < 1:
            parser.error(f"--{name.replace('_', '-')} must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sehp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeFailure, OSError, ValueError) as exc:
        print(f"sehp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
