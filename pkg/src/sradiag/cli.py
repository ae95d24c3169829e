"""Command-line entry point.

Subcommands: ``simulate``, ``sra``, ``fit``, ``compare``, ``diagnose``.
All emit machine-readable artifacts (timestamp files, CSV curves, JSON
fit reports, JSON-lines diagnostics); plotting is left to downstream
tools. Durations on the command line accept ``ns``/``us``/``ms``
suffixes and default to ns. Relative output paths are resolved under
``$SRADIAG_OUT_DIR`` when that variable is set.

Exit codes: 0 success, 2 parse error, 3 data error, 4 fit/convergence
error, 5 config error, 64 usage error.
"""

import argparse
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import DriftMonitor, reports_to_jsonl
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DomainError,
    DuplicateTickError,
    InsufficientDataError,
    ModelMismatchError,
    OrderingError,
    ParseError,
    SradiagError,
)
from .fitting import NoiseModelEstimator
from .simulate import SimConfig, config_from_sidecar, ground_truth_sidecar, simulate
from .sra import build_sra, relative_sra, relative_to_csv, resample_sra, sra_to_csv
from .timestamps import (
    BINARY_LE64,
    FREE_RUN,
    GATED,
    TEXT_LINES,
    inter_arrivals,
    parse_timestamps,
    read_descriptor,
    write_timestamps,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_CONFIG = 5
EXIT_USAGE = 64

_DURATION_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*(ns|us|ms|s)?\s*$")
_UNIT_NS = {"ns": 1.0, "us": 1e3, "ms": 1e6, "s": 1e9, None: 1.0}


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the documented usage code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def duration_ns(text):
    """Parse ``"24us"``-style durations into float ns."""
    m = _DURATION_RE.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse duration {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse duration {text!r}") from None
    return value * _UNIT_NS[m.group(2)]


def _resolve_out(path):
    p = Path(path)
    base = os.environ.get("SRADIAG_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        _resolve_out(path).write_text(text)


def _detect_format(path, fmt):
    if fmt != "auto":
        return TEXT_LINES if fmt == "text" else BINARY_LE64
    suffix = Path(path).suffix.lower()
    if suffix in (".txt", ".csv", ".dat"):
        return TEXT_LINES
    if suffix == ".bin":
        return BINARY_LE64
    raise ConfigError(f"cannot infer format from {path!r}; pass --format")


def _sidecar_path(path):
    return Path(path).with_suffix(".json")


def _load_series(path, fmt):
    raw = Path(path).read_bytes()
    meta = None
    sidecar = _sidecar_path(path)
    if sidecar.exists() and sidecar != Path(path):
        meta = read_descriptor(sidecar.read_text())
    series = parse_timestamps(raw, _detect_format(path, fmt), meta=meta)
    return series, sidecar


def _load_intervals(path, fmt, dedup):
    series, sidecar = _load_series(path, fmt)
    return inter_arrivals(series, dedup=dedup), sidecar


def _add_input_args(p):
    p.add_argument("input", help="timestamp file (.bin or .txt)")
    p.add_argument("--format", choices=("auto", "text", "binary"), default="auto")
    p.add_argument("--dedup", action="store_true", help="drop duplicate ticks instead of failing")


def build_parser():
    parser = _Parser(prog="sradiag", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic detector stream")
    p.add_argument("--dark-rate", type=float, required=True, help="primary event rate, events/ns")
    p.add_argument("--duration", type=duration_ns, required=True, help="acquisition span (ns/us/ms suffix ok)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--afterpulse-prob", type=float, default=0.0)
    p.add_argument("--ap-alpha", type=float, default=2.0)
    p.add_argument("--ap-xmin", type=duration_ns, default=100.0)
    p.add_argument("--dead-time", type=duration_ns, default=0.0)
    p.add_argument("--mode", choices=(FREE_RUN, GATED), default=FREE_RUN)
    p.add_argument("--gate-period", type=duration_ns, default=None)
    p.add_argument("--truncate-tail", type=duration_ns, default=None, help="cut re-emission delays at this value")
    p.add_argument("--single-generation", action="store_true", help="re-emissions do not branch")
    p.add_argument("--label", default="sim")
    p.add_argument("--format", choices=("text", "binary"), default="binary")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("sra", help="ranked-amplitude curve of inter-arrival times, as CSV")
    _add_input_args(p)
    p.add_argument("--resample", type=int, default=None, metavar="M", help="resample the curve to M ranks")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("fit", help="fit a noise model and report parameters + applicability")
    _add_input_args(p)
    p.add_argument("--model", choices=("poisson", "powerlaw", "saturating"), required=True)
    p.add_argument("--route", choices=("sra", "histogram"), default="sra")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--binning", choices=("log", "linear"), default="log")
    p.add_argument("--x-min", type=duration_ns, default=None,
                   help="lower support bound; defaults to the sidecar dead time, then the data minimum")
    p.add_argument("--rel-tol", type=float, default=0.25)
    p.add_argument("--run-len", type=int, default=5)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("-o", "--output", default="-", help="FitResult JSON")
    p.add_argument("--curve-out", default=None, help="fitted-curve CSV (default: derived from -o)")

    p = sub.add_parser("compare", help="relative ranked-amplitude curve of probe vs baseline, as CSV")
    p.add_argument("probe")
    p.add_argument("baseline")
    p.add_argument("--format", choices=("auto", "text", "binary"), default="auto")
    p.add_argument("--dedup", action="store_true")
    p.add_argument("-m", "--resample-len", type=int, default=1000)
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("diagnose", help="rolling drift reports for a stream, as JSON lines")
    _add_input_args(p)
    p.add_argument("--baseline", required=True, help="baseline timestamp file")
    p.add_argument("--window-size", type=int, default=1000)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--resample-len", type=int, default=1000)
    p.add_argument("--threshold", type=float, default=None, help="drift threshold; default: calibrate from baseline")
    p.add_argument("--epsilon", type=duration_ns, default=1.0)
    p.add_argument("--calibration-splits", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="calibration shuffle seed")
    p.add_argument("-o", "--output", default="-")
    return parser


def _cmd_simulate(args):
    config = SimConfig(
        dark_rate=args.dark_rate,
        duration=args.duration,
        seed=args.seed,
        afterpulse_prob=args.afterpulse_prob,
        ap_alpha=args.ap_alpha,
        ap_xmin=args.ap_xmin,
        dead_time=args.dead_time,
        mode=args.mode,
        gate_period=args.gate_period,
        tail_truncation=args.truncate_tail,
        branching=not args.single_generation,
        source_label=args.label,
    )
    series = simulate(config)
    fmt = TEXT_LINES if args.format == "text" else BINARY_LE64
    out = _resolve_out(args.output)
    out.write_bytes(write_timestamps(series, fmt))
    _sidecar_path(out).write_text(ground_truth_sidecar(config))
    print(f"wrote {len(series)} events to {out}", file=sys.stderr)
    return EXIT_OK


def _cmd_sra(args):
    intervals, _ = _load_intervals(args.input, args.format, args.dedup)
    curve = build_sra(intervals, unit_label="ns")
    if args.resample is not None:
        curve = resample_sra(curve, args.resample)
    _write_text(args.output, sra_to_csv(curve))
    return EXIT_OK


def _default_x_min(args, sidecar, intervals):
    if args.x_min is not None:
        return args.x_min
    if sidecar.exists():
        try:
            dead = read_descriptor(sidecar.read_text()).dead_time
        except ConfigError:
            dead = 0.0
        if dead > 0:
            return dead
    return float(intervals.intervals.min())


def _cmd_fit(args):
    intervals, sidecar = _load_intervals(args.input, args.format, args.dedup)
    x_min = _default_x_min(args, sidecar, intervals) if args.model == "powerlaw" else args.x_min
    est = NoiseModelEstimator(
        model=args.model,
        route=args.route,
        bins=args.bins,
        binning=args.binning,
        x_min=x_min,
        rel_tol=args.rel_tol,
        run_len=args.run_len,
        max_iter=args.max_iter,
    )
    est.fit(intervals)
    _write_text(args.output, est.result_.to_json())

    curve_out = args.curve_out
    if curve_out is None and args.output != "-":
        curve_out = str(Path(args.output).with_suffix("")) + "_curve.csv"
    if curve_out is not None:
        if args.route == "sra":
            ranks = np.arange(2, est.curve_.N + 1)
            data = est.curve_.values[1:]
            model = est.predict(ranks)
            rows = ["n,x,model"] + [
                f"{n},{float(x)!r},{float(mv)!r}" for n, x, mv in zip(ranks, data, model)
            ]
        else:
            centers = est.histogram_.centers
            dens = est.histogram_.densities
            model = est.predict(centers)
            rows = ["t,density,model"] + [
                f"{float(t)!r},{float(d)!r},{float(mv)!r}" for t, d, mv in zip(centers, dens, model)
            ]
        _write_text(curve_out, "\n".join(rows) + "\n")
    return EXIT_OK


def _cmd_compare(args):
    probe, _ = _load_intervals(args.probe, args.format, args.dedup)
    base, _ = _load_intervals(args.baseline, args.format, args.dedup)
    rel = relative_sra(build_sra(probe), build_sra(base), args.resample_len)
    _write_text(args.output, relative_to_csv(rel))
    return EXIT_OK


def _cmd_diagnose(args):
    series, _ = _load_series(args.input, args.format)
    base, _ = _load_intervals(args.baseline, args.format, args.dedup)
    monitor = DriftMonitor(
        window_size=args.window_size,
        stride=args.stride,
        resample_len=args.resample_len,
        threshold=args.threshold,
        epsilon=args.epsilon,
        calibration_splits=args.calibration_splits,
        random_state=args.seed,
    )
    reports = monitor.fit(base).predict(series)
    _write_text(args.output, reports_to_jsonl(reports))
    print(
        f"{len(reports)} windows, {sum(r.verdict == 'drift' for r in reports)} drift, "
        f"threshold {monitor.threshold_:.4g}",
        file=sys.stderr,
    )
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sra": _cmd_sra,
    "fit": _cmd_fit,
    "compare": _cmd_compare,
    "diagnose": _cmd_diagnose,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, OrderingError) as exc:
        print(f"sradiag: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InsufficientDataError, DuplicateTickError, DomainError, IndexError) as exc:
        print(f"sradiag: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, ModelMismatchError) as exc:
        print(f"sradiag: fit error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ConfigError as exc:
        print(f"sradiag: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"sradiag: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SradiagError as exc:  # catch-all for future error classes
        print(f"sradiag: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
