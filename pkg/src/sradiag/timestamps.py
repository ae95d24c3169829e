"""Ingestion of detector time-tag records.

Two wire formats are supported: UTF-8 text with one base-10 tick per line
(LF or CRLF), and headerless packed little-endian unsigned 64-bit words.
Acquisition metadata travels in a sidecar JSON descriptor, never in the
tick stream itself. All times are integer nanoseconds.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConfigError,
    DomainError,
    DuplicateTickError,
    InsufficientDataError,
    OrderingError,
    ParseError,
)

FREE_RUN = "free_run"
GATED = "gated"

TEXT_LINES = "text_lines"
BINARY_LE64 = "binary_le64"

_INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class AcquisitionMeta:
    """Acquisition context for a timestamp stream.

    ``gate_period`` is required (and must be positive) in gated mode;
    ``dead_time`` is the hold-off after each registered detection, in ns.
    """

    mode: str = FREE_RUN
    gate_period: float | None = None
    dead_time: float = 0.0
    source_label: str = ""

    def __post_init__(self):
        if self.mode not in (FREE_RUN, GATED):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == GATED:
            if self.gate_period is None or not self.gate_period > 0:
                raise ConfigError("gated mode requires gate_period > 0")
        if self.dead_time < 0:
            raise ConfigError("dead_time must be >= 0")


@dataclass(frozen=True)
class TimestampSeries:
    """Non-decreasing sequence of event times in integer nanoseconds."""

    ticks: np.ndarray
    meta: AcquisitionMeta = field(default_factory=AcquisitionMeta)

    def __post_init__(self):
        ticks = np.array(self.ticks, dtype=np.int64, copy=True).reshape(-1)
        if ticks.size and ticks.min() < 0:
            raise DomainError("ticks must be >= 0")
        bad = np.nonzero(np.diff(ticks) < 0)[0]
        if bad.size:
            idx = int(bad[0]) + 1
            raise OrderingError("decreasing tick", index=idx)
        ticks.setflags(write=False)
        object.__setattr__(self, "ticks", ticks)

    def __len__(self):
        return self.ticks.size


@dataclass(frozen=True)
class InterArrivalSeries:
    """Strictly positive gaps between consecutive ticks, in ns."""

    intervals: np.ndarray
    source_meta: AcquisitionMeta = field(default_factory=AcquisitionMeta)

    def __post_init__(self):
        iv = np.array(self.intervals, dtype=np.float64, copy=True).reshape(-1)
        if iv.size and iv.min() <= 0:
            raise DomainError("intervals must be strictly positive")
        iv.setflags(write=False)
        object.__setattr__(self, "intervals", iv)

    def __len__(self):
        return self.intervals.size


def parse_timestamps(raw, fmt=TEXT_LINES, meta=None):
    """Decode a raw byte stream into a validated :class:`TimestampSeries`.

    Raises :class:`ParseError` (with byte offset) on malformed or
    truncated input and :class:`OrderingError` (with index) on a
    decreasing tick.
    """
    if meta is None:
        meta = AcquisitionMeta()
    if not isinstance(raw, (bytes, bytearray, memoryview)):
        raise ParseError(f"expected bytes, got {type(raw).__name__}")
    raw = bytes(raw)

    if fmt == TEXT_LINES:
        ticks = _parse_text(raw)
    elif fmt == BINARY_LE64:
        ticks = _parse_binary(raw)
    else:
        raise ParseError(f"unknown timestamp format {fmt!r}")
    return TimestampSeries(ticks=ticks, meta=meta)


def _parse_text(raw):
    ticks = []
    offset = 0
    lines = raw.split(b"\n")
    for k, line in enumerate(lines):
        token = line.rstrip(b"\r")
        if token == b"":
            # a trailing newline is fine; a blank interior line is not
            if k == len(lines) - 1:
                break
            raise ParseError("blank line", byte_offset=offset)
        try:
            value = int(token)
        except ValueError:
            raise ParseError(f"malformed token {token!r}", byte_offset=offset) from None
        if value < 0:
            raise ParseError(f"negative tick {value}", byte_offset=offset)
        if value > _INT64_MAX:
            raise ParseError(f"tick {value} exceeds 64-bit range", byte_offset=offset)
        ticks.append(value)
        offset += len(line) + 1
    return np.asarray(ticks, dtype=np.int64)


def _parse_binary(raw):
    if len(raw) % 8:
        raise ParseError("truncated 64-bit record", byte_offset=len(raw) - len(raw) % 8)
    words = np.frombuffer(raw, dtype="<u8")
    if words.size and words.max() > _INT64_MAX:
        idx = int(np.argmax(words > _INT64_MAX))
        raise ParseError("tick exceeds 64-bit signed range", byte_offset=8 * idx)
    return words.astype(np.int64)


def write_timestamps(series, fmt=TEXT_LINES):
    """Serialize ticks to bytes; inverse of :func:`parse_timestamps`."""
    if fmt == TEXT_LINES:
        if not len(series):
            return b""
        return b"\n".join(b"%d" % t for t in series.ticks) + b"\n"
    if fmt == BINARY_LE64:
        return series.ticks.astype("<u8").tobytes()
    raise ParseError(f"unknown timestamp format {fmt!r}")


def inter_arrivals(series, dedup=False):
    """Consecutive tick differences as an :class:`InterArrivalSeries`.

    Zero gaps (duplicate ticks) are dropped when ``dedup`` is set and
    raise :class:`DuplicateTickError` otherwise.
    """
    if len(series) < 2:
        raise InsufficientDataError("need at least 2 ticks to form intervals")
    gaps = np.diff(series.ticks).astype(np.float64)
    zero = gaps == 0
    if zero.any():
        if not dedup:
            raise DuplicateTickError("duplicate tick", index=int(np.argmax(zero)) + 1)
        gaps = gaps[~zero]
    if gaps.size < 1:
        raise InsufficientDataError("fewer than 2 distinct ticks")
    return InterArrivalSeries(intervals=gaps, source_meta=series.meta)


# --- sidecar descriptor -------------------------------------------------

def meta_to_descriptor(meta):
    return {
        "mode": meta.mode,
        "gate_period_ns": meta.gate_period,
        "dead_time_ns": meta.dead_time,
        "source_label": meta.source_label,
    }


def meta_from_descriptor(doc):
    if not isinstance(doc, dict):
        raise ConfigError("descriptor must be a JSON object")
    try:
        return AcquisitionMeta(
            mode=doc.get("mode", FREE_RUN),
            gate_period=doc.get("gate_period_ns"),
            dead_time=float(doc.get("dead_time_ns", 0.0)),
            source_label=str(doc.get("source_label", "")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad descriptor: {exc}") from exc


def write_descriptor(meta):
    return json.dumps(meta_to_descriptor(meta), indent=2) + "\n"


def read_descriptor(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"descriptor is not valid JSON: {exc}") from exc
    return meta_from_descriptor(doc)
