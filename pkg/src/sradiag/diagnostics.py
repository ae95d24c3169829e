"""Nonparametric drift monitoring on rank-aligned interval curves.

A probe window is compared against a baseline by resampling both ranked
curves to a common length and taking the worst relative pointwise
difference. No model is assumed; the whole curve is the statistic, which
keeps the comparison sensitive to tail changes that scalar summaries
miss. Decision thresholds are calibrated from null comparisons on split
baseline data rather than fixed a priori.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError, InsufficientDataError
from .sra import DEFAULT_COMPARISON_LEN, RelativeSRACurve, build_sra, relative_sra
from .timestamps import TimestampSeries
from .validation import as_intervals

STABLE = "stable"
DRIFT = "drift"

DEFAULT_EPSILON = 1.0  # ns; guards division at the smallest representable gap
DEFAULT_CALIBRATION_SPLITS = 100
DEFAULT_CALIBRATION_QUANTILE = 0.95


@dataclass(frozen=True)
class MonitorConfig:
    """Window geometry and decision settings for drift monitoring."""

    window_size: int
    stride: int
    resample_len: int = DEFAULT_COMPARISON_LEN
    threshold: float = 0.3
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.window_size < 2:
            raise ConfigError("window_size must be >= 2")
        if not (1 <= self.stride <= self.window_size):
            raise ConfigError("need 1 <= stride <= window_size")
        if self.resample_len < 2:
            raise ConfigError("resample_len must be >= 2")
        if not (self.threshold > 0):
            raise ConfigError("threshold must be positive")
        if not (self.epsilon > 0):
            raise ConfigError("epsilon must be positive")


@dataclass(frozen=True)
class DiagnosticReport:
    """Outcome of one probe-vs-baseline comparison."""

    relative: RelativeSRACurve
    distance: float
    verdict: str
    window_span: tuple | None
    baseline_id: str


def _distance(rel, epsilon):
    return float(np.max(np.abs(rel.delta) / (rel.baseline + epsilon)))


def compare_windows(probe, baseline, config, window_span=None, baseline_id="baseline"):
    """Compare two interval samples; verdict is ``drift`` when the worst
    relative pointwise difference exceeds the configured threshold."""
    probe_curve = build_sra(as_intervals(probe, "probe"))
    base_curve = build_sra(as_intervals(baseline, "baseline"))
    rel = relative_sra(probe_curve, base_curve, config.resample_len)
    distance = _distance(rel, config.epsilon)
    return DiagnosticReport(
        relative=rel,
        distance=distance,
        verdict=DRIFT if distance > config.threshold else STABLE,
        window_span=window_span,
        baseline_id=baseline_id,
    )


def rolling_diagnose(stream, baseline, config, baseline_id="baseline"):
    """Slide a window of ``window_size`` intervals along a timestamp
    stream by ``stride`` events; one report per position.

    A stream shorter than one window yields an empty list (with a
    warning), not an error.
    """
    ticks = stream.ticks if isinstance(stream, TimestampSeries) else np.asarray(stream, dtype=np.int64)
    distinct = np.unique(ticks)  # zero gaps carry no interval information
    n_intervals = distinct.size - 1
    if n_intervals < config.window_size:
        warnings.warn(
            f"stream provides {max(n_intervals, 0)} intervals, "
            f"shorter than one window of {config.window_size}; no reports",
            stacklevel=2,
        )
        return []
    gaps = np.diff(distinct).astype(np.float64)
    base = as_intervals(baseline, "baseline")
    reports = []
    for start in range(0, n_intervals - config.window_size + 1, config.stride):
        stop = start + config.window_size
        reports.append(
            compare_windows(
                gaps[start:stop],
                base,
                config,
                window_span=(int(distinct[start]), int(distinct[stop])),
                baseline_id=baseline_id,
            )
        )
    return reports


def calibrate_threshold(
    baseline,
    resample_len=DEFAULT_COMPARISON_LEN,
    epsilon=DEFAULT_EPSILON,
    n_splits=DEFAULT_CALIBRATION_SPLITS,
    quantile=DEFAULT_CALIBRATION_QUANTILE,
    probe_size=None,
    seed=0,
):
    """Null-distance quantile from random splits of the baseline itself.

    Runs ``n_splits`` comparisons of a random disjoint probe-sized subset
    against the remainder and returns the requested quantile of their
    distances, a deliberately assumption-free threshold for
    :func:`compare_windows`. ``probe_size`` should match the probe
    windows the threshold will judge (smaller probes are noisier); it
    defaults to half the baseline.
    """
    base = as_intervals(baseline, "baseline")
    if base.size < 4:
        raise InsufficientDataError("need at least 4 baseline intervals to calibrate")
    if probe_size is None:
        probe_size = base.size // 2
    probe_size = int(min(probe_size, base.size // 2))
    if probe_size < 2:
        raise InsufficientDataError("baseline too small for the requested probe size")
    rng = np.random.default_rng(seed)
    distances = np.empty(n_splits)
    for k in range(n_splits):
        perm = rng.permutation(base.size)
        rel = relative_sra(
            build_sra(base[perm[:probe_size]]),
            build_sra(base[perm[probe_size:]]),
            resample_len,
        )
        distances[k] = _distance(rel, epsilon)
    return float(np.percentile(distances, 100.0 * quantile))


# --- JSON-lines report stream ------------------------------------------------

def report_to_json_dict(report):
    return {
        "baseline_id": report.baseline_id,
        "window_span": None if report.window_span is None else list(report.window_span),
        "distance": report.distance,
        "verdict": report.verdict,
        "relative": {
            "baseline": [float(v) for v in report.relative.baseline],
            "delta": [float(v) for v in report.relative.delta],
        },
    }


def reports_to_jsonl(reports):
    return "".join(json.dumps(report_to_json_dict(r)) + "\n" for r in reports)


def reports_from_jsonl(text):
    reports = []
    for line in text.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        rel = RelativeSRACurve(
            baseline=np.asarray(doc["relative"]["baseline"]),
            delta=np.asarray(doc["relative"]["delta"]),
        )
        span = doc.get("window_span")
        reports.append(
            DiagnosticReport(
                relative=rel,
                distance=float(doc["distance"]),
                verdict=doc["verdict"],
                window_span=None if span is None else tuple(span),
                baseline_id=doc.get("baseline_id", "baseline"),
            )
        )
    return reports


class DriftMonitor(BaseEstimator):
    """Rolling nonparametric drift detector for detector timestamp streams.

    Fit on baseline inter-arrival times, then score probe windows by the
    worst relative pointwise difference between rank-aligned curves.

    Parameters
    ----------
    window_size : int, default=1000
        Probe window length in intervals (rolling mode).
    stride : int or None, default=None
        Window step in intervals; defaults to ``window_size`` (tiling).
    resample_len : int, default=1000
        Common curve length both windows are resampled to.
    threshold : float or None, default=None
        Drift threshold on the distance. ``None`` calibrates it during
        :meth:`fit` from null comparisons of split baseline halves.
    epsilon : float, default=1.0
        Additive guard (ns) in the relative-difference denominator.
    calibration_splits : int, default=100
        Number of null comparisons used when calibrating.
    calibration_quantile : float, default=0.95
        Null-distance quantile used as the calibrated threshold.
    random_state : int, default=0
        Seed of the calibration split shuffling.

    Attributes
    ----------
    baseline_ : ndarray
        Validated baseline intervals.
    threshold_ : float
        Effective decision threshold.
    config_ : MonitorConfig

    Examples
    --------
    >>> mon = DriftMonitor(window_size=2000, threshold=None).fit(baseline)  # doctest: +SKIP
    >>> reports = mon.predict(stream)  # doctest: +SKIP
    """

    def __init__(
        self,
        window_size=1000,
        stride=None,
        resample_len=DEFAULT_COMPARISON_LEN,
        threshold=None,
        epsilon=DEFAULT_EPSILON,
        calibration_splits=DEFAULT_CALIBRATION_SPLITS,
        calibration_quantile=DEFAULT_CALIBRATION_QUANTILE,
        random_state=0,
    ):
        self.window_size = window_size
        self.stride = stride
        self.resample_len = resample_len
        self.threshold = threshold
        self.epsilon = epsilon
        self.calibration_splits = calibration_splits
        self.calibration_quantile = calibration_quantile
        self.random_state = random_state

    def fit(self, X, y=None):
        """Store the baseline and calibrate the threshold if unset."""
        self.baseline_ = as_intervals(X, "baseline")
        if self.threshold is None:
            self.threshold_ = calibrate_threshold(
                self.baseline_,
                resample_len=self.resample_len,
                epsilon=self.epsilon,
                n_splits=self.calibration_splits,
                quantile=self.calibration_quantile,
                probe_size=int(self.window_size),
                seed=self.random_state,
            )
        else:
            self.threshold_ = float(self.threshold)
        self.config_ = MonitorConfig(
            window_size=int(self.window_size),
            stride=int(self.stride if self.stride is not None else self.window_size),
            resample_len=int(self.resample_len),
            threshold=self.threshold_,
            epsilon=float(self.epsilon),
        )
        return self

    def compare(self, X, window_span=None):
        """One-shot comparison of a probe interval sample."""
        check_is_fitted(self, "config_")
        return compare_windows(X, self.baseline_, self.config_, window_span=window_span)

    def predict(self, stream):
        """Rolling diagnosis of a timestamp stream; list of reports."""
        check_is_fitted(self, "config_")
        return rolling_diagnose(stream, self.baseline_, self.config_)

    def fit_predict(self, X, stream):
        return self.fit(X).predict(stream)
