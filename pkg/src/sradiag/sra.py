"""Ranked-amplitude curves.

An SRA curve is a sample sorted in descending order and read as a
function of its rank ``n = 1..N``. Sorting loses no information, so the
curve doubles as a lossless empirical distribution: the value at rank
``n`` sits at empirical CDF ``(N + 1 - n) / N``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, InsufficientDataError
from .validation import as_values, check_index

DEFAULT_COMPARISON_LEN = 1000


@dataclass(frozen=True)
class SRACurve:
    """Sample values ordered descending; rank 1 is the maximum."""

    values: np.ndarray
    unit_label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if v.size < 1:
            raise InsufficientDataError("SRA curve needs at least one value")
        if not np.all(np.isfinite(v)):
            raise DomainError("SRA values must be finite")
        if np.any(np.diff(v) > 0):
            raise DomainError("SRA values must be non-increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self):
        return self.values.size

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class ECDFPoint:
    x: float
    F: float


@dataclass(frozen=True)
class RelativeSRACurve:
    """Pointwise difference of two rank-aligned curves.

    ``baseline`` holds the reference curve values (descending) and
    ``delta`` the probe-minus-baseline differences at equal rank.
    """

    baseline: np.ndarray
    delta: np.ndarray
    baseline_label: str = "baseline"
    probe_label: str = "probe"

    def __post_init__(self):
        b = np.array(self.baseline, dtype=np.float64, copy=True).reshape(-1)
        d = np.array(self.delta, dtype=np.float64, copy=True).reshape(-1)
        if b.size != d.size:
            raise DomainError("baseline and delta must have equal length")
        if np.any(np.diff(b) > 0):
            raise DomainError("baseline values must be non-increasing")
        b.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "baseline", b)
        object.__setattr__(self, "delta", d)

    def __len__(self):
        return self.baseline.size


def build_sra(samples, unit_label=""):
    """Sort samples descending into an :class:`SRACurve` (stable sort)."""
    arr = as_values(samples)
    if arr.size == 0:
        raise InsufficientDataError("cannot build an SRA curve from an empty sample")
    ordered = np.sort(arr, kind="stable")[::-1].copy()
    return SRACurve(values=ordered, unit_label=unit_label)


def ecdf_from_sra(curve, n):
    """Empirical CDF point at rank ``n``: ``(x_n, (N + 1 - n) / N)``."""
    n = check_index(n, curve.N, name="rank")
    return ECDFPoint(x=float(curve.values[n - 1]), F=(curve.N + 1 - n) / curve.N)


def resample_sra(curve, m):
    """Resample a curve to ``m`` ranks by linear interpolation in the
    rank fraction ``(n - 1) / (N - 1)``.

    Endpoints are preserved exactly and ``m == N`` returns an identical
    curve; monotonicity survives interpolation.
    """
    m = int(m)
    if m < 2:
        raise InsufficientDataError("resample length must be >= 2")
    if curve.N < 2:
        raise InsufficientDataError("need at least 2 values to resample")
    if m == curve.N:
        return SRACurve(values=curve.values.copy(), unit_label=curve.unit_label)
    src = np.linspace(0.0, 1.0, curve.N)
    dst = np.linspace(0.0, 1.0, m)
    out = np.interp(dst, src, curve.values)
    out[0] = curve.values[0]
    out[-1] = curve.values[-1]
    # shield rank order against 1-ulp interpolation wobble at knots
    np.minimum.accumulate(out, out=out)
    return SRACurve(values=out, unit_label=curve.unit_label)


def relative_sra(probe, baseline, m=DEFAULT_COMPARISON_LEN):
    """Rank-aligned difference curve ``(baseline_k, probe_k - baseline_k)``.

    Both curves are resampled to the common length ``m`` first, which is
    how windows of unequal event counts become comparable.
    """
    p = resample_sra(probe, m).values
    b = resample_sra(baseline, m).values
    return RelativeSRACurve(
        baseline=b,
        delta=p - b,
        baseline_label=baseline.unit_label or "baseline",
        probe_label=probe.unit_label or "probe",
    )


# --- CSV ----------------------------------------------------------------

def sra_to_csv(curve):
    lines = ["n,x"]
    lines += [f"{n},{float(x)!r}" for n, x in enumerate(curve.values, start=1)]
    return "\n".join(lines) + "\n"


def sra_from_csv(text):
    rows = text.strip().splitlines()
    if not rows or rows[0].strip() != "n,x":
        raise DomainError("expected 'n,x' header")
    values = []
    for row in rows[1:]:
        _, x = row.split(",", 1)
        values.append(float(x))
    return SRACurve(values=np.asarray(values))


def relative_to_csv(rel):
    lines = ["baseline,delta"]
    lines += [f"{float(b)!r},{float(d)!r}" for b, d in zip(rel.baseline, rel.delta)]
    return "\n".join(lines) + "\n"


def relative_from_csv(text):
    rows = text.strip().splitlines()
    if not rows or rows[0].strip() != "baseline,delta":
        raise DomainError("expected 'baseline,delta' header")
    base, delta = [], []
    for row in rows[1:]:
        b, d = row.split(",", 1)
        base.append(float(b))
        delta.append(float(d))
    return RelativeSRACurve(baseline=np.asarray(base), delta=np.asarray(delta))
