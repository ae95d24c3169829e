"""Parameter estimation and model-breakdown detection.

Two routes estimate the same model families:

* the histogram route bins inter-arrivals into an empirical density and
  least-squares fits the model in log-density space (needs ~1e6 samples
  for stable tails);
* the ranked-amplitude route regresses the sorted sample directly against
  the closed-form rank curve (usable at 1e3..1e4 samples because every
  sample contributes a point).

Both report residual metrics in log space plus the detected applicability
range: the value interval over which the fitted curve tracks the data
within a relative tolerance.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    ConvergenceError,
    DomainError,
    InsufficientDataError,
    ModelMismatchError,
)
from .models import (
    MODEL_NAMES,
    POISSON,
    POWERLAW,
    SATURATING,
    PoissonParams,
    PowerLawParams,
    SaturatingParams,
    params_from_json,
    params_to_json,
)
from .sra import SRACurve, build_sra
from .validation import as_intervals, check_min_length, check_positive_scalar

LINEAR = "linear"
LOG = "log"

DEFAULT_REL_TOL = 0.25
DEFAULT_RUN_LEN = 5
DEFAULT_MAX_ITER = 500
DEFAULT_XTOL = 1e-8


@dataclass(frozen=True)
class HistogramDensity:
    """Empirical density: per-bin ``count / (total_count * bin_width)``."""

    bin_edges: np.ndarray
    densities: np.ndarray
    total_count: int

    def __post_init__(self):
        edges = np.array(self.bin_edges, dtype=np.float64, copy=True).reshape(-1)
        dens = np.array(self.densities, dtype=np.float64, copy=True).reshape(-1)
        if edges.size != dens.size + 1:
            raise DomainError("need len(bin_edges) == len(densities) + 1")
        if np.any(np.diff(edges) <= 0):
            raise DomainError("bin edges must be strictly increasing")
        if np.any(dens < 0):
            raise DomainError("densities must be non-negative")
        mass = float(np.sum(dens * np.diff(edges)))
        if mass > 1.0 + 1e-9:
            raise DomainError(f"binned mass {mass} exceeds 1")
        edges.setflags(write=False)
        dens.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "total_count", int(self.total_count))

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self):
        return np.diff(self.bin_edges)


@dataclass(frozen=True)
class ApplicabilityRange:
    """Value interval ``[t_lo, t_hi]`` over which a model tracks the data.

    ``break_point`` (present iff ``break_detected``) is the smallest data
    value from which the relative deviation stays above tolerance.
    """

    t_lo: float
    t_hi: float
    break_detected: bool
    break_point: float | None = None

    def __post_init__(self):
        if self.t_lo > self.t_hi:
            raise DomainError("need t_lo <= t_hi")
        if self.break_detected != (self.break_point is not None):
            raise DomainError("break_point must be present exactly when detected")


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters plus fit-quality metrics.

    ``scale`` is the multiplicative flexibility factor applied to the
    model curve during fitting; ``residual_rms_log`` is the RMS residual
    in log space over the points actually used.
    """

    model: str
    params: object
    scale: float
    residual_rms_log: float
    max_rel_dev: float
    applicability: ApplicabilityRange
    n_points_used: int

    def to_json_dict(self):
        doc = params_to_json(self.params, self.scale)
        app = self.applicability
        doc.update(
            {
                "residual_rms_log": self.residual_rms_log,
                "max_rel_dev": self.max_rel_dev,
                "applicability": {
                    "t_lo_ns": app.t_lo,
                    "t_hi_ns": app.t_hi,
                    "break_detected": app.break_detected,
                    "break_point_ns": app.break_point,
                },
                "n_points_used": self.n_points_used,
            }
        )
        return doc

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def fit_result_from_json(text):
    doc = json.loads(text) if isinstance(text, str) else text
    params, scale = params_from_json(doc)
    app = doc["applicability"]
    return FitResult(
        model=doc["model"],
        params=params,
        scale=scale,
        residual_rms_log=float(doc["residual_rms_log"]),
        max_rel_dev=float(doc["max_rel_dev"]),
        applicability=ApplicabilityRange(
            t_lo=float(app["t_lo_ns"]),
            t_hi=float(app["t_hi_ns"]),
            break_detected=bool(app["break_detected"]),
            break_point=None if app["break_point_ns"] is None else float(app["break_point_ns"]),
        ),
        n_points_used=int(doc["n_points_used"]),
    )


# --- histogram route ------------------------------------------------------

def histogram_density(samples, bin_count, binning=LOG):
    """Bin samples into an empirical density over ``[min, max]``."""
    bin_count = int(bin_count)
    if bin_count < 4:
        raise DomainError("bin_count must be >= 4")
    arr = as_intervals(samples)
    check_min_length(arr, bin_count)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        raise InsufficientDataError("all samples identical; cannot bin")
    if binning == LOG:
        edges = np.geomspace(lo, hi, bin_count + 1)
        edges[0], edges[-1] = lo, hi
    elif binning == LINEAR:
        edges = np.linspace(lo, hi, bin_count + 1)
    else:
        raise DomainError(f"unknown binning {binning!r}")
    counts, _ = np.histogram(arr, edges)
    densities = counts / (arr.size * np.diff(edges))
    return HistogramDensity(bin_edges=edges, densities=densities, total_count=arr.size)


def estimate_lambda(samples):
    """Maximum-likelihood exponential rate: ``1 / mean(intervals)``."""
    arr = as_intervals(samples)
    check_min_length(arr, 2)
    return PoissonParams(rate=1.0 / float(arr.mean()))


# --- applicability scan ----------------------------------------------------

def applicability_range(curve, model_values, rel_tol=DEFAULT_REL_TOL, run_len=DEFAULT_RUN_LEN):
    """Detect where per-rank data stop tracking per-rank model values.

    Scans from small values toward large ones; the break point is the
    smallest data value from which ``|data - model| / model`` stays above
    ``rel_tol`` through the largest value (at least ``run_len``
    consecutive ranks). Returns the compliant interval and the break
    point, all in data units.
    """
    data = curve.values if isinstance(curve, SRACurve) else np.asarray(curve, dtype=np.float64)
    model = np.asarray(model_values, dtype=np.float64)
    if data.shape != model.shape:
        raise DomainError(f"shape mismatch: data {data.shape} vs model {model.shape}")
    if data.ndim != 1 or data.size == 0:
        raise DomainError("need 1-D non-empty arrays")
    rel_tol = check_positive_scalar(rel_tol, "rel_tol")
    run_len = int(run_len)
    if run_len < 3:
        raise DomainError("run_len must be >= 3")
    if np.any(model <= 0):
        raise DomainError("model values must be positive")

    order = np.argsort(data, kind="stable")  # scan by increasing data value
    dev = np.abs(data[order] - model[order]) / model[order]
    return _scan_for_break(data[order], dev, rel_tol, run_len)


def _scan_for_break(coords_inc, dev, rel_tol, run_len):
    """Locate persistent breakdown along increasing scan coordinates.

    The break point is the smallest coordinate from which the deviation
    stays out of tolerance through the largest scanned coordinate, and a
    breakdown needs at least ``run_len`` consecutive violations. A
    transient excursion that recovers (sampling noise at the smallest
    ranks) is not a breakdown.
    """
    exceed = dev > rel_tol
    trailing = 0
    for flag in exceed[::-1]:
        if not flag:
            break
        trailing += 1
    t_lo = float(coords_inc[0])
    if trailing < run_len:
        return ApplicabilityRange(t_lo=t_lo, t_hi=float(coords_inc[-1]), break_detected=False)
    bp = float(coords_inc[exceed.size - trailing])
    return ApplicabilityRange(t_lo=min(t_lo, bp), t_hi=bp, break_detected=True, break_point=bp)


# --- ranked-amplitude route -------------------------------------------------

def fit_powerlaw_sra(curve, x_min, rel_tol=DEFAULT_REL_TOL, run_len=DEFAULT_RUN_LEN):
    """Single-slope power-law fit on the log rank curve.

    Regresses ``ln(x_n)`` on ``ln(N / (n - 1))`` for ranks 2..N with
    ``x_n >= x_min``; the slope ``s`` gives ``alpha = 1 + 1/s`` and the
    intercept the multiplicative scale relative to the closed form.
    """
    if not isinstance(curve, SRACurve):
        curve = build_sra(curve)
    if curve.N < 10:
        raise InsufficientDataError("need at least 10 samples for a tail fit")
    x_min = check_positive_scalar(x_min, "x_min")

    N = curve.N
    ranks = np.arange(2, N + 1)
    x = curve.values[1:]
    keep = x >= x_min
    if keep.sum() < 2:
        raise InsufficientDataError(f"fewer than 2 ranks at or above x_min={x_min}")
    z = np.log(N / (ranks[keep] - 1.0))
    y = np.log(x[keep])
    slope, intercept = np.polyfit(z, y, 1)
    if slope <= 0:
        raise ModelMismatchError(f"non-positive log-rank slope {slope:.3g}; data are not heavy-tailed")

    alpha = 1.0 + 1.0 / slope
    scale = math.exp(intercept) / x_min
    log_amplitude = math.log(alpha - 1.0) + (alpha - 1.0) * math.log(x_min)
    if log_amplitude > 700.0:
        raise ModelMismatchError(f"fitted exponent alpha={alpha:.3g} too large to represent")
    params = PowerLawParams.normalized(alpha=alpha, x_min=x_min)

    fitted = np.exp(intercept + slope * z)
    resid = y - (intercept + slope * z)
    used = SRACurve(values=x[keep])
    return FitResult(
        model=POWERLAW,
        params=params,
        scale=scale,
        residual_rms_log=float(np.sqrt(np.mean(resid**2))),
        max_rel_dev=float(np.max(np.abs(x[keep] - fitted) / fitted)),
        applicability=applicability_range(used, fitted, rel_tol, run_len),
        n_points_used=int(keep.sum()),
    )


def fit_poisson_sra(curve, rel_tol=DEFAULT_REL_TOL, run_len=DEFAULT_RUN_LEN):
    """Exponential fit on the rank curve: MLE rate plus a log-space
    least-squares scale factor."""
    if not isinstance(curve, SRACurve):
        curve = build_sra(curve)
    if curve.N < 10:
        raise InsufficientDataError("need at least 10 samples")
    if curve.values[-1] <= 0:
        raise DomainError("rank-curve fit needs strictly positive samples")
    params = estimate_lambda(curve.values)

    N = curve.N
    ranks = np.arange(2, N + 1)
    x = curve.values[1:]
    model = params.sra_value(N, ranks)
    log_resid = np.log(x) - np.log(model)
    scale = math.exp(float(np.mean(log_resid)))
    fitted = scale * model
    resid = np.log(x) - np.log(fitted)
    return FitResult(
        model=POISSON,
        params=params,
        scale=scale,
        residual_rms_log=float(np.sqrt(np.mean(resid**2))),
        max_rel_dev=float(np.max(np.abs(x - fitted) / fitted)),
        applicability=applicability_range(SRACurve(values=x), fitted, rel_tol, run_len),
        n_points_used=int(N - 1),
    )


# --- log-density least squares ----------------------------------------------

def _density_model(model, x_min):
    """Return (pack_init, unpack, log_model) for a model family.

    Parameters are fitted in log space to keep them positive. The power
    law is kept normalized on [x_min, inf) so its level is carried by the
    scale factor alone; the saturating curve is unnormalizable, so its
    level is carried by the asymptote and scale stays fixed at 1.
    """
    if model == POISSON:

        def log_model(theta, t):
            return theta[0] + theta[1] - np.exp(theta[1]) * t

        def unpack(theta):
            return PoissonParams(rate=math.exp(theta[1])), math.exp(theta[0])

        def pack(params, scale):
            return np.array([math.log(scale), math.log(params.rate)])

    elif model == POWERLAW:

        def log_model(theta, t):
            alpha = 1.0 + np.exp(theta[1])
            return theta[0] + theta[1] + (alpha - 1.0) * math.log(x_min) - alpha * np.log(t)

        def unpack(theta):
            alpha = 1.0 + math.exp(theta[1])
            return PowerLawParams.normalized(alpha=alpha, x_min=x_min), math.exp(theta[0])

        def pack(params, scale):
            return np.array([math.log(scale), math.log(params.alpha - 1.0)])

    elif model == SATURATING:

        def log_model(theta, t):
            return theta[0] - np.log(-np.expm1(-np.exp(theta[1]) * t))

        def unpack(theta):
            return SaturatingParams(asymptote=math.exp(theta[0]), rate=math.exp(theta[1])), 1.0

        def pack(params, scale):
            return np.array([math.log(params.asymptote * scale), math.log(params.rate)])

    else:
        raise DomainError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
    return pack, unpack, log_model


def _density_init(model, hist, x_min):
    """Deterministic data-driven start values from the histogram alone."""
    dens = hist.densities
    t = hist.centers
    w = hist.widths
    nz = dens > 0
    tn, dn = t[nz], dens[nz]
    if model == POISSON:
        mass = dens * w
        mean = float(np.sum(mass * t) / np.sum(mass))
        return PoissonParams(rate=1.0 / mean), 1.0
    if model == POWERLAW:
        slope, intercept = np.polyfit(np.log(tn), np.log(dn), 1)
        alpha = max(-float(slope), 1.05)
        params = PowerLawParams.normalized(alpha=alpha, x_min=x_min)
        level = math.exp(intercept) * tn[0] ** (-alpha) / params.density(max(tn[0], x_min))
        return params, max(level, 1e-12)
    # saturating: level from the flat tail, knee from the first populated bin
    tail = dn[-max(3, dn.size // 5):]
    return SaturatingParams(asymptote=float(tail.mean()), rate=1.0 / float(tn[0])), 1.0


def fit_density(
    hist,
    model,
    init=None,
    x_min=None,
    max_iter=DEFAULT_MAX_ITER,
    xtol=DEFAULT_XTOL,
    rel_tol=DEFAULT_REL_TOL,
    run_len=DEFAULT_RUN_LEN,
):
    """Least-squares fit of a model to a histogram in log-density space.

    Empty bins are excluded rather than floored. Raises
    :class:`ConvergenceError` (carrying the best iterate) if the solver
    exhausts ``max_iter`` residual evaluations.
    """
    if model not in MODEL_NAMES:
        raise DomainError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
    nz = hist.densities > 0
    if nz.sum() < 6:
        raise InsufficientDataError("need at least 6 non-empty bins")
    t = hist.centers[nz]
    log_dens = np.log(hist.densities[nz])
    if x_min is None:
        x_min = float(hist.bin_edges[0])
    x_min = check_positive_scalar(x_min, "x_min")

    pack, unpack, log_model = _density_model(model, x_min)
    if init is None:
        theta0 = pack(*_density_init(model, hist, x_min))
    else:
        theta0 = pack(init, 1.0)

    # log-parameter bounds keep every exp() finite without constraining any
    # physically sensible fit
    theta0 = np.clip(theta0, -34.9, 34.9)
    result = least_squares(
        lambda th: log_model(th, t) - log_dens,
        theta0,
        method="trf",
        bounds=(-35.0, 35.0),
        xtol=xtol,
        max_nfev=int(max_iter),
    )
    params, scale = unpack(result.x)
    if result.status == 0:
        raise ConvergenceError(
            f"{model} density fit exhausted {max_iter} evaluations",
            best=params_to_json(params, scale),
        )

    fitted = np.exp(log_model(result.x, t))
    resid = log_model(result.x, t) - log_dens
    data = hist.densities[nz]
    return FitResult(
        model=model,
        params=params,
        scale=scale,
        residual_rms_log=float(np.sqrt(np.mean(resid**2))),
        max_rel_dev=float(np.max(np.abs(data - fitted) / fitted)),
        applicability=_applicability_over_bins(t, data, fitted, rel_tol, run_len),
        n_points_used=int(nz.sum()),
    )


def _applicability_over_bins(t, data, model, rel_tol, run_len):
    """Applicability scan over histogram bins: deviation on densities,
    scan coordinate is the bin time."""
    return _scan_for_break(t, np.abs(data - model) / model, rel_tol, run_len)


# --- estimator facade --------------------------------------------------------

class NoiseModelEstimator(BaseEstimator):
    """Fit a dark-count/afterpulse noise model to inter-arrival times.

    Parameters
    ----------
    model : {"poisson", "powerlaw", "saturating"}, default="poisson"
        Model family to fit.
    route : {"histogram", "sra"}, default="histogram"
        "histogram" bins the data and fits the empirical density;
        "sra" fits the sorted sample against the closed-form rank curve
        (available for "poisson" and "powerlaw" only, but usable with
        orders of magnitude fewer samples).
    bins : int, default=100
        Histogram bin count (histogram route).
    binning : {"log", "linear"}, default="log"
        Histogram bin spacing (histogram route).
    x_min : float or None, default=None
        Lower support bound in ns (power law), typically the detector
        dead time. Defaults to the smallest sample.
    rel_tol : float, default=0.25
        Relative tolerance of the applicability scan.
    run_len : int, default=5
        Consecutive out-of-tolerance ranks that constitute a breakdown.
    max_iter : int, default=500
        Residual-evaluation budget of the density solver.
    xtol : float, default=1e-8
        Relative parameter tolerance of the density solver.

    Attributes
    ----------
    result_ : FitResult
    params_ : model parameter object
    scale_ : float
    curve_ : SRACurve, only for ``route="sra"``
    histogram_ : HistogramDensity, only for ``route="histogram"``

    Examples
    --------
    >>> est = NoiseModelEstimator(model="powerlaw", route="sra", x_min=100.0)
    >>> est.fit(intervals).params_.alpha  # doctest: +SKIP
    """

    def __init__(
        self,
        model=POISSON,
        route="histogram",
        bins=100,
        binning=LOG,
        x_min=None,
        rel_tol=DEFAULT_REL_TOL,
        run_len=DEFAULT_RUN_LEN,
        max_iter=DEFAULT_MAX_ITER,
        xtol=DEFAULT_XTOL,
    ):
        self.model = model
        self.route = route
        self.bins = bins
        self.binning = binning
        self.x_min = x_min
        self.rel_tol = rel_tol
        self.run_len = run_len
        self.max_iter = max_iter
        self.xtol = xtol

    def fit(self, X, y=None):
        """Fit the configured model to a 1-D array of inter-arrival ns."""
        intervals = as_intervals(X)
        if self.route == "sra":
            curve = build_sra(intervals)
            if self.model == POWERLAW:
                x_min = self.x_min if self.x_min is not None else float(intervals.min())
                result = fit_powerlaw_sra(curve, x_min, self.rel_tol, self.run_len)
            elif self.model == POISSON:
                result = fit_poisson_sra(curve, self.rel_tol, self.run_len)
            else:
                raise DomainError("the saturating model has no closed-form rank curve; use route='histogram'")
            self.curve_ = curve
        elif self.route == "histogram":
            hist = histogram_density(intervals, self.bins, self.binning)
            result = fit_density(
                hist,
                self.model,
                x_min=self.x_min,
                max_iter=self.max_iter,
                xtol=self.xtol,
                rel_tol=self.rel_tol,
                run_len=self.run_len,
            )
            self.histogram_ = hist
        else:
            raise DomainError(f"unknown route {self.route!r}; expected 'sra' or 'histogram'")
        self.result_ = result
        self.params_ = result.params
        self.scale_ = result.scale
        return self

    def predict(self, X):
        """Evaluate the fitted, scaled model curve.

        For the histogram route ``X`` is an array of times (ns) and the
        return value the fitted density there; for the sra route ``X``
        is an array of ranks and the return value the expected sorted
        values at those ranks.
        """
        check_is_fitted(self, "result_")
        if self.route == "histogram":
            t = np.asarray(X, dtype=np.float64)
            return self.scale_ * self.params_.density(t)
        ranks = np.asarray(X)
        return self.scale_ * self.params_.sra_value(self.curve_.N, ranks)
