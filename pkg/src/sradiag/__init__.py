"""Ranked-amplitude diagnostics for single-photon detector timestamp data.

The toolkit ingests detector time tags, builds ranked-amplitude (SRA)
curves that expose the sample's full empirical distribution, fits
competing dark-count/afterpulse noise models with breakdown detection,
and monitors live streams nonparametrically against a baseline. A
ground-truth detector simulator backs every fitter with a verifiable
oracle.
"""

__version__ = "0.1.0"

from .diagnostics import (
    DiagnosticReport,
    DriftMonitor,
    MonitorConfig,
    calibrate_threshold,
    compare_windows,
    reports_from_jsonl,
    reports_to_jsonl,
    rolling_diagnose,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    DuplicateTickError,
    InsufficientDataError,
    ModelMismatchError,
    OrderingError,
    ParseError,
    SradiagError,
)
from .fitting import (
    ApplicabilityRange,
    FitResult,
    HistogramDensity,
    NoiseModelEstimator,
    applicability_range,
    estimate_lambda,
    fit_density,
    fit_poisson_sra,
    fit_powerlaw_sra,
    fit_result_from_json,
    histogram_density,
)
from .models import (
    PoissonParams,
    PowerLawParams,
    SaturatingParams,
    params_from_json,
    params_to_json,
)
from .simulate import (
    SimConfig,
    config_from_sidecar,
    draw_pareto,
    draw_truncated_pareto,
    ground_truth_sidecar,
    simulate,
    simulate_piecewise,
)
from .sra import (
    ECDFPoint,
    RelativeSRACurve,
    SRACurve,
    build_sra,
    ecdf_from_sra,
    relative_from_csv,
    relative_sra,
    relative_to_csv,
    resample_sra,
    sra_from_csv,
    sra_to_csv,
)
from .timestamps import (
    AcquisitionMeta,
    InterArrivalSeries,
    TimestampSeries,
    inter_arrivals,
    meta_from_descriptor,
    meta_to_descriptor,
    parse_timestamps,
    read_descriptor,
    write_descriptor,
    write_timestamps,
)

__all__ = [
    "AcquisitionMeta",
    "ApplicabilityRange",
    "ConfigError",
    "ConvergenceError",
    "DiagnosticReport",
    "DivergenceError",
    "DomainError",
    "DriftMonitor",
    "DuplicateTickError",
    "ECDFPoint",
    "FitResult",
    "HistogramDensity",
    "InsufficientDataError",
    "InterArrivalSeries",
    "ModelMismatchError",
    "MonitorConfig",
    "NoiseModelEstimator",
    "OrderingError",
    "ParseError",
    "PoissonParams",
    "PowerLawParams",
    "RelativeSRACurve",
    "SRACurve",
    "SaturatingParams",
    "SimConfig",
    "SradiagError",
    "TimestampSeries",
    "applicability_range",
    "build_sra",
    "calibrate_threshold",
    "compare_windows",
    "config_from_sidecar",
    "draw_pareto",
    "draw_truncated_pareto",
    "ecdf_from_sra",
    "estimate_lambda",
    "fit_density",
    "fit_poisson_sra",
    "fit_powerlaw_sra",
    "fit_result_from_json",
    "ground_truth_sidecar",
    "histogram_density",
    "inter_arrivals",
    "meta_from_descriptor",
    "meta_to_descriptor",
    "params_from_json",
    "params_to_json",
    "parse_timestamps",
    "read_descriptor",
    "relative_from_csv",
    "relative_sra",
    "relative_to_csv",
    "reports_from_jsonl",
    "reports_to_jsonl",
    "resample_sra",
    "rolling_diagnose",
    "simulate",
    "simulate_piecewise",
    "sra_from_csv",
    "sra_to_csv",
    "write_descriptor",
    "write_timestamps",
]
