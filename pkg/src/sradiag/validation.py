"""Input validation helpers.

Small cousins of ``sklearn.utils.validation`` specialised for the 1-D
event-time and interval arrays this package works with.
"""

import numpy as np

from .exceptions import DomainError, InsufficientDataError


def as_float_array(x, name="samples"):
    """Coerce to a 1-D float64 array of finite values."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DomainError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def check_min_length(x, n, name="samples"):
    if len(x) < n:
        raise InsufficientDataError(f"{name}: need at least {n} values, got {len(x)}")
    return x


def check_positive_array(x, name="intervals"):
    arr = as_float_array(x, name)
    if arr.size and arr.min() <= 0:
        raise DomainError(f"{name} must be strictly positive")
    return arr


def check_positive_scalar(v, name, allow_zero=False):
    v = float(v)
    if not np.isfinite(v):
        raise DomainError(f"{name} must be finite")
    if v < 0 or (v == 0 and not allow_zero):
        bound = "non-negative" if allow_zero else "positive"
        raise DomainError(f"{name} must be {bound}, got {v}")
    return v


def check_probability(v, name):
    """Validate a probability in the half-open interval [0, 1)."""
    v = float(v)
    if not (0.0 <= v < 1.0):
        raise DomainError(f"{name} must lie in [0, 1), got {v}")
    return v


def check_index(n, upper, name="n", lower=1):
    n = int(n)
    if not (lower <= n <= upper):
        raise IndexError(f"{name}={n} out of range [{lower}, {upper}]")
    return n


def as_intervals(data, name="intervals"):
    """Extract a positive 1-D float array from an array-like or an
    object exposing ``.intervals`` (InterArrivalSeries)."""
    payload = getattr(data, "intervals", data)
    return check_positive_array(payload, name)


def as_values(data, name="samples"):
    """Extract a 1-D float array from an array-like or an object
    exposing ``.values`` (SRACurve) or ``.intervals``."""
    payload = getattr(data, "values", None)
    if payload is None:
        payload = getattr(data, "intervals", data)
    return as_float_array(payload, name)
