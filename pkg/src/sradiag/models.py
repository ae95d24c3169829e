"""The three inter-arrival noise hypotheses.

* ``PoissonParams`` — memoryless dark counts, density ``rate * exp(-rate*x)``.
* ``PowerLawParams`` — gated-mode afterpulsing, decaying power-law tail
  ``amplitude * t**(-alpha)`` on ``[x_min, inf)`` with ``alpha > 1``.
* ``SaturatingParams`` — nonlinear-relaxation hypothesis
  ``asymptote / (1 - exp(-rate*t))``, the solution of
  ``dP/dt = a*P + b*P**2`` with ``a = rate`` and ``b = -rate/asymptote``.

The first two admit closed-form rank curves (``sra_value``); the third is
checked against its defining ODE instead (``ode_residual``). All times are
nanoseconds and rates are per nanosecond.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DivergenceError, DomainError
from .validation import check_positive_scalar

POISSON = "poisson"
POWERLAW = "powerlaw"
SATURATING = "saturating"
MODEL_NAMES = (POISSON, POWERLAW, SATURATING)


def _check_ranks(n, N):
    """Ranks for closed-form curves: integer, 2 <= n <= N (rank 1 diverges)."""
    n_arr = np.asarray(n)
    if n_arr.size == 0:
        raise DomainError("empty rank array")
    if np.any(n_arr == 1):
        raise DivergenceError("closed-form rank curves diverge at rank 1")
    if np.any((n_arr < 1) | (n_arr > N)):
        raise IndexError(f"rank out of range [1, {N}]")
    return n_arr


@dataclass(frozen=True)
class PoissonParams:
    """Memoryless avalanche events at ``rate`` per nanosecond."""

    rate: float

    def __post_init__(self):
        check_positive_scalar(self.rate, "rate")

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0):
            raise DomainError("density is defined for x >= 0")
        out = self.rate * np.exp(-self.rate * x)
        return float(out) if out.ndim == 0 else out

    def sra_value(self, N, n):
        """Expected value at descending rank ``n`` out of ``N``:
        ``ln(N / (n - 1)) / rate``."""
        n = _check_ranks(n, N)
        out = np.log(N / (n - 1.0)) / self.rate
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PowerLawParams:
    """Decaying power-law tail ``amplitude * t**(-alpha)`` on ``[x_min, inf)``.

    ``alpha > 1`` keeps the tail normalizable and the rank-curve exponent
    ``1 / (alpha - 1)`` positive.
    """

    amplitude: float
    alpha: float
    x_min: float

    def __post_init__(self):
        check_positive_scalar(self.amplitude, "amplitude")
        check_positive_scalar(self.x_min, "x_min")
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha <= 1.0:
            raise DomainError(f"alpha must exceed 1, got {alpha}")

    @classmethod
    def normalized(cls, alpha, x_min):
        """Parameters whose density integrates to 1 over ``[x_min, inf)``."""
        alpha = float(alpha)
        x_min = float(x_min)
        if alpha <= 1.0:
            raise DomainError(f"alpha must exceed 1, got {alpha}")
        return cls(amplitude=(alpha - 1.0) * x_min ** (alpha - 1.0), alpha=alpha, x_min=x_min)

    def density(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < self.x_min):
            raise DomainError(f"density is defined for t >= x_min ({self.x_min})")
        out = self.amplitude * t ** (-self.alpha)
        return float(out) if out.ndim == 0 else out

    def sra_value(self, N, n):
        """Expected value at descending rank ``n`` out of ``N``:
        ``x_min * (N / (n - 1)) ** (1 / (alpha - 1))``."""
        n = _check_ranks(n, N)
        out = self.x_min * (N / (n - 1.0)) ** (1.0 / (self.alpha - 1.0))
        return float(out) if out.ndim == 0 else out

    def tail_mass(self):
        """Closed-form integral of the density over ``[x_min, inf)``."""
        return self.amplitude * self.x_min ** (1.0 - self.alpha) / (self.alpha - 1.0)


@dataclass(frozen=True)
class SaturatingParams:
    """Nonlinear-relaxation curve ``asymptote / (1 - exp(-rate*t))``.

    Strictly decreasing on ``t > 0`` with limit ``asymptote``; not
    normalizable on infinite support, so it is fitted as a shape with a
    free overall level rather than as a probability density.
    """

    asymptote: float
    rate: float

    def __post_init__(self):
        check_positive_scalar(self.asymptote, "asymptote")
        check_positive_scalar(self.rate, "rate")

    @property
    def linear_coeff(self):
        """``a`` in ``dP/dt = a*P + b*P**2``."""
        return self.rate

    @property
    def quadratic_coeff(self):
        """``b`` in ``dP/dt = a*P + b*P**2``."""
        return -self.rate / self.asymptote

    def density(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t <= 0):
            raise DomainError("curve diverges at t = 0; need t > 0")
        out = self.asymptote / -np.expm1(-self.rate * t)
        return float(out) if out.ndim == 0 else out

    def ode_residual(self, t, h):
        """Central-difference derivative at ``t`` minus ``a*P + b*P**2``.

        Vanishes to O(h^2) because the curve solves its defining ODE.
        """
        t = float(t)
        h = float(h)
        if h <= 0:
            raise DomainError("step h must be positive")
        if t - h <= 0:
            raise DomainError("need t - h > 0")
        dp = (self.density(t + h) - self.density(t - h)) / (2.0 * h)
        p = self.density(t)
        return dp - (self.linear_coeff * p + self.quadratic_coeff * p * p)


# --- parameter JSON ------------------------------------------------------

def params_to_json(params, scale=1.0):
    """Model parameters plus the multiplicative fit scale as a JSON dict."""
    if isinstance(params, PoissonParams):
        name, payload = POISSON, {"rate_per_ns": params.rate}
    elif isinstance(params, PowerLawParams):
        name, payload = POWERLAW, {
            "amplitude": params.amplitude,
            "alpha": params.alpha,
            "x_min_ns": params.x_min,
        }
    elif isinstance(params, SaturatingParams):
        name, payload = SATURATING, {
            "asymptote": params.asymptote,
            "rate_per_ns": params.rate,
        }
    else:
        raise DomainError(f"unknown parameter type {type(params).__name__}")
    return {"model": name, "params": payload, "scale": float(scale)}


def params_from_json(doc):
    """Inverse of :func:`params_to_json`; returns ``(params, scale)``."""
    try:
        name = doc["model"]
        payload = doc["params"]
        scale = float(doc.get("scale", 1.0))
        if name == POISSON:
            return PoissonParams(rate=float(payload["rate_per_ns"])), scale
        if name == POWERLAW:
            return (
                PowerLawParams(
                    amplitude=float(payload["amplitude"]),
                    alpha=float(payload["alpha"]),
                    x_min=float(payload["x_min_ns"]),
                ),
                scale,
            )
        if name == SATURATING:
            return (
                SaturatingParams(
                    asymptote=float(payload["asymptote"]),
                    rate=float(payload["rate_per_ns"]),
                ),
                scale,
            )
    except (KeyError, TypeError) as exc:
        raise DomainError(f"bad model document: {exc}") from exc
    raise DomainError(f"unknown model name {name!r}")
