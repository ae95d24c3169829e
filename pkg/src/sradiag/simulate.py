"""Synthetic detector streams with known ground truth.

Primary (dark) events form a homogeneous Poisson process. Every
registered detection may trigger one delayed re-emission event whose
delay follows a decaying power-law tail; re-emissions branch recursively
by default. A non-paralyzable hold-off discards events that land within
the dead time of the last registered detection, and gated mode snaps the
surviving times up to the next gate boundary with at most one count per
gate.

The generator is the ground-truth oracle for every fitter in this
package: each output stream can be written next to a JSON sidecar echoing
the exact configuration that produced it.
"""

import heapq
import json
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ConfigError, DomainError
from .timestamps import FREE_RUN, GATED, AcquisitionMeta, TimestampSeries

_UNIFORM_BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Ground-truth generator settings. Times in ns, rates per ns."""

    dark_rate: float
    duration: float
    seed: int = 0
    afterpulse_prob: float = 0.0
    ap_alpha: float = 2.0
    ap_xmin: float = 100.0
    dead_time: float = 0.0
    mode: str = FREE_RUN
    gate_period: float | None = None
    tail_truncation: float | None = None
    branching: bool = True
    source_label: str = "sim"

    def __post_init__(self):
        if not (self.dark_rate > 0 and np.isfinite(self.dark_rate)):
            raise ConfigError(f"dark_rate must be positive, got {self.dark_rate}")
        if not (self.duration > 0 and np.isfinite(self.duration)):
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if not (0.0 <= self.afterpulse_prob < 1.0):
            raise ConfigError("afterpulse_prob must lie in [0, 1)")
        if self.ap_alpha <= 1.0:
            raise ConfigError("ap_alpha must exceed 1")
        if self.ap_xmin <= 0:
            raise ConfigError("ap_xmin must be positive")
        if self.dead_time < 0:
            raise ConfigError("dead_time must be >= 0")
        if self.mode not in (FREE_RUN, GATED):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == GATED:
            if not (self.gate_period and self.gate_period > 0):
                raise ConfigError("gated mode requires gate_period > 0")
            if not float(self.gate_period).is_integer():
                raise ConfigError("gate_period must be a whole number of ns (ticks are integer ns)")
        if self.tail_truncation is not None and self.tail_truncation <= self.ap_xmin:
            raise ConfigError("tail_truncation must exceed ap_xmin")

    def acquisition_meta(self):
        return AcquisitionMeta(
            mode=self.mode,
            gate_period=self.gate_period,
            dead_time=self.dead_time,
            source_label=self.source_label,
        )

    def to_json_dict(self):
        return {
            "dark_rate_per_ns": self.dark_rate,
            "duration_ns": self.duration,
            "seed": self.seed,
            "afterpulse_prob": self.afterpulse_prob,
            "ap_alpha": self.ap_alpha,
            "ap_xmin_ns": self.ap_xmin,
            "dead_time_ns": self.dead_time,
            "mode": self.mode,
            "gate_period_ns": self.gate_period,
            "tail_truncation_ns": self.tail_truncation,
            "branching": self.branching,
            "source_label": self.source_label,
        }

    @classmethod
    def from_json_dict(cls, doc):
        try:
            return cls(
                dark_rate=float(doc["dark_rate_per_ns"]),
                duration=float(doc["duration_ns"]),
                seed=int(doc.get("seed", 0)),
                afterpulse_prob=float(doc.get("afterpulse_prob", 0.0)),
                ap_alpha=float(doc.get("ap_alpha", 2.0)),
                ap_xmin=float(doc.get("ap_xmin_ns", 100.0)),
                dead_time=float(doc.get("dead_time_ns", 0.0)),
                mode=doc.get("mode", FREE_RUN),
                gate_period=doc.get("gate_period_ns"),
                tail_truncation=doc.get("tail_truncation_ns"),
                branching=bool(doc.get("branching", True)),
                source_label=str(doc.get("source_label", "sim")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad simulator sidecar: {exc}") from exc


def ground_truth_sidecar(config):
    """Descriptor-compatible sidecar text embedding the full config."""
    doc = {
        "mode": config.mode,
        "gate_period_ns": config.gate_period,
        "dead_time_ns": config.dead_time,
        "source_label": config.source_label,
        "sim_config": config.to_json_dict(),
    }
    return json.dumps(doc, indent=2) + "\n"


def config_from_sidecar(text):
    doc = json.loads(text)
    if "sim_config" not in doc:
        raise ConfigError("sidecar carries no sim_config section")
    return SimConfig.from_json_dict(doc["sim_config"])


def draw_pareto(alpha, x_min, u):
    """Inverse-survival sample of the power-law tail: ``x_min * u**(-1/(alpha-1))``.

    ``u`` is a uniform variate in (0, 1); ``u -> 1`` gives ``x_min``.
    """
    if alpha <= 1.0:
        raise DomainError("alpha must exceed 1")
    if x_min <= 0:
        raise DomainError("x_min must be positive")
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any((u_arr <= 0.0) | (u_arr >= 1.0)):
        raise DomainError("u must lie strictly inside (0, 1)")
    out = x_min * u_arr ** (-1.0 / (alpha - 1.0))
    return float(out) if out.ndim == 0 else out


def draw_truncated_pareto(alpha, x_min, t_c, u):
    """Power-law tail sample conditioned on not exceeding ``t_c``."""
    if t_c <= x_min:
        raise DomainError("t_c must exceed x_min")
    if alpha <= 1.0:
        raise DomainError("alpha must exceed 1")
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any((u_arr <= 0.0) | (u_arr >= 1.0)):
        raise DomainError("u must lie strictly inside (0, 1)")
    s_tc = (x_min / t_c) ** (alpha - 1.0)
    out = x_min * (s_tc + u_arr * (1.0 - s_tc)) ** (-1.0 / (alpha - 1.0))
    return float(out) if out.ndim == 0 else out


class _UniformTap:
    """Sequential uniform variates pulled from a generator in blocks.

    Order of consumption equals generator order, so draws stay attached
    to events in time order.
    """

    def __init__(self, rng):
        self._rng = rng
        self._buf = rng.random(_UNIFORM_BLOCK)
        self._i = 0

    def __call__(self):
        if self._i >= self._buf.size:
            self._buf = self._rng.random(_UNIFORM_BLOCK)
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u


def _primary_times(rng, rate, duration):
    """Homogeneous Poisson arrivals on [0, duration], drawn first."""
    mean_count = rate * duration
    est = int(mean_count + 6.0 * np.sqrt(mean_count) + 16.0)
    gaps = rng.exponential(1.0 / rate, est)
    times = np.cumsum(gaps)
    while times.size == 0 or times[-1] < duration:
        more = rng.exponential(1.0 / rate, max(16, est // 8))
        times = np.concatenate([times, (times[-1] if times.size else 0.0) + np.cumsum(more)])
    return times[times <= duration]


def simulate(config):
    """Generate one detector stream; deterministic for a fixed config.

    Returns a :class:`TimestampSeries` whose ticks are integer ns
    (rounded in free-run mode, snapped up to gate boundaries in gated
    mode).
    """
    rng = np.random.default_rng(config.seed)
    primaries = _primary_times(rng, config.dark_rate, config.duration)
    uniforms = _UniformTap(rng)

    p_ap = config.afterpulse_prob
    dead = config.dead_time
    duration = config.duration
    inv_exp = -1.0 / (config.ap_alpha - 1.0)
    if config.tail_truncation is None:
        s_tc = 0.0
    else:
        s_tc = (config.ap_xmin / config.tail_truncation) ** (config.ap_alpha - 1.0)
    x_min = config.ap_xmin
    branching = config.branching

    registered = []
    push, pop = heapq.heappush, heapq.heappop
    pending = []  # re-emission events not yet processed, (time, can_spawn)
    i, n_prim = 0, primaries.size
    last = -np.inf
    while True:
        if pending and (i >= n_prim or pending[0][0] < primaries[i]):
            t, can_spawn = pop(pending)
        elif i < n_prim:
            t, can_spawn = primaries[i], True
            i += 1
        else:
            break
        if t > duration:
            continue
        if t - last < dead:
            continue  # hold-off: discarded, spawns nothing, extends nothing
        last = t
        registered.append(t)
        if can_spawn and p_ap > 0.0 and uniforms() < p_ap:
            delay = x_min * (s_tc + uniforms() * (1.0 - s_tc)) ** inv_exp
            push(pending, (t + delay, branching))

    times = np.asarray(registered, dtype=np.float64)
    if config.mode == GATED:
        gate = config.gate_period
        ticks = np.ceil(times / gate).astype(np.int64) * np.int64(round(gate))
        ticks = np.unique(ticks)  # at most one count per gate
    else:
        ticks = np.rint(times).astype(np.int64)
    return TimestampSeries(ticks=ticks, meta=config.acquisition_meta())


def simulate_piecewise(config, second_rate, switch_fraction=0.5):
    """Two-segment stream whose dark rate switches mid-acquisition.

    Segments are generated independently (derived seeds) and the second
    one is shifted to start at the switch point.
    """
    if not (0.0 < switch_fraction < 1.0):
        raise ConfigError("switch_fraction must lie in (0, 1)")
    t_switch = config.duration * switch_fraction
    first = simulate(replace(config, duration=t_switch))
    second = simulate(
        replace(
            config,
            dark_rate=second_rate,
            duration=config.duration - t_switch,
            seed=config.seed + 0x5EED,
        )
    )
    shifted = second.ticks + np.int64(round(t_switch))
    ticks = np.concatenate([first.ticks, shifted])
    return TimestampSeries(ticks=ticks, meta=config.acquisition_meta())
