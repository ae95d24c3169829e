import json

import numpy as np
import pytest

from sradiag import (
    ConfigError,
    DomainError,
    PoissonParams,
    PowerLawParams,
    SimConfig,
    build_sra,
    config_from_sidecar,
    draw_pareto,
    draw_truncated_pareto,
    ground_truth_sidecar,
    histogram_density,
    inter_arrivals,
    read_descriptor,
    simulate,
    simulate_piecewise,
    write_timestamps,
)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            SimConfig(dark_rate=0.0, duration=1e6)
        with pytest.raises(ConfigError):
            SimConfig(dark_rate=1e-3, duration=1e6, afterpulse_prob=1.0)
        with pytest.raises(ConfigError):
            SimConfig(dark_rate=1e-3, duration=1e6, ap_alpha=1.0)
        with pytest.raises(ConfigError):
            SimConfig(dark_rate=1e-3, duration=1e6, mode="gated")
        with pytest.raises(ConfigError):
            SimConfig(dark_rate=1e-3, duration=1e6, tail_truncation=50.0, ap_xmin=100.0)

    def test_sidecar_round_trip(self):
        cfg = SimConfig(
            dark_rate=1e-3,
            duration=1e8,
            seed=42,
            afterpulse_prob=0.3,
            ap_alpha=1.8,
            ap_xmin=120.0,
            dead_time=60.0,
            tail_truncation=24_000.0,
        )
        text = ground_truth_sidecar(cfg)
        assert config_from_sidecar(text) == cfg
        # the sidecar doubles as an acquisition descriptor
        meta = read_descriptor(text)
        assert meta.dead_time == 60.0

    def test_sidecar_without_ground_truth_rejected(self):
        with pytest.raises(ConfigError):
            config_from_sidecar(json.dumps({"mode": "free_run"}))


class TestDrawPareto:
    def test_boundary_u_near_one(self):
        assert draw_pareto(2.0, 1.0, 1.0 - 1e-12) == pytest.approx(1.0, rel=1e-9)

    def test_value(self):
        assert draw_pareto(2.0, 1.0, 0.01) == pytest.approx(100.0, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            draw_pareto(1.0, 1.0, 0.5)
        with pytest.raises(DomainError):
            draw_pareto(2.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            draw_pareto(2.0, -1.0, 0.5)

    def test_histogram_matches_density(self):
        # oracle: the decaying power-law density over the central decades
        rng = np.random.default_rng(100)
        samples = draw_pareto(1.2, 1.0, rng.random(1_000_000))
        hist = histogram_density(samples, 200, "log")
        params = PowerLawParams.normalized(1.2, 1.0)
        c = hist.centers
        sel = (c > 10.0) & (c < 1e4) & (hist.densities > 0)
        model = params.density(c[sel])
        dev = np.abs(hist.densities[sel] - model) / model
        assert dev.max() < 0.05

    def test_truncated_support(self):
        rng = np.random.default_rng(5)
        x = draw_truncated_pareto(1.5, 10.0, 500.0, rng.random(100_000))
        assert x.min() >= 10.0
        assert x.max() <= 500.0


class TestSimulate:
    def test_deterministic_byte_stream(self):
        cfg = SimConfig(dark_rate=1e-3, duration=1e7, seed=9, afterpulse_prob=0.2, dead_time=50.0)
        a = write_timestamps(simulate(cfg), "binary_le64")
        b = write_timestamps(simulate(cfg), "binary_le64")
        assert a == b

    def test_poisson_interarrival_mean(self):
        # oracle: analytic moments; the mean gap is 1/rate with SE 1/(rate*sqrt(N))
        cfg = SimConfig(dark_rate=1e-3, duration=1e8, seed=7)
        series = simulate(cfg)
        gaps = np.diff(series.ticks)
        se = 1e3 / np.sqrt(gaps.size)
        assert abs(gaps.mean() - 1e3) < 3 * se

    def test_exponentiality_of_rank_curve(self):
        # closed-form rank curve check at N = 1e5, where the band envelope
        # sits well under the 5% bound
        lam = 1e-6
        cfg = SimConfig(dark_rate=lam, duration=1.02e11, seed=3)
        series = simulate(cfg)
        gaps = inter_arrivals(series).intervals
        N = 100_000
        assert gaps.size >= N
        curve = build_sra(gaps[:N])
        n = np.arange(2, N + 1)
        model = PoissonParams(lam).sra_value(N, n)
        band = (n >= int(0.05 * N)) & (n <= int(0.95 * N))
        dev = np.abs(curve.values[1:] - model) / model
        assert dev[band].max() <= 0.05

    def test_dead_time_respected(self):
        cfg = SimConfig(dark_rate=5e-3, duration=1e7, seed=11, dead_time=300.0, afterpulse_prob=0.3, ap_xmin=350.0)
        series = simulate(cfg)
        assert np.diff(series.ticks).min() >= 300.0 - 1.0  # integer rounding slack

    def test_gated_ticks_are_gate_multiples(self):
        cfg = SimConfig(dark_rate=1e-4, duration=1e8, seed=13, mode="gated", gate_period=2500.0)
        series = simulate(cfg)
        assert len(series) > 100
        assert np.all(series.ticks % 2500 == 0)
        assert np.all(np.diff(series.ticks) >= 2500)

    def test_afterpulse_count_inflation(self):
        # branching mean: registered events = primaries / (1 - p) for small dead time
        p = 0.5
        base = SimConfig(dark_rate=1e-4, duration=1e9, seed=21)
        boosted = SimConfig(dark_rate=1e-4, duration=1e9, seed=21, afterpulse_prob=p, ap_xmin=10.0)
        n0 = len(simulate(base))
        n1 = len(simulate(boosted))
        expected = n0 / (1.0 - p)
        assert abs(n1 - expected) < 3 * np.sqrt(expected)

    def test_single_generation_inflation(self):
        # one generation only: factor (1 + p) instead of 1/(1 - p)
        p = 0.5
        base = SimConfig(dark_rate=1e-4, duration=1e9, seed=22)
        single = SimConfig(
            dark_rate=1e-4, duration=1e9, seed=22, afterpulse_prob=p, ap_xmin=10.0, branching=False
        )
        n0 = len(simulate(base))
        n1 = len(simulate(single))
        expected = n0 * (1.0 + p)
        assert abs(n1 - expected) < 3 * np.sqrt(expected)

    def test_truncation_shows_up_as_breakdown(self):
        # the analysis-side mirror of this check lives in the acceptance suite
        from sradiag import applicability_range

        cfg = SimConfig(
            dark_rate=1e-9,
            duration=2.4e13,
            seed=2,
            afterpulse_prob=0.9,
            ap_alpha=3.0,
            ap_xmin=1000.0,
            tail_truncation=24_000.0,
        )
        gaps = inter_arrivals(simulate(cfg), dedup=True).intervals
        gaps = gaps[gaps <= 1e8]  # drop the rare dark gaps between cascades
        curve = build_sra(gaps)
        n = np.arange(2, curve.N + 1)
        model = PowerLawParams.normalized(3.0, 1000.0).sra_value(curve.N, n)
        app = applicability_range(build_sra(curve.values[1:]), model)
        assert app.break_detected
        assert 8_000.0 <= app.break_point <= 60_000.0

    def test_piecewise_switches_rate(self):
        cfg = SimConfig(dark_rate=1e-3, duration=2e7, seed=17)
        series = simulate_piecewise(cfg, second_rate=2e-3, switch_fraction=0.5)
        ticks = series.ticks
        first = np.diff(ticks[ticks <= 1e7])
        second = np.diff(ticks[ticks > 1e7])
        assert abs(first.mean() - 1e3) < 5 * 1e3 / np.sqrt(first.size)
        assert abs(second.mean() - 5e2) < 5 * 5e2 / np.sqrt(second.size)
