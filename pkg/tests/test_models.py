import math

import numpy as np
import pytest
from scipy.integrate import quad

from sradiag import (
    DivergenceError,
    DomainError,
    PoissonParams,
    PowerLawParams,
    SaturatingParams,
    build_sra,
    params_from_json,
    params_to_json,
)


class TestPoisson:
    def test_density_values(self):
        assert PoissonParams(1.0).density(0.0) == 1.0
        assert PoissonParams(2.0).density(0.0) == 2.0
        assert PoissonParams(1.0).density(1.0) == pytest.approx(math.exp(-1), rel=1e-12)

    def test_density_domain(self):
        with pytest.raises(DomainError):
            PoissonParams(1.0).density(-0.1)

    def test_normalization(self):
        total, err = quad(PoissonParams(0.37).density, 0, np.inf)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_sra_values(self):
        p = PoissonParams(1.0)
        assert p.sra_value(100, 2) == pytest.approx(math.log(100), rel=1e-12)
        assert p.sra_value(100, 100) == pytest.approx(math.log(100 / 99), rel=1e-12)

    def test_sra_divergence_and_bounds(self):
        p = PoissonParams(1.0)
        with pytest.raises(DivergenceError):
            p.sra_value(100, 1)
        with pytest.raises(IndexError):
            p.sra_value(100, 101)
        with pytest.raises(IndexError):
            p.sra_value(100, 0)

    def test_invalid_rate(self):
        with pytest.raises(DomainError):
            PoissonParams(0.0)
        with pytest.raises(DomainError):
            PoissonParams(float("inf"))


class TestPowerLaw:
    def test_density_values(self):
        assert PowerLawParams(1.0, 2.0, 1.0).density(1.0) == 1.0
        assert PowerLawParams(1.0, 2.0, 1.0).density(10.0) == pytest.approx(0.01, rel=1e-12)
        assert PowerLawParams(3.0, 1.2, 1.0).density(2.0) == pytest.approx(3 * 2**-1.2, rel=1e-12)

    def test_density_domain(self):
        with pytest.raises(DomainError):
            PowerLawParams(1.0, 2.0, 1.0).density(0.5)

    def test_tail_integral_matches_quadrature(self):
        p = PowerLawParams(2.5, 1.7, 3.0)
        total, err = quad(p.density, p.x_min, np.inf)
        assert total == pytest.approx(p.tail_mass(), rel=1e-6)
        norm = PowerLawParams.normalized(1.2, 2.0)
        assert norm.tail_mass() == pytest.approx(1.0, rel=1e-12)

    def test_sra_values(self):
        assert PowerLawParams(1.0, 2.0, 1.0).sra_value(100, 2) == pytest.approx(100.0, rel=1e-12)
        assert PowerLawParams(1.0, 2.0, 1.0).sra_value(100, 100) == pytest.approx(100 / 99, rel=1e-12)
        assert PowerLawParams(1.0, 1.2, 2.0).sra_value(1000, 11) == pytest.approx(2e10, rel=1e-12)

    def test_alpha_must_exceed_one(self):
        with pytest.raises(DomainError):
            PowerLawParams(1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            PowerLawParams(1.0, 0.8, 1.0)

    def test_sra_divergence(self):
        with pytest.raises(DivergenceError):
            PowerLawParams(1.0, 2.0, 1.0).sra_value(10, 1)


class TestSaturating:
    def test_asymptote(self):
        p = SaturatingParams(1.0, 1.0)
        assert p.density(1e9) == pytest.approx(1.0, rel=1e-12)

    def test_values(self):
        assert SaturatingParams(2.0, 1.0).density(math.log(2)) == pytest.approx(4.0, rel=1e-12)
        assert SaturatingParams(1.0, 1.0).density(1.0) == pytest.approx(1 / (1 - math.exp(-1)), rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            SaturatingParams(1.0, 1.0).density(0.0)
        with pytest.raises(DomainError):
            SaturatingParams(1.0, 1.0).density(-1.0)

    def test_strictly_decreasing(self):
        p = SaturatingParams(3.0, 0.5)
        t = np.linspace(0.01, 50, 500)
        assert np.all(np.diff(p.density(t)) < 0)

    def test_ode_coefficients(self):
        p = SaturatingParams(3.0, 0.5)
        assert p.linear_coeff == 0.5
        assert p.quadratic_coeff == pytest.approx(-0.5 / 3.0)

    # the curve solves dP/dt = a P + b P^2; verified by symbolic
    # substitution: dP/dt = -A B e^{-Bt} / (1 - e^{-Bt})^2 = B P - (B/A) P^2
    def test_ode_residual_examples(self):
        assert abs(SaturatingParams(1.0, 1.0).ode_residual(1.0, 1e-4)) < 1e-6
        assert abs(SaturatingParams(3.0, 0.5).ode_residual(2.0, 1e-4)) < 1e-6

    def test_ode_residual_quadratic_in_h(self):
        p = SaturatingParams(2.0, 0.7)
        r1 = abs(p.ode_residual(1.5, 1e-3))
        r2 = abs(p.ode_residual(1.5, 1e-4))
        assert r2 < r1 / 50  # central differences shrink ~quadratically

    def test_ode_residual_domain(self):
        p = SaturatingParams(1.0, 1.0)
        with pytest.raises(DomainError):
            p.ode_residual(1e-5, 1e-4)
        with pytest.raises(DomainError):
            p.ode_residual(1.0, 0.0)


@pytest.mark.parametrize(
    "params",
    [PoissonParams(0.31), PowerLawParams(4.0, 2.2, 7.0)],
    ids=["poisson", "powerlaw"],
)
def test_sra_curves_strictly_decreasing(params):
    n = np.arange(2, 500 + 1)
    values = params.sra_value(500, n)
    assert np.all(np.diff(values) < 0)


class TestMonteCarloConsistency:
    """Empirical rank curves converge on the closed forms as N grows."""

    @staticmethod
    def _max_dev_exp(N, seed):
        rng = np.random.default_rng(seed)
        curve = build_sra(rng.exponential(1.0, N))
        n = np.arange(2, N + 1)
        model = PoissonParams(1.0).sra_value(N, n)
        band = (n >= int(0.05 * N)) & (n <= int(0.95 * N))
        return (np.abs(curve.values[1:] - model) / model)[band].max()

    @staticmethod
    def _max_dev_pareto(N, seed):
        rng = np.random.default_rng(seed)
        samples = 1.0 * rng.random(N) ** (-1.0 / (2.0 - 1.0))
        curve = build_sra(samples)
        n = np.arange(2, N + 1)
        model = PowerLawParams(1.0, 2.0, 1.0).sra_value(N, n)
        band = (n >= int(0.05 * N)) & (n <= int(0.95 * N))
        return (np.abs(curve.values[1:] - model) / model)[band].max()

    def test_deviation_shrinks_with_n(self):
        for fn in (self._max_dev_exp, self._max_dev_pareto):
            small = np.median([fn(1_000, s) for s in range(5)])
            large = np.median([fn(10_000, s) for s in range(5)])
            assert large < small


class TestParamsJSON:
    @pytest.mark.parametrize(
        "params,scale",
        [
            (PoissonParams(1e-3), 1.0),
            (PowerLawParams(3.0, 1.2, 100.0), 2.5),
            (SaturatingParams(1e-4, 0.01), 1.0),
        ],
    )
    def test_round_trip(self, params, scale):
        doc = params_to_json(params, scale)
        back, back_scale = params_from_json(doc)
        assert back == params
        assert back_scale == scale

    def test_schema(self):
        doc = params_to_json(PoissonParams(2.0), 1.5)
        assert doc == {"model": "poisson", "params": {"rate_per_ns": 2.0}, "scale": 1.5}

    def test_unknown_model(self):
        with pytest.raises(DomainError):
            params_from_json({"model": "weibull", "params": {}, "scale": 1})
