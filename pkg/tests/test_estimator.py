"""Tests for the spectral estimator of L v = <v, u v0>."""

import dataclasses
import math

import numpy as np
import pytest

from levyma.errors import ConfigError, DomainError, IntegrityError
from levyma.estimator import (
    BandwidthSchedule,
    Ecf,
    EstimatorSettings,
    SmoothingKernel,
    band_nodes,
    confidence_interval,
    ecf,
    err_W,
    estimate_uv0,
    estimate_uv1,
    fit,
    functional,
    psi_tilde,
    true_functional,
)
from levyma.fieldsim import simulate_field
from levyma.grids import LogGridFn, LogGridSpec, RealGridSpec, relative_l2
from levyma.levy import LevyModel
from levyma.testfunctions import gaussian_bump, zero
from levyma.window import Window


class TestSchedules:
    """Tests for the smoothing kernel and the bandwidth schedule."""

    def test_kernel_transform_is_indicator(self):
        k = SmoothingKernel(0.5)
        np.testing.assert_array_equal(k.ft([-3.0, -2.0, 0.0, 1.9, 2.1]), [0, 1, 1, 1, 0])

    def test_kernel_at_origin(self):
        """sin(x / b) / (pi x) tends to 1 / (pi b)."""
        k = SmoothingKernel(0.25)
        assert k(0.0) == pytest.approx(4 / np.pi)
        assert k(1e-9) == pytest.approx(4 / np.pi)

    def test_nonpositive_bandwidth(self):
        with pytest.raises(ConfigError):
            SmoothingKernel(0.0)

    def test_bandwidth_floor_is_opt_in(self):
        """Without a floor b_n keeps shrinking; with one, large samples sit on it."""
        schedule = BandwidthSchedule()
        assert schedule.floor == 0.0
        assert schedule(10**6) < schedule(10**4) < schedule(100)
        assert schedule(10**6) == schedule.raw(10**6)
        floored = BandwidthSchedule(floor=0.1)
        assert floored(10**6) == 0.1
        assert floored.raw(10**6) < 0.1

    def test_eps_range(self):
        with pytest.raises(ConfigError) as exc:
            BandwidthSchedule(eps=0.5)
        assert exc.value.key == "estimator.eps"


class TestEcf:
    """Tests for the empirical characteristic function."""

    def test_symmetric_two_point_sample(self):
        """For {+1, -1}: psi_hat = cos t and theta_hat = i sin t."""
        t = np.linspace(-3, 3, 13)
        e = ecf(np.array([1.0, -1.0]), t)
        np.testing.assert_allclose(e.psi_hat, np.cos(t), atol=1e-14)
        np.testing.assert_allclose(e.theta_hat, 1j * np.sin(t), atol=1e-14)
        assert e.n == 2

    def test_single_zero_observation(self):
        e = ecf(np.array([0.0]), np.linspace(-2, 2, 9))
        np.testing.assert_array_equal(e.psi_hat, np.ones(9))
        np.testing.assert_array_equal(e.theta_hat, np.zeros(9))

    def test_empty_sample(self):
        with pytest.raises(DomainError):
            ecf(np.array([]), np.linspace(-1, 1, 5))

    def test_band_nodes(self):
        """A grid plus bandwidth keeps |t| <= 1/b."""
        spec = RealGridSpec.centered(0.5, 64)
        t = band_nodes(spec, 1.0)
        assert t.min() == pytest.approx(-1.0)
        assert t.max() == pytest.approx(1.0)
        assert len(band_nodes(spec, None)) == 64

    def test_psi_tilde_threshold_is_strict(self):
        """|psi_hat| = n^-1/2 exactly is truncated."""
        e = Ecf(np.array([0.0, 1.0]), np.array([0.1, 0.5], dtype=complex), np.zeros(2, dtype=complex), 100)
        out = psi_tilde(e)
        np.testing.assert_allclose(out.values, [0.0, 2.0])
        assert out.diagnostics["truncated"] == 1


class TestEstimateUv0:
    """Tests for uv0_hat = G_n^-1 uv1_hat."""

    def test_indicator_passes_through(self, indicator):
        w = LogGridFn.from_callable(lambda x: np.exp(-(x**2)), LogGridSpec(-8.0, 8.0, 2**10))
        out = estimate_uv0(w, indicator, 1e-4)
        assert relative_l2(out.pos, w.pos) < 1e-6
        assert np.all(out.pos.imag == 0)

    def test_full_cutoff(self, indicator):
        """a_n above sup |mu_f| zeroes the estimate."""
        w = LogGridFn.from_callable(lambda x: np.exp(-(x**2)), LogGridSpec(-8.0, 8.0, 2**10))
        out = estimate_uv0(w, indicator, 2.0)
        assert np.all(out.pos == 0) and np.all(out.neg == 0)


class TestEstimateUv1:
    """Tests for uv1_hat = F+^-1[theta_hat psi_tilde F+[K_b]]."""

    def test_zero_theta(self):
        freq = RealGridSpec.centered(0.1, 256)
        t = band_nodes(freq, 1.0)
        e = Ecf(t, np.ones(len(t), dtype=complex), np.zeros(len(t), dtype=complex), 50, freq)
        out = estimate_uv1(e, SmoothingKernel(1.0))
        assert np.all(out.values == 0)
        assert out.diagnostics["imag_residual"] == 0.0

    def test_needs_full_grid(self):
        e = ecf(np.array([1.0, 2.0]), np.linspace(-1, 1, 5))
        with pytest.raises(ConfigError):
            estimate_uv1(e, SmoothingKernel(1.0))

    def test_band_beyond_nodes(self):
        freq = RealGridSpec.centered(0.1, 256)
        e = ecf(np.array([1.0, 2.0]), freq, 1.0)
        with pytest.raises(ConfigError):
            estimate_uv1(e, SmoothingKernel(0.1))

    def test_population_plug_in(self, gamma1, indicator):
        """With the exact psi and theta the estimate is the smoothed e^-x."""
        x_spec = RealGridSpec.centered(0.01, 2**13)
        freq = x_spec.conjugate()
        b = 1 / 200
        e = Ecf.from_population(gamma1, indicator, band_nodes(freq, b), spec=freq)
        out = estimate_uv1(e, SmoothingKernel(b), x_spec)
        mask = (np.abs(out.x) >= 0.5) & (np.abs(out.x) <= 10)
        truth = np.where(out.x > 0, np.exp(-np.abs(out.x)), 0.0)[mask]
        err = np.linalg.norm(out.values[mask] - truth) / np.linalg.norm(truth)
        assert err < 3e-2


class TestFunctional:
    """Tests for L_hat v and its route check."""

    def test_true_functional_bump(self, gamma1):
        """int v(x) e^-x dx for a bump at 2 of width 1/2."""
        expected = math.sqrt(2 * math.pi) * 0.5 * math.exp(-2 + 0.125)
        assert true_functional(gaussian_bump(2.0, 0.5), gamma1) == pytest.approx(expected, rel=1e-3)
        assert expected == pytest.approx(0.1922, abs=1e-4)

    def test_zero_function(self, gamma1, indicator):
        sample = simulate_field(gamma1, indicator, 1.0, Window.box(16), 1.0, seed=0)
        assert functional(zero(), sample, indicator) == 0.0
        assert true_functional(zero(), gamma1) == 0.0

    def test_estimate_on_simulated_field(self, gamma1, indicator, small_settings):
        sample = simulate_field(gamma1, indicator, 1.0, Window.box(4096), 1.0, seed=12)
        result = fit(sample, indicator, small_settings)
        L_hat = functional(gaussian_bump(), sample, indicator, small_settings, result)
        assert L_hat == pytest.approx(0.1922, abs=0.1)
        assert result.n == 4096
        assert result.b_n == small_settings.b_n(4096)
        assert set(result.diagnostics) >= {"imag_residual", "truncated_mass", "cutoff_nodes", "psi_truncated"}
        assert result.diagnostics["band_saturated"] is True
        assert result.b_n == small_settings.grid_floor

    def test_err_W_scaling(self, gamma1, indicator, small_settings):
        """err_W = sqrt(n) (L_hat - L)."""
        sample = simulate_field(gamma1, indicator, 1.0, Window.box(1024), 1.0, seed=5)
        result = fit(sample, indicator, small_settings)
        v = gaussian_bump()
        L_hat = functional(v, sample, indicator, small_settings, result)
        assert err_W(v, sample, indicator, 0.2, small_settings, result) == pytest.approx(32 * (L_hat - 0.2))

    def test_tampered_fit_fails_route_check(self, gamma1, indicator, small_settings):
        """Breaking the relation between uv1_hat and uv0_hat is detected."""
        sample = simulate_field(gamma1, indicator, 1.0, Window.box(1024), 1.0, seed=5)
        result = fit(sample, indicator, small_settings)
        w = result.uv1_log
        broken = dataclasses.replace(result, uv1_log=w.with_values(2 * w.pos, 2 * w.neg))
        with pytest.raises(IntegrityError) as exc:
            functional(gaussian_bump(), sample, indicator, small_settings, broken)
        assert exc.value.gap > exc.value.tolerance

    def test_non_gamma_truth(self):
        """Uniform v0 = 1 on [1, 2] with v = 1: int x dx = 3/2."""
        x = np.linspace(1.0, 2.0, 101)
        model = LevyModel.tabulated(x, np.ones_like(x))
        v = gaussian_bump(0.0, 1e6)
        assert true_functional(v, model) == pytest.approx(1.5, rel=1e-4)


class TestConfidenceInterval:
    def test_half_width(self):
        lo, hi = confidence_interval(1.0, 4.0, 100, 0.95)
        assert hi - 1.0 == pytest.approx(0.391993, abs=1e-6)
        assert 1.0 - lo == pytest.approx(hi - 1.0)

    def test_degenerate_variance(self):
        assert confidence_interval(0.5, 0.0, 10) == (0.5, 0.5)

    def test_level_range(self):
        with pytest.raises(ConfigError):
            confidence_interval(0.0, 1.0, 10, level=1.0)


def test_default_settings_schedules():
    settings = EstimatorSettings()
    assert settings.b_n(100) == settings.bandwidth(100) > settings.grid_floor
    assert settings.b_n(10**6) == settings.grid_floor
    assert settings.raw_b_n(10**6) < settings.grid_floor
    assert settings.a_n(10**4) < settings.a_n(100)
