"""Tests for Lévy models, kernels and the forward maps of levyma.forward."""

import numpy as np
import pytest
from scipy.integrate import quad

from levyma.errors import ConfigError, DomainError, PrecisionError, ShapeError
from levyma.forward import (
    compute_m_f,
    compute_mu_f,
    compute_psi,
    compute_theta,
    compute_uv1_ft,
    compute_v1,
    eval_v0,
)
from levyma.grids import GridFn, RealGridSpec
from levyma.levy import KernelFn, LevyModel, gauss_legendre


class TestLevyModel:
    """Tests for the Gamma and tabulated Lévy densities."""

    def test_gamma_density_values(self, gamma1):
        """v0(x) = exp(-b x) / x on the positive half-line."""
        assert eval_v0(gamma1, 1.0) == pytest.approx(0.367879441, rel=1e-8)
        assert eval_v0(LevyModel.gamma(2.0), 0.5) == pytest.approx(0.735758882, rel=1e-8)

    def test_gamma_density_vanishes_off_support(self, gamma1):
        """No negative jumps and nothing at the origin."""
        assert eval_v0(gamma1, -1.0) == 0.0
        assert eval_v0(gamma1, 0.0) == 0.0

    def test_eval_v0_keeps_array_shape(self, gamma1):
        """Arrays in, arrays out."""
        out = eval_v0(gamma1, np.ones((2, 3)))
        assert out.shape == (2, 3)

    def test_gamma_moments(self, gamma1):
        """int |x|^p v0 = Gamma(p) / b^p."""
        assert gamma1.moment(2) == pytest.approx(1.0)
        assert gamma1.moment(3) == pytest.approx(2.0)
        assert LevyModel.gamma(2.0).moment(2) == pytest.approx(0.25)

    def test_gamma_transform_closed_form(self, gamma1):
        """F+[u v0](x) = 1 / (b - i x)."""
        x = np.array([-2.0, 0.0, 3.0])
        np.testing.assert_allclose(gamma1.uv0_ft(x), 1.0 / (1.0 - 1j * x))

    def test_gamma_rejects_nonpositive_rate(self):
        """The rate must be positive."""
        with pytest.raises(ConfigError) as exc:
            LevyModel.gamma(0.0)
        assert exc.value.key == "levy.b"

    def test_tabulated_outside_grid_raises(self):
        """Strict evaluation outside the table is a domain error."""
        x = np.linspace(0.1, 5.0, 50)
        model = LevyModel.tabulated(x, np.exp(-x) / x)
        with pytest.raises(DomainError):
            model.v0(np.array([10.0]))
        assert model.v0(np.array([10.0]), strict=False)[0] == 0.0

    def test_tabulated_rejects_negative_density(self):
        """A Lévy density is non-negative."""
        with pytest.raises(ConfigError):
            LevyModel.tabulated([0.1, 0.2, 0.3], [1.0, -1.0, 1.0])

    def test_tabulated_transform_matches_gamma(self, gamma1):
        """Trapezoidal transform of a fine table agrees with the closed form."""
        x = np.linspace(1e-4, 40.0, 40001)
        model = LevyModel.tabulated(x, gamma1.v0(x))
        t = np.array([0.0, 1.0, 2.5])
        np.testing.assert_allclose(model.uv0_ft(t), gamma1.uv0_ft(t), atol=1e-3)


class TestKernelFn:
    """Tests for the kernel constructors and their quadrature rules."""

    def test_exp_window_values(self, exp_window):
        """exp(-lam s) on the open support (0, theta)."""
        np.testing.assert_allclose(exp_window(np.array([0.5, 0.0, 1.0, 2.0])),
                                   [np.exp(-0.5), 0.0, 0.0, 0.0])

    def test_indicator_is_half_open(self, indicator):
        """Indicator of (0, 1]."""
        np.testing.assert_array_equal(indicator(np.array([0.0, 0.5, 1.0, 1.5])), [0, 1, 1, 0])

    def test_lp_norm(self, exp_window):
        """||f||_2^2 = (1 - e^-2) / 2 for the unit exponential window."""
        assert exp_window.lp_norm(2) == pytest.approx(np.sqrt((1 - np.exp(-2)) / 2), rel=1e-12)

    def test_cube_weights_sum_to_volume(self):
        """The tensor rule integrates constants exactly."""
        f = KernelFn.indicator_cube([2.0, 0.5])
        assert f.dim == 2
        assert f.weights.sum() == pytest.approx(1.0)
        assert f.diam == 2.0

    def test_invalid_parameters(self):
        """Nonpositive parameters are configuration errors."""
        with pytest.raises(ConfigError):
            KernelFn.exp_window(0.0, 1.0)
        with pytest.raises(ConfigError):
            KernelFn.indicator_cube([1.0, -1.0])
        with pytest.raises(ConfigError):
            KernelFn.indicator_cube([1.0], dim=2)

    def test_gauss_legendre_exact_for_polynomials(self):
        """Composite rule of order 16 integrates x^5 exactly."""
        x, w = gauss_legendre([0.0, 0.5, 2.0])
        assert w @ x**5 == pytest.approx(2.0**6 / 6, rel=1e-13)


class TestForwardMaps:
    """Tests for v1, F+[u v1], psi and theta."""

    def test_v1_equals_v0_for_unit_indicator(self, gamma1, indicator):
        """|f| = 1 on a unit-measure support leaves the density unchanged."""
        x = np.array([0.25, 1.0, 3.0])
        np.testing.assert_allclose(compute_v1(gamma1, indicator, x), gamma1.v0(x), rtol=1e-12)

    def test_v1_zero_at_origin(self, gamma1, exp_window):
        """The origin carries no Lévy mass."""
        assert compute_v1(gamma1, exp_window, np.array([0.0]))[0] == 0.0

    def test_v1_exp_window_against_quad(self, gamma1, exp_window):
        """v1(x) = x^-1 int_0^1 exp(-x e^s) ds for the unit exponential window."""
        expected, _ = quad(lambda s: np.exp(-np.exp(s)), 0.0, 1.0)
        got = compute_v1(gamma1, exp_window, np.array([1.0]))[0]
        assert got == pytest.approx(expected, rel=1e-10)

    def test_v1_on_spec_returns_gridfn(self, gamma1, indicator):
        """Grid specs in, grid functions out."""
        out = compute_v1(gamma1, indicator, RealGridSpec(0.1, 2.0, 20))
        assert isinstance(out, GridFn)
        assert out.n_pts == 20

    def test_uv1_ft_at_zero(self, gamma1, exp_window):
        """F+[u v1](0) = int f / b = 1 - e^-1."""
        got = compute_uv1_ft(gamma1, exp_window, np.array([0.0]))[0]
        assert got == pytest.approx(1 - np.exp(-1), rel=1e-12)

    def test_uv1_ft_indicator(self, gamma1, indicator):
        """With the unit indicator F+[u v1] = F+[u v0]."""
        x = np.linspace(-4, 4, 9)
        np.testing.assert_allclose(compute_uv1_ft(gamma1, indicator, x), 1 / (1 - 1j * x), rtol=1e-12)

    def test_psi_gamma_indicator(self, gamma1, indicator):
        """The field is Gamma(1, 1) distributed: psi(t) = (1 - i t)^-1."""
        t = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(compute_psi(gamma1, indicator, 0.0, t), 1 / (1 - 1j * t), atol=1e-5)

    def test_psi_at_zero_is_one(self, gamma1, exp_window):
        """Every characteristic function is 1 at the origin."""
        assert compute_psi(gamma1, exp_window, 0.3, np.array([0.0]))[0] == pytest.approx(1.0)

    def test_psi_drift_factor(self, gamma1, exp_window):
        """The drift multiplies psi by exp(i gamma t)."""
        t = np.linspace(-3, 3, 13)
        base = compute_psi(gamma1, exp_window, 0.0, t)
        shifted = compute_psi(gamma1, exp_window, 0.7, t)
        np.testing.assert_allclose(shifted, base * np.exp(0.7j * t), rtol=1e-12)

    def test_psi_modulus_bounded(self, gamma1, exp_window):
        """|psi| <= 1."""
        psi = compute_psi(gamma1, exp_window, 0.0, RealGridSpec(-20, 20, 81))
        assert np.all(np.abs(psi.values) <= 1 + 1e-10)
        assert psi.diagnostics["tail_bound"] <= 1e-8

    def test_psi_short_truncation_raises(self, gamma1, indicator):
        """Cutting the jump integral at x_max = 1 misses the tolerance."""
        with pytest.raises(PrecisionError) as exc:
            compute_psi(gamma1, indicator, 0.0, np.array([1.0]), x_max=1.0)
        assert exc.value.bound > exc.value.tolerance

    def test_theta_requires_aligned_grids(self, gamma1, indicator):
        """theta is a pointwise product on one grid."""
        psi = compute_psi(gamma1, indicator, 0.0, RealGridSpec(-1, 1, 11))
        uv1 = compute_uv1_ft(gamma1, indicator, RealGridSpec(-1, 1, 21))
        with pytest.raises(ShapeError):
            compute_theta(psi, uv1)

    def test_theta_pointwise_product(self, gamma1, indicator):
        """theta = psi * F+[u v1]."""
        spec = RealGridSpec(-2, 2, 5)
        psi = compute_psi(gamma1, indicator, 0.0, spec)
        uv1 = compute_uv1_ft(gamma1, indicator, spec)
        np.testing.assert_allclose(compute_theta(psi, uv1).values, psi.values * uv1.values)


class TestSymbol:
    """Tests for the symbol components m_plus, m_minus and mu_f."""

    def test_closed_matches_quadrature(self, exp_window):
        """The antiderivative and the refined quadrature agree."""
        x = np.linspace(-20, 20, 41)
        closed = compute_m_f(exp_window, x, method="closed")
        numeric = compute_m_f(exp_window, x, method="quadrature")
        np.testing.assert_allclose(numeric[0], closed[0], atol=1e-8)
        np.testing.assert_allclose(numeric[1], closed[1], atol=1e-8)

    def test_indicator_symbol_is_constant(self, indicator):
        """|f| = 1 everywhere on the support gives m = volume."""
        m_plus, m_minus = compute_m_f(indicator, np.array([-3.0, 0.0, 7.0]), method="auto")
        np.testing.assert_allclose(m_plus, 1.0)
        np.testing.assert_allclose(m_minus, 1.0)

    def test_sign_enters_m_plus_only(self):
        """A kernel taking negative values separates the two components."""
        f = KernelFn.tabulated([0.0, 1.0, 2.0], [1.0, 0.0, -1.0])
        m_plus, m_minus = compute_m_f(f, 0.0)
        assert abs(m_plus) < 1e-8
        assert m_minus.real > 0

    def test_closed_unavailable_for_tables(self):
        """Tabulated kernels have no closed-form symbol."""
        f = KernelFn.tabulated([0.0, 1.0], [1.0, 0.5])
        with pytest.raises(DomainError):
            compute_m_f(f, 0.0, method="closed")

    def test_scalar_in_scalar_out(self, exp_window):
        """Scalars come back as complex numbers."""
        m_plus, m_minus = compute_m_f(exp_window, 0.5)
        assert isinstance(m_plus, complex)
        assert isinstance(m_minus, complex)

    def test_mu_f_branches(self, exp_window):
        """mu_f(y) = m_plus(log y) for y > 0 and m_minus(log |y|) for y < 0."""
        m_plus, m_minus = compute_m_f(exp_window, np.log(2.0), method="closed")
        assert compute_mu_f(exp_window, 2.0) == pytest.approx(m_plus)
        assert compute_mu_f(exp_window, -2.0) == pytest.approx(m_minus)

    def test_mu_f_undefined_at_zero(self, exp_window):
        """The origin has no logarithm."""
        with pytest.raises(DomainError):
            compute_mu_f(exp_window, 0.0)
