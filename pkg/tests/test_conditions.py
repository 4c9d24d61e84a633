"""Tests for the standing-assumption and admissibility checks."""

import numpy as np
import pytest

from levyma.conditions import (
    check_admissible,
    check_assumptions,
    check_U_beta,
    fitted_decay,
    five_equivalent,
    smooth_taper,
    xi_lower_bound,
)
from levyma.grids import GridFn, RealGridSpec
from levyma.levy import KernelFn, LevyModel
from levyma.testfunctions import gaussian_bump, reciprocal_tail, zero


class TestUBeta:
    """Tests for the lower bound |m_f(x)| >~ 1 / (1 + |x|^beta)."""

    def test_exp_window_beta_one(self, exp_window):
        """The exponential window symbol decays like 1/|x|."""
        report = check_U_beta(exp_window, 1.0)
        assert report["holds"] is True
        assert report["worst_margin"] > 0.1

    def test_exp_window_beta_zero_fails(self, exp_window):
        """Without polynomial weight the margin decays."""
        report = check_U_beta(exp_window, 0.0)
        assert report["holds"] is False
        assert report["decay_slope"] < -0.5

    def test_indicator_beta_zero(self, indicator):
        """|m| = 1, so the margin |m| (1 + |x|^0) is 2."""
        report = check_U_beta(indicator, 0.0)
        assert report["holds"] is True
        assert report["worst_margin"] == pytest.approx(2.0)


class TestAssumptions:
    """Tests for items (1)-(5)."""

    def test_short_window_uses_sufficient_criterion(self):
        """alpha = theta = 1/4 < 1/2 and 2 eps = 0.2 < 1/2 - alpha."""
        report = check_assumptions(LevyModel.gamma(4.0), KernelFn.exp_window(1.0, 0.25))
        item = report["items"]["5"]
        assert item["criterion"] == "sufficient"
        assert item["alpha"] == pytest.approx(0.25)
        assert item["holds"] is True
        assert report["holds"] is True

    def test_unit_window_needs_direct_check(self, gamma1, exp_window):
        """alpha = 1 leaves the defining integral, which grows like x^(2 eps)."""
        report = check_assumptions(gamma1, exp_window)
        item = report["items"]["5"]
        assert item["criterion"] == "direct"
        assert item["holds"] is False
        assert item["trend"]["verdict"] == "diverges"

    def test_items_one_to_four_hold_for_gamma(self, gamma1, exp_window):
        report = check_assumptions(gamma1, exp_window)
        for key in ("1", "2", "3", "4"):
            assert report["items"][key]["holds"] is True, key

    def test_moment_item_uses_tau(self, gamma1, indicator):
        """Item (3) reports int |x|^(2 + tau) v0 = Gamma(3) for tau = 1."""
        report = check_assumptions(gamma1, indicator)
        assert report["items"]["3"]["margin"] == pytest.approx(2.0)

    def test_five_equivalent_at_origin(self, gamma1, exp_window):
        """The integrand is 1 at x = 0."""
        assert five_equivalent(gamma1, exp_window, 0.1, np.array([0.0]))[0] == pytest.approx(1.0)

    def test_tabulated_integrand_matches_closed_form(self, gamma1, exp_window):
        """A tabulated Gamma(1) density gives the same item (5) integrand, 2 eps exponent included."""
        x = np.linspace(1e-4, 40.0, 4001)
        table = LevyModel.tabulated(x, gamma1.v0(x))
        points = np.array([0.5, 2.0, 5.0])
        closed = five_equivalent(gamma1, exp_window, 0.1, points)
        numeric = five_equivalent(table, exp_window, 0.1, points)
        np.testing.assert_allclose(numeric, closed, rtol=2e-2)
        ratio = five_equivalent(gamma1, exp_window, 0.2, points) / closed
        np.testing.assert_allclose(ratio, (1 + points**2) ** 0.2)

    @pytest.mark.slow
    def test_tabulated_verdict_matches_closed_form(self, gamma1, exp_window):
        x = np.linspace(1e-4, 40.0, 4001)
        table = LevyModel.tabulated(x, gamma1.v0(x))
        closed = check_assumptions(gamma1, exp_window, doublings=2)["items"]["5"]
        numeric = check_assumptions(table, exp_window, doublings=2)["items"]["5"]
        assert numeric["criterion"] == closed["criterion"] == "direct"
        assert numeric["trend"]["verdict"] == closed["trend"]["verdict"]
        assert numeric["holds"] is closed["holds"] is False
        np.testing.assert_allclose(numeric["trend"]["partial"], closed["trend"]["partial"], rtol=5e-2)


class TestAdmissibility:
    """Tests for items (i)-(iii) of a test function."""

    def test_zero_function_is_admissible(self, gamma1, exp_window):
        report = check_admissible(zero(), gamma1, exp_window, 0.1, 1.0, beta1=1.0)
        assert report["holds"] is True
        assert report["xi_min"] == pytest.approx(xi_lower_bound(0.1, 1.0))

    def test_xi_lower_bound(self):
        """2 (1 - eps) - (1/2 - eps)(1 + tau)/(2 + tau)."""
        assert xi_lower_bound(0.1, 1.0) == pytest.approx(1.8 - 0.4 * 2 / 3)

    def test_bump_log_branches_are_smooth(self, gamma1, exp_window):
        report = check_admissible(gaussian_bump(), gamma1, exp_window, 0.1, 1.0, beta1=1.0)
        assert report["ii"]["holds"] is True
        assert report["ii"]["beta_order"] is True
        assert report["xi_min_remark"] == pytest.approx(7 / 4 - 0.15)

    def test_reciprocal_tail_sobolev_order(self, gamma1, exp_window):
        """The log branch of M v jumps at |x| = t, so only orders below 1/2 hold."""
        low = check_admissible(reciprocal_tail(1.0), gamma1, exp_window, 0.1, 1.0, beta1=0.05, beta2=0.1)
        high = check_admissible(reciprocal_tail(1.0), gamma1, exp_window, 0.1, 1.0, beta1=0.05, beta2=1.0)
        assert low["ii"]["pos"]["holds"] is True
        assert high["ii"]["pos"]["holds"] is False

    def test_bump_holds_at_high_sobolev_order(self, gamma1, exp_window):
        """A smooth bump stays in H^4 once the log-grid ends are tapered."""
        report = check_admissible(gaussian_bump(), gamma1, exp_window, 0.1, 1.0, beta1=0.5, beta2=4.0)
        assert report["ii"]["pos"]["holds"] is True
        assert report["ii"]["neg"]["holds"] is True
        assert report["ii"]["holds"] is True
        assert report["ii"]["beta_order"] is True

    def test_tapered_tail_still_fails_order_one(self, gamma1, exp_window):
        """The taper leaves the interior jump of the tail at s = log t in place."""
        report = check_admissible(reciprocal_tail(1.0), gamma1, exp_window, 0.1, 1.0, beta1=0.5, beta2=1.0)
        assert report["ii"]["holds"] is False

    def test_smooth_taper_ends(self):
        s = np.linspace(0.0, 10.0, 101)
        w = smooth_taper(s, 1.0)
        assert w[0] == 0.0
        assert w[-1] == 0.0
        np.testing.assert_array_equal(w[11:90], 1.0)
        assert np.all((w >= 0) & (w <= 1))
        assert np.all(np.diff(w[:11]) >= 0)

    def test_fitted_decay_of_gaussian(self):
        """A Gaussian transform drops to rounding: infinite decay index."""
        g = GridFn.from_callable(lambda x: np.exp(-(x**2)), RealGridSpec.centered(0.05, 1024))
        assert fitted_decay(g) == float("inf")
