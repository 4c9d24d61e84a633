"""Tests for the grid carriers."""

import numpy as np
import pytest

from levyma.errors import NumericError, ShapeError
from levyma.grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec, inner, inner_haar, relative_l2


class TestRealGridSpec:
    def test_centered_contains_zero(self):
        """Centered grids put a node at the origin."""
        spec = RealGridSpec.centered(0.5, 8)
        assert spec.lo == -2.0
        assert spec.hi == 1.5
        assert 0.0 in spec.x

    def test_conjugate_spacing(self):
        """The conjugate grid has spacing 2 pi / (n step)."""
        spec = RealGridSpec.centered(0.01, 1024)
        assert spec.conjugate().step == pytest.approx(2 * np.pi / (1024 * 0.01))
        assert spec.conjugate().n_pts == 1024

    def test_degenerate_grid_rejected(self):
        """A grid needs two points and increasing ends."""
        with pytest.raises(ShapeError):
            RealGridSpec(0.0, 1.0, 1)
        with pytest.raises(ShapeError):
            RealGridSpec(1.0, 0.0, 5)


class TestGridFn:
    def test_values_are_read_only(self):
        """Carriers are immutable."""
        g = GridFn.zeros(RealGridSpec(0, 1, 5))
        with pytest.raises(ValueError):
            g.values[0] = 1.0

    def test_non_finite_rejected(self):
        """NaN samples are numeric errors."""
        with pytest.raises(NumericError):
            GridFn.on(RealGridSpec(0, 1, 3), [0.0, np.nan, 1.0])

    def test_wrong_length_rejected(self):
        with pytest.raises(ShapeError):
            GridFn.on(RealGridSpec(0, 1, 3), [0.0, 1.0])

    def test_arithmetic_requires_alignment(self):
        """Sums of functions on different grids are refused."""
        a = GridFn.zeros(RealGridSpec(0, 1, 5))
        b = GridFn.zeros(RealGridSpec(0, 2, 5))
        with pytest.raises(ShapeError):
            a + b

    def test_scalar_arithmetic(self):
        g = GridFn.on(RealGridSpec(0, 1, 3), [1.0, 2.0, 3.0])
        np.testing.assert_allclose((2 * g - 1).values, [1.0, 3.0, 5.0])

    def test_l2_norm_riemann_sum(self):
        """Norms are uniform Riemann sums."""
        g = GridFn.on(RealGridSpec(0, 3, 4), [1.0, 1.0, 1.0, 1.0])
        assert g.l2_norm() == pytest.approx(2.0)

    def test_restrict_norm_uses_absolute_value(self):
        """Restricted norms cover both signs of x."""
        g = GridFn.from_callable(lambda x: np.ones_like(x), RealGridSpec(-2, 2, 5))
        assert g.restrict_norm(1.0, 2.0) == pytest.approx(2.0)


class TestLogGridFn:
    def test_from_callable_samples_both_branches(self):
        """pos holds f(e^s) and neg holds f(-e^s)."""
        spec = LogGridSpec(-1.0, 1.0, 3)
        w = LogGridFn.from_callable(lambda x: x, spec)
        np.testing.assert_allclose(w.pos, np.exp(spec.s))
        np.testing.assert_allclose(w.neg, -np.exp(spec.s))

    def test_swap(self):
        spec = LogGridSpec(-1.0, 1.0, 3)
        w = LogGridFn.on(spec, [1, 2, 3], [4, 5, 6])
        np.testing.assert_allclose(w.swap().pos, [4, 5, 6])

    def test_lebesgue_and_haar_norms(self):
        """|x|^-1/2 has Haar norm sqrt(2 * length) and Lebesgue norm of the constant."""
        spec = LogGridSpec(-2.0, 2.0, 401)
        w = LogGridFn.from_callable(lambda x: np.abs(x) ** -0.5, spec)
        assert w.l2_norm_haar() == pytest.approx(np.sqrt(2 * np.sum(np.exp(-spec.s)) * spec.step))
        assert w.l2_norm() == pytest.approx(np.sqrt(2 * 401 * spec.step))


class TestInner:
    def test_inner_conjugates_second_argument(self):
        spec = RealGridSpec(0, 1, 2)
        a = GridFn.on(spec, [1j, 0])
        b = GridFn.on(spec, [1j, 0])
        assert inner(a, b) == pytest.approx(1.0)

    def test_mixed_carriers_rejected(self):
        """A real-grid function cannot be paired with a log-grid one."""
        a = GridFn.zeros(RealGridSpec(0, 1, 3))
        b = LogGridFn.zeros(LogGridSpec(-1, 1, 3))
        with pytest.raises(ShapeError):
            inner(a, b)

    def test_log_inner_matches_weighted_haar(self):
        """Lebesgue pairing on the log grid is the Haar pairing with weight e^s."""
        spec = LogGridSpec(-3.0, 3.0, 64)
        a = LogGridFn.from_callable(lambda x: np.exp(-x**2), spec)
        weighted = a.with_values(a.pos * np.exp(spec.s), a.neg * np.exp(spec.s))
        assert inner(a, a) == pytest.approx(inner_haar(a, weighted))

    def test_relative_l2(self):
        assert relative_l2(np.array([1.0, 1.0]), np.array([1.0, 1.0])) == 0.0
        assert relative_l2(np.array([2.0, 0.0]), np.array([1.0, 0.0])) == pytest.approx(1.0)
