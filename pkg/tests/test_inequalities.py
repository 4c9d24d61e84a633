"""Tests for the Bernstein, exponential and moment inequality checks."""

import math

import numpy as np
import pytest

from levyma.config import from_dict
from levyma.errors import ConfigError
from levyma.inequalities import (
    bernstein_bound,
    check_bernstein,
    check_exponential_inequalities,
    exponential_bound,
)


class TestBounds:
    def test_bernstein_at_zero(self):
        assert bernstein_bound(0.0, 1.0, 1.0, 2, 1, 2.0) == 1.0

    def test_bernstein_regimes(self):
        """Gaussian tail up to x = rho B / H, exponential beyond."""
        c = 4 * 3
        assert bernstein_bound(0.5, 1.0, 1.0, 2, 1, 1.0) == pytest.approx(math.exp(-0.25 / c))
        assert bernstein_bound(4.0, 1.0, 1.0, 2, 1, 1.0) == pytest.approx(math.exp(-4.0 / c))

    def test_exponential_at_zero(self):
        assert exponential_bound(0.0, 100, 2, 1) == 2.0

    def test_exponential_decreases(self):
        values = [exponential_bound(x, 100, 2, 1) for x in (10.0, 50.0, 200.0)]
        assert values == sorted(values, reverse=True)


class TestChecks:
    """Checks run on supplied i.i.d. Gamma(1) fields."""

    @pytest.fixture
    def cfg(self):
        return from_dict({"sim": {"window_side": 256}}, env={})

    @pytest.fixture
    def Y(self):
        return np.random.default_rng(2).gamma(1.0, size=(200, 256))

    def test_bernstein_rows(self, cfg, Y):
        out = check_bernstein(cfg, Y)
        assert out["m"] == 2
        assert out["rows"][0]["x"] == 0.0
        assert out["rows"][0]["pass"] is True
        assert all(row["pass"] for row in out["rows"])

    def test_exponential_rows(self, cfg, Y):
        out = check_exponential_inequalities(cfg, Y)
        assert {row["field"] for row in out["rows"]} == {"xi1", "xi2", "xi_bar1", "xi_bar2"}
        assert all(row["pass"] for row in out["rows"])

    def test_truncation_level(self, Y):
        cfg = from_dict({"experiment": {"inequality_K": 0.5}}, env={})
        with pytest.raises(ConfigError) as exc:
            check_exponential_inequalities(cfg, Y)
        assert exc.value.key == "experiment.inequality_K"
