"""Shared fixtures: the Gamma(1) model and the two reference kernels."""

import pytest

from levyma.estimator import EstimatorSettings
from levyma.grids import LogGridSpec, RealGridSpec
from levyma.levy import KernelFn, LevyModel


@pytest.fixture
def gamma1():
    return LevyModel.gamma(1.0)


@pytest.fixture
def exp_window():
    return KernelFn.exp_window(1.0, 1.0)


@pytest.fixture
def indicator():
    return KernelFn.indicator_cube([1.0])


@pytest.fixture
def small_settings():
    """Coarser grids that keep a full fit under a second."""
    return EstimatorSettings(
        x_spec=RealGridSpec.centered(0.02, 2**12),
        log_spec=LogGridSpec(-10.0, 10.0, 2**12),
    )
