"""levyma: Levy-density functionals of infinitely divisible moving-average fields.

A field ``Y_j = X(Delta j)`` with ``X(t) = int f(t - s) Lambda(ds)`` is observed
on a growing window. From the empirical characteristic function of the
observations, ``levyma`` estimates linear functionals ``L v = int v(x) v0(x) dx``
of the Levy density ``v0`` of the driving random measure, quantifies their
Gaussian limit and checks the whole pipeline by Monte-Carlo experiments.

Example:
    >>> from levyma import LevyModel, KernelFn, Window, simulate_field, fit
    >>> model = LevyModel.gamma(b=1.0)
    >>> f = KernelFn.indicator_cube([1.0])
    >>> sample = simulate_field(model, f, 1.0, Window.box(4096, 1), 1.0, seed=1)
    >>> result = fit(sample, f)  # doctest: +SKIP
"""

from .config import Config, load_config, loads
from .errors import (
    ConfigError,
    DomainError,
    ExtrapolationError,
    IntegrityError,
    LevymaError,
    NumericError,
    NumericWarning,
    PrecisionError,
    ShapeError,
)
from .estimator import (
    BandwidthSchedule,
    Ecf,
    EstimatorSettings,
    Fit,
    SmoothingKernel,
    confidence_interval,
    ecf,
    err_W,
    error_bound_terms,
    estimate_uv0,
    estimate_uv1,
    fit,
    fourier_route,
    functional,
    psi_tilde,
    true_functional,
)
from .fieldsim import FieldSample, analytic_correlation, dependence_diagnostic, m_bound, simulate_field
from .forward import compute_m_f, compute_mu_f, compute_psi, compute_theta, compute_uv1_ft, compute_v1, eval_v0
from .grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec, inner, relative_l2
from .harness import ExperimentResult, replay, run_clt, run_clt_multivariate, run_consistency
from .inequalities import run_inequalities
from .influence import influence_functions, sigma_matrix, sigma_v_sq, z_statistics
from .levy import KernelFn, LevyModel
from .testfunctions import TestFunction
from .window import Box, Window, WindowSequence, boundary, lag_window_sum, vh_blocks
from .xform import (
    CutoffSchedule,
    apply_G,
    apply_G_adjoint,
    apply_G_inv_adjoint_n,
    apply_G_inv_n,
    fourier_plus,
    fourier_plus_inv,
    from_log_grid,
    isometry_M,
    mellin_fx,
    mellin_fx_inv,
    to_log_grid,
)

__all__ = [
    # Models
    "LevyModel",
    "KernelFn",
    "TestFunction",
    # Grids
    "RealGridSpec",
    "LogGridSpec",
    "GridFn",
    "LogGridFn",
    "inner",
    "relative_l2",
    # Forward maps
    "eval_v0",
    "compute_v1",
    "compute_uv1_ft",
    "compute_psi",
    "compute_theta",
    "compute_m_f",
    "compute_mu_f",
    # Transforms
    "fourier_plus",
    "fourier_plus_inv",
    "to_log_grid",
    "from_log_grid",
    "isometry_M",
    "mellin_fx",
    "mellin_fx_inv",
    "apply_G",
    "apply_G_adjoint",
    "apply_G_inv_n",
    "apply_G_inv_adjoint_n",
    "CutoffSchedule",
    # Fields
    "Window",
    "WindowSequence",
    "Box",
    "boundary",
    "vh_blocks",
    "lag_window_sum",
    "FieldSample",
    "simulate_field",
    "m_bound",
    "analytic_correlation",
    "dependence_diagnostic",
    # Estimation
    "SmoothingKernel",
    "BandwidthSchedule",
    "EstimatorSettings",
    "Ecf",
    "Fit",
    "ecf",
    "psi_tilde",
    "estimate_uv1",
    "estimate_uv0",
    "fit",
    "functional",
    "fourier_route",
    "true_functional",
    "err_W",
    "confidence_interval",
    "error_bound_terms",
    "influence_functions",
    "z_statistics",
    "sigma_matrix",
    "sigma_v_sq",
    # Experiments
    "Config",
    "load_config",
    "loads",
    "ExperimentResult",
    "run_consistency",
    "run_clt",
    "run_clt_multivariate",
    "run_inequalities",
    "replay",
    # Errors
    "LevymaError",
    "ConfigError",
    "DomainError",
    "ShapeError",
    "NumericError",
    "PrecisionError",
    "ExtrapolationError",
    "IntegrityError",
    "NumericWarning",
]

__version__ = "0.1.0"
