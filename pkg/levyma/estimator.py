"""Plug-in estimation of the linear functional ``L v = <v, u v0>``.

The data path is::

    sample -> ecf (psi_hat, theta_hat) -> psi_tilde -> estimate_uv1
           -> estimate_uv0 = G_n^{-1} uv1_hat -> functional = <v, uv0_hat>

``functional`` evaluates the inner product twice, directly and through the
adjoint ``<G_n^{-1*} v, uv1_hat>``, and raises :class:`IntegrityError` when
the two disagree.
"""

import logging
import math
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .errors import (
    ConfigError,
    DecayWarning,
    DomainError,
    IntegrityError,
    TruncationWarning,
)
from .fieldsim import FieldSample
from .forward import compute_psi, compute_theta, compute_uv1_ft, compute_v1
from .grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec, inner
from .levy import KernelFn, LevyModel
from .testfunctions import TestFunction
from .xform import (
    CutoffSchedule,
    apply_G_inv_adjoint_n,
    apply_G_inv_n,
    fourier_plus,
    fourier_plus_inv,
    to_log_grid,
)

logger = logging.getLogger(__name__)

DEFAULT_X_SPEC = RealGridSpec.centered(0.01, 2**13)


# ============================================================================
# SCHEDULES AND SETTINGS
# ============================================================================


@dataclass(frozen=True)
class SmoothingKernel:
    """Sinc kernel ``K_b(x) = sin(x / b) / (pi x)`` with ``F+[K_b] = 1{|x| <= 1/b}``."""

    b: float
    kind: str = "sinc"

    def __post_init__(self):
        if self.kind != "sinc":
            raise ConfigError(f"unknown smoothing kernel {self.kind!r}")
        if not self.b > 0:
            raise ConfigError(f"bandwidth must be positive, got {self.b}", key="estimator.bandwidth_C")

    @property
    def band(self) -> float:
        return 1.0 / self.b

    def ft(self, x) -> np.ndarray:
        return (np.abs(np.asarray(x, dtype=float)) <= self.band).astype(float)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        safe = np.where(x == 0, 1.0, x)
        return np.where(x == 0, 1.0 / (np.pi * self.b), np.sin(safe / self.b) / (np.pi * safe))


@dataclass(frozen=True)
class BandwidthSchedule:
    """``b_n = max(floor, C n^{-1/(1-2 eps)} (log n)^{eta + 1/(1-2 eps)})``.

    ``floor`` is off by default; a positive floor stops ``b_n`` from
    vanishing and :meth:`CutoffSchedule.check_rate_conditions` reports it.
    """

    eps: float = 0.1
    eta: float = 0.0
    C: float = 1.0
    floor: float = 0.0

    def __post_init__(self):
        if not 0 < self.eps < 0.5:
            raise ConfigError(f"eps must lie in (0, 1/2), got {self.eps}", key="estimator.eps")
        if not self.C > 0:
            raise ConfigError(f"bandwidth_C must be positive, got {self.C}", key="estimator.bandwidth_C")
        if self.floor < 0:
            raise ConfigError(f"bandwidth_floor must be >= 0, got {self.floor}", key="estimator.bandwidth_floor")

    def raw(self, n: int) -> float:
        """The schedule without its floor."""
        p = 1.0 / (1 - 2 * self.eps)
        return float(self.C * float(n) ** (-p) * math.log(max(n, 2)) ** (self.eta + p))

    def __call__(self, n: int) -> float:
        return float(max(self.floor, self.raw(n)))


@dataclass(frozen=True)
class EstimatorSettings:
    """Grids, schedules and tolerances of one estimation run."""

    x_spec: RealGridSpec = DEFAULT_X_SPEC
    log_spec: LogGridSpec = field(default_factory=LogGridSpec)
    bandwidth: BandwidthSchedule = field(default_factory=BandwidthSchedule)
    cutoff: CutoffSchedule = field(default_factory=CutoffSchedule)
    route_tol: float = 1e-4

    def a_n(self, n: int) -> float:
        return self.cutoff(n)

    @property
    def grid_floor(self) -> float:
        """Smallest bandwidth whose band ``[-1/b, 1/b]`` the frequency grid covers.

        The band edge sits half a step inside the outermost symmetric node.
        """
        freq = self.x_spec.conjugate()
        return 1.0 / (min(-freq.lo, freq.hi) - freq.step / 2)

    def b_n(self, n: int) -> float:
        """Scheduled bandwidth, saturated at :attr:`grid_floor`."""
        return max(self.bandwidth(n), self.grid_floor)

    def raw_b_n(self, n: int) -> float:
        return self.bandwidth.raw(n)


@contextmanager
def _expected_warnings():
    # the pipeline resamples noisy estimates that never decay at the grid ends
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        warnings.simplefilter("ignore", TruncationWarning)
        yield


# ============================================================================
# EMPIRICAL CHARACTERISTIC FUNCTION
# ============================================================================


@dataclass(frozen=True, eq=False)
class Ecf:
    """``psi_hat`` and ``theta_hat`` on contiguous nodes of a frequency grid.

    Attributes:
        t: Evaluation nodes, uniform and increasing.
        psi_hat: ``n^-1 sum_j exp(i t Y_j)``.
        theta_hat: ``n^-1 sum_j Y_j exp(i t Y_j)``.
        n: Sample size.
        spec: Full frequency grid the nodes were taken from, if any.
    """

    t: np.ndarray = field(repr=False)
    psi_hat: np.ndarray = field(repr=False)
    theta_hat: np.ndarray = field(repr=False)
    n: int
    spec: Optional[RealGridSpec] = None

    @property
    def band_spec(self) -> RealGridSpec:
        return RealGridSpec(float(self.t[0]), float(self.t[-1]), len(self.t))

    @property
    def psi(self) -> GridFn:
        return GridFn.on(self.band_spec, self.psi_hat)

    @property
    def theta(self) -> GridFn:
        return GridFn.on(self.band_spec, self.theta_hat)

    @classmethod
    def from_population(cls, model: LevyModel, f: KernelFn, t: np.ndarray,
                        gamma: float = 0.0, n: int = 10**12,
                        spec: Optional[RealGridSpec] = None) -> "Ecf":
        """Population ``psi`` and ``theta`` posing as an empirical pair of size ``n``."""
        t = np.asarray(t, dtype=float)
        band = RealGridSpec(float(t[0]), float(t[-1]), len(t))
        psi = compute_psi(model, f, gamma, band)
        theta = compute_theta(psi, compute_uv1_ft(model, f, band))
        return cls(t, psi.values, theta.values, n, spec)


def band_nodes(spec: RealGridSpec, b: Optional[float]) -> np.ndarray:
    """Nodes of ``spec`` with ``|t| <= 1/b`` (all nodes when ``b`` is None)."""
    t = spec.x
    if b is None:
        return t
    keep = np.abs(t) <= 1.0 / b + 1e-12 * spec.step
    return t[keep]


def ecf(sample: FieldSample, grid, b: Optional[float] = None) -> Ecf:
    """Empirical characteristic function of the observations, normalized by ``n``.

    Args:
        sample: Observations, a :class:`FieldSample` or a plain array.
        grid: A :class:`RealGridSpec` or an increasing uniform array.
        b: With a grid spec, keep only its nodes with ``|t| <= 1/b``.

    Raises:
        DomainError: The sample is empty.
    """
    y = np.asarray(sample.flat if isinstance(sample, FieldSample) else sample, dtype=float).ravel()
    n = y.size
    if n == 0:
        raise DomainError("empirical characteristic function of an empty sample")
    spec = grid if isinstance(grid, RealGridSpec) else None
    t = band_nodes(spec, b) if spec is not None else np.asarray(grid, dtype=float)
    psi = np.empty(t.shape, dtype=complex)
    theta = np.empty(t.shape, dtype=complex)
    rows = max(1, 2**22 // n)
    for start in range(0, t.size, rows):
        chunk = t[start : start + rows]
        phase = np.exp(1j * chunk[:, None] * y[None, :])
        psi[start : start + chunk.size] = phase.sum(axis=1) / n
        theta[start : start + chunk.size] = (phase @ y) / n
    return Ecf(t, psi, theta, n, spec)


def psi_tilde(e: Ecf) -> GridFn:
    """``1/psi_hat`` where ``|psi_hat| > n^{-1/2}`` (strictly), zero elsewhere."""
    psi = np.asarray(e.psi_hat, dtype=complex)
    keep = np.abs(psi) > 1.0 / np.sqrt(e.n)
    out = np.zeros(psi.shape, dtype=complex)
    np.divide(1.0, psi, out=out, where=keep)
    return GridFn.on(e.band_spec, out, truncated=int(np.count_nonzero(~keep)))


def _full_spectrum(e: Ecf, values: np.ndarray) -> GridFn:
    spec = e.spec
    start = int(round((e.t[0] - spec.lo) / spec.step))
    if abs(spec.lo + start * spec.step - e.t[0]) > 1e-9 * spec.step or start + len(e.t) > spec.n_pts:
        raise ConfigError("ecf nodes are not a contiguous run of its frequency grid")
    full = np.zeros(spec.n_pts, dtype=complex)
    full[start : start + len(e.t)] = values
    return GridFn.on(spec, full)


def estimate_uv1(e: Ecf, kernel: SmoothingKernel,
                 x_spec: Optional[RealGridSpec] = None) -> GridFn:
    """``uv1_hat = F+^{-1}[theta_hat psi_tilde F+[K_b]]`` on the real grid.

    The ecf must carry its full frequency grid, whose conjugate is
    ``x_spec``. The imaginary residual ``||Im|| / ||Re||`` is reported as
    ``diagnostics["imag_residual"]``.

    Raises:
        ConfigError: The ecf nodes do not reach the band ``[-1/b, 1/b]``.
    """
    if e.spec is None:
        raise ConfigError("estimate_uv1 needs an ecf computed on a full frequency grid")
    reach = min(-e.t[0], e.t[-1])
    if reach + e.spec.step < kernel.band:
        raise ConfigError(
            f"ecf nodes reach |t| <= {reach:.4g} but the kernel band is 1/b = {kernel.band:.4g}",
            key="grid",
        )
    multiplier = e.theta_hat * psi_tilde(e).values * kernel.ft(e.t)
    if x_spec is None:
        x_spec = RealGridSpec.centered(2 * np.pi / (e.spec.n_pts * e.spec.step), e.spec.n_pts)
    out = fourier_plus_inv(_full_spectrum(e, multiplier), x_spec)
    re = out.values.real
    norm_re = np.linalg.norm(re)
    residual = float(np.linalg.norm(out.values.imag) / norm_re) if norm_re > 0 else 0.0
    logger.debug("uv1_hat: b=%g, %d band nodes, imag residual %.3g", kernel.b, len(e.t), residual)
    return GridFn.on(out.spec, re, imag_residual=residual, b=kernel.b)


def estimate_uv0(uv1_hat, f: KernelFn, a_n: float,
                 log_spec: LogGridSpec = LogGridSpec()):
    """``uv0_hat = G_n^{-1} uv1_hat``, real part."""
    out = apply_G_inv_n(uv1_hat, f, a_n, log_spec=log_spec)
    if isinstance(out, LogGridFn):
        return out.with_values(out.pos.real, out.neg.real, **out.diagnostics)
    return out.with_values(out.values.real, **out.diagnostics)


# ============================================================================
# FUNCTIONAL
# ============================================================================


@dataclass(frozen=True, eq=False)
class Fit:
    """Sample-dependent pieces shared by every test function of one sample."""

    n: int
    a_n: float
    b_n: float
    ecf: Ecf = field(repr=False)
    uv1_hat: GridFn = field(repr=False)
    uv1_log: LogGridFn = field(repr=False)
    uv0_log: LogGridFn = field(repr=False)
    diagnostics: Dict = field(default_factory=dict)


def fit(sample: FieldSample, f: KernelFn, settings: EstimatorSettings = EstimatorSettings()) -> Fit:
    """Run the sample-dependent part of the estimator once."""
    n = sample.n
    a_n, b_n = settings.a_n(n), settings.b_n(n)
    freq = settings.x_spec.conjugate()
    kernel = SmoothingKernel(b_n)
    e = ecf(sample, freq, b_n)
    uv1_hat = estimate_uv1(e, kernel, settings.x_spec)
    with _expected_warnings():
        uv1_log = to_log_grid(uv1_hat, settings.log_spec)
        uv0_log = estimate_uv0(uv1_log, f, a_n)
    diagnostics = {
        "imag_residual": uv1_hat.diagnostics["imag_residual"],
        "truncated_mass": uv1_log.diagnostics["truncated_mass"],
        "cutoff_nodes": uv0_log.diagnostics["cutoff_nodes"],
        "psi_truncated": psi_tilde(e).diagnostics["truncated"],
        "band_saturated": bool(b_n > settings.bandwidth(n)),
    }
    if diagnostics["band_saturated"]:
        logger.debug("n=%d: band 1/b_n saturated at the frequency grid edge %.4g", n, 1.0 / b_n)
    return Fit(n, a_n, b_n, e, uv1_hat, uv1_log, uv0_log, diagnostics)


def _routes(v: TestFunction, result: Fit, f: KernelFn, settings: EstimatorSettings):
    v_log = v.on_log(settings.log_spec)
    direct = inner(v_log, result.uv0_log).real
    with _expected_warnings():
        w_log = apply_G_inv_adjoint_n(v_log, f, result.a_n)
    adjoint = inner(w_log, result.uv1_log).real
    scale = max(abs(direct), v_log.l2_norm() * result.uv0_log.l2_norm())
    return direct, adjoint, scale


def functional(v: TestFunction, sample: FieldSample, f: KernelFn,
               settings: EstimatorSettings = EstimatorSettings(),
               result: Optional[Fit] = None) -> float:
    """``L_hat v = <v, uv0_hat>`` with the adjoint route as a runtime check.

    Raises:
        IntegrityError: ``|direct - adjoint| > route_tol * max(|L|, ||v|| ||uv0_hat||)``.
    """
    if v.zero:
        return 0.0
    result = result or fit(sample, f, settings)
    direct, adjoint, scale = _routes(v, result, f, settings)
    gap = abs(direct - adjoint)
    tol = settings.route_tol * scale
    if gap > tol:
        raise IntegrityError(
            f"direct ({direct:.10g}) and adjoint ({adjoint:.10g}) routes differ by {gap:.3g}",
            gap=gap,
            tolerance=tol,
        )
    return float(direct)


def fourier_route(v: TestFunction, e: Ecf, kernel: SmoothingKernel, f: KernelFn,
                  a_n: float, settings: EstimatorSettings = EstimatorSettings()) -> float:
    """``(2 pi)^-1 int conj(F+[G_n^{-1*} v]) theta_hat psi_tilde F+[K_b]`` over the band."""
    if v.zero:
        return 0.0
    with _expected_warnings():
        w = apply_G_inv_adjoint_n(v.on(settings.x_spec), f, a_n, log_spec=settings.log_spec)
        Fw = fourier_plus(w.with_values(w.real))
    multiplier = _full_spectrum(e, e.theta_hat * psi_tilde(e).values * kernel.ft(e.t))
    if not Fw.aligned(multiplier):
        raise ConfigError("ecf grid is not the conjugate of the estimator x-grid", key="grid")
    total = np.sum(np.conj(Fw.values) * multiplier.values) * Fw.step / (2 * np.pi)
    return float(total.real)


def true_functional(v: TestFunction, model: LevyModel, epsabs: float = 1e-8) -> float:
    """``L v = int v(x) x v0(x) dx`` by adaptive quadrature."""
    if v.zero:
        return 0.0

    def integrand(x):
        return float(v(np.array([x]))[0] * model.uv0(np.array([x]), strict=False)[0])

    lo, hi = model.support
    if model.kind == "gamma":
        cut = 60.0 / model.b
        head, _ = quad(integrand, 0.0, cut, epsabs=epsabs, limit=500)
        tail, _ = quad(integrand, cut, np.inf, epsabs=epsabs, limit=200)
        return float(head + tail)
    value, _ = quad(integrand, lo, hi, epsabs=epsabs, limit=1000)
    return float(value)


def err_W(v: TestFunction, sample: FieldSample, f: KernelFn, L_true: float,
          settings: EstimatorSettings = EstimatorSettings(),
          result: Optional[Fit] = None) -> float:
    """``sqrt(n) (L_hat v - L v)``."""
    L_hat = functional(v, sample, f, settings, result)
    return float(math.sqrt(sample.n) * (L_hat - L_true))


def confidence_interval(L_hat: float, sigma_sq: float, n: int,
                        level: float = 0.95) -> Tuple[float, float]:
    """Normal interval ``L_hat -+ z sigma / sqrt(n)``."""
    if not 0 < level < 1:
        raise ConfigError(f"confidence level must lie in (0, 1), got {level}")
    half = norm.ppf(0.5 + level / 2) * math.sqrt(max(sigma_sq, 0.0) / n)
    return float(L_hat - half), float(L_hat + half)


def error_bound_terms(v: TestFunction, model: LevyModel, f: KernelFn, n: int,
                      a_n: float, b: float,
                      settings: EstimatorSettings = EstimatorSettings()) -> Dict:
    """The three terms bounding ``E|L_hat v - L v|`` (``S = 1``, ``c = 1``).

    ``regularization``: ``pi^{-1/2} E|Y0| (n/b)^{1/2} ||(G_n^{-1*} - G^{-1*}) v||``
    with ``E|Y0|`` bounded by ``(E Y0^2)^{1/2}`` and ``G^{-1*}`` taken at
    ``a_n = 0``; ``bias``: ``(2 pi)^-1 <|F+ w|, |F+[uv1]| |1 - F+[K_b]|>``;
    ``stochastic``: ``(2 pi sqrt n)^-1 ((E Y0^2)^{1/2} + ||uv1||_1) int |F+ w| / |psi|``.
    """
    if v.zero:
        return {"regularization": 0.0, "bias": 0.0, "stochastic": 0.0, "total": 0.0}
    fv, fw = f.values, f.weights
    mean = model.moment(1) * float(fw @ fv)
    second = model.moment(2) * float(fw @ fv**2) + mean**2
    root2 = math.sqrt(second)

    with _expected_warnings():
        v_log = v.on_log(settings.log_spec)
        w_n = apply_G_inv_adjoint_n(v_log, f, a_n)
        w_0 = apply_G_inv_adjoint_n(v_log, f, 0.0)
        w_real = apply_G_inv_adjoint_n(v.on(settings.x_spec), f, a_n, log_spec=settings.log_spec)
        Fw = fourier_plus(w_real.with_values(w_real.real))
    regularization = root2 * math.sqrt(n / b) * (w_n - w_0).l2_norm() / math.sqrt(math.pi)

    t = Fw.x
    uv1_ft = compute_uv1_ft(model, f, t)
    outside = np.abs(t) > 1.0 / b
    bias = float(np.sum(np.abs(Fw.values) * np.abs(uv1_ft) * outside) * Fw.step / (2 * np.pi))

    band = np.abs(t) <= min(1.0 / b, 40.0)
    band_spec = RealGridSpec(float(t[band][0]), float(t[band][-1]), int(np.count_nonzero(band)))
    psi = compute_psi(model, f, 0.0, band_spec)
    ratio = float(np.sum(np.abs(Fw.values[band]) / np.abs(psi.values)) * Fw.step)
    uv1 = compute_v1(model, f, settings.x_spec)
    l1 = float(np.sum(np.abs(uv1.x * uv1.real)) * uv1.step)
    stochastic = (root2 + l1) * ratio / (2 * np.pi * math.sqrt(n))
    return {
        "regularization": float(regularization),
        "bias": bias,
        "stochastic": float(stochastic),
        "total": float(regularization + bias + stochastic),
    }
