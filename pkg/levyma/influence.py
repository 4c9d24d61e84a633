"""Influence functions of ``L_hat v`` and the long-run variance of the limit law.

Linearizing ``theta_hat / psi_hat`` around ``theta / psi`` writes the
estimation error as ``n^-1 sum_j (Z1_j - Z2_j)`` with::

    Z1_j = g1(Y_j),  g1(y) = (2 pi)^-1 y F+[conj(F+ w) F+[K_b] / psi](y)
    Z2_j = g2(Y_j),  g2(y) = (2 pi)^-1 F+[conj(F+ w) F+[K_b] theta / psi^2](y)

where ``w = G^{-1*} v``. Both have the same mean, so ``Z1 - Z2`` is centered
and ``sigma_v^2`` is the sum of its lag covariances over ``||l|| <= m``.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ClampWarning, ConfigError, DecayWarning, ExtrapolationError
from .estimator import EstimatorSettings, SmoothingKernel, ecf
from .fieldsim import FieldSample, m_bound, simulate_field
from .forward import compute_psi, compute_theta, compute_uv1_ft
from .grids import GridFn, RealGridSpec
from .levy import KernelFn, LevyModel
from .testfunctions import TestFunction
from .window import Window, lag_window_sum
from .xform import apply_G_inv_adjoint_n, fourier_plus

logger = logging.getLogger(__name__)

#: Frequency cap when no smoothing kernel limits the band.
T_CAP = 40.0

#: Zero-padding factor of the frequency band before transforming back.
PAD = 4


@dataclass(frozen=True, eq=False)
class InfluenceFunctions:
    """``g1`` and ``g2`` tabulated on a uniform ``y`` grid."""

    y: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)
    diagnostics: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_s1", CubicSpline(self.y, self.g1, extrapolate=False))
        object.__setattr__(self, "_s2", CubicSpline(self.y, self.g2, extrapolate=False))

    def __call__(self, values) -> Dict[str, np.ndarray]:
        """``{"Z1", "Z2", "zeta"}`` at the observations.

        Raises:
            ExtrapolationError: Observations fall outside the tabulated range.
        """
        y = np.asarray(values, dtype=float)
        outside = int(np.count_nonzero((y < self.y[0]) | (y > self.y[-1])))
        if outside:
            raise ExtrapolationError(
                f"{outside} observations outside the influence grid [{self.y[0]:.4g}, {self.y[-1]:.4g}]",
                count=outside,
            )
        z1 = self._s1(y)
        z2 = self._s2(y)
        return {"Z1": z1, "Z2": z2, "zeta": z1 - z2}


def _band(freq: RealGridSpec, b: Optional[float]):
    cap = T_CAP if b is None else min(1.0 / b, T_CAP)
    t = freq.x
    keep = np.abs(t) <= cap + 1e-12 * freq.step
    return keep, cap


def _padded(t: np.ndarray, values: np.ndarray) -> GridFn:
    n = len(t)
    step = t[1] - t[0]
    total = PAD * n
    lo = t[0] - ((total - n) // 2) * step
    full = np.zeros(total, dtype=complex)
    start = (total - n) // 2
    full[start : start + n] = values
    return GridFn.on(RealGridSpec(lo, lo + (total - 1) * step, total), full)


def influence_functions(
    v: TestFunction,
    model: LevyModel,
    f: KernelFn,
    gamma: float = 0.0,
    b: Optional[float] = None,
    a_n: float = 1e-6,
    settings: EstimatorSettings = EstimatorSettings(),
    psi=None,
    theta=None,
) -> InfluenceFunctions:
    """Tabulate ``g1`` and ``g2`` from the population ``psi`` and ``theta``.

    ``psi`` and ``theta`` may be supplied as arrays on the band nodes to
    build the plug-in version from an empirical characteristic function.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        w = apply_G_inv_adjoint_n(v.on(settings.x_spec), f, a_n, log_spec=settings.log_spec)
        Fw = fourier_plus(w.with_values(w.real))
    keep, cap = _band(Fw.spec, b)
    t = Fw.x[keep]
    if psi is None:
        band = RealGridSpec(float(t[0]), float(t[-1]), len(t))
        psi_fn = compute_psi(model, f, gamma, band)
        psi = psi_fn.values
        theta = compute_theta(psi_fn, compute_uv1_ft(model, f, band)).values
    kernel_ft = SmoothingKernel(b).ft(t) if b is not None else np.ones(len(t))
    base = np.conj(Fw.values[keep]) * kernel_ft / psi
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        h1 = fourier_plus(_padded(t, base))
        h2 = fourier_plus(_padded(t, base * theta / psi))
    y = h1.x
    g1 = (y * h1.values / (2 * np.pi)).real
    g2 = (h2.values / (2 * np.pi)).real
    logger.debug("influence grid: |t| <= %g on %d nodes, y in [%.4g, %.4g]", cap, len(t), y[0], y[-1])
    return InfluenceFunctions(y, g1, g2, {"t_cap": cap, "band_nodes": len(t)})


def z_statistics(v: TestFunction, sample: FieldSample, model: LevyModel, f: KernelFn,
                 b: Optional[float] = None, **kwargs) -> Dict[str, np.ndarray]:
    """``Z1``, ``Z2`` and ``zeta = Z1 - Z2`` at every observation of ``sample``."""
    g = influence_functions(v, model, f, gamma=sample.gamma, b=b, **kwargs)
    return g(sample.flat)


def _clamped(value: float, what: str) -> float:
    if value < 0:
        warnings.warn(f"{what} estimate {value:.4g} is negative; clamped to 0", ClampWarning, stacklevel=3)
        return 0.0
    return float(value)


def _plugin_functions(vs, sample, model, f, b, settings):
    freq = settings.x_spec.conjugate()
    keep, _ = _band(freq, b)
    e = ecf(sample.flat, freq.x[keep])
    psi = np.where(np.abs(e.psi_hat) > 1.0 / np.sqrt(e.n), e.psi_hat, np.inf)
    return [
        influence_functions(v, model, f, sample.gamma, b, settings=settings, psi=psi, theta=e.theta_hat)
        for v in vs
    ]


def _patch_side(dim: int, m: int) -> int:
    return max(8 * (m + 1), 64) if dim == 1 else max(4 * (m + 1), 16)


def _mc_matrix(vs, model, f, delta, m, h, seed, mc_sites, settings, b):
    gs = [influence_functions(v, model, f, b=b, settings=settings) for v in vs]
    side = _patch_side(f.dim, m)
    window = Window.box(side, f.dim)
    patches = max(1, mc_sites // window.n)
    seeds = np.random.SeedSequence([int(seed), 0x5EED]).generate_state(patches)
    zetas: List[List[np.ndarray]] = [[] for _ in vs]
    for s in seeds:
        patch = simulate_field(model, f, delta, window, h, int(s))
        for k, g in enumerate(gs):
            zetas[k].append(g(patch.values)["zeta"])
    k = len(vs)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            mean_i = np.mean([z.mean() for z in zetas[i]])
            mean_j = np.mean([z.mean() for z in zetas[j]])
            out[i, j] = out[j, i] = np.mean(
                [lag_window_sum(a - mean_i, c - mean_j, m) for a, c in zip(zetas[i], zetas[j])]
            )
    logger.debug("model_mc variance from %d patches of side %d", patches, side)
    return out


def sigma_matrix(
    vs: Sequence[TestFunction],
    model: LevyModel,
    f: KernelFn,
    delta: float,
    mode: str = "model_mc",
    sample: Optional[FieldSample] = None,
    h: Optional[float] = None,
    seed: int = 0,
    mc_sites: int = 100_000,
    b: Optional[float] = None,
    settings: EstimatorSettings = EstimatorSettings(),
) -> np.ndarray:
    """Cross lag-window covariances ``Sigma_st`` of the influence values.

    ``model_mc`` simulates independent field patches from the model;
    ``plugin`` uses the observations in ``sample`` with ``psi_hat`` and
    ``theta_hat`` in place of the population quantities.
    """
    m = m_bound(f, delta)
    if mode == "plugin":
        if sample is None:
            raise ConfigError("plugin variance needs a sample", key="experiment.sigma_mode")
        gs = _plugin_functions(vs, sample, model, f, b, settings)
        zs = [g(sample.values)["zeta"] for g in gs]
        zs = [z - z.mean() for z in zs]
        k = len(vs)
        out = np.zeros((k, k))
        for i in range(k):
            for j in range(i, k):
                out[i, j] = out[j, i] = lag_window_sum(zs[i], zs[j], m)
    elif mode == "model_mc":
        out = _mc_matrix(vs, model, f, delta, m, h or delta, seed, mc_sites, settings, b)
    else:
        raise ConfigError(f"unknown sigma mode {mode!r}", key="experiment.sigma_mode")
    for i, v in enumerate(vs):
        if v.zero:
            out[i, :] = out[:, i] = 0.0
        out[i, i] = _clamped(out[i, i], f"sigma^2 of {v.name}")
    return out


def sigma_v_sq(v: TestFunction, model: LevyModel, f: KernelFn, delta: float,
               mode: str = "model_mc", **kwargs) -> float:
    """Long-run variance ``sigma_v^2`` of ``sqrt(n) (L_hat v - L v)``."""
    if v.zero:
        return 0.0
    return float(sigma_matrix([v], model, f, delta, mode=mode, **kwargs)[0, 0])
