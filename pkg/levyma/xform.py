"""Transforms and the dilation operators built on them.

Conventions:
    ``F+ g(x) = integral of exp(i t x) g(t) dt``; the inverse carries ``1/(2 pi)``.
    ``Fx`` acts on functions of the punctured line stored as
    :class:`~levyma.grids.LogGridFn` and is two ordinary transforms in
    ``s = log|x|`` of ``p + q`` and ``p - q``.

Both discrete transforms are scalar multiples of unitary maps, so
inverse(forward(g)) reproduces ``g`` to rounding and the regularized inverse
and its adjoint are exact adjoints on a common log grid.
"""

import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Sequence, Union

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import CubicSpline

from .errors import ConfigError, CutoffWarning, DecayWarning, TruncationWarning
from .forward import compute_m_f
from .grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec
from .levy import KernelFn

logger = logging.getLogger(__name__)

#: Endpoint-to-peak ratio above which a sampled function does not decay.
DECAY_RATIO = 1e-3

#: Dropped mass fraction above which resampling warns.
TRUNCATION_WARN = 1e-6

DEFAULT_LOG_SPEC = LogGridSpec()

Carrier = Union[GridFn, LogGridFn]


# ============================================================================
# DISCRETE FOURIER SUMS
# ============================================================================


def _dft(values, x0, dx, w0, dw, sign):
    """``out[k] = sum_j values[j] exp(sign * i * (w0 + k dw)(x0 + j dx))``.

    Requires ``dw * dx = 2 pi / n``.
    """
    values = np.asarray(values, dtype=complex)
    n = values.size
    j = np.arange(n)
    pre = values * np.exp(sign * 1j * w0 * dx * j)
    if sign > 0:
        core = n * sfft.ifft(pre)
    else:
        core = sfft.fft(pre)
    return np.exp(sign * 1j * (w0 * x0 + dw * x0 * j)) * core


def _check_decay(values, what):
    values = np.abs(np.asarray(values))
    if values.size == 0:
        return
    peak = values.max()
    ends = max(values[0], values[-1])
    if peak > 0 and ends > DECAY_RATIO * peak:
        warnings.warn(
            f"{what} does not decay at the grid ends: endpoints {values[0]:.3g}, "
            f"{values[-1]:.3g} vs peak {peak:.3g}",
            DecayWarning,
            stacklevel=3,
        )


def fourier_plus(g: GridFn) -> GridFn:
    """``F+ g`` on the centered conjugate grid of ``g``.

    The source grid is remembered in ``diagnostics["source"]`` so that
    :func:`fourier_plus_inv` returns to it.
    """
    _check_decay(g.values, "fourier_plus input")
    out = g.spec.conjugate()
    values = g.step * _dft(g.values, g.lo, g.step, out.lo, out.step, +1)
    return GridFn.on(out, values, source=g.spec)


def fourier_plus_inv(G: GridFn, spec: Optional[RealGridSpec] = None) -> GridFn:
    """Inverse of :func:`fourier_plus`.

    Args:
        G: Samples on a uniform frequency grid.
        spec: Target grid. Defaults to the grid ``G`` was computed from, else
            the centered conjugate grid. Its step is forced to ``2 pi / (n dw)``.
    """
    n = G.n_pts
    dx = 2 * np.pi / (n * G.step)
    if spec is None:
        spec = G.diagnostics.get("source") or RealGridSpec.centered(dx, n)
    if spec.n_pts != n or abs(spec.step - dx) > 1e-9 * dx:
        spec = RealGridSpec(spec.lo, spec.lo + (n - 1) * dx, n)
    values = G.step / (2 * np.pi) * _dft(G.values, G.lo, G.step, spec.lo, dx, -1)
    return GridFn.on(spec, values, source=G.spec)


def fourier_plus_at(g: GridFn, t) -> np.ndarray:
    """``F+ g`` at arbitrary frequencies by direct summation."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = g.x
    out = np.empty(t.shape, dtype=complex)
    flat = t.ravel()
    rows = max(1, 2**20 // x.size)
    for start in range(0, flat.size, rows):
        chunk = flat[start : start + rows]
        out.flat[start : start + chunk.size] = (
            np.exp(1j * chunk[:, None] * x[None, :]) @ g.values
        ) * g.step
    return out


# ============================================================================
# RESAMPLING BETWEEN CARRIERS
# ============================================================================


class _Branch:
    """Cubic interpolant of one half-line of a :class:`GridFn` in ``r = |x|``.

    Below the first node the spline extrapolates; beyond the last it is zero.
    """

    def __init__(self, r: np.ndarray, values: np.ndarray, at_zero: complex = 0.0):
        order = np.argsort(r)
        self.r = r[order]
        self.at_zero = at_zero
        if self.r.size >= 2:
            vals = values[order]
            self.re = CubicSpline(self.r, vals.real, extrapolate=True)
            self.im = CubicSpline(self.r, vals.imag, extrapolate=True)
        else:
            self.re = self.im = None

    @property
    def r_max(self) -> float:
        return float(self.r[-1]) if self.r.size else 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        if self.re is None:
            return out
        inside = (r > 0) & (r <= self.r_max)
        out[inside] = self.re(r[inside]) + 1j * self.im(r[inside])
        out[r == 0] = self.at_zero
        return out


def _branches(v: GridFn):
    x, vals = v.x, v.values
    zero = np.isclose(x, 0.0, atol=1e-9 * v.step)
    at_zero = complex(vals[zero][0]) if np.any(zero) else 0.0
    pos = (x > 0) & ~zero
    neg = (x < 0) & ~zero
    return _Branch(x[pos], vals[pos], at_zero), _Branch(-x[neg], vals[neg], at_zero)


def _eval_real(v: GridFn, points, branches=None) -> np.ndarray:
    """Branch-restricted spline of ``v`` at real points, zero off the grid."""
    pos, neg = branches or _branches(v)
    points = np.asarray(points, dtype=float)
    out = np.where(points >= 0, pos(np.abs(points)), neg(np.abs(points)))
    out[(points < v.lo) | (points > v.hi)] = 0.0
    return out


def to_log_grid(v: GridFn, spec: LogGridSpec = DEFAULT_LOG_SPEC) -> LogGridFn:
    """Resample ``v`` onto paired log grids.

    The fraction of ``||v||^2`` carried by ``|x|`` outside
    ``[e^{s_lo}, e^{s_hi}]`` is stored as ``diagnostics["truncated_mass"]``.
    """
    pos_branch, neg_branch = _branches(v)
    r = np.exp(spec.s)
    pos = pos_branch(r)
    neg = neg_branch(r)
    neg[-r < v.lo] = 0.0
    pos[r > v.hi] = 0.0

    ax = np.abs(v.x)
    energy = np.abs(v.values) ** 2
    total = energy.sum()
    outside = energy[(ax < np.exp(spec.s_lo)) | (ax > np.exp(spec.s_hi))].sum()
    fraction = float(outside / total) if total > 0 else 0.0
    if fraction > TRUNCATION_WARN:
        warnings.warn(
            f"to_log_grid drops {fraction:.3g} of the squared mass outside "
            f"|x| in [{np.exp(spec.s_lo):.3g}, {np.exp(spec.s_hi):.3g}]",
            TruncationWarning,
            stacklevel=2,
        )
    return LogGridFn.on(spec, pos, neg, truncated_mass=fraction)


def _spline_s(s, values):
    re = CubicSpline(s, values.real, extrapolate=False)
    im = CubicSpline(s, values.imag, extrapolate=False)

    def evaluate(points):
        out = re(points) + 1j * im(points)
        return np.nan_to_num(out, nan=0.0)

    return evaluate


def from_log_grid(w: LogGridFn, spec: RealGridSpec) -> GridFn:
    """Interpolate both branches back onto a real grid; zero off the log range and at 0."""
    x = spec.x
    out = np.zeros(x.shape, dtype=complex)
    s = w.s
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(x))
    pos, neg = x > 0, x < 0
    out[pos] = _spline_s(s, w.pos)(logs[pos])
    out[neg] = _spline_s(s, w.neg)(logs[neg])
    return GridFn.on(spec, out)


def isometry_M(v: Carrier, inverse: bool = False) -> Carrier:
    """Multiply by ``|x|^{1/2}`` (``inverse=True`` divides; ``x = 0`` maps to 0)."""
    if isinstance(v, LogGridFn):
        scale = np.exp(-v.s / 2) if inverse else np.exp(v.s / 2)
        return v.with_values(v.pos * scale, v.neg * scale, **v.diagnostics)
    root = np.sqrt(np.abs(v.x))
    if inverse:
        scale = np.divide(1.0, root, out=np.zeros_like(root), where=root > 0)
    else:
        scale = root
    return v.with_values(v.values * scale, **v.diagnostics)


# ============================================================================
# MULTIPLICATIVE FOURIER TRANSFORM
# ============================================================================


def mellin_fx(w: LogGridFn) -> LogGridFn:
    """``Fx`` of ``w``; output branches are indexed by ``t = log|y|``."""
    _check_decay(w.pos, "mellin_fx input (positive branch)")
    _check_decay(w.neg, "mellin_fx input (negative branch)")
    spec = w.spec
    out = spec.conjugate()
    ds = w.step

    def transform(values):
        return ds * _dft(values, spec.s_lo, ds, out.s_lo, out.step, -1)

    return LogGridFn.on(
        out, transform(w.pos + w.neg), transform(w.pos - w.neg), source=spec
    )


def mellin_fx_inv(W: LogGridFn, spec: Optional[LogGridSpec] = None) -> LogGridFn:
    """Inverse of :func:`mellin_fx` onto ``spec`` (default: the source grid)."""
    n = W.n_pts
    ds = 2 * np.pi / (n * W.step)
    if spec is None:
        spec = W.diagnostics.get("source") or LogGridSpec.centered(ds, n)
    if spec.n_pts != n or abs(spec.step - ds) > 1e-9 * ds:
        spec = LogGridSpec(spec.s_lo, spec.s_lo + (n - 1) * ds, n)

    def transform(values):
        return W.step / (2 * np.pi) * _dft(values, W.s_lo, W.step, spec.s_lo, ds, +1)

    P, Q = transform(W.pos), transform(W.neg)
    return LogGridFn.on(spec, (P + Q) / 2, (P - Q) / 2, source=W.spec)


# ============================================================================
# DILATION OPERATOR AND ITS ADJOINT
# ============================================================================


def _grouped_nodes(f: KernelFn) -> Dict[float, float]:
    """Quadrature weight per distinct nonzero kernel value."""
    groups: Dict[float, float] = {}
    for value, weight in zip(f.values, f.weights):
        if value != 0:
            groups[float(value)] = groups.get(float(value), 0.0) + float(weight)
    return groups


def _shift_log(w: LogGridFn, shift: float, negative: bool):
    """Branches of ``s -> w(s + shift)`` with the branches swapped when ``negative``."""
    pos, neg = (w.neg, w.pos) if negative else (w.pos, w.neg)
    if shift == 0:
        return np.asarray(pos), np.asarray(neg)
    s = w.s
    return _spline_s(s, pos)(s + shift), _spline_s(s, neg)(s + shift)


def _dilate(v: Carrier, f: KernelFn, adjoint: bool) -> Carrier:
    groups = _grouped_nodes(f)
    if isinstance(v, LogGridFn):
        pos = np.zeros(v.n_pts, dtype=complex)
        neg = np.zeros(v.n_pts, dtype=complex)
        for value, weight in groups.items():
            a = np.log(abs(value))
            coef = np.sign(value) * weight * (abs(value) if adjoint else 1.0)
            p, q = _shift_log(v, a if adjoint else -a, value < 0)
            pos += coef * p
            neg += coef * q
        return v.with_values(pos, neg)

    x = v.x
    branches = _branches(v)
    out = np.zeros(v.n_pts, dtype=complex)
    outside = 0.0
    total = 0.0
    for value, weight in groups.items():
        coef = np.sign(value) * weight * (abs(value) if adjoint else 1.0)
        if value == 1.0:
            out += coef * v.values
            total += weight
            continue
        points = x * value if adjoint else x / value
        out += coef * _eval_real(v, points, branches)
        outside += weight * np.count_nonzero((points < v.lo) | (points > v.hi)) / v.n_pts
        total += weight
    fraction = outside / total if total > 0 else 0.0
    return v.with_values(out, outside_fraction=fraction)


def apply_G(v: Carrier, f: KernelFn) -> Carrier:
    """``G v(x) = integral over supp(f) of sgn(f(s)) v(x / f(s)) ds``.

    On a real grid, dilated arguments that leave the grid read as zero; the
    share of such evaluations is ``diagnostics["outside_fraction"]``.
    """
    return _dilate(v, f, adjoint=False)


def apply_G_adjoint(v: Carrier, f: KernelFn) -> Carrier:
    """``G* v(y) = integral over supp(f) of sgn(f(s)) |f(s)| v(f(s) y) ds``."""
    return _dilate(v, f, adjoint=True)


@lru_cache(maxsize=32)
def symbol_on_grid(f: KernelFn, spec: LogGridSpec):
    """``(m_plus, m_minus)`` at the nodes ``t`` of ``spec``, read-only."""
    m_plus, m_minus = compute_m_f(f, spec.s, method="auto")
    m_plus, m_minus = np.asarray(m_plus), np.asarray(m_minus)
    m_plus.setflags(write=False)
    m_minus.setflags(write=False)
    return m_plus, m_minus


def _multiplier(mu: np.ndarray, a_n: float, conjugate: bool):
    mag = np.abs(mu)
    keep = mag > a_n
    inv = np.zeros(mu.shape, dtype=complex)
    np.divide(1.0, np.conj(mu) if conjugate else mu, out=inv, where=keep)
    return inv, int(np.count_nonzero(~keep)), int(np.count_nonzero(mag == 0))


def _regularized_inverse(v: Carrier, f: KernelFn, a_n: float, adjoint: bool,
                         log_spec: LogGridSpec) -> Carrier:
    if a_n < 0:
        raise ConfigError(f"cutoff a_n must be non-negative, got {a_n}", key="estimator.cutoff")
    name = "G_inv_adjoint_n" if adjoint else "G_inv_n"
    lw = v if isinstance(v, LogGridFn) else to_log_grid(v, log_spec)
    logger.debug("%s: input on %d log nodes, ||v|| = %.6g", name, lw.n_pts, lw.l2_norm())

    mw = isometry_M(lw)
    logger.debug("%s: M applied, haar norm %.6g", name, mw.l2_norm_haar())
    W = mellin_fx(mw)
    logger.debug("%s: Fx applied on t in [%.4g, %.4g]", name, W.s_lo, W.s_hi)

    m_plus, m_minus = symbol_on_grid(f, W.spec)
    mult_pos, cut_pos, zero_pos = _multiplier(m_plus, a_n, adjoint)
    mult_neg, cut_neg, zero_neg = _multiplier(m_minus, a_n, adjoint)
    cut = cut_pos + cut_neg
    if zero_pos + zero_neg and a_n == 0:
        warnings.warn(
            f"symbol vanishes on {zero_pos + zero_neg} nodes; they were zeroed",
            CutoffWarning,
            stacklevel=3,
        )
    logger.debug("%s: multiplier with a_n=%g zeroes %d of %d nodes", name, a_n, cut, 2 * W.n_pts)
    W = W.with_values(W.pos * mult_pos, W.neg * mult_neg, source=W.diagnostics["source"])

    back = isometry_M(mellin_fx_inv(W), inverse=True)
    logger.debug("%s: back on log grid, ||result|| = %.6g", name, back.l2_norm())
    diagnostics = {"cutoff_nodes": cut, "a_n": a_n}
    if isinstance(v, LogGridFn):
        return back.with_values(back.pos, back.neg, **diagnostics)
    out = from_log_grid(back, v.spec)
    diagnostics["truncated_mass"] = lw.diagnostics.get("truncated_mass", 0.0)
    return out.with_values(out.values, **diagnostics)


def apply_G_inv_n(v: Carrier, f: KernelFn, a_n: float,
                  log_spec: LogGridSpec = DEFAULT_LOG_SPEC) -> Carrier:
    """Spectral-cutoff inverse ``M^-1 Fx^-1 (1{|mu| > a_n} / mu) Fx M v``.

    Real-grid input is resampled to ``log_spec`` and the result is brought
    back to the input grid; log-grid input stays on its own grid.
    ``diagnostics["cutoff_nodes"]`` counts zeroed multiplier nodes.
    """
    return _regularized_inverse(v, f, a_n, adjoint=False, log_spec=log_spec)


def apply_G_inv_adjoint_n(v: Carrier, f: KernelFn, a_n: float,
                          log_spec: LogGridSpec = DEFAULT_LOG_SPEC) -> Carrier:
    """Adjoint of :func:`apply_G_inv_n`: the same pipeline with ``conj(mu)``."""
    return _regularized_inverse(v, f, a_n, adjoint=True, log_spec=log_spec)


# ============================================================================
# CUTOFF SCHEDULE
# ============================================================================


@dataclass(frozen=True)
class CutoffSchedule:
    """``a_n = max(floor, C * n^-exponent)``."""

    C: float = 1e-2
    exponent: float = 0.25
    floor: float = 0.0

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigError(f"cutoff_C must be positive, got {self.C}", key="estimator.cutoff_C")
        if self.exponent < 0:
            raise ConfigError(
                f"cutoff_exponent must be non-negative, got {self.exponent}",
                key="estimator.cutoff_exponent",
            )
        if self.floor < 0:
            raise ConfigError(f"cutoff_floor must be >= 0, got {self.floor}", key="estimator.cutoff_floor")

    @classmethod
    def frozen(cls, value: float) -> "CutoffSchedule":
        """A constant cutoff, for bias-dominated runs."""
        return cls(C=value, exponent=0.0, floor=0.0)

    def __call__(self, n: int) -> float:
        return float(max(self.floor, self.C * float(n) ** (-self.exponent)))

    def check_rate_conditions(self, beta1: float, beta2: float, ns: Sequence[int],
                              bandwidth, raw_bandwidth=None) -> dict:
        """Tabulate the schedule against the consistency and rate conditions.

        ``a_n`` must be ``o((n / b_n)^{beta1 / (2 (beta1 - beta2))})`` for
        consistency; the ``n^{-1/2}`` rate further needs
        ``a_n = o((n / sqrt(b_n))^{beta1 / (beta1 - beta2)})`` and
        ``b_n sqrt(n)`` bounded. Each condition holds when the tabulated
        ratio does not increase along ``ns``.

        Both conditions also need ``b_n -> 0``: wherever ``bandwidth(n)``
        sits above the unfloored schedule (``raw_bandwidth``, or
        ``bandwidth.raw``) the row is marked ``floor_active`` and neither
        condition holds.
        """
        raw = raw_bandwidth if raw_bandwidth is not None else getattr(bandwidth, "raw", bandwidth)
        rows = []
        for n in ns:
            a, b, b_raw = self(n), bandwidth(n), raw(n)
            if beta2 > beta1 and beta1 > 0:
                target = (n / b) ** (beta1 / (2 * (beta1 - beta2)))
                rate_target = (n / np.sqrt(b)) ** (beta1 / (beta1 - beta2))
            else:
                target = rate_target = np.inf
            rows.append(
                {
                    "n": int(n),
                    "a_n": a,
                    "b_n": b,
                    "b_raw": b_raw,
                    "floor_active": bool(b > b_raw * (1 + 1e-12)),
                    "consistency_ratio": a / target,
                    "rate_ratio": a / rate_target,
                    "b_sqrt_n": b * np.sqrt(n),
                }
            )

        def non_increasing(key):
            vals = [r[key] for r in rows]
            return bool(all(v2 <= v1 * (1 + 1e-12) for v1, v2 in zip(vals, vals[1:])))

        floored = any(r["floor_active"] for r in rows)
        return {
            "rows": rows,
            "monotone": non_increasing("a_n"),
            "floor_active": floored,
            "consistency": non_increasing("consistency_ratio") and not floored,
            "rate": non_increasing("rate_ratio") and non_increasing("b_sqrt_n") and not floored,
        }


# ============================================================================
# NORMS
# ============================================================================


def sobolev_norm(g: GridFn, order: float, cap: Optional[float] = None) -> float:
    """``||F+ g (1 + x^2)^{order/2}||_L2``, optionally restricted to ``|x| <= cap``."""
    G = fourier_plus(g)
    weight = (1 + G.x**2) ** order
    terms = np.abs(G.values) ** 2 * weight
    if cap is not None:
        terms = np.where(np.abs(G.x) <= cap, terms, 0.0)
    return float(np.sqrt(np.sum(terms) * G.step))
