"""Population-level maps from ``(v0, f)`` to the law of one observation.

The moving average ``X(t) = integral of f(t - x) Lambda(dx)`` has an
infinitely divisible marginal whose Lévy density ``v1`` is obtained from
``v0`` by integrating dilations over ``supp(f)``. This module computes
``v1``, ``F+[u v1]``, the characteristic function ``psi``, ``theta = psi *
F+[u v1]`` and the symbol ``m_f`` of the dilation operator.
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DomainError, NumericError, PrecisionError
from .grids import GridFn, RealGridSpec
from .levy import KernelFn, LevyModel, gauss_legendre

logger = logging.getLogger(__name__)

#: Smallest jump size kept in the jump integral of ``psi``.
X_MIN = 1e-12

#: Maximum phase (radians) the symbol quadrature allows per panel.
PHASE_PER_PANEL = 2.0

GridLike = Union[RealGridSpec, GridFn, np.ndarray]


def _grid_points(grid: GridLike):
    if isinstance(grid, RealGridSpec):
        return grid, grid.x
    if isinstance(grid, GridFn):
        return grid.spec, grid.x
    x = np.asarray(grid, dtype=float)
    return None, x


def _wrap(spec, values, **diagnostics):
    if spec is None:
        return values
    return GridFn.on(spec, values, **diagnostics)


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise NumericError(f"{what} produced non-finite values")
    return values


def eval_v0(model: LevyModel, x):
    """Lévy density ``v0`` at ``x``; scalars in, scalars out."""
    out = model.v0(x)
    return float(out) if np.ndim(out) == 0 else out


def _v1_at(model: LevyModel, f: KernelFn, x, strict: bool = True):
    fv = f.values
    keep = fv != 0
    fv, w = fv[keep], f.weights[keep]
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    if fv.size == 0:
        return out
    flat = x.ravel()
    res = np.zeros(flat.size)
    for start in range(0, flat.size, 2048):
        chunk = flat[start : start + 2048]
        args = chunk[:, None] / fv[None, :]
        res[start : start + chunk.size] = (
            model.v0(args, strict=strict) / np.abs(fv)[None, :]
        ) @ w
    out = res.reshape(x.shape)
    out[x == 0] = 0.0
    return out


def compute_v1(model: LevyModel, f: KernelFn, grid: GridLike):
    """Lévy density of ``X(0)``: ``v1(x) = int |f(s)|^-1 v0(x / f(s)) ds``.

    Nodes where ``f`` vanishes are skipped, and ``x = 0`` maps to zero.
    """
    spec, x = _grid_points(grid)
    values = _check_finite(_v1_at(model, f, x), "compute_v1")
    return _wrap(spec, values)


def compute_uv1_ft(model: LevyModel, f: KernelFn, grid: GridLike):
    """``F+[u v1](x) = int f(s) F+[u v0](f(s) x) ds``."""
    spec, x = _grid_points(grid)
    fv, w = f.values, f.weights
    flat = x.ravel()
    res = np.zeros(flat.size, dtype=complex)
    if np.any(fv != 0):
        for start in range(0, flat.size, 2048):
            chunk = flat[start : start + 2048]
            res[start : start + chunk.size] = (
                fv[None, :] * model.uv0_ft(chunk[:, None] * fv[None, :])
            ) @ w
    values = _check_finite(res.reshape(x.shape), "compute_uv1_ft")
    return _wrap(spec, values)


def _jump_rule(x_max: float, t_max: float):
    """Quadrature nodes on ``[X_MIN, x_max]`` for the jump integral.

    Geometric panels resolve the ``1/x`` behaviour near the origin and uniform
    panels keep the phase ``t * x`` below ~4 radians each.
    """
    width = 0.25 if t_max <= 16 else 4.0 / t_max
    split = min(1.0, width, x_max)
    n_geo = max(2, int(np.ceil(2 * np.log10(split / X_MIN))))
    geo = np.geomspace(X_MIN, split, n_geo + 1)
    if x_max > split:
        n_uni = int(np.ceil((x_max - split) / width))
        uni = np.linspace(split, x_max, n_uni + 1)
        breaks = np.concatenate([geo, uni[1:]])
    else:
        breaks = geo
    return gauss_legendre(breaks)


def _negative_jumps(model: LevyModel, f: KernelFn) -> Tuple[bool, bool]:
    """Which half-lines carry mass of ``v1``."""
    lo, hi = model.support
    fv = f.values
    has_pos_f, has_neg_f = np.any(fv > 0), np.any(fv < 0)
    pos = (hi > 0 and has_pos_f) or (lo < 0 and has_neg_f)
    neg = (lo < 0 and has_pos_f) or (hi > 0 and has_neg_f)
    return bool(pos), bool(neg)


def compute_psi(
    model: LevyModel,
    f: KernelFn,
    gamma: float,
    grid: GridLike,
    x_max: Optional[float] = None,
    tol: float = 1e-8,
):
    """Characteristic function ``psi(t) = exp(i gamma t + int (e^{itx} - 1) v1(x) dx)``.

    The jump integral is truncated to ``X_MIN <= |x| <= x_max``. The
    truncation error is bounded and attached as ``diagnostics["tail_bound"]``;
    it raises :class:`PrecisionError` above ``tol``.
    """
    spec, t = _grid_points(grid)
    t = np.asarray(t, dtype=float)
    f_sup = f.sup
    if f_sup == 0:
        values = np.exp(1j * gamma * t)
        return _wrap(spec, values, tail_bound=0.0, x_max=0.0)
    if x_max is None:
        x_max = model.default_x_max(f_sup)
    t_max = float(np.max(np.abs(t))) if t.size else 0.0
    nodes, weights = _jump_rule(x_max, t_max)
    pos, neg = _negative_jumps(model, f)
    xs, ws = [], []
    if pos:
        xs.append(nodes)
        ws.append(weights)
    if neg:
        xs.append(-nodes)
        ws.append(weights)
    xq = np.concatenate(xs)
    wq = np.concatenate(ws) * _v1_at(model, f, xq, strict=False)

    # |x| > x_max: bounded by 2 * int v1 there; |x| < X_MIN: by |t| * int |x| v1.
    tail_nodes, tail_w = gauss_legendre(np.linspace(x_max, 4 * x_max, 65))
    tail = 0.0
    if pos:
        tail += 2 * float(tail_w @ _v1_at(model, f, tail_nodes, strict=False))
    if neg:
        tail += 2 * float(tail_w @ _v1_at(model, f, -tail_nodes, strict=False))
    head_x = np.array([X_MIN])
    head = X_MIN * float(
        np.max(np.abs(head_x * _v1_at(model, f, head_x, strict=False)))
        + np.max(np.abs(head_x * _v1_at(model, f, -head_x, strict=False)))
    )
    tail_bound = tail + t_max * head
    if tail_bound > tol:
        raise PrecisionError(
            f"psi truncation at x_max={x_max:g} leaves error bound {tail_bound:.3g} > {tol:g}",
            bound=tail_bound,
            tolerance=tol,
        )

    flat = t.ravel()
    expo = np.zeros(flat.size, dtype=complex)
    rows = max(1, 2**21 // xq.size)
    for start in range(0, flat.size, rows):
        chunk = flat[start : start + rows]
        phase = chunk[:, None] * xq[None, :]
        kernel = -2.0 * np.sin(phase / 2) ** 2 + 1j * np.sin(phase)
        expo[start : start + chunk.size] = kernel @ wq
    values = np.exp(1j * gamma * flat + expo).reshape(t.shape)
    _check_finite(values, "compute_psi")
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak > 1 + 1e-8:
        raise NumericError(f"|psi| reaches {peak:.12g} > 1; the jump quadrature is inaccurate")
    logger.debug(
        "psi on %d points: x_max=%g, %d jump nodes, tail bound %.3g",
        flat.size, x_max, xq.size, tail_bound,
    )
    return _wrap(spec, values, tail_bound=tail_bound, x_max=x_max)


def compute_theta(psi: GridFn, uv1_ft: GridFn) -> GridFn:
    """``theta = psi * F+[u v1]`` pointwise; the grids must coincide."""
    psi.require_aligned(uv1_ft)
    return psi.with_values(psi.values * uv1_ft.values)


def _symbol_quadrature(f: KernelFn, x: np.ndarray):
    """``(m_plus, m_minus)`` by quadrature with panels refined to the phase."""
    spread = f.log_range()
    ax = np.abs(x)
    needed = np.ceil(spread * ax / PHASE_PER_PANEL)
    levels = f.panels * 2 ** np.maximum(
        0, np.ceil(np.log2(np.maximum(needed, 1) / f.panels))
    ).astype(int)
    m_plus = np.zeros(x.shape, dtype=complex)
    m_minus = np.zeros(x.shape, dtype=complex)
    for level in np.unique(levels):
        sel = levels == level
        rule = f.refined(int(level))
        fv, w = rule.values, rule.weights
        keep = fv != 0
        fv, w = fv[keep], w[keep]
        logs = np.log(np.abs(fv))
        amp = np.sqrt(np.abs(fv)) * w
        xs = x[sel]
        for start in range(0, xs.size, 1024):
            chunk = xs[start : start + 1024]
            osc = np.exp(-1j * chunk[:, None] * logs[None, :])
            idx = np.flatnonzero(sel)[start : start + chunk.size]
            m_plus[idx] = osc @ (np.sign(fv) * amp)
            m_minus[idx] = osc @ amp
    return m_plus, m_minus


def compute_m_f(f: KernelFn, x, method: str = "quadrature"):
    """Components of the symbol of the dilation operator.

    ``m_plus(x) = int sgn(f) |f|^{1/2} exp(-i x log|f|) ds`` and ``m_minus``
    is the same integral without ``sgn(f)``.

    Args:
        f: Kernel.
        x: Scalar or array of log-frequencies.
        method: ``"quadrature"`` (always available), ``"closed"`` (kernels with
            an antiderivative) or ``"auto"`` (closed form when available).

    Returns:
        ``(m_plus, m_minus)``, complex scalars or arrays shaped like ``x``.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    result = None
    if method in ("closed", "auto"):
        result = f.symbol_closed(x)
        if result is None and method == "closed":
            raise DomainError(f"{f.name} has no closed-form symbol")
    if result is None:
        result = _symbol_quadrature(f, x)
    m_plus, m_minus = result
    if scalar:
        return complex(m_plus[0]), complex(m_minus[0])
    return m_plus, m_minus


def compute_mu_f(f: KernelFn, y, method: str = "auto"):
    """``mu_f(y) = m_plus(log|y|)`` for ``y > 0`` and ``m_minus(log|y|)`` for ``y < 0``."""
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y == 0):
        raise DomainError("mu_f is undefined at y = 0")
    m_plus, m_minus = compute_m_f(f, np.log(np.abs(y)), method=method)
    out = np.where(y > 0, m_plus, m_minus)
    return complex(out[0]) if scalar else out
