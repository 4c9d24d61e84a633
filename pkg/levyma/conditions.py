"""Numerical checks of the regularity conditions on ``(v0, f)`` and on ``v``.

The conditions are asymptotic statements; every check here evaluates them on
finite grids and reports margins, slopes and partial integrals next to the
boolean verdict. Nothing here raises on a failed condition.
"""

import logging
import warnings
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import linregress

from .errors import InconclusiveWarning
from .forward import compute_m_f, compute_uv1_ft
from .grids import GridFn, LogGridSpec, RealGridSpec
from .levy import KernelFn, LevyModel, gauss_legendre
from .testfunctions import TestFunction
from .xform import apply_G_inv_adjoint_n, fourier_plus

logger = logging.getLogger(__name__)

#: Default lower floor for the symbol margin.
U_BETA_FLOOR = 1e-6

#: Relative increment of the last doubling below which a partial integral converged.
CONVERGED = 0.05


def _loglog_slope(x, y) -> float:
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 3:
        return float("nan")
    return float(linregress(np.log(x[keep]), np.log(y[keep])).slope)


def _bin_extrema(x, y, lo, hi, bins, reducer):
    edges = np.geomspace(lo, hi, bins + 1)
    centers, values = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (x >= a) & (x < b)
        if np.any(sel):
            centers.append(np.sqrt(a * b))
            values.append(reducer(y[sel]))
    return np.array(centers), np.array(values)


def check_U_beta(
    f: KernelFn,
    beta: float,
    grid: Optional[np.ndarray] = None,
    floor: float = U_BETA_FLOOR,
    x_max: float = 1e3,
    n_pts: int = 40001,
) -> Dict:
    """Check ``|m_{f,+-}(x)| >~ 1 / (1 + |x|^beta)`` on a symmetric grid.

    The condition holds when ``c(x) = |m(x)| (1 + |x|^beta)`` stays above
    ``floor`` everywhere and the minima of ``c`` over the outer decade do not
    decay (log-log slope at least -0.1).

    Returns:
        Report with ``holds``, ``worst_margin``, ``worst_x`` and ``decay_slope``.
    """
    x = np.linspace(-x_max, x_max, n_pts) if grid is None else np.asarray(grid, dtype=float)
    m_plus, m_minus = compute_m_f(f, x, method="auto")
    mag = np.minimum(np.abs(m_plus), np.abs(m_minus))
    c = mag * (1 + np.abs(x) ** beta)
    worst = int(np.argmin(c))
    top = float(np.max(np.abs(x)))
    centers, minima = _bin_extrema(np.abs(x), c, top / 10, top * (1 + 1e-12), 10, np.min)
    slope = _loglog_slope(centers, minima)
    holds = bool(c[worst] > floor and (np.isnan(slope) or slope >= -0.1))
    report = {
        "beta": float(beta),
        "holds": holds,
        "worst_margin": float(c[worst]),
        "worst_x": float(x[worst]),
        "decay_slope": slope,
        "floor": floor,
    }
    logger.debug("U_beta check for %s: %s", f.name, report)
    return report


# ============================================================================
# ASSUMPTION 1 (1)-(5)
# ============================================================================


def _doubling_integral(integrand, x0: float = 10.0, doublings: int = 10) -> Dict:
    """Partial integrals ``I(X) = 2 int_0^X`` at ``X = x0 2^k`` and a verdict.

    ``converged`` when the last doubling adds less than 5% relative;
    ``diverges`` when the increments do not shrink; otherwise inconclusive.
    """
    edges = np.concatenate([[0.0], x0 * 2.0 ** np.arange(doublings + 1)])
    partial, total = [], 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        nodes, weights = gauss_legendre(np.linspace(a, b, 33))
        total += 2 * float(weights @ integrand(nodes))
        partial.append(total)
    partial = np.array(partial)
    increments = np.diff(partial)
    last = float(increments[-1])
    relative = last / partial[-1] if partial[-1] > 0 else 0.0
    if relative < CONVERGED:
        verdict = "converged"
    elif increments[-1] >= increments[-2]:
        verdict = "diverges"
    else:
        verdict = "inconclusive"
    return {
        "X": (x0 * 2.0 ** np.arange(doublings + 1)).tolist(),
        "partial": partial.tolist(),
        "relative_increment": float(relative),
        "verdict": verdict,
    }


def five_equivalent(model: LevyModel, f: KernelFn, eps: float, x) -> np.ndarray:
    """Item (5) integrand ``(1 + x^2)^{-1 + 2 eps} |psi(x)|^{-2}``.

    For Gamma models ``|psi|^{-2} = exp(int log(1 + x^2 f^2 / b^2) ds)``;
    tabulated models integrate ``Im F+[u v1]`` numerically.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_hi = float(np.max(np.abs(x))) if x.size else 0.0
    return (1 + x**2) ** (-1 + 2 * eps) * _abs_psi_inv_sq(model, f, max(x_hi, 1.0))(x)


def _abs_psi_inv_sq(model: LevyModel, f: KernelFn, x_hi: float):
    """``|psi(x)|^-2`` for ``|x| <= x_hi``.

    Closed form for Gamma models, otherwise ``exp(2 int_0^x Im F+[u v1])``
    on a fine grid.
    """
    if model.kind == "gamma":
        fv2 = f.values**2

        def closed(x):
            x = np.asarray(x, dtype=float)
            logs = np.log1p((x.ravel()[:, None] ** 2) * fv2[None, :] / model.b**2) @ f.weights
            return np.exp(logs).reshape(x.shape)

        return closed

    nodes = np.linspace(0.0, x_hi, int(np.ceil(x_hi * 32)) + 1)
    im = compute_uv1_ft(model, f, nodes).imag
    steps = (im[1:] + im[:-1]) / 2 * np.diff(nodes)
    integral = np.concatenate([[0.0], np.cumsum(steps)])

    def evaluate(x):
        return np.exp(2 * np.interp(np.abs(x), nodes, integral))

    return evaluate


def check_assumptions(model: LevyModel, f: KernelFn, eps: Optional[float] = None,
                      tau: Optional[float] = None, doublings: int = 10) -> Dict:
    """Report items (1)-(5) of the standing assumptions with numeric margins.

    Item (5) uses the Gamma criterion ``alpha = int max{1, f^2/b} ds < 1/2``
    with ``2 eps < 1/2 - alpha`` when it applies, and otherwise evaluates the
    defining integral of :func:`five_equivalent` directly
    on doubling truncations. An inconclusive trend emits
    :class:`InconclusiveWarning`.
    """
    eps = model.eps if eps is None else eps
    tau = model.tau if tau is None else tau
    items = {}

    norm = f.lp_norm(2 + tau)
    items["1"] = {
        "holds": bool(np.isfinite(norm) and np.isfinite(f.diam)),
        "margin": norm,
        "detail": f"||f||_(2+tau) = {norm:.6g}, diam = {f.diam:g}",
    }

    if model.kind == "gamma":
        l1, l2sq, sup = 1.0 / model.b, 1.0 / (2 * model.b), 1.0
    else:
        uv = np.abs(model.table_x * model.table_v0)
        l1 = float(trapezoid(uv, model.table_x))
        l2sq = float(trapezoid(uv**2, model.table_x))
        sup = float(uv.max())
    items["2"] = {
        "holds": bool(np.isfinite(l1) and np.isfinite(l2sq) and np.isfinite(sup)),
        "margin": sup,
        "detail": f"||uv0||_1 = {l1:.6g}, ||uv0||_2 = {np.sqrt(l2sq):.6g}, sup = {sup:.6g}",
    }

    moment = model.moment(2 + tau)
    items["3"] = {
        "holds": bool(np.isfinite(moment)),
        "margin": moment,
        "detail": f"int |x|^(1+tau) |uv0| = {moment:.6g}",
    }

    x = np.geomspace(1e-2, 1e3, 2001)
    c = np.abs(compute_uv1_ft(model, f, x)) * np.sqrt(1 + x**2)
    centers, maxima = _bin_extrema(x, c, 1e2, 1e3 * (1 + 1e-12), 10, np.max)
    growth = _loglog_slope(centers, maxima)
    items["4"] = {
        "holds": bool(np.all(np.isfinite(c)) and (np.isnan(growth) or growth <= 0.1)),
        "margin": float(c.max()),
        "detail": f"sup |F+[uv1]| (1+x^2)^(1/2) = {c.max():.6g}, outer slope {growth:.3g}",
    }

    items["5"] = _check_item5(model, f, eps, doublings)
    report = {
        "model": model.name,
        "kernel": f.name,
        "eps": eps,
        "tau": tau,
        "items": items,
        "holds": all(item["holds"] for item in items.values()),
    }
    return report


def _check_item5(model, f, eps, doublings):
    alpha = None
    if model.kind == "gamma":
        alpha = float(np.maximum(1.0, f.values**2 / model.b) @ f.weights)
        # integrand <= C (1 + x^2)^{-1 + 2 eps + alpha}
        if alpha < 0.5 and 2 * eps < 0.5 - alpha:
            return {
                "holds": True,
                "criterion": "sufficient",
                "alpha": alpha,
                "margin": 0.5 - alpha - 2 * eps,
                "detail": f"alpha = {alpha:.6g} < 1/2 and 2 eps < 1/2 - alpha",
            }
    else:
        doublings = min(doublings, 6)
    inv_sq = _abs_psi_inv_sq(model, f, 10.0 * 2**doublings)

    def integrand(x):
        return (1 + x**2) ** (-1 + 2 * eps) * inv_sq(x)

    trend = _doubling_integral(integrand, doublings=doublings)
    if trend["verdict"] == "inconclusive":
        warnings.warn(
            f"assumption (5) truncated integral shows no clear trend "
            f"(last relative increment {trend['relative_increment']:.3g})",
            InconclusiveWarning,
            stacklevel=3,
        )
    return {
        "holds": trend["verdict"] == "converged",
        "criterion": "direct",
        "alpha": alpha,
        "margin": trend["partial"][-1],
        "trend": trend,
        "detail": f"truncated integral {trend['partial'][-1]:.6g} ({trend['verdict']})",
    }


# ============================================================================
# ADMISSIBILITY OF A TEST FUNCTION
# ============================================================================


def partial_sobolev(g: GridFn, order: float, caps: Sequence[float]) -> np.ndarray:
    """Squared partial Sobolev norms ``int_{|x|<=T} |F+ g|^2 (1+x^2)^order`` for each cap ``T``."""
    G = fourier_plus(g)
    terms = np.abs(G.values) ** 2 * (1 + G.x**2) ** order * G.step
    ax = np.abs(G.x)
    return np.array([terms[ax <= cap].sum() for cap in caps])


def _sobolev_trend(g: GridFn, order: float) -> Dict:
    top = np.pi / g.step
    caps = 4.0 * 2.0 ** np.arange(int(np.floor(np.log2(top / 4.0))) + 1)
    norms = partial_sobolev(g, order, caps)
    if norms[-1] == 0:
        relative = 0.0
    else:
        relative = float((norms[-1] - norms[-2]) / norms[-1]) if len(norms) > 1 else 0.0
    return {
        "order": order,
        "caps": caps.tolist(),
        "norms_sq": norms.tolist(),
        "relative_increment": relative,
        "holds": relative < CONVERGED,
    }


def smooth_taper(s: np.ndarray, width: float) -> np.ndarray:
    """C-infinity weight rising from 0 to 1 over ``width`` at both ends of ``s``.

    Built from ``h(u) = exp(-1/u)`` as ``h(u) / (h(u) + h(1 - u))``, so the
    tapered branch has no jump at the grid ends.
    """
    s = np.asarray(s, dtype=float)

    def step(u):
        u = np.clip(u, 0.0, 1.0)
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
        return a / (a + b)

    return step((s - s[0]) / width) * step((s[-1] - s) / width)


#: Share of the log grid tapered at each end before branch Sobolev norms.
TAPER_SHARE = 0.1


def _branch_trends(v: TestFunction, log_spec: LogGridSpec, order: float) -> Dict:
    lw = v.on_log(log_spec)
    s_spec = RealGridSpec(lw.s_lo, lw.s_hi, lw.n_pts)
    weight = np.exp(lw.s / 2) * smooth_taper(lw.s, TAPER_SHARE * (lw.s_hi - lw.s_lo))
    return {
        "pos": _sobolev_trend(GridFn.on(s_spec, lw.pos * weight), order),
        "neg": _sobolev_trend(GridFn.on(s_spec, lw.neg * weight), order),
    }


def xi_lower_bound(eps: float, tau: float) -> float:
    return 2 * (1 - eps) - (0.5 - eps) * (1 + tau) / (2 + tau)


#: Envelope level, relative to the peak, treated as rounding noise.
ROUNDING_LEVEL = 1e-12


def fitted_decay(g: GridFn, lo: float = 8.0, bins: int = 12) -> float:
    """Decay exponent ``xi`` of the envelope of ``|F+ g|``.

    Returns ``inf`` once a bin maximum inside the fitted range falls to
    ``ROUNDING_LEVEL`` times the peak.
    """
    G = fourier_plus(g)
    mag = np.abs(G.values)
    peak = mag.max()
    if peak == 0:
        return float("inf")
    ax = np.abs(G.x)
    hi = ax.max() / 2
    centers, maxima = _bin_extrema(ax, mag, lo, hi, bins, np.max)
    if len(maxima) < 3 or np.any(maxima <= ROUNDING_LEVEL * peak):
        return float("inf")
    return -_loglog_slope(centers, maxima)


def check_admissible(
    v: TestFunction,
    model: LevyModel,
    f: KernelFn,
    eps: float,
    tau: float,
    beta1: float,
    beta2: Optional[float] = None,
    xi: Optional[float] = None,
    a_n: float = 1e-6,
    spec: RealGridSpec = RealGridSpec.centered(0.01, 2**13),
    log_spec: LogGridSpec = LogGridSpec(),
) -> Dict:
    """Report admissibility items (i)-(iii) of ``v`` at index ``(xi, beta2)``.

    (i) ``G_n^{-1*} v`` in ``H^{3/2 - eps}`` by partial norms over doubling caps;
    (ii) both log-reparametrized branches of ``M v``, tapered by
    :func:`smooth_taper` at the grid ends, in ``H^{beta2}``, plus the
    requirement ``beta2 > beta1``; (iii) the fitted decay exponent of
    ``|F+[G_n^{-1*} v]|`` against ``2(1-eps) - (1/2-eps)(1+tau)/(2+tau)``.
    """
    beta2 = v.beta2 if beta2 is None else beta2
    xi = v.xi if xi is None else xi
    bound = xi_lower_bound(eps, tau)
    remark_bound = 7 / 4 - 1.5 * eps
    if v.zero:
        ok = {"holds": True}
        return {
            "test_function": v.name,
            "i": ok, "ii": {**ok, "beta_order": True}, "iii": {**ok, "fitted_xi": float("inf")},
            "xi_min": bound, "xi_min_remark": remark_bound, "holds": True,
        }

    w = apply_G_inv_adjoint_n(v.on(spec), f, a_n, log_spec=log_spec)
    w = w.with_values(w.real)
    item_i = _sobolev_trend(w, 1.5 - eps)

    branches = _branch_trends(v, log_spec, beta2)
    item_ii = {
        "holds": bool(branches["pos"]["holds"] and branches["neg"]["holds"]),
        "beta_order": bool(beta2 > beta1),
        **branches,
    }

    fitted = fitted_decay(w)
    item_iii = {
        "holds": bool(fitted >= bound),
        "fitted_xi": fitted,
        "declared_xi": xi,
        "declared_ok": bool(xi > bound),
    }
    return {
        "test_function": v.name,
        "model": model.name,
        "i": item_i,
        "ii": item_ii,
        "iii": item_iii,
        "xi_min": bound,
        "xi_min_remark": remark_bound,
        "holds": bool(item_i["holds"] and item_ii["holds"] and item_iii["holds"]),
    }
