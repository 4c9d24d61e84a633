"""Empirical checks of the tail and moment inequalities behind the limit theorems.

Each check simulates ``R`` independent fields, forms partial sums
``S_W = sum_j X_j`` of a bounded centered functional of the observations and
compares tail frequencies with the analytic bound. A frequency passes when
it stays below the bound plus three binomial standard deviations.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import verdicts
from .config import Config
from .errors import ConfigError
from .fieldsim import m_bound
from .forward import compute_psi, compute_uv1_ft
from .harness import ExperimentResult, aux_seed, pool_map, record_seed, simulate_replicate

logger = logging.getLogger(__name__)

#: Sides used by the moment bound when fewer than three are configured.
MOMENT_SIDES = (256, 1024, 4096)


def _values_task(task) -> np.ndarray:
    cfg, side, seed = task
    return simulate_replicate(cfg, side, seed).flat


def simulate_values(cfg: Config, side: int, tag: int) -> np.ndarray:
    """``(R, n)`` observations of ``R`` independent fields."""
    base = aux_seed(cfg.experiment.seed, tag)
    tasks = [(cfg, side, record_seed(base, side, rep)) for rep in range(cfg.experiment.reps)]
    return np.stack(pool_map(_values_task, tasks, cfg.experiment.threads))


def _binomial_pass(empirical: float, bound: float, reps: int) -> Dict[str, Any]:
    capped = min(bound, 1.0)
    sigma = math.sqrt(capped * (1 - capped) / reps)
    return {
        "bound": float(bound),
        "empirical": float(empirical),
        "sigma": sigma,
        "pass": bool(bound >= 1 or empirical <= bound + 3 * sigma),
    }


def bernstein_bound(x: float, rho: float, B: float, m: int, d: int, H: float) -> float:
    """Tail bound for ``P(S_V >= x B_V)`` of a centered ``m``-dependent field."""
    c = 4 * (m + 1) ** d
    if x <= rho * B / H:
        return math.exp(-(x**2) / (c * rho))
    return math.exp(-x * B / (c * H))


def exponential_bound(x: float, n: int, m: int, d: int, K: float = 1.0) -> float:
    """``2 exp(-x^2 / (8 (m + 1)^d K^2 (x + 2 n)))``."""
    return 2 * math.exp(-(x**2) / (8 * (m + 1) ** d * K**2 * (x + 2 * n)))


def _population_psi(cfg: Config, t: Sequence[float]) -> np.ndarray:
    return np.asarray(compute_psi(cfg.model(), cfg.kernel_fn(), cfg.sim.gamma, np.asarray(t, dtype=float)))


def check_bernstein(cfg: Config, Y: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """Bernstein bound for ``X_j = cos(t Y_j) - E cos(t Y_0)``, with ``H = 2``."""
    t = cfg.experiment.inequality_t
    if Y is None:
        Y = simulate_values(cfg, cfg.sim.window_side, 2)
    reps, n = Y.shape
    psi_t, psi_2t = _population_psi(cfg, [t, 2 * t])
    X = np.cos(t * Y) - psi_t.real
    var_x = (1 + psi_2t.real) / 2 - psi_t.real**2
    S = X.sum(axis=1)
    B2 = float(np.mean(S**2))
    B = math.sqrt(B2)
    rho = n * var_x / B2 if B2 > 0 else math.inf
    m, d, H = m_bound(cfg.kernel_fn(), cfg.sim.delta), cfg.sim.dim, 2.0
    rows = []
    for x in (0.0,) + tuple(cfg.experiment.inequality_x):
        bound = bernstein_bound(x, rho, B, m, d, H)
        row = {"x": float(x), "regime": "gaussian" if x <= rho * B / H else "exponential"}
        row.update(_binomial_pass(float(np.mean(S >= x * B)), bound, reps))
        rows.append(row)
    logger.info("bernstein: n=%d, R=%d, B=%.4g, rho=%.4g", n, reps, B, rho)
    return {"t": t, "n": n, "reps": reps, "m": m, "H": H, "B": B, "rho": rho, "rows": rows}


def check_exponential_inequalities(cfg: Config, Y: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """Tail bounds for the cosine/sine fields and their ``K``-truncated ``Y``-weighted versions.

    The truncated fields are centered by their pooled mean over all
    replicates.
    """
    t, K = cfg.experiment.inequality_t, cfg.experiment.inequality_K
    if K < 1:
        raise ConfigError(f"truncation level K must be at least 1, got {K}", key="experiment.inequality_K")
    if Y is None:
        Y = simulate_values(cfg, cfg.sim.window_side, 3)
    reps, n = Y.shape
    (psi_t,) = _population_psi(cfg, [t])
    m, d = m_bound(cfg.kernel_fn(), cfg.sim.delta), cfg.sim.dim
    inside = np.abs(Y) <= K
    y_cos = np.where(inside, Y * np.cos(t * Y), 0.0)
    y_sin = np.where(inside, Y * np.sin(t * Y), 0.0)
    fields = {
        "xi1": (np.cos(t * Y) - psi_t.real, 1.0),
        "xi2": (np.sin(t * Y) - psi_t.imag, 1.0),
        "xi_bar1": (y_cos - y_cos.mean(), K),
        "xi_bar2": (y_sin - y_sin.mean(), K),
    }
    rows: List[Dict[str, Any]] = []
    for name, (X, level) in fields.items():
        S = np.abs(X.sum(axis=1))
        for c in (0.0,) + tuple(cfg.experiment.inequality_x):
            x = c * math.sqrt(n)
            row = {"field": name, "x": x, "K": level}
            row.update(_binomial_pass(float(np.mean(S >= x)), exponential_bound(x, n, m, d, level), reps))
            rows.append(row)
    return {"t": t, "K": K, "n": n, "reps": reps, "m": m, "rows": rows}


def check_moment_bound(cfg: Config) -> Dict[str, Any]:
    """``n E|theta_hat(u) - theta(u)|^2`` stays within a factor 2 across ``n``."""
    u = cfg.experiment.inequality_t
    sides = cfg.experiment.window_sides
    if len(sides) < 3:
        sides = MOMENT_SIDES
    model, f = cfg.model(), cfg.kernel_fn()
    (psi_u,) = _population_psi(cfg, [u])
    (uv1_u,) = np.atleast_1d(compute_uv1_ft(model, f, np.array([u])))
    theta = psi_u * (cfg.sim.gamma + uv1_u)
    rows = []
    for k, side in enumerate(sides):
        Y = simulate_values(cfg, side, 10 + k)
        n = Y.shape[1]
        theta_hat = np.mean(Y * np.exp(1j * u * Y), axis=1)
        mse = float(np.mean(np.abs(theta_hat - theta) ** 2))
        rows.append({"n": n, "mse": mse, "scaled": n * mse})
    scaled = [r["scaled"] for r in rows]
    ratio = max(scaled) / min(scaled) if min(scaled) > 0 else math.inf
    return {"u": u, "rows": rows, "ratio": ratio, "pass": bool(ratio <= 2.0)}


def run_inequalities(cfg: Config) -> ExperimentResult:
    """All three checks, with the Bernstein and exponential ones sharing fields."""
    Y = simulate_values(cfg, cfg.sim.window_side, 2)
    summary = {
        "experiment": "inequalities",
        "config": cfg.describe(),
        "bernstein": check_bernstein(cfg, Y),
        "exponential": check_exponential_inequalities(cfg, Y),
        "moment_bound": check_moment_bound(cfg),
    }
    return ExperimentResult(
        "inequalities", [], summary, verdicts.evaluate(summary, "inequalities", cfg.acceptance)
    )
