"""Monte Carlo experiments for the functional estimator.

Every replicate draws its field from the seed ``record_seed(base, n, rep)``
and stores that seed in its record, so any record can be replayed alone.
Replicates run in a process pool whose results are collected in task order;
summaries are pure functions of the records plus a small context dictionary
(variance, schedules, true values), and verdicts are evaluated on summaries
only.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import verdicts
from .agg import aggregate
from .config import Config
from .errors import ConfigError
from .estimator import confidence_interval, error_bound_terms, fit, functional, true_functional
from .fieldsim import FieldSample, simulate_field
from .influence import sigma_matrix
from .testfunctions import TestFunction
from .window import Window

logger = logging.getLogger(__name__)

#: Anderson-Darling 5% critical value for a fully specified normal law.
AD_CRITICAL_5PCT = 2.492

#: Fewest replicates accepted by the distributional experiments.
MIN_DISTRIBUTION_REPS = 50

Record = Dict[str, Any]


@dataclass
class ExperimentResult:
    """Records, their summary and the verdicts evaluated on it."""

    kind: str
    records: List[Record]
    summary: Dict[str, Any]
    verdicts: List[Dict[str, Any]] = field(default_factory=list)
    timings: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return verdicts.passed(self.verdicts)


# ============================================================================
# REPLICATES
# ============================================================================


def record_seed(base: int, n: int, rep: int) -> int:
    """Seed of replicate ``rep`` at sample size ``n``."""
    return int(np.random.SeedSequence([int(base), int(n), int(rep)]).generate_state(1)[0])


def aux_seed(base: int, tag: int) -> int:
    """Seed for auxiliary draws (variance patches, projections) of a run."""
    return int(np.random.SeedSequence([int(base), 0, 0, int(tag)]).generate_state(1)[0])


def simulate_replicate(cfg: Config, side: int, seed: int,
                       gamma: Optional[float] = None) -> FieldSample:
    window = Window.box(side, cfg.sim.dim)
    return simulate_field(
        cfg.model(),
        cfg.kernel_fn(),
        cfg.sim.delta,
        window,
        cfg.sim.h,
        seed,
        gamma=cfg.sim.gamma if gamma is None else gamma,
        substeps=cfg.sim.substeps,
    )


def pool_map(fn: Callable, tasks: Sequence, threads: int) -> List:
    """``map`` over a process pool, results in task order."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    chunk = max(1, len(tasks) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def estimate_records(cfg: Config, side: int, seed: int, gamma: float,
                     L_true: Sequence[float], rep: Optional[int] = None) -> List[Record]:
    """Simulate one field and estimate every configured test function on it."""
    sample = simulate_replicate(cfg, side, seed, gamma)
    f = cfg.kernel_fn()
    settings = cfg.settings()
    result = fit(sample, f, settings)
    n = sample.n
    records = []
    for index, (v, L) in enumerate(zip(cfg.test_functions(), L_true)):
        L_hat = functional(v, sample, f, settings, result)
        err = L_hat - L
        records.append(
            {
                "v": v.name,
                "v_index": index,
                "n": n,
                "side": side,
                "rep": rep,
                "seed": seed,
                "gamma": gamma,
                "L_hat": L_hat,
                "L_true": L,
                "err": err,
                "abs_err": abs(err),
                "err_W": math.sqrt(n) * err,
                "a_n": result.a_n,
                "b_n": result.b_n,
                "m": sample.m,
                "cutoff_nodes": result.diagnostics["cutoff_nodes"],
                "psi_truncated": result.diagnostics["psi_truncated"],
            }
        )
    return records


def _replicate_task(task) -> Tuple[List[Record], Dict[str, Any]]:
    cfg, side, rep, gamma, L_true = task
    seed = record_seed(cfg.experiment.seed, side, rep)
    start = time.perf_counter()
    records = estimate_records(cfg, side, seed, gamma, L_true, rep=rep)
    elapsed = time.perf_counter() - start
    return records, {"side": side, "rep": rep, "gamma": gamma, "seconds": elapsed}


def run_replicates(cfg: Config, sides: Iterable[int], gamma: float,
                   L_true: Sequence[float]) -> Tuple[List[Record], List[Dict[str, Any]]]:
    tasks = [(cfg, side, rep, gamma, tuple(L_true))
             for side in sides for rep in range(cfg.experiment.reps)]
    logger.info("running %d replicates on %d worker(s)", len(tasks), cfg.experiment.threads)
    results = pool_map(_replicate_task, tasks, cfg.experiment.threads)
    records = [rec for recs, _ in results for rec in recs]
    timings = [timing for _, timing in results]
    return records, timings


def replay(cfg: Config, side: int, seed: int, gamma: Optional[float] = None) -> List[Record]:
    """Recompute the records of one stored replicate from its seed."""
    gamma = cfg.sim.gamma if gamma is None else gamma
    model = cfg.model()
    L_true = [true_functional(v, model) for v in cfg.test_functions()]
    return estimate_records(cfg, side, seed, gamma, L_true)


# ============================================================================
# CONSISTENCY
# ============================================================================


def _slope(ns: Sequence[float], errors: Sequence[float]) -> Dict[str, Any]:
    fit_ = stats.linregress(np.log(ns), np.log(errors))
    k = len(ns)
    out = {"slope": float(fit_.slope), "intercept": float(fit_.intercept),
           "stderr": float(fit_.stderr), "ci": None}
    if k > 2:
        q = stats.t.ppf(0.975, k - 2)
        out["ci"] = [float(fit_.slope - q * fit_.stderr), float(fit_.slope + q * fit_.stderr)]
    return out


def summarize_consistency(records: List[Record], context: Dict[str, Any]) -> Dict[str, Any]:
    """Mean absolute error per ``(v, n)`` and the log-log slope per ``v``."""
    zero = set(context.get("zero", []))
    per_n = aggregate(
        records,
        "mean_abs=mean(abs_err), max_abs=absmax(err), var_err_W=var(err_W), count",
        by=["v", "n"],
    )
    for row in per_n:
        row["zero"] = row["v"] in zero
    slopes = []
    for name in sorted({row["v"] for row in per_n}):
        rows = [r for r in per_n if r["v"] == name]
        entry = {"v": name, "slope": None, "intercept": None, "stderr": None, "ci": None}
        ns = [r["n"] for r in rows]
        errs = [r["mean_abs"] for r in rows]
        if name not in zero and len(set(ns)) >= 2 and all(e and e > 0 for e in errs):
            entry.update(_slope(ns, errs))
        slopes.append(entry)
    return {"experiment": "consistency", **context, "per_n": per_n, "slopes": slopes}


def run_consistency(cfg: Config) -> ExperimentResult:
    """Mean ``|L_hat v - L v|`` over growing windows and its decay rate."""
    model, f, settings = cfg.model(), cfg.kernel_fn(), cfg.settings()
    vs = cfg.test_functions()
    sides = cfg.experiment.window_sides
    ns = [side**cfg.sim.dim for side in sides]
    schedules = settings.cutoff.check_rate_conditions(
        cfg.experiment.beta1, cfg.experiment.beta2, ns, settings.b_n, settings.raw_b_n
    )
    L_true = [true_functional(v, model) for v in vs]
    records, timings = run_replicates(cfg, sides, cfg.sim.gamma, L_true)

    bound_terms = []
    reference = next((v for v in vs if not v.zero), None)
    if reference is not None:
        for n in ns:
            terms = error_bound_terms(reference, model, f, n, settings.a_n(n), settings.b_n(n), settings)
            bound_terms.append({"v": reference.name, "n": n, **terms})
    context = {
        "config": cfg.describe(),
        "schedules": schedules,
        "L_true": {v.name: L for v, L in zip(vs, L_true)},
        "zero": [v.name for v in vs if v.zero],
        "bound_terms": bound_terms,
    }
    summary = summarize_consistency(records, context)
    return ExperimentResult(
        "consistency", records, summary, verdicts.evaluate(summary, "consistency", cfg.acceptance), timings
    )


# ============================================================================
# CENTRAL LIMIT THEOREM
# ============================================================================


def anderson_darling(z: np.ndarray) -> float:
    """Anderson-Darling statistic of ``z`` against the standard normal law."""
    z = np.sort(np.asarray(z, dtype=float))
    N = z.size
    i = np.arange(1, N + 1)
    terms = (2 * i - 1) * (stats.norm.logcdf(z) + stats.norm.logsf(z[::-1]))
    return float(-N - terms.sum() / N)


def _normality(z: np.ndarray) -> Dict[str, Any]:
    ks = stats.kstest(z, "norm")
    return {
        "ks": {"statistic": float(ks.statistic), "pvalue": float(ks.pvalue)},
        "ad": {"statistic": anderson_darling(z), "critical_5pct": AD_CRITICAL_5PCT},
    }


def _check_reps(cfg: Config) -> None:
    if cfg.experiment.reps < MIN_DISTRIBUTION_REPS:
        raise ConfigError(
            f"distributional tests need at least {MIN_DISTRIBUTION_REPS} replicates, "
            f"got {cfg.experiment.reps}",
            key="experiment.reps",
        )


def _variance_seed(cfg: Config) -> int:
    return aux_seed(cfg.experiment.seed, 1)


def summarize_clt(records: List[Record], context: Dict[str, Any]) -> Dict[str, Any]:
    """Normality, variance and drift statistics of the standardized errors."""
    sigma_sq = context["sigma_sq"]
    gamma, n = context["gamma"], context["n"]
    out: Dict[str, Any] = {
        "experiment": "clt", **context,
        "ks": None, "ad": None, "var_ratio": None, "var_ratio_gap": None,
        "coverage": None, "drift": None, "degenerate": None,
    }
    if sigma_sq <= 0:
        per_n = aggregate([r for r in records if r["gamma"] == gamma], "max_abs=absmax(err)", by=["n"])
        values = [r["max_abs"] for r in per_n]
        trend = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
        out["degenerate"] = {"per_n": per_n, "trend_ok": bool(trend)}
        return out

    main = [r for r in records if r["gamma"] == gamma and r["n"] == n]
    errs = np.array([r["err_W"] for r in main])
    z = errs / math.sqrt(sigma_sq)
    out.update(_normality(z))
    ratio = float(np.var(errs, ddof=1) / sigma_sq)
    out["var_ratio"] = ratio
    out["var_ratio_gap"] = abs(ratio - 1.0)
    level = context.get("level", 0.95)
    hits = 0
    for r in main:
        lo, hi = confidence_interval(r["L_hat"], sigma_sq, r["n"], level)
        hits += lo <= r["L_true"] <= hi
    out["coverage"] = {"level": level, "fraction": hits / len(main)}

    shifted = [r for r in records if r["gamma"] != gamma and r["n"] == n]
    if shifted:
        z1 = np.array([r["err_W"] for r in shifted]) / math.sqrt(sigma_sq)
        ks2 = stats.ks_2samp(z, z1)
        out["drift"] = {"gamma": shifted[0]["gamma"], "ks_distance": float(ks2.statistic),
                        "pvalue": float(ks2.pvalue)}
    return out


def run_clt(cfg: Config, drift: bool = False) -> ExperimentResult:
    """Standardized ``err_W(v)`` against ``N(0, 1)`` for the first test function.

    With ``drift`` the replicates are repeated with the drift raised by one
    on the same seeds. A test function with ``sigma_v^2 = 0`` switches to
    tracking ``max |L_hat v - L v|`` over the configured window sizes.
    """
    _check_reps(cfg)
    model, f, settings = cfg.model(), cfg.kernel_fn(), cfg.settings()
    v = cfg.test_functions()[0]
    side = cfg.sim.window_side
    n = side**cfg.sim.dim
    b = settings.b_n(n)
    L = true_functional(v, model)
    sigma_sq = _sigma(cfg, [v], side, b)[0][0]
    logger.info("sigma_v^2 = %.6g for %s (n=%d, b=%g)", sigma_sq, v.name, n, b)

    gamma = cfg.sim.gamma
    if sigma_sq > 0:
        records, timings = run_replicates(cfg, [side], gamma, [L])
        if drift:
            shifted, more = run_replicates(cfg, [side], gamma + 1.0, [L])
            records, timings = records + shifted, timings + more
    else:
        sides = sorted(set(cfg.experiment.window_sides) | {side})
        records, timings = run_replicates(cfg, sides, gamma, [L])

    context = {
        "config": cfg.describe(),
        "v": v.name,
        "n": n,
        "gamma": gamma,
        "L_true": L,
        "sigma_sq": sigma_sq,
        "sigma_mode": cfg.experiment.sigma_mode,
        "a_n": settings.a_n(n),
        "b_n": b,
        "level": cfg.experiment.level,
    }
    summary = summarize_clt(records, context)
    return ExperimentResult("clt", records, summary, verdicts.evaluate(summary, "clt", cfg.acceptance), timings)


def _sigma(cfg: Config, vs: List[TestFunction], side: int, b: float) -> List[List[float]]:
    model, f = cfg.model(), cfg.kernel_fn()
    sample = None
    if cfg.experiment.sigma_mode == "plugin":
        sample = simulate_replicate(cfg, side, record_seed(cfg.experiment.seed, side, 0))
    matrix = sigma_matrix(
        vs, model, f, cfg.sim.delta,
        mode=cfg.experiment.sigma_mode,
        sample=sample,
        h=cfg.sim.h,
        seed=_variance_seed(cfg),
        mc_sites=cfg.experiment.mc_sites,
        b=b,
        settings=cfg.settings(),
    )
    return matrix.tolist()


def summarize_clt_multivariate(records: List[Record], context: Dict[str, Any]) -> Dict[str, Any]:
    """Empirical against theoretical covariance, plus random projections."""
    sigma = np.asarray(context["sigma"], dtype=float)
    k = sigma.shape[0]
    reps = sorted({r["rep"] for r in records})
    row_of = {rep: i for i, rep in enumerate(reps)}
    E = np.zeros((len(reps), k))
    for r in records:
        E[row_of[r["rep"]], r["v_index"]] = r["err_W"]
    emp = np.atleast_2d(np.cov(E, rowvar=False, ddof=1))
    scale = np.sqrt(np.outer(np.diag(sigma), np.diag(sigma)))
    valid = scale > 0
    gaps = np.where(valid, np.abs(emp - sigma) / np.where(valid, scale, 1.0), 0.0)

    rng = np.random.default_rng(np.random.SeedSequence([int(context["seed"]), 0xC0]))
    projections = []
    for _ in range(3):
        c = rng.standard_normal(k)
        c /= np.linalg.norm(c)
        var = float(c @ sigma @ c)
        if var <= 0:
            continue
        res = stats.kstest(E @ c / math.sqrt(var), "norm")
        projections.append({"c": c.tolist(), "statistic": float(res.statistic), "pvalue": float(res.pvalue)})

    out = {
        "experiment": "clt_multi", **context,
        "empirical": emp.tolist(),
        "rel_gap": gaps.tolist(),
        "max_rel_gap": float(gaps.max()) if valid.any() else None,
        "cramer_wold": projections,
        "ks": None,
        "ad": None,
    }
    if k == 1 and sigma[0, 0] > 0:
        out.update(_normality(E[:, 0] / math.sqrt(sigma[0, 0])))
    return out


def run_clt_multivariate(cfg: Config, v_list: Optional[Sequence[Dict[str, Any]]] = None) -> ExperimentResult:
    """Joint limit law of ``(err_W(v_1), ..., err_W(v_k))``.

    ``v_list`` holds test function entries in config form and replaces
    ``[experiment] test_functions``; entries travel to worker processes as data.
    """
    _check_reps(cfg)
    if v_list is not None:
        cfg = replace(cfg, experiment=replace(cfg.experiment, test_functions=tuple(v_list)))
    model, settings = cfg.model(), cfg.settings()
    vs = cfg.test_functions()
    side = cfg.sim.window_side
    n = side**cfg.sim.dim
    b = settings.b_n(n)
    L_true = [true_functional(v, model) for v in vs]
    sigma = _sigma(cfg, vs, side, b)
    records, timings = run_replicates(cfg, [side], cfg.sim.gamma, L_true)
    context = {
        "config": cfg.describe(),
        "v": [v.name for v in vs],
        "n": n,
        "sigma": sigma,
        "seed": cfg.experiment.seed,
        "a_n": settings.a_n(n),
        "b_n": b,
    }
    summary = summarize_clt_multivariate(records, context)
    return ExperimentResult(
        "clt_multi", records, summary, verdicts.evaluate(summary, "clt_multi", cfg.acceptance), timings
    )


SUMMARIZERS = {
    "consistency": summarize_consistency,
    "clt": summarize_clt,
    "clt_multi": summarize_clt_multivariate,
}


def resummarize(kind: str, records: List[Record], summary: Dict[str, Any]) -> Dict[str, Any]:
    """Rebuild a summary from stored records and the context kept in ``summary``."""
    if kind not in SUMMARIZERS:
        raise ConfigError(f"no summarizer for experiment {kind!r}")
    derived = {
        "consistency": ("per_n", "slopes"),
        "clt": ("ks", "ad", "var_ratio", "var_ratio_gap", "coverage", "drift", "degenerate"),
        "clt_multi": ("empirical", "rel_gap", "max_rel_gap", "cramer_wold", "ks", "ad"),
    }[kind]
    context = {k: v for k, v in summary.items() if k not in derived and k != "experiment"}
    return SUMMARIZERS[kind](records, context)
