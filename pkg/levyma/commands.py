"""Command handlers for the levyma CLI.

Each ``handle_*`` function takes the parsed arguments, resolves the
configuration, runs one piece of the library and writes its artifacts.
Handlers return the process exit code.
"""

import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict

from rich.console import Console

from . import verdicts
from .conditions import check_admissible, check_assumptions, check_U_beta
from .config import Config, load_config
from .errors import ConfigError
from .estimator import (
    SmoothingKernel,
    confidence_interval,
    fit,
    fourier_route,
    functional,
    true_functional,
)
from .exporter import (
    FLOAT_DIGITS,
    write_field_sample,
    write_gridfn_csv,
    write_jsonl,
    write_loggridfn_csv,
    write_records_csv,
    write_summary_json,
)
from .fieldsim import dependence_diagnostic, m_bound
from .harness import (
    ExperimentResult,
    replay,
    run_clt,
    run_clt_multivariate,
    run_consistency,
    simulate_replicate,
)
from .importer import read_field_sample, read_records_csv
from .inequalities import run_inequalities
from .influence import sigma_v_sq

logger = logging.getLogger(__name__)


@contextmanager
def get_output_stream(file_path):
    """Yield a writable stream: ``sys.stdout`` for None or ``-``, else the opened file."""
    if file_path is not None and file_path != "-":
        f = open(file_path, "w", encoding="utf-8", newline="")
        try:
            yield f
        finally:
            f.close()
    else:
        yield sys.stdout


@contextmanager
def get_input_stream(file_path):
    if file_path is not None and file_path != "-":
        f = open(file_path, "r", encoding="utf-8", newline="")
        try:
            yield f
        finally:
            f.close()
    else:
        yield sys.stdin


def write_json_object(obj: Any) -> None:
    write_summary_json(obj, sys.stdout)


def resolve_config(args) -> Config:
    cfg = load_config(getattr(args, "config", None))
    return cfg.with_overrides(
        seed=getattr(args, "seed", None),
        reps=getattr(args, "reps", None),
        threads=getattr(args, "threads", None),
        n=getattr(args, "n", None),
    )


def write_outputs(result: ExperimentResult, out_dir: str) -> Path:
    """``records.csv``, ``summary.json``, ``timing.csv`` and ``verdicts.txt`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "records.csv", "w", encoding="utf-8", newline="") as f:
        write_records_csv(result.records, f)
    with open(out / "summary.json", "w", encoding="utf-8") as f:
        write_summary_json({"kind": result.kind, **result.summary, "verdicts": result.verdicts}, f)
    with open(out / "timing.csv", "w", encoding="utf-8", newline="") as f:
        write_records_csv(result.timings, f)
    with open(out / "verdicts.txt", "w", encoding="utf-8") as f:
        f.write(verdicts.render_text(result.verdicts, title=result.kind))
    logger.info("wrote %d records to %s", len(result.records), out)
    return out


def _report(result: ExperimentResult, args) -> int:
    if getattr(args, "out", None):
        write_outputs(result, args.out)
    Console(stderr=True).print(verdicts.render_table(result.verdicts, title=result.kind))
    headline = {
        "experiment": result.kind,
        "passed": result.passed,
        "verdicts": {v["name"]: v["status"] for v in result.verdicts},
    }
    for key in ("ks", "ad", "var_ratio", "max_rel_gap", "slopes", "drift"):
        if key in result.summary:
            headline[key] = result.summary[key]
    write_json_object(headline)
    return 1 if getattr(args, "strict", False) and not result.passed else 0


# ============================================================================
# HANDLERS
# ============================================================================


def handle_simulate(args) -> int:
    """Simulate one field and write it as a sample CSV."""
    cfg = resolve_config(args)
    seed = cfg.sim.seed
    sample = simulate_replicate(cfg, cfg.sim.window_side, seed)
    with get_output_stream(getattr(args, "output", None)) as out:
        write_field_sample(sample, out)
    if getattr(args, "diagnostic", False):
        report = dependence_diagnostic(sample)
        keys = ("m", "n", "band", "thresholds", "violations_by_band")
        print(json.dumps({k: report[k] for k in keys}), file=sys.stderr)
    return 0


def handle_check_conditions(args) -> int:
    """Report the model assumptions, schedule conditions and admissibility."""
    cfg = resolve_config(args)
    model, f, settings = cfg.model(), cfg.kernel_fn(), cfg.settings()
    beta1 = cfg.experiment.beta1
    ns = [side**cfg.sim.dim for side in cfg.experiment.window_sides]
    report: Dict[str, Any] = {
        "config": cfg.describe(),
        "m": m_bound(f, cfg.sim.delta),
        "assumptions": check_assumptions(model, f),
        "U_beta": check_U_beta(f, beta1),
        "schedules": settings.cutoff.check_rate_conditions(
            beta1, cfg.experiment.beta2, ns, settings.b_n, settings.raw_b_n
        ),
        "admissible": [
            check_admissible(v, model, f, model.eps, model.tau, beta1, spec=settings.x_spec,
                             log_spec=settings.log_spec)
            for v in cfg.test_functions()
        ],
    }
    items = report["assumptions"]["items"]
    rows = [{"name": f"assumption ({k})", "expr": items[k].get("detail", ""),
             "status": "pass" if items[k]["holds"] else "fail"} for k in sorted(items)]
    rows.append({"name": f"U_{beta1:g}", "expr": f"worst margin {report['U_beta']['worst_margin']:.4g}",
                 "status": "pass" if report["U_beta"]["holds"] else "fail"})
    Console(stderr=True).print(verdicts.render_table(rows, title="conditions"))
    write_json_object(report)
    return 0


def handle_estimate(args) -> int:
    """Estimate ``L v`` for every configured test function on one sample."""
    cfg = resolve_config(args)
    f, settings, model = cfg.kernel_fn(), cfg.settings(), cfg.model()
    if getattr(args, "sample", None):
        with get_input_stream(args.sample) as stream:
            sample = read_field_sample(stream, source=args.sample)
    else:
        sample = simulate_replicate(cfg, cfg.sim.window_side, cfg.sim.seed)
    result = fit(sample, f, settings)
    rows = []
    for v in cfg.test_functions():
        L_hat = functional(v, sample, f, settings, result)
        row = {
            "v": v.name,
            "n": sample.n,
            "seed": sample.seed,
            "L_hat": L_hat,
            "fourier_route": fourier_route(v, result.ecf, SmoothingKernel(result.b_n), f, result.a_n, settings),
            "a_n": result.a_n,
            "b_n": result.b_n,
            **result.diagnostics,
        }
        if model.kind == "gamma":
            row["L_true"] = true_functional(v, model)
        if getattr(args, "ci", False):
            sigma_sq = sigma_v_sq(v, model, f, sample.delta, mode="plugin", sample=sample,
                                  b=result.b_n, settings=settings)
            row["sigma_sq"] = sigma_sq
            row["ci"] = list(confidence_interval(L_hat, sigma_sq, sample.n, cfg.experiment.level))
        rows.append(row)
    if getattr(args, "dump_uv1", None):
        with get_output_stream(args.dump_uv1) as out:
            write_gridfn_csv(result.uv1_hat, out)
    if getattr(args, "dump_uv0", None):
        with get_output_stream(args.dump_uv0) as out:
            write_loggridfn_csv(result.uv0_log, out)
    write_jsonl(rows, sys.stdout)
    return 0


def handle_mc_consistency(args) -> int:
    return _report(run_consistency(resolve_config(args)), args)


def handle_mc_clt(args) -> int:
    return _report(run_clt(resolve_config(args), drift=getattr(args, "drift", False)), args)


def handle_mc_clt_multi(args) -> int:
    return _report(run_clt_multivariate(resolve_config(args)), args)


def handle_inequalities(args) -> int:
    return _report(run_inequalities(resolve_config(args)), args)


def handle_replay(args) -> int:
    """Recompute one replicate from its seed and compare with stored records.

    Without ``--records`` the replicate is rebuilt at the configured window
    side and drift. With it, every stored ``(side, gamma)`` group carrying
    the seed is rebuilt at its own side and drift.
    """
    cfg = resolve_config(args)
    if not getattr(args, "records", None):
        write_jsonl(replay(cfg, cfg.sim.window_side, args.seed), sys.stdout)
        return 0

    with get_input_stream(args.records) as stream:
        stored = [r for r in read_records_csv(stream) if r.get("seed") == args.seed]
    if not stored:
        raise ConfigError(f"no stored record carries seed {args.seed}", key="--seed")
    groups: Dict[Any, Dict[Any, Dict[str, Any]]] = {}
    for rec in stored:
        side = int(rec.get("side") or cfg.sim.window_side)
        gamma = float(rec["gamma"]) if rec.get("gamma") not in (None, "") else cfg.sim.gamma
        groups.setdefault((side, gamma), {})[_record_key(rec)] = rec

    records = []
    for (side, gamma), by_key in groups.items():
        for rec in replay(cfg, side, args.seed, gamma):
            old = by_key.get(_record_key(rec))
            rec["matches"] = old is not None and _same(old["L_hat"], rec["L_hat"])
            records.append(rec)
    write_jsonl(records, sys.stdout)
    if any(rec.get("matches") is False for rec in records):
        return 1
    return 0


def _record_key(rec: Dict[str, Any]):
    index = rec.get("v_index")
    return (rec["v"], None if index in (None, "") else int(index))


def _same(stored: Any, value: float) -> bool:
    """Equality at the precision records are stored with."""
    return f"{float(stored):.{FLOAT_DIGITS}g}" == f"{value:.{FLOAT_DIGITS}g}"
