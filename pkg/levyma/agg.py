"""Aggregation of experiment records.

Records are flat dictionaries, one per (sample size, replicate). Aggregations
are written as ``name=func(path)`` specs, where ``path`` is a JMESPath
expression evaluated on each record, for example::

    aggregate(records, "mean_abs=mean(abs_err), var=var(err_W), count", by=["n"])
"""

import math
from collections import defaultdict
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import jmespath
import jmespath.exceptions
import numpy as np

from .errors import ConfigError

Record = Dict[str, Any]


# ============================================================================
# AGGREGATION FUNCTIONS
# ============================================================================


def _numeric(values: List[Any]) -> np.ndarray:
    """Floats of the non-null values; NaN entries are kept."""
    out = []
    for v in values:
        if v is None:
            continue
        try:
            out.append(float(v))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"cannot aggregate non-numeric value {v!r}") from e
    return np.asarray(out, dtype=float)


def _mean(values):
    x = _numeric(values)
    return float(np.mean(x)) if x.size else None


def _var(values):
    x = _numeric(values)
    return float(np.var(x, ddof=1)) if x.size > 1 else None


def _std(values):
    v = _var(values)
    return math.sqrt(v) if v is not None else None


def _median(values):
    x = _numeric(values)
    return float(np.median(x)) if x.size else None


def _reduce(func, values):
    x = _numeric(values)
    return float(func(x)) if x.size else None


def _absmax(values):
    x = _numeric(values)
    return float(np.max(np.abs(x))) if x.size else None


AGGREGATION_FUNCTIONS: Dict[str, Callable[[List[Any]], Any]] = {
    "sum": lambda values: float(np.sum(_numeric(values))),
    "mean": _mean,
    "var": _var,
    "std": _std,
    "median": _median,
    "min": lambda values: _reduce(np.min, values),
    "max": lambda values: _reduce(np.max, values),
    "absmax": _absmax,
    "list": list,
}


# ============================================================================
# SPECS
# ============================================================================


def parse_agg_specs(agg_spec: str) -> List[Tuple[str, str]]:
    """Split ``"count, m=mean(err)"`` into ``[("count", "count"), ("m", "mean(err)")]``."""
    specs = []
    for part in agg_spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            name, expr = part.split("=", 1)
            specs.append((name.strip(), expr.strip()))
        else:
            specs.append((part, part))
    return specs


def apply_single_agg(spec: Tuple[str, str], records: List[Record]) -> Dict[str, Any]:
    name, expr = spec
    if expr == "count":
        return {name: len(records)}
    if "(" not in expr or not expr.endswith(")"):
        raise ConfigError(f"aggregation {expr!r} is not of the form func(path)")
    func_name = expr[: expr.index("(")]
    path = expr[expr.index("(") + 1 : -1].strip()
    if func_name not in AGGREGATION_FUNCTIONS:
        known = ["count"] + sorted(AGGREGATION_FUNCTIONS)
        raise ConfigError(f"unknown aggregation function {func_name!r}; supported: {', '.join(known)}")
    try:
        compiled = jmespath.compile(path)
    except jmespath.exceptions.ParseError as e:
        raise ConfigError(f"invalid path {path!r} in aggregation {name!r}: {e}") from e
    values = [compiled.search(rec) for rec in records]
    return {name: AGGREGATION_FUNCTIONS[func_name](values)}


def aggregate(records: Sequence[Record], agg_spec: str,
              by: Optional[Sequence[str]] = None) -> List[Record]:
    """Aggregate records, optionally grouped by the values of ``by`` fields.

    Groups come out sorted by their key, so the result does not depend on
    record order.
    """
    specs = parse_agg_specs(agg_spec)
    if not by:
        out: Record = {}
        for spec in specs:
            out.update(apply_single_agg(spec, list(records)))
        return [out]
    groups: Dict[Tuple, List[Record]] = defaultdict(list)
    for rec in records:
        groups[tuple(rec.get(k) for k in by)].append(rec)
    result = []
    for key in sorted(groups, key=lambda t: tuple((v is None, v) for v in t)):
        row: Record = dict(zip(by, key))
        for spec in specs:
            row.update(apply_single_agg(spec, groups[key]))
        result.append(row)
    return result
