"""Write grids, samples and experiment results to CSV and JSON.

Records are flattened the same way everywhere: nested dictionaries become
dot-separated columns and lists are stored as JSON strings, with the header
discovered over all records in first-seen order.
"""

import csv
import json
import math
from typing import Any, Dict, Iterable, List, TextIO

import numpy as np

from .fieldsim import FieldSample
from .grids import GridFn, LogGridFn

#: Significant digits kept for floats in ``summary.json``.
FLOAT_DIGITS = 12


def _flatten_dict(d: Dict[str, Any], parent_key: str = "", sep: str = ".") -> Dict[str, Any]:
    """Flatten ``{"a": {"b": 1}}`` into ``{"a.b": 1}``; lists become JSON strings."""
    items = []
    for k, v in d.items():
        new_key = parent_key + sep + k if parent_key else k
        if isinstance(v, dict) and v:
            items.extend(_flatten_dict(v, new_key, sep=sep).items())
        elif isinstance(v, (list, tuple)):
            items.append((new_key, json.dumps(_plain(v))))
        else:
            items.append((new_key, _plain(v)))
    return dict(items)


def _plain(value: Any) -> Any:
    """Turn numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{FLOAT_DIGITS}g}")
    return value


def write_records_csv(records: Iterable[Dict[str, Any]], stream: TextIO, sep: str = ".") -> int:
    """Write records with a header discovered over all of them; returns the row count."""
    rows = [_flatten_dict(rec, sep=sep) for rec in records]
    if not rows:
        return 0
    headers: List[str] = []
    seen = set()
    for row in rows:
        for key in row:
            if key not in seen:
                seen.add(key)
                headers.append(key)
    writer = csv.DictWriter(stream, fieldnames=headers, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return len(rows)


def write_summary_json(summary: Dict[str, Any], stream: TextIO) -> None:
    """Sorted keys and rounded floats, so equal inputs give equal bytes."""
    json.dump(_plain(summary), stream, sort_keys=True, indent=2)
    stream.write("\n")


def write_jsonl(rows: Iterable[Dict[str, Any]], stream: TextIO) -> int:
    """One compact JSON object per line; returns the row count."""
    count = 0
    for row in rows:
        stream.write(json.dumps(_plain(row), sort_keys=True) + "\n")
        count += 1
    return count


def write_gridfn_csv(g: GridFn, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x", "re", "im"])
    for x, v in zip(g.x, g.values):
        writer.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def write_loggridfn_csv(w: LogGridFn, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["s", "pos_re", "pos_im", "neg_re", "neg_im"])
    for s, p, q in zip(w.s, w.pos, w.neg):
        writer.writerow([repr(float(s)), repr(float(p.real)), repr(float(p.imag)),
                         repr(float(q.real)), repr(float(q.imag))])


def write_field_sample(sample: FieldSample, stream: TextIO) -> None:
    """``# key=value`` metadata lines, then ``j_1,...,j_d,y`` rows."""
    for key, value in sample.metadata().items():
        stream.write(f"# {key}={'' if value is None else value}\n")
    dim = sample.window.dim
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"j_{k + 1}" for k in range(dim)] + ["y"])
    for point, y in zip(sample.window.points, sample.flat):
        writer.writerow([int(c) for c in point] + [repr(float(y))])
