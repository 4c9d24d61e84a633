"""Read tabulated models, grids, samples and stored records back in."""

import csv
import logging
from typing import Any, Dict, List, Sequence, TextIO

import numpy as np

from .errors import ConfigError, ShapeError
from .fieldsim import FieldSample
from .grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec
from .window import Window

logger = logging.getLogger(__name__)


def _infer_value(value: Any) -> Any:
    """Guess the type of a CSV cell: int, float, bool, None or the string itself."""
    if not isinstance(value, str):
        return value
    if value == "":
        return None
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    if value.lower() == "true":
        return True
    if value.lower() == "false":
        return False
    if value.lower() == "null":
        return None
    return value


def _numeric_rows(stream: TextIO, names: Sequence[str], source: str) -> Dict[str, np.ndarray]:
    reader = csv.DictReader(line for line in stream if not line.startswith("#"))
    missing = [n for n in names if n not in (reader.fieldnames or [])]
    if missing:
        raise ConfigError(f"{source}: missing columns {missing}, found {reader.fieldnames}")
    cols: Dict[str, List[float]] = {n: [] for n in names}
    for i, row in enumerate(reader, 2):
        for n in names:
            try:
                cols[n].append(float(row[n]))
            except (TypeError, ValueError):
                raise ConfigError(f"{source}: non-numeric {n!r} on line {i}", line=i) from None
    return {n: np.asarray(v) for n, v in cols.items()}


def read_columns(path: str, names: Sequence[str]) -> Dict[str, np.ndarray]:
    """Numeric columns of a headed CSV file, e.g. ``x,v0`` or ``s,f``."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            cols = _numeric_rows(f, names, path)
    except OSError as e:
        raise ConfigError(f"cannot read table {path}: {e}") from e
    logger.info("read %d rows of %s from %s", len(cols[names[0]]), ",".join(names), path)
    return cols


def _uniform_spec(x: np.ndarray, source: str):
    if len(x) < 2:
        raise ShapeError(f"{source}: need at least two grid points")
    step = (x[-1] - x[0]) / (len(x) - 1)
    if not np.allclose(np.diff(x), step, rtol=1e-9, atol=0):
        raise ShapeError(f"{source}: grid is not uniform")
    return float(x[0]), float(x[-1]), len(x)


def read_gridfn_csv(stream: TextIO, source: str = "<stream>") -> GridFn:
    cols = _numeric_rows(stream, ("x", "re", "im"), source)
    lo, hi, n = _uniform_spec(cols["x"], source)
    return GridFn.on(RealGridSpec(lo, hi, n), cols["re"] + 1j * cols["im"])


def read_loggridfn_csv(stream: TextIO, source: str = "<stream>") -> LogGridFn:
    cols = _numeric_rows(stream, ("s", "pos_re", "pos_im", "neg_re", "neg_im"), source)
    lo, hi, n = _uniform_spec(cols["s"], source)
    return LogGridFn.on(
        LogGridSpec(lo, hi, n),
        cols["pos_re"] + 1j * cols["pos_im"],
        cols["neg_re"] + 1j * cols["neg_im"],
    )


def read_field_sample(stream: TextIO, source: str = "<stream>") -> FieldSample:
    """Inverse of :func:`levyma.exporter.write_field_sample`."""
    meta: Dict[str, Any] = {}
    body: List[str] = []
    for line in stream:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = _infer_value(value.strip())
        elif line.strip():
            body.append(line)
    for key in ("d", "delta", "m"):
        if meta.get(key) is None:
            raise ConfigError(f"{source}: missing '# {key}=' header")
    dim = int(meta["d"])
    names = [f"j_{k + 1}" for k in range(dim)]
    cols = _numeric_rows(iter(body), names + ["y"], source)
    points = np.stack([cols[n].astype(np.int64) for n in names], axis=-1)
    shape = tuple(int(points[:, k].max()) + 1 for k in range(dim))
    window = Window.box(shape, dim)
    if window.n != len(points) or np.any(points.min(axis=0) != 0):
        raise ShapeError(f"{source}: sample does not fill the box {shape}")
    order = np.ravel_multi_index(tuple(points.T), shape)
    values = np.empty(window.n)
    values[order] = cols["y"]
    return FieldSample(
        window=window,
        delta=float(meta["delta"]),
        values=values,
        m=int(meta["m"]),
        seed=meta.get("seed"),
        model=str(meta.get("model") or ""),
        kernel=str(meta.get("kernel") or ""),
        h=meta.get("h"),
        gamma=float(meta.get("gamma") or 0.0),
    )


def read_records_csv(stream: TextIO) -> List[Dict[str, Any]]:
    """Stored records with inferred cell types, for re-aggregation."""
    return [{k: _infer_value(v) for k, v in row.items()} for row in csv.DictReader(stream)]
