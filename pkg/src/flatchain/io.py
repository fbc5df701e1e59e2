"""Chain files (JSON lines), raster CSVs and JSON reports."""

from __future__ import annotations

import csv
import json
import logging
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .chain import Cell, Chain, make_cell
from .groups import ConfigError, get_group

log = logging.getLogger(__name__)


class InputFileError(ValueError):
    """A chain, raster or sample file could not be parsed."""


def parse_chain_file(path) -> Chain:
    """Read a chain: a header ``{n, k, spacing, group}`` then one record per cell."""
    path = Path(path)
    header = None
    coeffs: dict[Cell, object] = {}
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFileError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if header is None:
                try:
                    n, k = int(rec["n"]), int(rec["k"])
                    spacing = float(rec.get("spacing", 1.0))
                    group = get_group(str(rec.get("group", "Z")))
                except (KeyError, TypeError, ValueError) as exc:
                    raise InputFileError(f"{path}:{lineno}: bad header ({exc})") from None
                header = (n, k, spacing, group)
                continue
            n, k, spacing, group = header
            try:
                cell = make_cell(rec["anchor"], rec.get("axes", ()))
                value = group.coerce(rec["coef"])
            except (KeyError, TypeError, ConfigError) as exc:
                raise InputFileError(f"{path}:{lineno}: bad cell record ({exc})") from None
            if len(cell.anchor) != n or len(cell.axes) != k:
                raise InputFileError(f"{path}:{lineno}: cell {list(cell.anchor)}{list(cell.axes)} "
                                     f"does not fit n={n}, k={k}")
            if cell in coeffs:
                raise InputFileError(f"{path}:{lineno}: duplicate cell anchor={list(cell.anchor)} "
                                     f"axes={list(cell.axes)}")
            if group.is_zero(value):
                log.warning("%s:%d: zero coefficient on %s dropped", path, lineno, cell)
                coeffs[cell] = None
                continue
            coeffs[cell] = value
    if header is None:
        raise InputFileError(f"{path}: missing header record")
    n, k, spacing, group = header
    try:
        return Chain(n, k, {c: v for c, v in coeffs.items() if v is not None}, spacing, group)
    except ConfigError as exc:
        raise InputFileError(f"{path}: {exc}") from None


def cell_json(cell: Cell) -> list:
    return [list(cell.anchor), list(cell.axes)]


def write_chain_file(A: Chain, path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"n": A.n, "k": A.k, "spacing": A.spacing, "group": A.group.tag},
                            sort_keys=True) + "\n")
        for cell, v in A.items():
            fh.write(json.dumps({"anchor": list(cell.anchor), "axes": list(cell.axes),
                                 "coef": A.group.to_json(v)}, sort_keys=True) + "\n")


def parse_raster(path) -> np.ndarray:
    """Rectangular CSV of reals; integer-valued files come back as int64."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not x.strip() for x in row):
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise InputFileError(f"{path}:{lineno}: non-numeric entry") from None
    if not rows:
        raise InputFileError(f"{path}: empty raster")
    if len({len(r) for r in rows}) != 1:
        raise InputFileError(f"{path}: ragged rows (widths {sorted({len(r) for r in rows})})")
    arr = np.array(rows, dtype=float)
    if not np.isfinite(arr).all():
        raise InputFileError(f"{path}: non-finite entry")
    if np.all(arr == np.round(arr)):
        return arr.astype(np.int64)
    return arr


def write_raster(arr, path) -> None:
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ValueError("CSV rasters are two-dimensional")
    fmt = "%d" if np.issubdtype(arr.dtype, np.integer) else "%.17g"
    np.savetxt(path, arr, delimiter=",", fmt=fmt)


def parse_samples(path) -> list[tuple[float, float]]:
    """``value[,weight]`` rows; weight defaults to 1."""
    out = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            row = [x.strip() for x in row if x.strip()]
            if not row:
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError:
                if lineno == 1:
                    continue  # header line
                raise InputFileError(f"{path}:{lineno}: non-numeric entry") from None
            if len(vals) > 2:
                raise InputFileError(f"{path}:{lineno}: expected value[,weight]")
            out.append((vals[0], vals[1] if len(vals) == 2 else 1.0))
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_report(report: dict, path=None) -> str:
    text = dumps_report(report)
    if path is not None:
        Path(path).write_text(text)
    return text
