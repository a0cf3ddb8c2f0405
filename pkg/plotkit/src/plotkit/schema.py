"""Strict readers for the spinctl output formats.

Each reader validates the file's self-describing headers and columns before
returning data; any mismatch raises SchemaError naming the offending field,
which the command-line wrappers turn into a nonzero exit.
"""

from __future__ import annotations

import csv
import json

import numpy as np

__all__ = [
    "SchemaError",
    "read_wigner_grid",
    "read_sweep",
    "read_histogram",
    "read_state",
]


class SchemaError(ValueError):
    """Input file does not match the documented spinctl format."""


def _read_csv(path):
    comments = []
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                rows.append(line)
    if not rows:
        raise SchemaError(f"{path}: no header row")
    header = next(csv.reader([rows[0]]))
    data = list(csv.reader(rows[1:]))
    return comments, header, data


def _require_columns(path, header, expected):
    for name in expected:
        if name not in header:
            raise SchemaError(f"{path}: missing column '{name}'")


def _require_comment(path, comments, keyword):
    if not any(keyword in c for c in comments):
        raise SchemaError(f"{path}: missing header comment '{keyword}'")


def _float_column(path, data, header, name):
    idx = header.index(name)
    out = []
    for row in data:
        try:
            out.append(float(row[idx]))
        except (ValueError, IndexError):
            raise SchemaError(f"{path}: non-numeric value in column '{name}'") from None
    return np.array(out)


def read_wigner_grid(path):
    """Returns (theta, phi, weight, w) arrays from a wigner grid CSV."""
    comments, header, data = _read_csv(path)
    _require_comment(path, comments, "normalization")
    _require_comment(path, comments, "resolution")
    _require_columns(path, header, ("theta", "phi", "weight", "w"))
    if not data:
        raise SchemaError(f"{path}: empty grid")
    cols = {name: _float_column(path, data, header, name)
            for name in ("theta", "phi", "weight", "w")}
    return cols["theta"], cols["phi"], cols["weight"], cols["w"]


SWEEP_COLUMNS = ("omega_end_rad_s", "xi", "xi_normalized", "squeezing_db",
                 "anti_squeezing_db", "mean_spin", "ground_state_overlap")


def read_sweep(path):
    """Returns a dict of column arrays from a squeezing sweep CSV, skipping
    rows whose error field is non-empty."""
    comments, header, data = _read_csv(path)
    _require_comment(path, comments, "squeezing_db")
    _require_columns(path, header, SWEEP_COLUMNS)
    if "error" in header:
        err_idx = header.index("error")
        data = [row for row in data if len(row) <= err_idx or not row[err_idx].strip()]
    if not data:
        raise SchemaError(f"{path}: no valid sweep rows")
    return {name: _float_column(path, data, header, name) for name in SWEEP_COLUMNS}


def read_histogram(path):
    """Returns (bin_left, bin_right, count) arrays."""
    _, header, data = _read_csv(path)
    _require_columns(path, header, ("bin_left", "bin_right", "count"))
    if not data:
        raise SchemaError(f"{path}: empty histogram")
    left = _float_column(path, data, header, "bin_left")
    right = _float_column(path, data, header, "bin_right")
    count = _float_column(path, data, header, "count")
    return left, right, count.astype(int)


def read_state(path):
    """Returns the density matrix (complex ndarray) of a serialized state."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    for field in ("kind", "data"):
        if field not in obj:
            raise SchemaError(f"{path}: missing field '{field}'")
    kind = obj["kind"]
    if kind not in ("pure", "mixed"):
        raise SchemaError(f"{path}: unknown state kind '{kind}'")
    arr = np.asarray(obj["data"], dtype=float)
    if arr.shape[-1] != 2:
        raise SchemaError(f"{path}: field 'data' must hold [re, im] pairs")
    data = arr[..., 0] + 1j * arr[..., 1]
    if kind == "pure":
        if data.ndim != 1:
            raise SchemaError(f"{path}: pure state 'data' must be a vector")
        return np.outer(data, data.conj())
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise SchemaError(f"{path}: mixed state 'data' must be a square matrix")
    return data
