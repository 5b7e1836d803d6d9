"""Deterministic CSV/JSON writers for tables and reports.

CSV files carry '#'-prefixed header lines echoing the full parameter set
so every file is self-describing; floats are printed with 17 significant
digits so byte-identical output is a meaningful determinism check.
JSON mirrors hold the same columns keyed by name.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .params import DerivedParams, ModelParams


def format_float(value: float) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isnan(value):
        return "nan"
    return format(float(value), ".17g")


def params_header(params: ModelParams, derived: DerivedParams | None = None,
                  extra: dict | None = None) -> list[str]:
    """Header lines echoing the model inputs (and derived values) verbatim."""
    lines = [f"model.{name} = {format_float(getattr(params, name))}"
             for name in ("n0", "R", "T", "m", "sigma", "t0")]
    if derived is not None:
        lines += [f"derived.{name} = {format_float(getattr(derived, name))}"
                  for name in ("sigma_t2", "re2", "x", "gamma_plus",
                               "gamma_minus", "nc", "te")]
    for key, value in (extra or {}).items():
        if isinstance(value, float):
            value = format_float(value)
        lines.append(f"{key} = {value}")
    return lines


def write_csv(path: Path, columns: dict, header_lines: list[str]):
    """Columns is an ordered name -> sequence mapping of equal lengths."""
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    length = len(arrays[0]) if arrays else 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for i in range(length):
            row = []
            for arr in arrays:
                v = arr[i]
                row.append(v if isinstance(v, str) else format_float(v))
            fh.write(",".join(row) + "\n")


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonify(payload), fh, indent=1, sort_keys=True)
        fh.write("\n")
