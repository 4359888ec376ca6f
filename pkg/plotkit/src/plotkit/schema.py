"""Readers for the wavelab report formats.

CSV: header row naming metrics, one row per trial, a final `aggregate`
row.  JSON: experiment, config, metrics, verdicts {pass, value,
threshold, direction}, trials, wall_time_s, tool_version.  The
stationary experiment additionally exports a profile curve CSV with
columns (r, g, gp, Z, Zp).  Everything here opens files read-only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass


class SchemaError(ValueError):
    """Input does not match the documented report schema."""


@dataclass
class ReportCSV:
    path: str
    columns: list
    trials: list  # list of dict[str, float|None]
    aggregate: dict

    def column(self, name: str):
        if name not in self.columns:
            raise SchemaError(f"{self.path}: missing column {name!r}")
        vals = [row[name] for row in self.trials if row.get(name) is not None]
        return vals


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def read_report_csv(path) -> ReportCSV:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if not header or header[0] != "trial":
            raise SchemaError(f"{path}: first column must be 'trial'")
        columns = header[1:]
        trials = []
        aggregate = None
        for row in reader:
            if not row:
                continue
            values = {c: _parse_cell(v) for c, v in zip(columns, row[1:])}
            if row[0] == "aggregate":
                aggregate = values
            else:
                trials.append(values)
        if aggregate is None:
            raise SchemaError(f"{path}: missing aggregate row")
    return ReportCSV(str(path), columns, trials, aggregate)


def read_report_json(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    for key in ("experiment", "metrics", "verdicts"):
        if key not in data:
            raise SchemaError(f"{path}: missing field {key!r}")
    return data


def read_profile_curve(path) -> dict:
    """Stationary profile export: columns r, g, gp, Z, Zp."""
    import numpy as np

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["r", "g", "gp", "Z", "Zp"]
        if header != expected:
            missing = [c for c in expected if c not in header]
            name = missing[0] if missing else header[0]
            raise SchemaError(f"{path}: missing column {name!r}")
        rows = [[float(v) for v in row] for row in reader if row]
    arr = np.asarray(rows)
    return {c: arr[:, i] for i, c in enumerate(expected)}
