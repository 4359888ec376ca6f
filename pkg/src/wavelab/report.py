"""Structured experiment reports persisted as CSV and JSON.

CSV bytes are a pure function of (config, seed, version): floats are
serialized with repr (shortest round-trip) and the volatile wall time
lives only in the JSON report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__


@dataclass
class Verdict:
    passed: bool
    value: float
    threshold: float
    direction: str = "<="  # how value relates to threshold when passing

    def as_dict(self) -> dict:
        return {
            "pass": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
            "direction": self.direction,
        }


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    seed: int
    metrics: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    trial_rows: list = field(default_factory=list)  # list of {metric: value} per trial
    trial_meta: list = field(default_factory=list)  # per-trial data-family params
    wall_time_s: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def add_verdict(self, name: str, value: float, threshold: float, direction: str = "<=") -> None:
        ok = value <= threshold if direction == "<=" else value >= threshold
        self.verdicts[name] = Verdict(bool(ok), float(value), float(threshold), direction)

    def csv_text(self) -> str:
        names = sorted({k for row in self.trial_rows for k in row} | set(self.metrics))
        lines = [",".join(["trial"] + names)]
        for i, row in enumerate(self.trial_rows):
            lines.append(",".join([str(i)] + [_fmt(row.get(k)) for k in names]))
        lines.append(",".join(["aggregate"] + [_fmt(self.metrics.get(k)) for k in names]))
        return "\n".join(lines) + "\n"

    def json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "metrics": {k: self.metrics[k] for k in sorted(self.metrics)},
            "verdicts": {k: v.as_dict() for k, v in sorted(self.verdicts.items())},
            "trials": self.trial_rows,
            "trial_meta": self.trial_meta,
            "wall_time_s": self.wall_time_s,
            "tool_version": __version__,
        }

    def write(self, out_dir, fmt: str) -> list:
        import pathlib

        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt in ("csv", "both"):
            p = out / f"{self.experiment}.csv"
            p.write_text(self.csv_text())
            written.append(p)
        if fmt in ("json", "both"):
            p = out / f"{self.experiment}.json"
            p.write_text(json.dumps(self.json_dict(), indent=2, sort_keys=True) + "\n")
            written.append(p)
        return written


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)
