"""Experiment configuration: flat key=value files with section headers,
overridden by CLI flags.  Unknown keys are rejected."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """All knobs of a run; every field has a working default."""

    experiment: str = ""
    m: float = 3.0
    iota: int = 1
    grid_h: float = 1.0 / 64.0
    grid_radius: float = 4.0
    t_final: float = 2.0
    trials: int = 20
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out_dir: str = "out"
    fmt: str = "both"
    workers: int = 1

    def __post_init__(self):
        if self.fmt not in ("csv", "json", "both"):
            raise ConfigError(f"format must be csv|json|both, got {self.fmt!r}")
        if self.iota not in (1, -1):
            raise ConfigError("iota must be +1 or -1")
        if self.m <= 1:
            raise ConfigError("m must exceed 1")
        if self.trials < 1 or self.workers < 1:
            raise ConfigError("trials and workers must be positive")

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def as_dict(self) -> dict:
        return asdict(self)


_MAIN_KEYS = {
    "experiment": str,
    "m": float,
    "iota": int,
    "grid_h": float,
    "grid_radius": float,
    "t_final": float,
    "trials": int,
    "seed": int,
    "out_dir": str,
    "format": str,
    "workers": int,
}


def parse_config_file(path: str) -> dict:
    """Flat key=value with [main] / [tolerances] section headers."""
    values: dict = {"tolerances": {}}
    section = "main"
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip().lower()
                if section not in ("main", "tolerances"):
                    raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if section == "tolerances":
                values["tolerances"][key] = float(val)
                continue
            if key not in _MAIN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values["fmt" if key == "format" else key] = _MAIN_KEYS[key](val)
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults < config file < explicit overrides (CLI flags)."""
    merged: dict = {}
    for source in (file_values, overrides):
        if not source:
            continue
        tols = source.pop("tolerances", None) or {}
        merged.setdefault("tolerances", {}).update(tols)
        merged.update({k: v for k, v in source.items() if v is not None})
    return ExperimentConfig(**merged)
