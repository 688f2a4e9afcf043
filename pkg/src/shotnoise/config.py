"""Experiment configuration: JSON on disk, validated dataclass in memory."""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, replace

from shotnoise.jumps import jump_law_from_spec
from shotnoise.kernels import kernel_from_spec
from shotnoise.renewal import SCALINGS

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_time", "config_hash"]

DEFAULT_GATES = {
    "cov_max_deviation": 0.15,
    "marginal_abs_skewness": 0.15,
    "marginal_abs_excess_kurtosis": 0.3,
    "projection_variance_abs": 0.2,
}

_E_POWER = re.compile(r"^\s*e\s*\^\s*\(?\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*\)?\s*$")


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""


def parse_time(value) -> float:
    """Number, scientific-notation string, or an ``"e^x"`` literal."""
    if isinstance(value, bool):
        raise ConfigError("t: expected a number or 'e^x' string")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _E_POWER.match(value)
        if m:
            return math.exp(float(m.group(1)))
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"t: cannot parse {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    jump: dict
    kernel: dict
    t: float
    u_grid: list
    scaling: str = "inverse"
    alphas: list | None = None
    replications: int = 10_000
    master_seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    out_dir: str = "out"
    t_literal: str | None = None
    probe_points: int = 25
    gates: dict = field(default_factory=lambda: dict(DEFAULT_GATES))

    def __post_init__(self):
        try:
            law = jump_law_from_spec(self.jump)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"jump: {exc}") from None
        try:
            kernel = kernel_from_spec(self.kernel)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"kernel: {exc}") from None
        if self.scaling not in SCALINGS:
            raise ConfigError(f"scaling: expected one of {SCALINGS}, got {self.scaling!r}")
        if self.scaling == "remark3" and not kernel.is_neg_half:
            raise ConfigError("scaling: 'remark3' needs a moderate, slow or fast kernel")
        if not (math.isfinite(self.t) and self.t > kernel.t_min):
            raise ConfigError(f"t: must exceed the kernel cutoff t_min={kernel.t_min!r}")
        u = self.u_grid
        if not isinstance(u, (list, tuple)) or not u:
            raise ConfigError("u_grid: expected a nonempty list")
        if any(not isinstance(x, (int, float)) or isinstance(x, bool) for x in u):
            raise ConfigError("u_grid: entries must be numbers")
        if any(x < 0.0 or x > 1.0 for x in u):
            raise ConfigError("u_grid: entries must lie in [0, 1]")
        if any(b <= a for a, b in zip(u, u[1:])):
            raise ConfigError("u_grid not increasing")
        if self.alphas is not None and len(self.alphas) != len(u):
            raise ConfigError("alphas: length must match u_grid")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications: must be an integer >= 1")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 1 << 64:
            raise ConfigError("master_seed: must be an unsigned 64-bit integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers: must be an integer >= 1")
        if not isinstance(self.probe_points, int) or self.probe_points < 2:
            raise ConfigError("probe_points: must be an integer >= 2")
        unknown = set(self.gates) - set(DEFAULT_GATES)
        if unknown:
            raise ConfigError(f"gates: unknown gate(s) {sorted(unknown)}")

    @property
    def law(self):
        return jump_law_from_spec(self.jump)

    @property
    def response_kernel(self):
        return kernel_from_spec(self.kernel)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["u_grid"] = [float(x) for x in self.u_grid]
        return d


def config_hash(cfg: ExperimentConfig) -> str:
    """Short digest of everything that determines the outputs (not ``out_dir``)."""
    d = cfg.to_dict()
    d.pop("out_dir")
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


_FIELDS = {
    "jump",
    "kernel",
    "t",
    "u_grid",
    "scaling",
    "alphas",
    "replications",
    "master_seed",
    "workers",
    "out_dir",
    "probe_points",
    "gates",
}
_REQUIRED = ("jump", "kernel", "t", "u_grid")


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = set(raw) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown field(s): {sorted(unknown)}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"{key}: required field missing")
    kw = dict(raw)
    kw["t_literal"] = raw["t"] if isinstance(raw["t"], str) else None
    kw["t"] = parse_time(raw["t"])
    kw["u_grid"] = list(raw["u_grid"]) if isinstance(raw["u_grid"], (list, tuple)) else raw["u_grid"]
    if "gates" in raw:
        if not isinstance(raw["gates"], dict):
            raise ConfigError("gates: expected an object")
        kw["gates"] = {**DEFAULT_GATES, **raw["gates"]}
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)
