"""Run configuration loaded from a YAML file.

Every field has a default, so an empty file (or no file) is a valid
configuration. Unknown keys are rejected so that typos surface early.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError
from .inference import McmcConfig, Priors
from .sim import DEFAULT_REGION, SimSpec

__all__ = ["RunConfig", "load_config"]

MODELS = ("independent", "spatial")
UNITS = ("radians", "degrees")
CONVENTIONS = ("outgoing", "incoming")


@dataclass(frozen=True)
class GridConfig:
    resolution_km: float = 10.0
    region: tuple = DEFAULT_REGION
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    model: str = "spatial"
    kernel: str = "exponential"
    angle_unit: str = "radians"
    direction_convention: str = "outgoing"
    priors: Priors = field(default_factory=Priors)
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    sim: SimSpec = field(default_factory=SimSpec)
    grid: GridConfig = field(default_factory=GridConfig)
    fast_loo: bool | None = None
    level: float = 0.95
    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, allowed in (
            ("model", MODELS),
            ("angle_unit", UNITS),
            ("direction_convention", CONVENTIONS),
        ):
            if getattr(self, name) not in allowed:
                raise ConfigurationError(f"{name} must be one of {allowed}")
        if not 0 < self.level < 1:
            raise ConfigurationError("level must lie in (0, 1)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sim"].pop("sites", None)
        return d

    def hash(self) -> str:
        """Digest of the settings that affect a fit."""
        d = self.to_dict()
        keep = {k: d[k] for k in ("model", "kernel", "priors", "mcmc")}
        blob = json.dumps(keep, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_seed(self, seed: int | None) -> "RunConfig":
        if seed is None:
            return self
        return dataclasses.replace(
            self,
            mcmc=dataclasses.replace(self.mcmc, seed=seed),
            sim=dataclasses.replace(self.sim, seed=seed),
        )


def _section(cls, raw, name):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{name} must be a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {name}: {sorted(unknown)}")
    vals = dict(raw)
    for key, v in vals.items():
        if isinstance(v, str) and v.lower() in ("inf", "+inf", ".inf"):
            vals[key] = math.inf
    if "region" in vals:
        vals["region"] = tuple(tuple(map(float, r)) for r in vals["region"])
    if "proposal_cov" in vals:
        vals["proposal_cov"] = tuple(tuple(map(float, r)) for r in vals["proposal_cov"])
    try:
        return cls(**vals)
    except TypeError as exc:
        raise ConfigurationError(f"{name}: {exc}") from exc


def config_from_dict(raw: dict | None) -> RunConfig:
    raw = dict(raw or {})
    sections = {
        "priors": Priors,
        "mcmc": McmcConfig,
        "sim": SimSpec,
        "grid": GridConfig,
    }
    top = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - top
    if unknown:
        raise ConfigurationError(f"unknown top-level key(s): {sorted(unknown)}")
    kw = {k: v for k, v in raw.items() if k not in sections}
    for key, cls in sections.items():
        kw[key] = _section(cls, raw.get(key), key)
    return RunConfig(**kw)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if raw is not None and not isinstance(raw, dict):
        raise ConfigurationError("config file must hold a mapping")
    return config_from_dict(raw)
