"""Experiment configuration: a TOML file validated against a closed schema.

Unknown keys are rejected at every level. Commands that draw random samples
refuse to run without a seed, either from the file or from ``--seed``.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .errors import PreconditionError
from .groups import GroupId, parse_group
from .lipnorms import LipNormSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("lipnorm", "fejer-sweep", "distq", "oracle", "states", "fusion")
RANDOMIZED = frozenset({"distq", "states"})


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LipNormConfig(_Strict):
    family: Literal["weighted_l1", "sobolev", "dirac_word_length", "dirac_circle", "classical_lipschitz"]
    s: float = Field(1.0, ge=0)
    window: int | None = Field(None, ge=0)
    margin: int = Field(6, ge=1)
    grid: int = Field(2**14, ge=16)

    def spec(self) -> LipNormSpec:
        return LipNormSpec(self.family, window=self.window, margin=self.margin, s=self.s, grid=self.grid)


class KernelConfig(_Strict):
    # fejer[n] uses the sweep point n; folner_ball[r] uses r = sweep point; counit ignores it
    family: Literal["fejer", "folner_ball", "counit", "haar"] = "fejer"


class LevelRange(_Strict):
    start: int = Field(0, ge=0)
    stop: int = Field(-1, ge=-1)

    def values(self) -> list[int]:
        """Inclusive range; stop < start is an empty sweep."""
        return list(range(self.start, self.stop + 1))


class WindowConfig(_Strict):
    search_window: int | None = Field(None, ge=0)
    samples: int = Field(8, ge=0)
    budget: int = Field(4, ge=1)
    random_directions: int = Field(32, ge=0)
    epsilon_target: float = Field(0.5, gt=0)


class FusionConfig(_Strict):
    generating: list[str] = Field(default_factory=list)
    max_level: int = Field(4, ge=0)


class OracleConfig(_Strict):
    name: Literal["fejer_closed_form", "circle_quadrature", "metric_recovery", "dirac_grading"]
    tolerance: float = Field(1e-9, gt=0)


class ExperimentConfig(_Strict):
    group: str
    lipnorm: LipNormConfig | None = None
    kernel: KernelConfig = KernelConfig()
    levels: LevelRange = LevelRange()
    windows: WindowConfig = WindowConfig()
    fusion: FusionConfig | None = None
    oracle: OracleConfig | None = None
    seed: int | None = Field(None, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_group(self):
        parse_group(self.group)
        return self

    @property
    def group_id(self) -> GroupId:
        return parse_group(self.group)

    def require(self, command: str) -> None:
        """Per-command checks that the schema alone cannot express."""
        if command not in COMMANDS:
            raise PreconditionError(f"unknown command {command!r}; expected one of {COMMANDS}")
        if command in ("lipnorm", "fejer-sweep", "distq", "states") and self.lipnorm is None:
            raise PreconditionError(f"command {command!r} needs a [lipnorm] section")
        if command == "oracle" and self.oracle is None:
            raise PreconditionError("command 'oracle' needs an [oracle] section")
        if command in RANDOMIZED and self.seed is None:
            raise PreconditionError(f"command {command!r} draws random samples and needs a seed")

    def canonical(self) -> dict:
        return self.model_dump(mode="json")


def load_config(path: str | Path, seed: int | None = None) -> ExperimentConfig:
    """Read and validate a TOML file; ``seed`` overrides the file's seed."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    if seed is not None:
        raw["seed"] = seed
    return ExperimentConfig.model_validate(raw)


def cache_key(command: str, config: ExperimentConfig) -> str:
    """sha256 over command, canonical config (seed included) and tool version."""
    payload = {"command": command, "config": config.canonical(), "seed": config.seed, "version": __version__}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


__all__ = [
    "COMMANDS",
    "ExperimentConfig",
    "LipNormConfig",
    "KernelConfig",
    "LevelRange",
    "WindowConfig",
    "FusionConfig",
    "OracleConfig",
    "ValidationError",
    "cache_key",
    "load_config",
]
