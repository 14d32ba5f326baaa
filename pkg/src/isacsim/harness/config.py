"""Experiment configuration schema, presets, and config-file loading.

Configs are YAML (or JSON) trees validated against a versioned schema;
unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1

MAX_SEED = 2**64 - 1


class PhysicalParams(BaseModel):
    """Radio, geometry, and signal-model parameters shared by every sweep point."""

    model_config = ConfigDict(extra="forbid")

    carrier_freq_hz: float = Field(default=5.955e9, gt=0)
    subcarrier_count: int = Field(default=64, ge=1)
    subcarrier_spacing_hz: float = Field(default=312.5e3, gt=0)
    element_spacing: float = Field(default=0.5, gt=0, description="fraction of the carrier wavelength")
    perimeter_m: float = Field(default=240.0, gt=0)
    grid_points: int = Field(default=400, ge=1)
    grid_spacing_m: Optional[float] = Field(
        default=None, gt=0,
        description="explicit lattice spacing; null auto-sizes to side/(sqrt(I)+1)",
    )
    targets: int = Field(default=10, ge=1)
    power_budget_w: float = Field(default=1.0, gt=0)
    noise_power: float = Field(default=1e-6, ge=0)
    snr_convention: Literal["as-printed", "matched-filter"] = "as-printed"
    data_symbols: Literal["unit", "qpsk"] = "unit"
    stack_idle_subcarriers: bool = False

    @model_validator(mode="after")
    def _check(self):
        side = math.isqrt(self.grid_points)
        if side * side != self.grid_points:
            raise ValueError("grid_points must be a perfect square")
        if self.targets > self.grid_points:
            raise ValueError("targets cannot exceed grid_points")
        if self.grid_spacing_m is not None:
            extent = (side - 1) * self.grid_spacing_m
            if extent >= self.perimeter_m / 4:
                raise ValueError("grid_spacing_m places lattice points outside the service area")
        return self


class RoleSplit(BaseModel):
    """One (sensing, communication) APU split; their sum is the APU count."""

    model_config = ConfigDict(extra="forbid")

    sense: int = Field(ge=1)
    comm: int = Field(ge=1)

    @model_validator(mode="after")
    def _check(self):
        total = self.sense + self.comm
        if total % 4 != 0:
            raise ValueError("sense + comm must be a multiple of 4 (equal APUs per side)")
        return self


class SweepAxes(BaseModel):
    """Monte-Carlo sweep axes; the plan is their Cartesian product."""

    model_config = ConfigDict(extra="forbid")

    devices: list[int] = Field(min_length=1)
    antennas: list[int] = Field(default_factory=lambda: [4], min_length=1)
    roles: list[RoleSplit] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self):
        if any(d < 1 for d in self.devices):
            raise ValueError("device counts must be >= 1")
        if any(m < 1 for m in self.antennas):
            raise ValueError("antenna counts must be >= 1")
        return self


class SolverParams(BaseModel):
    """Consensus-solver parameters."""

    model_config = ConfigDict(extra="forbid")

    sparsity_weight: float = Field(default=1.8, gt=0)
    penalty: float = Field(default=100.0, gt=0)
    iterations: int = Field(default=50, ge=1)


class FusionParams(BaseModel):
    """How per-configuration estimates are combined."""

    model_config = ConfigDict(extra="forbid")

    strategy: Literal["inverse-residual", "softmax", "uniform"] = "inverse-residual"
    softmax_temperature: float = Field(default=1.0, gt=0)


class ExperimentConfig(BaseModel):
    """Complete, self-contained description of one experiment run."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    trials: int = Field(default=100, ge=1)
    workers: int = Field(default=1, ge=1)
    output_dir: Optional[str] = None
    allocation_mode: Literal["even-spread", "random"] = "even-spread"
    fixed_scene: bool = False
    dump_scenes: bool = False
    physical: PhysicalParams = Field(default_factory=PhysicalParams)
    sweep: SweepAxes
    solver: SolverParams = Field(default_factory=SolverParams)
    fusion: FusionParams = Field(default_factory=FusionParams)

    @model_validator(mode="after")
    def _check(self):
        for d in self.sweep.devices:
            if d > self.physical.subcarrier_count:
                raise ValueError(
                    f"{d} devices exceed the {self.physical.subcarrier_count} available subcarriers"
                )
        return self


def desk_preset() -> ExperimentConfig:
    """Small configuration that runs in seconds: 4 APUs, coarse grid."""
    return ExperimentConfig(
        trials=100,
        physical=PhysicalParams(subcarrier_count=16, grid_points=100, targets=4),
        sweep=SweepAxes(devices=[2, 4, 8], antennas=[4], roles=[RoleSplit(sense=2, comm=2)]),
    )


def paper_preset() -> ExperimentConfig:
    """Full-scale configuration: 8 APUs, 400-point grid, 1000 trials per sweep
    point.  Expect hours of runtime."""
    return ExperimentConfig(
        trials=1000,
        physical=PhysicalParams(),
        sweep=SweepAxes(
            devices=[6, 12, 22],
            antennas=[4],
            roles=[RoleSplit(sense=2, comm=6), RoleSplit(sense=4, comm=4), RoleSplit(sense=6, comm=2)],
        ),
    )


PRESETS = {"desk": desk_preset, "paper": paper_preset}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML/JSON config file."""
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    return ExperimentConfig.model_validate(data)


def resolved_json(config: ExperimentConfig) -> str:
    """Canonical JSON form of a config (stable key order, trailing newline)."""
    return json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
