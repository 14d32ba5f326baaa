"""Experiment orchestration: configuration, Monte-Carlo runner, outputs."""

from .config import (
    ExperimentConfig,
    FusionParams,
    PhysicalParams,
    RoleSplit,
    SolverParams,
    SweepAxes,
    load_config,
    preset,
    PRESETS,
    resolved_json,
)
from .outputs import CSV_HEADER, SweepAggregate, SweepPoint, TrialRecord, format_float
from .runner import RunResult, deploy_devices, deploy_scene, run_experiment, run_trial, sweep_plan

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "FusionParams",
    "PhysicalParams",
    "PRESETS",
    "RoleSplit",
    "RunResult",
    "SolverParams",
    "SweepAggregate",
    "SweepAxes",
    "SweepPoint",
    "TrialRecord",
    "deploy_devices",
    "deploy_scene",
    "format_float",
    "load_config",
    "preset",
    "resolved_json",
    "run_experiment",
    "run_trial",
    "sweep_plan",
]
