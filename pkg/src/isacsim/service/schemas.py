"""Pydantic request/response models for the experiment service."""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from ..harness.config import ExperimentConfig
from ..harness.outputs import SweepAggregate

RunState = Literal["queued", "running", "done", "failed"]


class HealthResponse(BaseModel):
    status: str
    version: str


class SweepPointInfo(BaseModel):
    sweep_id: int
    sense_count: int
    comm_count: int
    antennas: int
    devices: int
    configurations: int


class ValidateResponse(BaseModel):
    """Outcome of a dry-run: the resolved config plus the sweep plan."""

    config: ExperimentConfig
    sweep_points: list[SweepPointInfo]
    total_trials: int


class SweepAggregateOut(BaseModel):
    sweep_id: int
    sense_count: int
    comm_count: int
    antennas: int
    devices: int
    trials: int
    fused_precision_mean: float
    fused_precision_sem: float
    config_precision_mean: float
    sum_rate_bps_mean: Optional[float]  # None when non-finite (noiseless runs)
    wall_ms_total: float

    @classmethod
    def from_aggregate(cls, agg: SweepAggregate) -> "SweepAggregateOut":
        rate = agg.sum_rate_bps_mean
        return cls(
            sweep_id=agg.point.sweep_id,
            sense_count=agg.point.sense_count,
            comm_count=agg.point.comm_count,
            antennas=agg.point.antennas,
            devices=agg.point.devices,
            trials=agg.trials,
            fused_precision_mean=agg.fused_precision_mean,
            fused_precision_sem=agg.fused_precision_sem,
            config_precision_mean=agg.config_precision_mean,
            sum_rate_bps_mean=rate if math.isfinite(rate) else None,
            wall_ms_total=agg.wall_ms_total,
        )


class RunStatus(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run_id: str
    state: RunState
    created_at: float
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    error: Optional[str] = None
    artifacts: list[str] = []
    summary: Optional[list[SweepAggregateOut]] = None


class RunList(BaseModel):
    runs: list[RunStatus]


class ArtifactList(BaseModel):
    run_id: str
    artifacts: list[str]
