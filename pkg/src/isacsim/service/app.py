"""FastAPI application exposing the experiment harness.

Submit a config to ``POST /runs`` (``wait=true`` blocks until done, otherwise
poll ``GET /runs/{id}``), then download artifacts such as ``results.csv``.
``POST /validate`` resolves a config and returns the sweep plan without
running anything.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse

from .. import __version__
from ..harness.config import PRESETS, ExperimentConfig, preset
from ..harness.runner import sweep_plan
from .jobs import RunManager, RunRecord
from .schemas import (
    ArtifactList,
    HealthResponse,
    RunList,
    RunStatus,
    SweepAggregateOut,
    SweepPointInfo,
    ValidateResponse,
)

DEFAULT_DATA_DIR = "isac-runs"


def _status(record: RunRecord) -> RunStatus:
    summary = None
    if record.aggregates is not None:
        summary = [SweepAggregateOut.from_aggregate(a) for a in record.aggregates]
    return RunStatus(
        run_id=record.run_id,
        state=record.state,  # type: ignore[arg-type]
        created_at=record.created_at,
        started_at=record.started_at,
        finished_at=record.finished_at,
        error=record.error,
        artifacts=record.artifacts(),
        summary=summary,
    )


def _plan(config: ExperimentConfig) -> list[SweepPointInfo]:
    return [
        SweepPointInfo(
            sweep_id=p.sweep_id,
            sense_count=p.sense_count,
            comm_count=p.comm_count,
            antennas=p.antennas,
            devices=p.devices,
            configurations=math.comb(p.apu_count, p.sense_count),
        )
        for p in sweep_plan(config)
    ]


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("ISAC_DATA_DIR", DEFAULT_DATA_DIR))
    app = FastAPI(
        title="isacsim",
        version=__version__,
        description="Distributed stripe ISAC simulation service",
    )
    manager = RunManager(data_dir)
    app.state.runs = manager

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=list[str])
    def list_presets() -> list[str]:
        return sorted(PRESETS)

    @app.get("/presets/{name}", response_model=ExperimentConfig)
    def get_preset(name: str) -> ExperimentConfig:
        try:
            return preset(name)
        except ValueError as err:
            raise HTTPException(status_code=404, detail=str(err))

    @app.post("/validate", response_model=ValidateResponse)
    def validate(config: ExperimentConfig) -> ValidateResponse:
        points = _plan(config)
        return ValidateResponse(
            config=config,
            sweep_points=points,
            total_trials=len(points) * config.trials,
        )

    @app.post("/runs", response_model=RunStatus, status_code=201)
    def create_run(
        config: ExperimentConfig,
        wait: bool = Query(default=False, description="run synchronously before responding"),
    ) -> RunStatus:
        record = manager.create(config)
        if wait:
            manager.execute(record)
        else:
            manager.submit(record)
        return _status(record)

    @app.get("/runs", response_model=RunList)
    def list_runs() -> RunList:
        return RunList(runs=[_status(r) for r in manager.list()])

    @app.get("/runs/{run_id}", response_model=RunStatus)
    def get_run(run_id: str) -> RunStatus:
        record = manager.get(run_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        return _status(record)

    @app.get("/runs/{run_id}/artifacts", response_model=ArtifactList)
    def list_artifacts(run_id: str) -> ArtifactList:
        record = manager.get(run_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        return ArtifactList(run_id=run_id, artifacts=record.artifacts())

    @app.get("/runs/{run_id}/artifacts/{name}")
    def get_artifact(run_id: str, name: str) -> FileResponse:
        record = manager.get(run_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        if name not in record.artifacts():  # also blocks path traversal
            raise HTTPException(status_code=404, detail=f"run {run_id} has no artifact {name}")
        return FileResponse(record.run_dir / name)

    return app


app = create_app()
