"""Run registry and execution for the experiment service.

Runs live under ``data_dir/<run_id>/``; the registry is in-memory and
thread-safe.  Long experiments execute on a background thread so clients can
poll, while small ones may run synchronously inside the request.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..harness.config import ExperimentConfig
from ..harness.outputs import SweepAggregate
from ..harness.runner import run_experiment


@dataclass
class RunRecord:
    run_id: str
    config: ExperimentConfig
    run_dir: Path
    state: str = "queued"
    created_at: float = field(default_factory=time.time)
    started_at: float | None = None
    finished_at: float | None = None
    error: str | None = None
    aggregates: tuple[SweepAggregate, ...] | None = None

    def artifacts(self) -> list[str]:
        if not self.run_dir.is_dir():
            return []
        return sorted(p.name for p in self.run_dir.iterdir() if p.is_file())


class RunManager:
    """Owns every run's lifecycle and on-disk artifacts."""

    def __init__(self, data_dir: Path):
        self._data_dir = Path(data_dir)
        self._runs: dict[str, RunRecord] = {}
        self._lock = threading.Lock()

    @property
    def data_dir(self) -> Path:
        return self._data_dir

    def create(self, config: ExperimentConfig) -> RunRecord:
        run_id = uuid.uuid4().hex[:12]
        record = RunRecord(run_id=run_id, config=config, run_dir=self._data_dir / run_id)
        with self._lock:
            self._runs[run_id] = record
        return record

    def get(self, run_id: str) -> RunRecord | None:
        with self._lock:
            return self._runs.get(run_id)

    def list(self) -> list[RunRecord]:
        with self._lock:
            return sorted(self._runs.values(), key=lambda r: r.created_at)

    def execute(self, record: RunRecord) -> None:
        """Run to completion, updating state along the way."""
        record.state = "running"
        record.started_at = time.time()
        try:
            result = run_experiment(record.config, out_dir=record.run_dir)
            record.aggregates = result.aggregates
            record.state = "done"
        except Exception as err:  # surfaced to the client via status
            record.error = f"{type(err).__name__}: {err}"
            record.state = "failed"
        finally:
            record.finished_at = time.time()

    def submit(self, record: RunRecord) -> None:
        """Execute on a daemon thread; poll the record for progress."""
        threading.Thread(target=self.execute, args=(record,), daemon=True).start()
