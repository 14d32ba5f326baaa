"""Result serialization: the bit-exact results.csv contract, scene dumps, and
the diagnostics log.

results.csv is the reproducibility surface: the same config and seed must
produce identical bytes regardless of worker count or rerun.  Wall-clock
timing is therefore pinned to 0 in the CSV and reported in diagnostics.log
instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_HEADER = "sweep_id,trial,S,C,M,D,fused_precision,mean_config_precision,sum_rate_bps,wall_ms"


@dataclass(frozen=True)
class SweepPoint:
    """One cell of the sweep grid."""

    sweep_id: int
    sense_count: int
    comm_count: int
    antennas: int
    devices: int

    @property
    def apu_count(self) -> int:
        return self.sense_count + self.comm_count


@dataclass(frozen=True)
class TrialRecord:
    """Per-trial outcome; ``scene_dump`` is populated only when requested."""

    point: SweepPoint
    trial: int
    config_precisions: tuple[float, ...]
    fused_precision: float
    sum_rate_bps: float
    wall_ms: float
    scene_dump: dict | None = None

    @property
    def mean_config_precision(self) -> float:
        if not self.config_precisions:
            return 0.0
        return sum(self.config_precisions) / len(self.config_precisions)


@dataclass(frozen=True)
class SweepAggregate:
    """Across-trial means (and standard errors) for one sweep point."""

    point: SweepPoint
    trials: int
    fused_precision_mean: float
    fused_precision_sem: float
    config_precision_mean: float
    sum_rate_bps_mean: float
    wall_ms_total: float


def aggregate_point(point: SweepPoint, records) -> SweepAggregate:
    records = [r for r in records if r.point == point]
    n = len(records)
    fused = [r.fused_precision for r in records]
    fused_mean = sum(fused) / n
    if n > 1:
        var = sum((x - fused_mean) ** 2 for x in fused) / (n - 1)
        sem = math.sqrt(var / n)
    else:
        sem = 0.0
    return SweepAggregate(
        point=point,
        trials=n,
        fused_precision_mean=fused_mean,
        fused_precision_sem=sem,
        config_precision_mean=sum(r.mean_config_precision for r in records) / n,
        sum_rate_bps_mean=sum(r.sum_rate_bps for r in records) / n,
        wall_ms_total=sum(r.wall_ms for r in records),
    )


def format_float(x: float) -> str:
    """17-significant-digit serialization: lossless float64 round trip."""
    return format(float(x), ".17g")


def _row(point: SweepPoint, trial: int, fused: float, mean_config: float, rate: float) -> str:
    return ",".join(
        (
            str(point.sweep_id),
            str(trial),
            str(point.sense_count),
            str(point.comm_count),
            str(point.antennas),
            str(point.devices),
            format_float(fused),
            format_float(mean_config),
            format_float(rate),
            format_float(0.0),
        )
    )


def results_csv_text(points, records, aggregates) -> str:
    """Render the full CSV: per sweep point, its trial rows (ascending) then
    one aggregate row with ``trial=-1``.  LF line endings."""
    by_point = {p: [] for p in points}
    for r in records:
        by_point[r.point].append(r)
    agg_by_point = {a.point: a for a in aggregates}
    lines = [CSV_HEADER]
    for p in points:
        for r in sorted(by_point[p], key=lambda r: r.trial):
            lines.append(_row(p, r.trial, r.fused_precision, r.mean_config_precision, r.sum_rate_bps))
        a = agg_by_point[p]
        lines.append(_row(p, -1, a.fused_precision_mean, a.config_precision_mean, a.sum_rate_bps_mean))
    return "\n".join(lines) + "\n"


def diagnostics_text(config_summary: str, aggregates, total_wall_s: float, workers: int) -> str:
    lines = [f"run: {config_summary}", f"workers: {workers}"]
    for a in aggregates:
        p = a.point
        lines.append(
            f"sweep {p.sweep_id} (S={p.sense_count} C={p.comm_count} M={p.antennas} D={p.devices}): "
            f"trials={a.trials} fused_precision={a.fused_precision_mean:.6f}"
            f"+-{a.fused_precision_sem:.6f} config_precision={a.config_precision_mean:.6f} "
            f"sum_rate_bps={a.sum_rate_bps_mean:.6g} wall_ms_total={a.wall_ms_total:.1f}"
        )
    lines.append(f"total wall time: {total_wall_s:.2f} s")
    return "\n".join(lines) + "\n"


def scene_dump_payload(point: SweepPoint, trial: int, grid, scene, fused_image: np.ndarray, spacing_policy: str) -> dict:
    """JSON-ready grid image for external plotting."""
    return {
        "sweep_id": point.sweep_id,
        "trial": trial,
        "point_count": grid.point_count,
        "spacing": grid.spacing,
        "coords_policy": spacing_policy,
        "magnitudes": [float(v) for v in np.abs(fused_image)],
        "truth_indices": list(scene.target_grid_indices),
    }


def write_scene_dump(out_dir: Path, payload: dict) -> Path:
    path = out_dir / f"scene_{payload['sweep_id']}_{payload['trial']}.json"
    path.write_text(json.dumps(payload, sort_keys=True) + "\n")
    return path
