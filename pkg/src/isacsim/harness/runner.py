"""Monte-Carlo experiment orchestration.

Every random draw comes from a substream keyed by
``(seed; sweep_id, trial, purpose, ...)`` through counter-based splitting, so
results are independent of execution order and worker count.  Workers return
immutable trial records; the orchestrator owns all aggregation and file I/O.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..channel import OfdmaGridSpec, Scene, noise_stream, unit_scene
from ..comms import allocate, sum_rate
from ..fusion import precision, run_all_configurations
from ..geometry import Grid, ServiceArea, build_grid, build_perimeter_layout
from ..solver import AdmmParams
from .config import ExperimentConfig, resolved_json
from .outputs import (
    SweepAggregate,
    SweepPoint,
    TrialRecord,
    aggregate_point,
    diagnostics_text,
    results_csv_text,
    scene_dump_payload,
    write_scene_dump,
)

# Substream purposes within one (sweep point, trial).
_STREAM_SCENE = 0
_STREAM_DEVICES = 1
_STREAM_NOISE = 2
_STREAM_SYMBOLS = 3
_STREAM_ALLOC = 4

_QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


def sweep_plan(config: ExperimentConfig) -> list[SweepPoint]:
    """Cartesian product of the sweep axes: roles (outer), antennas, devices."""
    points = []
    for split in config.sweep.roles:
        for m in config.sweep.antennas:
            for d in config.sweep.devices:
                points.append(
                    SweepPoint(
                        sweep_id=len(points),
                        sense_count=split.sense,
                        comm_count=split.comm,
                        antennas=m,
                        devices=d,
                    )
                )
    return points


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def deploy_scene(grid: Grid, target_count: int, rng: np.random.Generator) -> Scene:
    """Draw ``target_count`` distinct grid points uniformly, unit reflectivity."""
    if target_count > grid.point_count:
        raise ValueError(f"{target_count} targets exceed {grid.point_count} grid points")
    indices = rng.choice(grid.point_count, size=target_count, replace=False) + 1
    return unit_scene(grid, (int(i) for i in indices))


def deploy_devices(area: ServiceArea, device_count: int, rng: np.random.Generator) -> np.ndarray:
    """``device_count`` i.i.d. uniform positions strictly inside the area."""
    if device_count < 1:
        raise ValueError("device_count must be >= 1")
    pts = np.empty((device_count, 2))
    for row in range(device_count):
        while True:
            u = rng.random(2)
            if np.all(u > 0.0):  # rng.random() is [0, 1): only 0 can touch the boundary
                break
        pts[row] = area.origin + area.side_length * u
    return pts


def run_trial(config: ExperimentConfig, point: SweepPoint, trial: int) -> TrialRecord:
    """Execute one Monte-Carlo trial at one sweep point."""
    t0 = time.perf_counter()
    phys = config.physical
    area = ServiceArea(side_length=phys.perimeter_m / 4)
    layout = build_perimeter_layout(
        area,
        apus_per_side=point.apu_count // 4,
        antennas_per_apu=point.antennas,
        element_spacing=phys.element_spacing,
        carrier_freq=phys.carrier_freq_hz,
    )
    grid = build_grid(area, phys.grid_points, phys.grid_spacing_m)
    ofdma = OfdmaGridSpec(
        subcarrier_count=phys.subcarrier_count,
        subcarrier_spacing=phys.subcarrier_spacing_hz,
        carrier_freq=phys.carrier_freq_hz,
    )

    scene_trial = 0 if config.fixed_scene else trial
    scene = deploy_scene(grid, phys.targets, _rng(config.seed, point.sweep_id, scene_trial, _STREAM_SCENE))
    devices = deploy_devices(area, point.devices, _rng(config.seed, point.sweep_id, trial, _STREAM_DEVICES))
    alloc = allocate(
        devices,
        phys.subcarrier_count,
        phys.power_budget_w,
        point.comm_count,
        mode=config.allocation_mode,
        rng=_rng(config.seed, point.sweep_id, trial, _STREAM_ALLOC),
    )

    noise_streams = None
    if phys.noise_power > 0:
        noise_streams = lambda n, s: noise_stream(
            phys.noise_power, config.seed, point.sweep_id, trial, _STREAM_NOISE, n, s
        )
    data_symbols = None
    if phys.data_symbols == "qpsk":
        actives = alloc.active_subcarriers

        def data_symbols(n):
            rng = _rng(config.seed, point.sweep_id, trial, _STREAM_SYMBOLS, n)
            return {k: complex(_QPSK[rng.integers(4)]) for k in actives}

    params = AdmmParams(
        sparsity_weight=config.solver.sparsity_weight,
        penalty=config.solver.penalty,
        iterations=config.solver.iterations,
    )
    try:
        estimates, fused = run_all_configurations(
            layout, ofdma, grid, scene, alloc, params, point.sense_count,
            noise_streams=noise_streams,
            data_symbols=data_symbols,
            fusion_strategy=config.fusion.strategy,
            softmax_temperature=config.fusion.softmax_temperature,
            include_idle_subcarriers=phys.stack_idle_subcarriers,
        )
        config_precisions = tuple(precision(scene, e.global_estimate) for e in estimates)
        fused_precision = precision(scene, fused.image)
        fused_image = fused.image
    except ValueError as err:
        if "no information recovered" not in str(err):
            raise
        # Degenerate trial: every configuration thresholded to zero.
        n_configs = math.comb(point.apu_count, point.sense_count)
        config_precisions = tuple(0.0 for _ in range(n_configs))
        fused_precision = 0.0
        fused_image = np.zeros(grid.point_count, dtype=complex)

    if phys.noise_power > 0:
        rate = sum_rate(
            alloc,
            phys.noise_power,
            phys.subcarrier_spacing_hz,
            convention=phys.snr_convention,
            antennas=point.antennas,
        )
    else:
        rate = math.inf  # noiseless channel: Shannon rate is unbounded

    dump = None
    if config.dump_scenes:
        policy = "explicit-spacing" if phys.grid_spacing_m is not None else "auto-centered"
        dump = scene_dump_payload(point, trial, grid, scene, fused_image, policy)

    wall_ms = (time.perf_counter() - t0) * 1e3
    return TrialRecord(
        point=point,
        trial=trial,
        config_precisions=config_precisions,
        fused_precision=fused_precision,
        sum_rate_bps=rate,
        wall_ms=wall_ms,
        scene_dump=dump,
    )


def _trial_task(args) -> TrialRecord:
    config, point, trial = args
    return run_trial(config, point, trial)


@dataclass(frozen=True)
class RunResult:
    """Everything run_experiment produced, with file paths."""

    out_dir: Path
    records: tuple[TrialRecord, ...]
    aggregates: tuple[SweepAggregate, ...]
    csv_path: Path
    resolved_config_path: Path
    diagnostics_path: Path
    scene_paths: tuple[Path, ...]


def run_experiment(
    config: ExperimentConfig,
    out_dir=None,
    workers: int | None = None,
) -> RunResult:
    """Run every sweep point for ``config.trials`` trials and write results.

    Outputs: ``results.csv`` (deterministic bytes for a given config+seed),
    ``config.resolved.json``, ``diagnostics.log``, and per-trial
    ``scene_<sweep>_<trial>.json`` when scene dumps are enabled.
    """
    t0 = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else (Path(config.output_dir) if config.output_dir else None)
    if out is None:
        raise ValueError("no output directory: pass out_dir or set output_dir in the config")
    workers = workers if workers is not None else config.workers
    if workers < 1:
        raise ValueError("workers must be >= 1")

    points = sweep_plan(config)
    tasks = [(config, point, trial) for point in points for trial in range(config.trials)]
    if workers == 1 or len(tasks) == 1:
        records = [_trial_task(t) for t in tasks]
    else:
        ctx = multiprocessing.get_context("spawn")
        chunk = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=chunk))

    aggregates = [aggregate_point(p, records) for p in points]

    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    csv_path.write_text(results_csv_text(points, records, aggregates), newline="")
    resolved_path = out / "config.resolved.json"
    resolved_path.write_text(resolved_json(config))
    scene_paths = []
    for r in records:
        if r.scene_dump is not None:
            scene_paths.append(write_scene_dump(out, r.scene_dump))
    total_wall = time.perf_counter() - t0
    summary = f"seed={config.seed} trials={config.trials} sweep_points={len(points)}"
    diag_path = out / "diagnostics.log"
    diag_path.write_text(diagnostics_text(summary, aggregates, total_wall, workers))
    return RunResult(
        out_dir=out,
        records=tuple(records),
        aggregates=tuple(aggregates),
        csv_path=csv_path,
        resolved_config_path=resolved_path,
        diagnostics_path=diag_path,
        scene_paths=tuple(scene_paths),
    )
