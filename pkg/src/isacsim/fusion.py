"""Per-configuration scene recovery, residual-weighted fusion of the global
estimates, and the detection-precision metric."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .channel import NoiseSpec, OfdmaGridSpec, Scene
from .comms import Allocation, mrt_precoders
from .geometry import Grid, RoleAssignment, StripeLayout, enumerate_configurations
from .sensing import build_problem
from .solver import AdmmParams, solve

FUSION_STRATEGIES = ("inverse-residual", "softmax", "uniform")

#: Guard added to residuals before inversion so perfectly-converged
#: configurations do not divide by zero.
RESIDUAL_EPS = 1e-12


@dataclass(frozen=True)
class ConfigurationEstimate:
    """Recovery outcome for one role assignment."""

    assignment: RoleAssignment
    global_estimate: np.ndarray
    primal_residual: float

    def __post_init__(self):
        if not np.isfinite(self.primal_residual) or self.primal_residual < 0:
            raise ValueError("primal_residual must be finite and >= 0")


@dataclass(frozen=True)
class FusedScene:
    """Weighted combination of normalized per-configuration estimates.

    ``weights`` aligns with the estimate list passed to :func:`fuse`;
    zero-norm estimates carry weight zero and the rest sum to one.
    """

    image: np.ndarray
    weights: np.ndarray


def fuse(
    estimates,
    strategy: str = "inverse-residual",
    softmax_temperature: float = 1.0,
    eps: float = RESIDUAL_EPS,
) -> FusedScene:
    """Combine normalized global estimates with residual-derived weights.

    ``inverse-residual`` trusts better-converged configurations more
    (weights proportional to ``1/(residual + eps)``); ``softmax`` uses
    ``exp(-residual/temperature)``; ``uniform`` ignores residuals.  Estimates
    with zero norm are skipped and their weight mass renormalized.
    """
    estimates = list(estimates)
    if strategy not in FUSION_STRATEGIES:
        raise ValueError(f"unknown fusion strategy {strategy!r}")
    norms = np.array([np.linalg.norm(e.global_estimate) for e in estimates])
    kept = np.flatnonzero(norms > 0)
    if kept.size == 0:
        raise ValueError("no information recovered: every configuration estimate is zero")
    residuals = np.array([estimates[i].primal_residual for i in kept])
    if strategy == "inverse-residual":
        raw = 1.0 / (residuals + eps)
    elif strategy == "softmax":
        if not softmax_temperature > 0:
            raise ValueError("softmax_temperature must be positive")
        raw = np.exp(-(residuals - residuals.min()) / softmax_temperature)
    else:
        raw = np.ones(kept.size)
    weights = np.zeros(len(estimates))
    weights[kept] = raw / raw.sum()
    image = np.zeros_like(estimates[kept[0]].global_estimate)
    for i in kept:
        image = image + weights[i] * estimates[i].global_estimate / norms[i]
    return FusedScene(image=image, weights=weights)


def precision(truth: Scene, estimate: np.ndarray, threshold: float = 0.85) -> float:
    """Fraction of true target points whose peak-normalized estimated
    magnitude exceeds ``threshold``.  An all-zero estimate scores 0."""
    est = np.asarray(estimate)
    if est.shape != (truth.grid.point_count,):
        raise ValueError("estimate length must match the grid size")
    if truth.target_count == 0:
        raise ValueError("truth scene must contain at least one target")
    mags = np.abs(est)
    peak = mags.max()
    if peak == 0.0:
        return 0.0
    normalized = mags / peak
    hits = sum(1 for idx in truth.target_grid_indices if normalized[idx - 1] > threshold)
    return hits / truth.target_count


def run_all_configurations(
    layout: StripeLayout,
    ofdma: OfdmaGridSpec,
    grid: Grid,
    scene: Scene,
    alloc: Allocation,
    params: AdmmParams,
    sense_count: int,
    noise_streams: Callable[[int, int], NoiseSpec] | None = None,
    data_symbols: Callable[[int], Mapping[int, complex]] | None = None,
    fusion_strategy: str = "inverse-residual",
    softmax_temperature: float = 1.0,
    include_idle_subcarriers: bool = False,
) -> tuple[list[ConfigurationEstimate], FusedScene]:
    """Recover the scene under every role assignment with ``sense_count``
    sensing APUs, then fuse the global estimates.

    ``noise_streams(config_index, apu_index)`` supplies the per-observation
    noise substream (None runs noiseless); ``data_symbols(config_index)``
    supplies per-subcarrier symbols when not using the all-ones default.
    """
    assignments = enumerate_configurations(layout.apu_count, sense_count)
    comm_count = layout.apu_count - sense_count
    if alloc.comm_apu_count != comm_count:
        raise ValueError("allocation comm APU count does not match the sweep point")
    estimates = []
    for n, roles in enumerate(assignments):
        precoders = mrt_precoders(layout, ofdma, roles, alloc)
        symbols = data_symbols(n) if data_symbols is not None else None
        problems = [
            build_problem(
                layout, ofdma, grid, roles, s, precoders, alloc, scene,
                noise=noise_streams(n, s) if noise_streams is not None else None,
                data_symbols=symbols,
                include_idle_subcarriers=include_idle_subcarriers,
            )
            for s in roles.sense_set
        ]
        report = solve(problems, params)
        estimates.append(
            ConfigurationEstimate(
                assignment=roles,
                global_estimate=report.global_estimate,
                primal_residual=report.primal_residual,
            )
        )
    fused = fuse(estimates, strategy=fusion_strategy, softmax_temperature=softmax_temperature)
    return estimates, fused
