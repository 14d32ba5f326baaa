"""Desk-scale simulator of a perimeter-stripe distributed ISAC system:
OFDMA downlink transmissions reused for multistatic scene recovery via
consensus sparse reconstruction and cross-configuration fusion."""

__version__ = "0.1.0"

from .channel import NoiseSpec, OfdmaGridSpec, Scene, draw_noise, noise_stream, steering_vector, unit_scene
from .comms import Allocation, PrecoderSet, allocate, mrt_precoders, snr_per_device, sum_rate
from .fusion import ConfigurationEstimate, FusedScene, fuse, precision, run_all_configurations
from .geometry import (
    SPEED_OF_LIGHT,
    ApuDescriptor,
    Grid,
    RoleAssignment,
    ServiceArea,
    StripeLayout,
    bistatic_geometry,
    build_grid,
    build_perimeter_layout,
    enumerate_configurations,
    grid_point_coords,
    line_of_sight,
)
from .harness import ExperimentConfig, load_config, preset, run_experiment
from .sensing import SensingProblem, build_problem, dump_problem, load_problem, sensing_matrix_column
from .solver import AdmmParams, SolveReport, oracle_lasso, soft_threshold, solve

__all__ = [
    "AdmmParams",
    "Allocation",
    "ApuDescriptor",
    "ConfigurationEstimate",
    "ExperimentConfig",
    "FusedScene",
    "Grid",
    "NoiseSpec",
    "OfdmaGridSpec",
    "PrecoderSet",
    "RoleAssignment",
    "SPEED_OF_LIGHT",
    "Scene",
    "SensingProblem",
    "ServiceArea",
    "SolveReport",
    "StripeLayout",
    "allocate",
    "bistatic_geometry",
    "build_grid",
    "build_perimeter_layout",
    "build_problem",
    "draw_noise",
    "dump_problem",
    "enumerate_configurations",
    "fuse",
    "grid_point_coords",
    "line_of_sight",
    "load_config",
    "load_problem",
    "mrt_precoders",
    "noise_stream",
    "oracle_lasso",
    "precision",
    "preset",
    "run_all_configurations",
    "run_experiment",
    "sensing_matrix_column",
    "snr_per_device",
    "soft_threshold",
    "solve",
    "steering_vector",
    "sum_rate",
    "unit_scene",
]
