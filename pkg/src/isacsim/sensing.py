"""Discretized sensing operator and stacked observations for one sensing APU.

The sensing matrix maps grid reflectivities to the multi-subcarrier signal a
sensing APU receives; observations are synthesized through the continuous
reflection model so the two paths genuinely cross-check each other at grid
points.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channel import NoiseSpec, OfdmaGridSpec, Scene, draw_noise, sensing_channel_block, steering_matrix
from .comms import Allocation, PrecoderSet
from .geometry import SPEED_OF_LIGHT, Grid, RoleAssignment, StripeLayout, line_of_sight, sight_table

_DUMP_MAGIC = b"ISACPROB"
_DUMP_VERSION = 1


@dataclass(frozen=True)
class SensingProblem:
    """Stacked sensing system ``observation ~ matrix @ reflectivities`` for one APU.

    Rows are grouped per active subcarrier (ascending), antennas within each
    group; column ``i`` corresponds to 1-based grid point ``i+1``.
    """

    apu_index: int
    matrix: np.ndarray
    observation: np.ndarray
    active_subcarriers: tuple[int, ...]

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        obs = np.asarray(self.observation, dtype=complex)
        ks = tuple(int(k) for k in self.active_subcarriers)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "observation", obs)
        object.__setattr__(self, "active_subcarriers", ks)
        if mat.ndim != 2:
            raise ValueError("matrix must be 2D")
        if obs.shape != (mat.shape[0],):
            raise ValueError("observation length must match matrix rows")
        if ks and mat.shape[0] % len(ks) != 0:
            raise ValueError("rows must split evenly across active subcarriers")
        if list(ks) != sorted(ks):
            raise ValueError("active subcarriers must be ascending")

    @property
    def grid_size(self) -> int:
        return self.matrix.shape[1]


def _block_coefficients(
    layout: StripeLayout,
    f_k: float,
    comm_set,
    precoders: PrecoderSet,
    k: int,
    sin_rows: np.ndarray,
    dist_rows: np.ndarray,
    apu_row: Mapping[int, int],
    sense_row: int,
    data_symbol: complex,
) -> np.ndarray:
    """Per-point scalar factors of one subcarrier block, shape (n_points,)."""
    n = sin_rows.shape[1]
    coef = np.zeros(n, dtype=complex)
    dist_s = dist_rows[sense_row]
    for c in comm_set:
        row = apu_row[c]
        a_c = steering_matrix(f_k, layout.carrier_freq, layout.element_spacing, layout.antennas_per_apu, sin_rows[row])
        gain = a_c.conj().T @ precoders.vector(c, k)
        tau = (dist_s + dist_rows[row]) / SPEED_OF_LIGHT
        coef += np.exp(-2j * np.pi * f_k * tau) * gain
    return coef * data_symbol


def sensing_matrix_column(
    layout: StripeLayout,
    ofdma: OfdmaGridSpec,
    grid: Grid,
    roles: RoleAssignment,
    sensing_apu_index: int,
    k: int,
    grid_index: int,
    precoders: PrecoderSet,
    data_symbol: complex = 1.0,
) -> np.ndarray:
    """Column of the subcarrier-``k`` sensing block for one grid point,
    length M: the sensing-side steering vector times the sum over
    communication APUs of delayed precoder gains."""
    point = grid.point(grid_index)
    f_k = ofdma.frequency(k)
    apus = [layout.apus[sensing_apu_index]] + [layout.apus[c] for c in roles.comm_set]
    sin_rows, dist_rows = sight_table(apus, point[None, :])
    apu_row = {c: 1 + pos for pos, c in enumerate(roles.comm_set)}
    coef = _block_coefficients(
        layout, f_k, roles.comm_set, precoders, k, sin_rows, dist_rows, apu_row, 0, data_symbol
    )
    a_s = steering_matrix(f_k, layout.carrier_freq, layout.element_spacing, layout.antennas_per_apu, sin_rows[0])
    return a_s[:, 0] * coef[0]


def synthesize_observation(
    layout: StripeLayout,
    ofdma: OfdmaGridSpec,
    roles: RoleAssignment,
    scene: Scene,
    sensing_apu_index: int,
    precoders: PrecoderSet,
    subcarriers,
    noise: NoiseSpec | None = None,
    data_symbols: Mapping[int, complex] | None = None,
) -> np.ndarray:
    """Received signal stacked over ``subcarriers`` (ascending), built from the
    continuous reflection channel evaluated at the true target positions."""
    s_apu = layout.apus[sensing_apu_index]
    m_ant = layout.antennas_per_apu
    chunks = []
    for k in subcarriers:
        f_k = ofdma.frequency(k)
        d_k = 1.0 if data_symbols is None else data_symbols.get(k, 1.0)
        y_k = np.zeros(m_ant, dtype=complex)
        for c in roles.comm_set:
            if (c, k) not in precoders.vectors:
                continue
            block = sensing_channel_block(layout, scene, s_apu, layout.apus[c], f_k)
            y_k += block @ precoders.vector(c, k) * d_k
        if noise is not None:
            y_k += draw_noise(noise, m_ant)
        chunks.append(y_k)
    if not chunks:
        return np.zeros(0, dtype=complex)
    return np.concatenate(chunks)


def build_problem(
    layout: StripeLayout,
    ofdma: OfdmaGridSpec,
    grid: Grid,
    roles: RoleAssignment,
    sensing_apu_index: int,
    precoders: PrecoderSet,
    alloc: Allocation,
    scene: Scene,
    noise: NoiseSpec | None = None,
    data_symbols: Mapping[int, complex] | None = None,
    include_idle_subcarriers: bool = False,
) -> SensingProblem:
    """Assemble the sensing matrix over all grid points and synthesize the
    matching observation for one sensing APU.

    Only subcarriers carrying power are stacked by default; idle ones add
    pure-noise rows and can be restored with ``include_idle_subcarriers``.
    """
    if sensing_apu_index not in roles.sense_set:
        raise ValueError(f"APU {sensing_apu_index} is not in the sensing set")
    subcarriers = (
        tuple(range(1, ofdma.subcarrier_count + 1))
        if include_idle_subcarriers
        else alloc.active_subcarriers
    )
    m_ant = layout.antennas_per_apu
    apus = [layout.apus[sensing_apu_index]] + [layout.apus[c] for c in roles.comm_set]
    sin_rows, dist_rows = sight_table(apus, grid.coords)
    apu_row = {c: 1 + pos for pos, c in enumerate(roles.comm_set)}
    blocks = []
    for k in subcarriers:
        f_k = ofdma.frequency(k)
        if k in alloc.device_to_subcarrier:
            d_k = 1.0 if data_symbols is None else data_symbols.get(k, 1.0)
            coef = _block_coefficients(
                layout, f_k, roles.comm_set, precoders, k, sin_rows, dist_rows, apu_row, 0, d_k
            )
            a_s = steering_matrix(f_k, layout.carrier_freq, layout.element_spacing, m_ant, sin_rows[0])
            blocks.append(a_s * coef[None, :])
        else:
            blocks.append(np.zeros((m_ant, grid.point_count), dtype=complex))
    matrix = np.vstack(blocks) if blocks else np.zeros((0, grid.point_count), dtype=complex)
    observation = synthesize_observation(
        layout, ofdma, roles, scene, sensing_apu_index, precoders, subcarriers,
        noise=noise, data_symbols=data_symbols,
    )
    return SensingProblem(
        apu_index=sensing_apu_index,
        matrix=matrix,
        observation=observation,
        active_subcarriers=subcarriers,
    )


def true_reflectivity_vector(scene: Scene) -> np.ndarray:
    """Grid-length vector with the scene reflectivities at target indices."""
    z = np.zeros(scene.grid.point_count, dtype=complex)
    for idx, refl in zip(scene.target_grid_indices, scene.reflectivities):
        z[idx - 1] = refl
    return z


def dump_problem(problem: SensingProblem, path) -> None:
    """Write a problem to a binary debug dump.

    Layout (all little-endian): magic ``ISACPROB``, uint32 version, uint32
    apu_index, uint32 rows, uint32 cols, uint32 subcarrier count, that many
    uint32 subcarrier ids, then the matrix (row-major) and the observation as
    complex128 values, i.e. interleaved (real, imag) float64 pairs.
    """
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        rows, cols = problem.matrix.shape
        fh.write(struct.pack("<IIIII", _DUMP_VERSION, problem.apu_index, rows, cols, len(problem.active_subcarriers)))
        fh.write(struct.pack(f"<{len(problem.active_subcarriers)}I", *problem.active_subcarriers))
        fh.write(np.ascontiguousarray(problem.matrix, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(problem.observation, dtype="<c16").tobytes())


def load_problem(path) -> SensingProblem:
    """Read a dump produced by :func:`dump_problem`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_DUMP_MAGIC))
        if magic != _DUMP_MAGIC:
            raise ValueError("not a sensing-problem dump")
        version, apu_index, rows, cols, n_sub = struct.unpack("<IIIII", fh.read(20))
        if version != _DUMP_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        subs = struct.unpack(f"<{n_sub}I", fh.read(4 * n_sub))
        matrix = np.frombuffer(fh.read(16 * rows * cols), dtype="<c16").reshape(rows, cols)
        observation = np.frombuffer(fh.read(16 * rows), dtype="<c16")
    return SensingProblem(
        apu_index=apu_index,
        matrix=matrix.astype(complex),
        observation=observation.astype(complex),
        active_subcarriers=subs,
    )
