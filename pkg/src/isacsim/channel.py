"""Array responses, downlink device channels, target reflections, and
reproducible complex Gaussian noise.

Path loss is homogeneous by assumption: channels carry unit gain and all
attenuation is folded into the effective noise power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    SPEED_OF_LIGHT,
    ApuDescriptor,
    Grid,
    RoleAssignment,
    StripeLayout,
    line_of_sight,
)


@dataclass(frozen=True)
class OfdmaGridSpec:
    """OFDMA subcarrier comb, centered on the carrier frequency."""

    subcarrier_count: int
    subcarrier_spacing: float
    carrier_freq: float

    def __post_init__(self):
        if self.subcarrier_count < 1:
            raise ValueError("subcarrier_count must be >= 1")
        if not self.subcarrier_spacing > 0:
            raise ValueError("subcarrier_spacing must be positive")
        if not self.carrier_freq > 0:
            raise ValueError("carrier_freq must be positive")

    def frequency(self, k: int) -> float:
        """Frequency of 1-based subcarrier ``k``."""
        if not 1 <= k <= self.subcarrier_count:
            raise IndexError(f"subcarrier {k} out of range 1..{self.subcarrier_count}")
        return self.carrier_freq + (k - 1 - (self.subcarrier_count - 1) / 2) * self.subcarrier_spacing

    def frequencies(self) -> np.ndarray:
        k = np.arange(1, self.subcarrier_count + 1)
        return self.carrier_freq + (k - 1 - (self.subcarrier_count - 1) / 2) * self.subcarrier_spacing


@dataclass(frozen=True)
class Scene:
    """Ground-truth targets: grid indices (1-based) with complex reflectivities."""

    target_grid_indices: tuple[int, ...]
    reflectivities: np.ndarray
    grid: Grid

    def __post_init__(self):
        idx = tuple(int(i) for i in self.target_grid_indices)
        object.__setattr__(self, "target_grid_indices", idx)
        refl = np.array(self.reflectivities, dtype=complex)
        refl.flags.writeable = False
        object.__setattr__(self, "reflectivities", refl)
        if len(set(idx)) != len(idx):
            raise ValueError("target grid indices must be distinct")
        for i in idx:
            if not 1 <= i <= self.grid.point_count:
                raise IndexError(f"target grid index {i} out of range 1..{self.grid.point_count}")
        if refl.shape != (len(idx),):
            raise ValueError("one reflectivity per target required")
        if len(idx) and np.any(np.abs(refl) == 0.0):
            raise ValueError("reflectivities must be nonzero")

    @property
    def target_count(self) -> int:
        return len(self.target_grid_indices)

    def positions(self) -> np.ndarray:
        """Target coordinates, shape (L, 2)."""
        if not self.target_grid_indices:
            return np.zeros((0, 2))
        rows = np.asarray(self.target_grid_indices) - 1
        return self.grid.coords[rows]


def unit_scene(grid: Grid, indices) -> Scene:
    """Scene with unit reflectivity at each of ``indices``."""
    idx = tuple(int(i) for i in indices)
    return Scene(target_grid_indices=idx, reflectivities=np.ones(len(idx), dtype=complex), grid=grid)


@dataclass
class NoiseSpec:
    """Effective noise power plus a dedicated random substream.

    ``rng`` advances as noise is drawn, so a spec instance represents one
    reproducible stream: rebuilding it from the same (seed, stream key) and
    drawing in the same order yields identical samples.
    """

    variance: float
    rng: np.random.Generator

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be >= 0")


def noise_stream(variance: float, seed: int, *stream_key: int) -> NoiseSpec:
    """Noise spec whose substream is derived from ``seed`` and a counter key."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in stream_key))
    return NoiseSpec(variance=variance, rng=np.random.default_rng(ss))


def draw_noise(spec: NoiseSpec, length: int) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian vector, per-entry variance
    ``spec.variance`` (real and imaginary parts carry half each)."""
    if length < 0:
        raise ValueError("length must be >= 0")
    if spec.variance == 0.0 or length == 0:
        return np.zeros(length, dtype=complex)
    parts = spec.rng.standard_normal((length, 2))
    return (parts[:, 0] + 1j * parts[:, 1]) * np.sqrt(spec.variance / 2.0)


def steering_matrix(f_k: float, carrier_freq: float, element_spacing: float, antennas: int, sin_phi) -> np.ndarray:
    """Array response columns for each ``sin_phi`` value, shape (M, n).

    Entry ``m`` is ``exp(j*2*pi*(f_k/f_c)*spacing*m*sin_phi)``; every entry has
    unit modulus so each column has squared norm exactly M.
    """
    s = np.atleast_1d(np.asarray(sin_phi, dtype=float))
    if np.any(np.abs(s) > 1.0 + 1e-12):
        raise ValueError("|sin_phi| must be <= 1")
    s = np.clip(s, -1.0, 1.0)
    m = np.arange(antennas)[:, None]
    return np.exp(2j * np.pi * (f_k / carrier_freq) * element_spacing * m * s[None, :])


def steering_vector(f_k: float, carrier_freq: float, element_spacing: float, antennas: int, sin_phi: float) -> np.ndarray:
    """Single array response, shape (M,)."""
    return steering_matrix(f_k, carrier_freq, element_spacing, antennas, sin_phi)[:, 0]


def device_channel(
    layout: StripeLayout,
    ofdma: OfdmaGridSpec,
    roles: RoleAssignment,
    device_pos,
    k: int,
) -> np.ndarray:
    """Downlink channel to a device on subcarrier ``k``: the stacked steering
    vectors of all communication APUs (ascending index), length C*M."""
    f_k = ofdma.frequency(k)
    blocks = []
    for c in roles.comm_set:
        sin_phi, _ = line_of_sight(layout.apus[c], device_pos)
        blocks.append(
            steering_vector(f_k, layout.carrier_freq, layout.element_spacing, layout.antennas_per_apu, sin_phi)
        )
    return np.concatenate(blocks)


def sensing_channel_block(
    layout: StripeLayout,
    scene: Scene,
    sensing_apu: ApuDescriptor,
    comm_apu: ApuDescriptor,
    f_k: float,
) -> np.ndarray:
    """Reflected-path channel between one communication APU and one sensing
    APU at frequency ``f_k``: the sum over targets of delayed steering outer
    products, shape (M, M).  Empty scenes give the zero matrix."""
    m_ant = layout.antennas_per_apu
    if scene.target_count == 0:
        return np.zeros((m_ant, m_ant), dtype=complex)
    weights = np.empty(scene.target_count, dtype=complex)
    a_s = np.empty((m_ant, scene.target_count), dtype=complex)
    a_c = np.empty((m_ant, scene.target_count), dtype=complex)
    for col, (idx, z) in enumerate(zip(scene.target_grid_indices, scene.reflectivities)):
        point = scene.grid.point(idx)
        sin_s, d_s = line_of_sight(sensing_apu, point)
        sin_c, d_c = line_of_sight(comm_apu, point)
        tau = (d_s + d_c) / SPEED_OF_LIGHT
        weights[col] = z * np.exp(-2j * np.pi * f_k * tau)
        a_s[:, col] = steering_vector(f_k, layout.carrier_freq, layout.element_spacing, m_ant, sin_s)
        a_c[:, col] = steering_vector(f_k, layout.carrier_freq, layout.element_spacing, m_ant, sin_c)
    return (a_s * weights[None, :]) @ a_c.conj().T
