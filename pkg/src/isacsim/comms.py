"""OFDMA subcarrier allocation, maximum-ratio precoding, per-device SNR and
achievable sum rate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .channel import OfdmaGridSpec, steering_vector
from .geometry import RoleAssignment, StripeLayout, line_of_sight

SNR_CONVENTIONS = ("as-printed", "matched-filter")


@dataclass(frozen=True)
class Allocation:
    """Devices mapped one-to-one onto subcarriers, with an equal power split.

    ``apu_power`` is the transmit power each communication APU spends on each
    active subcarrier, ``budget / (C * D)``, so the total emitted power equals
    the budget.
    """

    device_positions: np.ndarray
    device_to_subcarrier: tuple[int, ...]
    subcarrier_count: int
    comm_apu_count: int
    budget: float
    apu_power: float

    def __post_init__(self):
        pos = np.array(self.device_positions, dtype=float).reshape(-1, 2)
        pos.flags.writeable = False
        object.__setattr__(self, "device_positions", pos)
        ks = tuple(int(k) for k in self.device_to_subcarrier)
        object.__setattr__(self, "device_to_subcarrier", ks)
        if len(ks) != pos.shape[0]:
            raise ValueError("one subcarrier per device required")
        if len(set(ks)) != len(ks):
            raise ValueError("device-to-subcarrier map must be injective")
        if len(ks) > self.subcarrier_count:
            raise ValueError("more devices than subcarriers")
        for k in ks:
            if not 1 <= k <= self.subcarrier_count:
                raise IndexError(f"subcarrier {k} out of range 1..{self.subcarrier_count}")
        total = self.comm_apu_count * len(ks) * self.apu_power
        if total > self.budget * (1 + 1e-12):
            raise ValueError("total emitted power exceeds the budget")

    @property
    def device_count(self) -> int:
        return len(self.device_to_subcarrier)

    @property
    def active_subcarriers(self) -> tuple[int, ...]:
        return tuple(sorted(self.device_to_subcarrier))

    def device_on(self, k: int) -> int:
        """Index of the device served on subcarrier ``k``."""
        return self.device_to_subcarrier.index(k)

    def power(self, k: int) -> float:
        """Per-APU transmit power on subcarrier ``k`` (zero when idle)."""
        return self.apu_power if k in self.device_to_subcarrier else 0.0


def allocate(
    device_positions,
    subcarrier_count: int,
    budget: float,
    comm_apu_count: int,
    mode: str = "even-spread",
    rng: np.random.Generator | None = None,
) -> Allocation:
    """Assign each device its own subcarrier and split the power budget evenly.

    ``even-spread`` puts device ``j`` (1-based) on subcarrier
    ``ceil((j-1)*K/D) + 1``; ``random`` draws D distinct subcarriers from the
    provided ``rng``.
    """
    pos = np.asarray(device_positions, dtype=float).reshape(-1, 2)
    d = pos.shape[0]
    if d > subcarrier_count:
        raise ValueError(f"{d} devices exceed {subcarrier_count} subcarriers")
    if mode == "even-spread":
        ks = tuple((j * subcarrier_count + d - 1) // d + 1 for j in range(d))
    elif mode == "random":
        if rng is None:
            raise ValueError("random allocation mode needs an rng")
        ks = tuple(int(k) + 1 for k in rng.choice(subcarrier_count, size=d, replace=False))
    else:
        raise ValueError(f"unknown allocation mode {mode!r}")
    per_pair = budget / (comm_apu_count * d) if d else 0.0
    return Allocation(
        device_positions=pos,
        device_to_subcarrier=ks,
        subcarrier_count=subcarrier_count,
        comm_apu_count=comm_apu_count,
        budget=budget,
        apu_power=per_pair,
    )


@dataclass(frozen=True)
class PrecoderSet:
    """Maximum-ratio precoders keyed by (comm APU index, subcarrier)."""

    vectors: Mapping[tuple[int, int], np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "vectors", MappingProxyType(dict(self.vectors)))

    def vector(self, apu_index: int, k: int) -> np.ndarray:
        return self.vectors[(apu_index, k)]


def mrt_precoders(
    layout: StripeLayout,
    ofdma: OfdmaGridSpec,
    roles: RoleAssignment,
    alloc: Allocation,
) -> PrecoderSet:
    """Per-(APU, subcarrier) precoders aligned with the served device's
    steering direction, scaled so ``||u||^2`` equals the allocated power."""
    if alloc.comm_apu_count != roles.comm_count:
        raise ValueError("allocation was built for a different comm APU count")
    vectors: dict[tuple[int, int], np.ndarray] = {}
    for device, k in enumerate(alloc.device_to_subcarrier):
        f_k = ofdma.frequency(k)
        device_pos = alloc.device_positions[device]
        for c in roles.comm_set:
            sin_phi, _ = line_of_sight(layout.apus[c], device_pos)
            a = steering_vector(f_k, layout.carrier_freq, layout.element_spacing, layout.antennas_per_apu, sin_phi)
            vectors[(c, k)] = np.sqrt(alloc.apu_power) * a / np.linalg.norm(a)
    return PrecoderSet(vectors=vectors)


def snr_per_device(
    alloc: Allocation,
    noise_power: float,
    convention: str = "as-printed",
    antennas: int | None = None,
) -> dict[int, float]:
    """SNR on each active subcarrier under coherent maximum-ratio transmission.

    The ``as-printed`` convention evaluates the closed form in which the
    steering norm cancels, ``sum_c p_{c,k} / sigma^2``; ``matched-filter``
    keeps the beamforming gain and multiplies by the antenna count.
    """
    if not noise_power > 0:
        raise ValueError("noise_power must be positive")
    if convention not in SNR_CONVENTIONS:
        raise ValueError(f"unknown snr convention {convention!r}")
    gain = 1.0
    if convention == "matched-filter":
        if antennas is None:
            raise ValueError("matched-filter convention needs the antenna count")
        gain = float(antennas)
    return {
        k: gain * alloc.comm_apu_count * alloc.apu_power / noise_power
        for k in alloc.active_subcarriers
    }


def sum_rate(
    alloc: Allocation,
    noise_power: float,
    subcarrier_spacing: float,
    convention: str = "as-printed",
    antennas: int | None = None,
) -> float:
    """Shannon sum rate over the active subcarriers, in bits/s."""
    if alloc.device_count == 0:
        return 0.0
    snr = snr_per_device(alloc, noise_power, convention=convention, antennas=antennas)
    return subcarrier_spacing * sum(math.log2(1.0 + g) for g in snr.values())
