"""Service-area geometry: perimeter-mounted array units, the spatial grid,
line-of-sight angles and bistatic delays, and sensing/communication role
partitions.

Conventions used throughout the package:

* 2D points are float64 arrays of shape (2,), in meters.
* Each array unit (APU) lies on the area perimeter with its antenna line
  parallel to the wall and its broadside pointing into the area.  Azimuth
  angles are measured from broadside, so ``sin(phi)`` is the projection of
  the unit line-of-sight vector onto the array axis.
* Grid indices are 1-based, matching the column indexing of the sensing
  matrices built from the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

#: Propagation speed used for every delay computation, in m/s.
SPEED_OF_LIGHT = 299_792_458.0

_UNIT_TOL = 1e-12


def _point(value) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.shape != (2,):
        raise ValueError(f"expected a 2D point, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def _unit_vector(value, name: str) -> np.ndarray:
    arr = _point(value)
    norm = math.sqrt(float(arr @ arr))
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must have unit norm, got |v| = {norm!r}")
    return arr


@dataclass(frozen=True)
class ServiceArea:
    """Square service region; ``origin`` is its lower-left corner."""

    side_length: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if not self.side_length > 0:
            raise ValueError("side_length must be positive")
        object.__setattr__(self, "origin", _point(self.origin))

    @property
    def center(self) -> np.ndarray:
        return self.origin + 0.5 * self.side_length

    def contains(self, point, margin: float = 0.0) -> bool:
        """True if ``point`` lies strictly inside the area by at least ``margin``."""
        p = np.asarray(point, dtype=float)
        lo = self.origin + margin
        hi = self.origin + self.side_length - margin
        return bool(np.all(p > lo) and np.all(p < hi))


@dataclass(frozen=True)
class ApuDescriptor:
    """One antenna processing unit: its position on the wall and orientation.

    ``axis_direction`` points along the antenna line; ``inward_normal`` is the
    broadside direction into the service area.  Both are unit vectors and must
    be orthogonal.
    """

    index: int
    reference_point: np.ndarray
    axis_direction: np.ndarray
    inward_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "reference_point", _point(self.reference_point))
        object.__setattr__(self, "axis_direction", _unit_vector(self.axis_direction, "axis_direction"))
        object.__setattr__(self, "inward_normal", _unit_vector(self.inward_normal, "inward_normal"))
        if abs(float(self.axis_direction @ self.inward_normal)) > _UNIT_TOL:
            raise ValueError("axis_direction and inward_normal must be orthogonal")


@dataclass(frozen=True)
class StripeLayout:
    """Ordered collection of APUs sharing one array geometry.

    ``element_spacing`` is the inter-antenna separation as a fraction of the
    carrier wavelength.
    """

    apus: tuple[ApuDescriptor, ...]
    antennas_per_apu: int
    element_spacing: float
    carrier_freq: float

    def __post_init__(self):
        object.__setattr__(self, "apus", tuple(self.apus))
        if not self.apus:
            raise ValueError("layout needs at least one APU")
        if self.antennas_per_apu < 1:
            raise ValueError("antennas_per_apu must be >= 1")
        if not self.element_spacing > 0:
            raise ValueError("element_spacing must be positive")
        if not self.carrier_freq > 0:
            raise ValueError("carrier_freq must be positive")
        for pos, apu in enumerate(self.apus):
            if apu.index != pos:
                raise ValueError("APU indices must run 0..n-1 in layout order")

    @property
    def apu_count(self) -> int:
        return len(self.apus)


def build_perimeter_layout(
    area: ServiceArea,
    apus_per_side: int,
    antennas_per_apu: int,
    element_spacing: float,
    carrier_freq: float,
) -> StripeLayout:
    """Place ``4 * apus_per_side`` APUs on the area perimeter.

    Each side is split into ``apus_per_side`` equal segments and one APU sits
    at each segment center, its antenna line parallel to the wall.  Indices
    run counter-clockwise starting from the bottom side.
    """
    if apus_per_side < 1:
        raise ValueError("apus_per_side must be >= 1")
    side = area.side_length
    ox, oy = area.origin
    # (corner, walking direction, inward normal) per side, counter-clockwise.
    sides = (
        ((ox, oy), (1.0, 0.0), (0.0, 1.0)),
        ((ox + side, oy), (0.0, 1.0), (-1.0, 0.0)),
        ((ox + side, oy + side), (-1.0, 0.0), (0.0, -1.0)),
        ((ox, oy + side), (0.0, -1.0), (1.0, 0.0)),
    )
    apus = []
    for corner, direction, normal in sides:
        corner = np.asarray(corner)
        direction = np.asarray(direction)
        for j in range(apus_per_side):
            ref = corner + direction * side * (j + 0.5) / apus_per_side
            apus.append(
                ApuDescriptor(
                    index=len(apus),
                    reference_point=ref,
                    axis_direction=direction,
                    inward_normal=np.asarray(normal),
                )
            )
    return StripeLayout(
        apus=tuple(apus),
        antennas_per_apu=antennas_per_apu,
        element_spacing=element_spacing,
        carrier_freq=carrier_freq,
    )


def grid_point_coords(
    index: int,
    point_count: int,
    spacing: float,
    offset: tuple[float, float] = (0.0, 0.0),
) -> np.ndarray:
    """Coordinates of 1-based grid point ``index`` on a square lattice.

    The raw lattice places point ``i`` at
    ``((floor((i-1)/sqrt(I)) - 1) * spacing, (((i-1) mod sqrt(I)) + 1) * spacing)``;
    ``offset`` translates the whole lattice (see :func:`build_grid`).
    """
    side = math.isqrt(point_count)
    if side * side != point_count:
        raise ValueError("point_count must be a perfect square")
    if not 1 <= index <= point_count:
        raise IndexError(f"grid index {index} out of range 1..{point_count}")
    q, r = divmod(index - 1, side)
    return np.array([(q - 1) * spacing + offset[0], (r + 1) * spacing + offset[1]])


@dataclass(frozen=True)
class Grid:
    """Square lattice discretizing the service area.

    ``coords[i-1]`` is the position of 1-based grid point ``i``; ``offset`` is
    the translation applied to the raw lattice so it sits centered in the
    area.
    """

    point_count: int
    spacing: float
    coords: np.ndarray
    offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        side = math.isqrt(self.point_count)
        if side * side != self.point_count:
            raise ValueError("point_count must be a perfect square")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        coords = np.array(self.coords, dtype=float)
        if coords.shape != (self.point_count, 2):
            raise ValueError("coords must have shape (point_count, 2)")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "offset", (float(self.offset[0]), float(self.offset[1])))

    def point(self, index: int) -> np.ndarray:
        if not 1 <= index <= self.point_count:
            raise IndexError(f"grid index {index} out of range 1..{self.point_count}")
        return self.coords[index - 1]


def build_grid(area: ServiceArea, point_count: int, spacing: float | None = None) -> Grid:
    """Build the sampling grid, centered inside ``area``.

    With ``spacing=None`` the default ``side_length / (sqrt(I) + 1)`` is used,
    which leaves a one-cell margin between the lattice and the walls.  An
    explicit ``spacing`` must still keep every point strictly interior.
    """
    side_pts = math.isqrt(point_count)
    if side_pts * side_pts != point_count:
        raise ValueError("point_count must be a perfect square")
    if spacing is None:
        spacing = area.side_length / (side_pts + 1)
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    # Raw lattice bounding box: x in [-d, (n-2)d], y in [d, n*d].
    raw_center = np.array([(side_pts - 3) / 2 * spacing, (side_pts + 1) / 2 * spacing])
    offset = area.center - raw_center
    idx = np.arange(point_count)
    q, r = np.divmod(idx, side_pts)
    coords = np.column_stack(((q - 1) * spacing + offset[0], (r + 1) * spacing + offset[1]))
    margin = (area.side_length - (side_pts - 1) * spacing) / 2
    if not margin > 0:
        raise ValueError(
            f"spacing {spacing} places grid points outside the area "
            f"(lattice extent {(side_pts - 1) * spacing} >= side {area.side_length})"
        )
    return Grid(point_count=point_count, spacing=float(spacing), coords=coords, offset=(float(offset[0]), float(offset[1])))


def line_of_sight(apu: ApuDescriptor, point) -> tuple[float, float]:
    """Return ``(sin_phi, distance)`` from an APU to an interior point.

    ``sin_phi`` is the projection of the unit line-of-sight vector onto the
    array axis (angle measured from broadside).  Raises if the point
    coincides with the APU or does not lie strictly on the broadside half
    plane, i.e. is not interior to the service area.
    """
    p = np.asarray(point, dtype=float)
    diff = p - apu.reference_point
    dist = float(np.sqrt(np.sum(diff * diff)))
    if dist == 0.0:
        raise ValueError(f"point {p} coincides with APU {apu.index} reference point")
    unit = diff / dist
    if float(unit @ apu.inward_normal) <= 0.0:
        raise ValueError(f"point {p} is not strictly inside the area seen from APU {apu.index}")
    sin_phi = float(unit @ apu.axis_direction)
    return max(-1.0, min(1.0, sin_phi)), dist


def sight_table(apus, points) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`line_of_sight` over many APUs and points.

    Returns ``(sin_phi, dist)`` arrays of shape ``(len(apus), n_points)``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    sin_phi = np.empty((len(apus), n))
    dist = np.empty((len(apus), n))
    for row, apu in enumerate(apus):
        diff = pts - apu.reference_point
        d = np.sqrt(np.sum(diff * diff, axis=1))
        if np.any(d == 0.0):
            raise ValueError(f"a point coincides with APU {apu.index} reference point")
        unit = diff / d[:, None]
        if np.any(unit @ apu.inward_normal <= 0.0):
            raise ValueError(f"a point is not strictly inside the area seen from APU {apu.index}")
        sin_phi[row] = np.clip(unit @ apu.axis_direction, -1.0, 1.0)
        dist[row] = d
    return sin_phi, dist


def bistatic_geometry(tx: ApuDescriptor, rx: ApuDescriptor, point) -> tuple[float, float, float]:
    """Angles and two-leg delay for a reflection at ``point``.

    Returns ``(phi_tx, phi_rx, tau)`` with angles in radians measured from
    each array broadside and ``tau`` the transmitter-point-receiver
    propagation delay in seconds.
    """
    sin_tx, d_tx = line_of_sight(tx, point)
    sin_rx, d_rx = line_of_sight(rx, point)
    tau = (d_tx + d_rx) / SPEED_OF_LIGHT
    return math.asin(sin_tx), math.asin(sin_rx), tau


@dataclass(frozen=True)
class RoleAssignment:
    """One partition of the APUs into communication and sensing sets."""

    comm_set: tuple[int, ...]
    sense_set: tuple[int, ...]

    def __post_init__(self):
        comm = tuple(sorted(self.comm_set))
        sense = tuple(sorted(self.sense_set))
        object.__setattr__(self, "comm_set", comm)
        object.__setattr__(self, "sense_set", sense)
        if not comm or not sense:
            raise ValueError("both comm_set and sense_set must be nonempty")
        overlap = set(comm) & set(sense)
        if overlap:
            raise ValueError(f"comm_set and sense_set overlap: {sorted(overlap)}")
        union = set(comm) | set(sense)
        if union != set(range(len(union))):
            raise ValueError("comm_set and sense_set must partition indices 0..n-1")

    @property
    def comm_count(self) -> int:
        return len(self.comm_set)

    @property
    def sense_count(self) -> int:
        return len(self.sense_set)


def enumerate_configurations(total_apus: int, sense_count: int) -> list[RoleAssignment]:
    """All ways to pick the sensing set, in lexicographic sensing-set order."""
    if not 1 <= sense_count < total_apus:
        raise ValueError(
            f"sense_count must satisfy 1 <= S < total_apus, got S={sense_count}, total={total_apus}"
        )
    everyone = set(range(total_apus))
    out = []
    for sense in combinations(range(total_apus), sense_count):
        comm = tuple(sorted(everyone - set(sense)))
        out.append(RoleAssignment(comm_set=comm, sense_set=sense))
    return out
