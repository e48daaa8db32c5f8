"""Array and user geometry for a planar array in the y-z plane.

Elements sit on a grid centred at the origin.  Offsets along each axis are
integers for odd counts and half-integers for even counts, so the grid is
always symmetric about the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

# Upper bound on the number of elements materialised at once by grid_blocks.
BLOCK_ELEMENTS = 1 << 20


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array with ``m_y`` x ``m_z`` square elements.

    Parameters
    ----------
    m_y, m_z : int
        Element counts along y and z.
    d : float
        Element spacing in metres.
    a : float
        Physical area of one element in square metres.
    e_a : float
        Aperture efficiency in (0, 1].
    """

    m_y: int
    m_z: int
    d: float
    a: float
    e_a: float = 1.0

    def __post_init__(self):
        for name in ("m_y", "m_z"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d!r}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a!r}")
        # a == d**2 (continuous surface) must survive rounding in a = d*d.
        if self.a > self.d * self.d * (1 + 1e-12):
            raise ValueError(
                f"elements overlap: sqrt(a)={math.sqrt(self.a):.6g} m exceeds d={self.d:.6g} m")
        if not 0 < self.e_a <= 1:
            raise ValueError(f"e_a must lie in (0, 1], got {self.e_a!r}")

    @classmethod
    def isotropic(cls, m_y: int, m_z: int, wavelength: float, d: float | None = None):
        """Isotropic elements (area wavelength^2/4pi), half-wavelength spaced by default."""
        if d is None:
            d = wavelength / 2
        return cls(m_y, m_z, d, wavelength**2 / (4 * math.pi))

    @property
    def m(self) -> int:
        return self.m_y * self.m_z

    @property
    def occupation_ratio(self) -> float:
        return min(self.a / (self.d * self.d), 1.0)

    @property
    def effective_area(self) -> float:
        return self.e_a * self.a

    @property
    def l_y(self) -> float:
        return self.m_y * self.d

    @property
    def l_z(self) -> float:
        return self.m_z * self.d

    @property
    def l_d(self) -> float:
        return math.hypot(self.l_y, self.l_z)

    def offsets_y(self) -> np.ndarray:
        return index_offsets(self.m_y)

    def offsets_z(self) -> np.ndarray:
        return index_offsets(self.m_z)


@dataclass(frozen=True)
class UserPose:
    """User at distance ``r`` from the array centre, zenith ``theta``, azimuth ``phi``.

    Angles are radians; ``theta`` in [0, pi] and ``phi`` in [-pi/2, pi/2].
    Out-of-range angles are rejected rather than wrapped.
    """

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not self.r > 0 or not math.isfinite(self.r):
            raise ValueError(f"r must be positive and finite, got {self.r!r}")
        if not 0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not -math.pi / 2 <= self.phi <= math.pi / 2:
            raise ValueError(f"phi must lie in [-pi/2, pi/2], got {self.phi!r}")

    @property
    def cos_x(self) -> float:
        """Component along the array normal, sin(theta)cos(phi)."""
        # cos(pi/2) is 6e-17, not 0; the plane-grazing cases must be exact.
        if self.theta in (0.0, math.pi) or abs(self.phi) == math.pi / 2:
            return 0.0
        return math.sin(self.theta) * math.cos(self.phi)

    @property
    def cos_y(self) -> float:
        return math.sin(self.theta) * math.sin(self.phi)

    @property
    def cos_z(self) -> float:
        if self.theta == math.pi / 2:
            return 0.0
        return math.cos(self.theta)

    @property
    def position(self) -> np.ndarray:
        return self.r * np.array([self.cos_x, self.cos_y, self.cos_z])

    def with_r(self, r: float) -> "UserPose":
        return UserPose(r, self.theta, self.phi)

    def epsilon(self, geom: ArrayGeometry) -> float:
        """Spacing-to-distance ratio d/r."""
        return geom.d / self.r


@dataclass(frozen=True)
class ElementIndex:
    """Signed grid offset of an element; half-integers for even counts."""

    i_y: float
    i_z: float

    def check(self, geom: ArrayGeometry) -> None:
        for value, count, axis in ((self.i_y, geom.m_y, "y"), (self.i_z, geom.m_z, "z")):
            shifted = value + (count - 1) / 2
            if shifted != int(shifted) or not 0 <= shifted <= count - 1:
                raise IndexError(
                    f"offset {value} is not on the {count}-element grid along {axis}")


def index_offsets(count: int) -> np.ndarray:
    """Centred offsets ``-(count-1)/2, ..., (count-1)/2`` in unit steps."""
    return np.arange(count, dtype=float) - (count - 1) / 2


def direction_cosines(pose: UserPose) -> Tuple[float, float, float]:
    return pose.cos_x, pose.cos_y, pose.cos_z


def element_position(geom: ArrayGeometry, idx: ElementIndex) -> np.ndarray:
    idx.check(geom)
    return np.array([0.0, idx.i_y * geom.d, idx.i_z * geom.d])


def distance_factor(eps, cos_y, cos_z, i_y, i_z):
    """``(r_elem / r)**2`` written in terms of the spacing ratio ``eps = d/r``."""
    return 1 - 2 * i_y * eps * cos_y - 2 * i_z * eps * cos_z + (i_y * i_y + i_z * i_z) * eps * eps


def element_distance(geom: ArrayGeometry, pose: UserPose, idx: ElementIndex) -> float:
    """Distance from the user to the centre of element ``idx``."""
    idx.check(geom)
    eps = pose.epsilon(geom)
    return pose.r * math.sqrt(distance_factor(eps, pose.cos_y, pose.cos_z, idx.i_y, idx.i_z))


def element_distances(geom: ArrayGeometry, pose: UserPose, i_y, i_z) -> np.ndarray:
    """Vectorised element distances, computed as coordinate-space norms ``|q - w|``."""
    q = pose.position
    dy = q[1] - np.asarray(i_y) * geom.d
    dz = q[2] - np.asarray(i_z) * geom.d
    return np.sqrt(q[0] * q[0] + dy * dy + dz * dz)


def grid_blocks(geom: ArrayGeometry, max_elements: int = BLOCK_ELEMENTS
                ) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield ``(i_y, i_z)`` offset meshes covering the grid in row-major order.

    Rows run along y and ``i_z`` is the outer index.  Each block holds whole
    rows and at most ``max_elements`` elements (at least one row), so memory
    stays bounded for very large arrays.
    """
    iy = geom.offsets_y()
    rows = max(1, max_elements // geom.m_y)
    for start in range(0, geom.m_z, rows):
        stop = min(start + rows, geom.m_z)
        iz = np.arange(start, stop, dtype=float) - (geom.m_z - 1) / 2
        yield np.broadcast_to(iy, (stop - start, geom.m_y)), iz[:, None] * np.ones((1, geom.m_y))
