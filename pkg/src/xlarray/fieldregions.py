"""Near-field / far-field boundaries.

* Uniform-power distance (UPD): the shortest link distance at which the
  weakest element receives at least ``gamma_th`` of the strongest one's power.
* Direction-dependent Rayleigh distance: the shortest link distance at which
  the largest per-element phase error of the plane-wave approximation is at
  most pi/8.
* Classical Rayleigh distance ``2 D^2 / lambda``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .channel import ChannelModel, proposed_gains
from .geometry import ArrayGeometry, UserPose, distance_factor, grid_blocks

PHASE_LIMIT = math.pi / 8
R_MAX = 1e9
R_MIN = 1e-9
# Above this element count the phase-error scan only visits the corners.
SCAN_LIMIT = 10**6
_MONOTONE_SAMPLES = 65
# The monotonicity check extends this far past the bracket to catch later crossings.
_CHECK_REACH = 64.0


class Criterion(enum.Enum):
    UPD = "upd"
    DD_RAYLEIGH = "dd_rayleigh"
    CLASSICAL_RAYLEIGH = "classical_rayleigh"


class BracketError(RuntimeError):
    """The boundary criterion could not be bracketed within [R_MIN, R_MAX]."""


@dataclass(frozen=True)
class FieldDistanceResult:
    """Boundary distance in metres for one direction.

    ``residual`` is the criterion mismatch at the returned distance.
    ``flagged`` is set when the monotonicity check failed and the outermost
    root was taken from a scan.
    """

    distance: float
    criterion: Criterion
    theta: float
    phi: float
    threshold: float
    residual: float
    model: Optional[ChannelModel] = None
    flagged: bool = False


def plate_power_ratio(r, cos_x, cos_y, cos_z, half_y, half_z, exponent):
    """Nearest-to-farthest squared-distance ratio to a rectangle, raised to ``exponent``.

    The rectangle spans ``[-half_y, half_y] x [-half_z, half_z]`` in the
    array plane.  ``exponent`` is 1.5 for projected-aperture gains
    (``1/dist^3``) and 1 for spherical-wave gains (``1/dist^2``).
    """
    height = (r * cos_x) ** 2
    near = height + max(r * abs(cos_y) - half_y, 0.0) ** 2 + max(r * abs(cos_z) - half_z, 0.0) ** 2
    far = height + (r * abs(cos_y) + half_y) ** 2 + (r * abs(cos_z) + half_z) ** 2
    return (near / far) ** exponent


def power_ratio(model: ChannelModel, geom: ArrayGeometry, pose: UserPose) -> float:
    """Weakest-to-strongest element power ratio over the array plate.

    Closed form over the continuous plate of size ``L_y x L_z``.  Element
    centres sit up to half a spacing inside the plate edge, so
    :func:`power_ratio_scan` differs from this by O(d/r).
    """
    model = ChannelModel.parse(model)
    if model in (ChannelModel.UPW, ChannelModel.USW):
        return 1.0
    if model is ChannelModel.PROPOSED and pose.cos_x <= 0:
        raise ValueError("power ratio undefined: every projected aperture is zero")
    exponent = 1.5 if model is ChannelModel.PROPOSED else 1.0
    return plate_power_ratio(pose.r, pose.cos_x, pose.cos_y, pose.cos_z,
                             geom.l_y / 2, geom.l_z / 2, exponent)


def power_ratio_scan(model: ChannelModel, geom: ArrayGeometry, pose: UserPose) -> float:
    """Exhaustive min/max ratio of the element gains."""
    model = ChannelModel.parse(model)
    if model in (ChannelModel.UPW, ChannelModel.USW):
        return 1.0
    if model is ChannelModel.PROPOSED and pose.cos_x <= 0:
        raise ValueError("power ratio undefined: every projected aperture is zero")
    lo, hi = math.inf, 0.0
    eps = pose.epsilon(geom)
    for i_y, i_z in grid_blocks(geom):
        if model is ChannelModel.PROPOSED:
            gains = proposed_gains(geom, pose, i_y, i_z)
        else:
            gains = 1.0 / distance_factor(eps, pose.cos_y, pose.cos_z, i_y, i_z)
        lo = min(lo, float(gains.min()))
        hi = max(hi, float(gains.max()))
    return lo / hi


def _is_monotone(f: Callable[[float], float], lo: float, hi: float, increasing: bool) -> bool:
    rs = np.geomspace(lo, hi, _MONOTONE_SAMPLES)
    values = np.array([f(r) for r in rs])
    steps = np.diff(values)
    tol = 1e-12 * np.abs(values[1:]).max()
    return bool(np.all(steps >= -tol)) if increasing else bool(np.all(steps <= tol))


def _solve_boundary(f: Callable[[float], float], target: float, r0: float, increasing: bool):
    """Smallest r beyond which ``f`` stays on the far side of ``target``.

    ``f`` is expected to be monotone (increasing or decreasing) in r.  The
    root is bracketed by doubling/halving from ``r0`` and refined with
    Brent's method.  Monotonicity is sampled from a quarter of the bracket's
    lower end to ``_CHECK_REACH`` times its upper end.  Returns
    ``(r, flagged)``; ``flagged`` marks a failed check, in which case the
    outermost crossing found on a log-spaced scan of that range is refined
    instead.
    """
    def g(r):
        value = f(r) - target
        return value if increasing else -value

    # g < 0 in the near field, g >= 0 in the far field.
    if g(r0) < 0:
        lo, hi = r0, 2 * r0
        while g(hi) < 0:
            lo, hi = hi, 2 * hi
            if hi > R_MAX:
                raise BracketError(f"criterion not met for any r <= {R_MAX:g} m")
    else:
        lo, hi = r0 / 2, r0
        while g(lo) >= 0:
            lo, hi = lo / 2, lo
            if lo < R_MIN:
                raise BracketError(f"criterion already met at r = {R_MIN:g} m")
    reach = min(hi * _CHECK_REACH, R_MAX)
    flagged = not _is_monotone(f, lo / 4, reach, increasing)
    if flagged:
        rs = np.geomspace(min(lo / 4, r0), reach, 4096)
        values = np.array([g(r) for r in rs])
        near = np.flatnonzero(values < 0)
        if near.size == 0:
            raise BracketError("criterion met everywhere on the fallback scan")
        last = int(near[-1])
        if last == len(rs) - 1:
            raise BracketError(f"criterion not met for any r <= {reach:g} m")
        lo, hi = rs[last], rs[last + 1]
    root = brentq(g, lo, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps, maxiter=500)
    # brentq may land a hair on the near side; step to the far side.
    for _ in range(64):
        if g(root) >= 0:
            break
        root = math.nextafter(root, math.inf)
    else:
        root = hi
    return root, flagged


def upd(model: ChannelModel, geom: ArrayGeometry, theta: float, phi: float,
        gamma_th: float) -> FieldDistanceResult:
    """Uniform-power distance for the direction ``(theta, phi)``."""
    model = ChannelModel.parse(model)
    if model in (ChannelModel.UPW, ChannelModel.USW):
        raise ValueError(f"{model.value} has equal element powers; UPD is undefined")
    if not 0 < gamma_th < 1:
        raise ValueError(f"gamma_th must lie in (0, 1), got {gamma_th!r}")
    direction = UserPose(1.0, theta, phi)
    if direction.cos_x <= 0:
        raise ValueError("direction lies in the array plane")

    def ratio(r):
        return power_ratio(model, geom, direction.with_r(r))

    r0 = max(geom.l_d, 10 * geom.d)
    r, flagged = _solve_boundary(ratio, gamma_th, r0, increasing=True)
    return FieldDistanceResult(r, Criterion.UPD, theta, phi, gamma_th,
                               abs(ratio(r) - gamma_th), model, flagged)


def _phase_errors(geom, pose, wavelength, i_y, i_z):
    # |q - w| - (r - <u, w>) rewritten as (|w|^2 - <u, w>^2) / (|q - w| + r - <u, w>)
    # to avoid cancellation when r >> |w|.
    y = i_y * geom.d
    z = i_z * geom.d
    proj = y * pose.cos_y + z * pose.cos_z
    q = pose.position
    dist = np.sqrt(q[0] ** 2 + (q[1] - y) ** 2 + (q[2] - z) ** 2)
    perp_sq = np.maximum(y * y + z * z - proj * proj, 0.0)
    denom = dist + pose.r - proj
    # denom vanishes only for elements on the user's ray beyond the user, where the error is 2 |q - w|.
    safe = np.where(denom > 0, denom, 1.0)
    err = np.where(denom > 0, perp_sq / safe, 2 * dist)
    return 2 * math.pi / wavelength * err


def max_phase_error(geom: ArrayGeometry, pose: UserPose, wavelength: float) -> float:
    """Largest phase error of the plane-wave approximation over all elements.

    The per-element error is convex in the element position, so the maximum
    sits on a corner element.  Arrays up to ``SCAN_LIMIT`` elements are still
    scanned exhaustively; larger ones only evaluate the four corners.
    """
    if geom.m <= SCAN_LIMIT:
        return max(float(_phase_errors(geom, pose, wavelength, i_y, i_z).max())
                   for i_y, i_z in grid_blocks(geom))
    hy, hz = (geom.m_y - 1) / 2, (geom.m_z - 1) / 2
    corners_y = np.array([-hy, hy, -hy, hy])
    corners_z = np.array([-hz, -hz, hz, hz])
    return float(_phase_errors(geom, pose, wavelength, corners_y, corners_z).max())


def dd_rayleigh(geom: ArrayGeometry, theta: float, phi: float,
                wavelength: float) -> FieldDistanceResult:
    """Direction-dependent Rayleigh distance (max phase error equal to pi/8)."""
    direction = UserPose(1.0, theta, phi)

    def error(r):
        return max_phase_error(geom, direction.with_r(r), wavelength)

    r0 = max(geom.l_d, 10 * geom.d)
    r, flagged = _solve_boundary(error, PHASE_LIMIT, r0, increasing=False)
    return FieldDistanceResult(r, Criterion.DD_RAYLEIGH, theta, phi, PHASE_LIMIT,
                               abs(error(r) - PHASE_LIMIT), None, flagged)


def classical_rayleigh(aperture: float, wavelength: float) -> float:
    """Rayleigh distance ``2 D^2 / lambda`` for an aperture of size ``D``."""
    if not aperture > 0 or not wavelength > 0:
        raise ValueError("aperture and wavelength must be positive")
    return 2 * aperture**2 / wavelength
