"""Uniform linear array along z (a planar array with a single column).

Everything here is phrased through the two angles ``alpha_1`` and
``alpha_2`` that the array's end points subtend at the user, measured from
the user's foot point on the array axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .channel import LinkBudget
from .geometry import UserPose
from .snr import SnrMethod, SnrResult

DEFAULT_M_CAP = 2**40


@dataclass(frozen=True)
class UlaAngles:
    """End-point angles in radians with their sum (span) and difference."""

    alpha_1: float
    alpha_2: float

    @property
    def delta_span(self) -> float:
        return self.alpha_1 + self.alpha_2

    @property
    def delta_diff(self) -> float:
        return self.alpha_1 - self.alpha_2


@dataclass(frozen=True)
class RhoFactors:
    """End-to-centre ratios of path loss, projected aperture and total gain."""

    rho_pl: float
    rho_aper: float

    @property
    def rho(self) -> float:
        return self.rho_pl * self.rho_aper


@dataclass(frozen=True)
class CriticalPoint:
    """Largest array size whose SNR ratio still meets the threshold.

    ``capped``: the ratio never dropped below the threshold up to the cap.
    ``below_threshold``: the ratio is already too low for a single element
    (``m`` is then 0).  ``monotone``: the nonincreasing check passed; when it
    fails, ``m`` comes from a linear scan.
    """

    m: int
    capped: bool = False
    below_threshold: bool = False
    monotone: bool = True


def _sin_theta(pose: UserPose) -> float:
    if pose.theta in (0.0, math.pi):
        return 0.0
    return math.sin(pose.theta)


def _cos_phi(pose: UserPose) -> float:
    if abs(pose.phi) == math.pi / 2:
        return 0.0
    return math.cos(pose.phi)


def ula_angles(m: int, d: float, pose: UserPose) -> UlaAngles:
    """Angles subtended by the two halves of an ``m``-element ULA."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m!r}")
    sin_t = _sin_theta(pose)
    if sin_t == 0:
        raise ValueError("user on the array axis (sin(theta) = 0)")
    half = m * d / 2
    along = pose.r * pose.cos_z
    foot = pose.r * sin_t
    return UlaAngles(math.atan((half - along) / foot), math.atan((half + along) / foot))


def ula_snr(m: int, d: float, a: float, pose: UserPose, budget: LinkBudget) -> SnrResult:
    """Closed-form ULA SNR, ``p_bar A cos(phi) (sin a1 + sin a2) / (4 pi d r sin(theta))``.

    ``a`` is the effective element area.  Users on the array axis or in the
    array plane get zero.
    """
    sin_t, cos_p = _sin_theta(pose), _cos_phi(pose)
    if sin_t == 0 or cos_p == 0:
        return SnrResult(0.0, SnrMethod.CLOSED_FORM)
    ang = ula_angles(m, d, pose)
    gamma = (budget.p_bar * a * cos_p / (4 * math.pi * d * pose.r * sin_t)
             * (math.sin(ang.alpha_1) + math.sin(ang.alpha_2)))
    return SnrResult(max(gamma, 0.0), SnrMethod.CLOSED_FORM)


def ula_snr_limit(d: float, a: float, pose: UserPose, budget: LinkBudget) -> SnrResult:
    """SNR of an infinitely long ULA, ``p_bar A cos(phi) / (2 pi d r sin(theta))``."""
    sin_t = _sin_theta(pose)
    if sin_t == 0:
        raise ValueError("user on the array axis (sin(theta) = 0)")
    gamma = budget.p_bar * a * _cos_phi(pose) / (2 * math.pi * d * pose.r * sin_t)
    return SnrResult(gamma, SnrMethod.ASYMPTOTIC)


def ula_nusw_snr(m: int, d: float, pose: UserPose, budget: LinkBudget) -> SnrResult:
    """Non-uniform spherical-wave ULA SNR, proportional to the angular span."""
    span = ula_angles(m, d, pose).delta_span
    gamma = (budget.p_bar * budget.wavelength**2 * span
             / ((4 * math.pi) ** 2 * d * pose.r * _sin_theta(pose)))
    return SnrResult(max(gamma, 0.0), SnrMethod.NUSW_REFERENCE)


def snr_ratio(m: int, d: float, pose: UserPose, budget: LinkBudget, a: float | None = None) -> float:
    """Projected-aperture over spherical-wave ULA SNR.

    ``a`` defaults to the isotropic area ``wavelength^2 / 4 pi``.
    """
    if a is None:
        a = budget.wavelength**2 / (4 * math.pi)
    return ula_snr(m, d, a, pose, budget).gamma / ula_nusw_snr(m, d, pose, budget).gamma


def ula_critical_point(d: float, pose: UserPose, budget: LinkBudget, ratio_th: float,
                       a: float | None = None, m_cap: int = DEFAULT_M_CAP) -> CriticalPoint:
    """Largest ``m`` with :func:`snr_ratio` at least ``ratio_th``.

    Doubling from ``m = 1`` brackets the crossing, then binary search on the
    integers narrows it.  The ratio is checked to be nonincreasing over the
    bracket; if not, the bracket is scanned element count by element count.
    """
    if not 0 < ratio_th < 1:
        raise ValueError(f"ratio_th must lie in (0, 1), got {ratio_th!r}")

    def ok(m):
        return snr_ratio(m, d, pose, budget, a) >= ratio_th

    if not ok(1):
        return CriticalPoint(0, below_threshold=True)
    lo = 1
    while True:
        hi = 2 * lo
        if hi > m_cap:
            return CriticalPoint(m_cap if ok(m_cap) else lo, capped=True)
        if not ok(hi):
            break
        lo = hi
    samples = np.unique(np.geomspace(1, hi, 64).astype(np.int64))
    ratios = [snr_ratio(int(m), d, pose, budget, a) for m in samples]
    monotone = all(b <= a_ * (1 + 1e-12) for a_, b in zip(ratios, ratios[1:]))
    if not monotone:
        best = max(m for m in range(1, hi + 1) if ok(m))
        return CriticalPoint(best, monotone=False)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return CriticalPoint(lo)


def ula_rho_factors(m: int, d: float, pose: UserPose) -> RhoFactors:
    """Path-loss and projected-aperture ratios between the end and centre elements.

    The end element sits at ``z = (m - 1) d / 2``.
    """
    if m < 3 or m % 2 == 0:
        raise ValueError(f"m must be odd and >= 3, got {m!r}")
    cos_x = pose.cos_x
    if cos_x <= 0:
        raise ValueError("user must be in front of the array (cos_x > 0)")
    q = pose.position
    end = q - np.array([0.0, 0.0, (m - 1) * d / 2])
    end_dist = float(np.linalg.norm(end))
    rho_pl = pose.r**2 / end_dist**2
    rho_aper = float(end[0]) / end_dist / cos_x
    return RhoFactors(rho_pl, rho_aper)


def ula_constant_span_circle(m: int, d: float, phi: float, span: float
                             ) -> Tuple[np.ndarray, float]:
    """Circle of user positions that see the whole ULA under the angle ``span``.

    Returns the centre (metres, 3-vector) and radius.  The circle lies in
    the plane through the array axis at azimuth ``phi``.
    """
    if not 0 < span < math.pi:
        raise ValueError(f"span must lie in (0, pi), got {span!r}")
    half = m * d / 2
    offset = half / math.tan(span)
    centre = np.array([offset * math.cos(phi), offset * math.sin(phi), 0.0])
    return centre, half / math.sin(span)


def constant_span_pose(m: int, d: float, phi: float, span: float, theta: float) -> UserPose:
    """Pose at zenith ``theta`` on the arc of :func:`ula_constant_span_circle`."""
    if not 0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta!r}")
    if not 0 < span < math.pi:
        raise ValueError(f"span must lie in (0, pi), got {span!r}")
    half = m * d / 2
    offset = half / math.tan(span)
    s = math.sin(theta)
    r = offset * s + math.sqrt((offset * s) ** 2 + half * half)
    return UserPose(r, theta, phi)
