"""Received SNR with maximum-ratio combining.

With MRC the SNR is ``p_bar * ||a||^2``.  This module offers the direct
element sum together with its closed-form integral approximation, the
angular-span forms for users in the x-y or x-z plane, boresight and
infinite-array limits, the far-field reduction, and the legacy plane-wave
and spherical-wave references.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .channel import ChannelModel, LinkBudget, response_power, total_gain
from .geometry import ArrayGeometry, UserPose

# Closed form is trusted for r >= VALID_R_OVER_D * d.
VALID_R_OVER_D = 10.0
# Far-field reduction is trusted for r*cos_x >= FAR_FIELD_MARGIN * max(L_y, L_z).
FAR_FIELD_MARGIN = 10.0


class SnrMethod(enum.Enum):
    BRUTE_FORCE = "bruteforce"
    CLOSED_FORM = "closed_form"
    ANGULAR_FORM = "angular_form"
    FAR_FIELD = "far_field"
    ASYMPTOTIC = "asymptotic"
    UPW_REFERENCE = "upw_reference"
    NUSW_REFERENCE = "nusw_reference"


def to_db(value: float) -> float:
    """10*log10 of a power ratio; exactly zero maps to ``-inf``."""
    if value == 0:
        return -math.inf
    return 10 * math.log10(value)


@dataclass(frozen=True)
class SnrResult:
    """Linear SNR with the method that produced it.

    ``valid`` is False when the inputs fall outside the regime the method is
    meant for (the value is still returned).  ``validity_metric`` carries an
    extra method-specific diagnostic, currently only for the far-field form.
    """

    gamma: float
    method: SnrMethod
    valid: bool = True
    validity_metric: float | None = None

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"SNR must be non-negative, got {self.gamma!r}")

    @property
    def gamma_db(self) -> float:
        return to_db(self.gamma)


@dataclass(frozen=True)
class AngularSpans:
    """Horizontal (``eta_*``) and vertical (``beta_*``) angular spans in radians.

    ``sign_i`` and ``sign_j`` select which arctan terms enter with a minus
    sign, depending on where the user's projection falls relative to the array.
    """

    eta_1: float
    eta_2: float
    beta_1: float
    beta_2: float
    sign_i: int
    sign_j: int


def _xi(geom: ArrayGeometry) -> float:
    return geom.effective_area / (geom.d * geom.d)


def u_kernel(x, y, cos_x):
    """``arctan(x y / (c sqrt(c^2 + x^2 + y^2)))`` with ``c = cos_x > 0``.

    Antiderivative of the unit-height solid-angle density over a rectangle
    corner; odd in each of ``x`` and ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # arctan2 with a positive second argument equals arctan of the ratio without overflow.
    out = np.arctan2(x * y, cos_x * np.sqrt(cos_x * cos_x + x * x + y * y))
    return float(out) if out.ndim == 0 else out


def snr_bruteforce(model: ChannelModel, geom: ArrayGeometry, pose: UserPose,
                   budget: LinkBudget) -> SnrResult:
    """``p_bar * ||a||^2`` summed over every element of the response vector."""
    gamma = budget.p_bar * response_power(model, geom, pose, budget)
    return SnrResult(gamma, SnrMethod.BRUTE_FORCE)


def _rect_sum(half_y, half_z, cos_x, cos_y, cos_z):
    return (u_kernel(half_y - cos_y, half_z - cos_z, cos_x)
            + u_kernel(half_y + cos_y, half_z - cos_z, cos_x)
            + u_kernel(half_y - cos_y, half_z + cos_z, cos_x)
            + u_kernel(half_y + cos_y, half_z + cos_z, cos_x))


def snr_closed_form(geom: ArrayGeometry, pose: UserPose, budget: LinkBudget) -> SnrResult:
    """Closed-form SNR obtained by integrating the element sum over the plate.

    Accurate when the element spacing is small against both ``r`` and the
    user's height above the array plane.  The result is flagged invalid for
    ``r < 10 d``; a user in the array plane gets exactly zero.
    """
    valid = pose.r >= VALID_R_OVER_D * geom.d
    cos_x = pose.cos_x
    if cos_x <= 0:
        return SnrResult(0.0, SnrMethod.CLOSED_FORM, valid)
    total = _rect_sum(geom.l_y / (2 * pose.r), geom.l_z / (2 * pose.r),
                      cos_x, pose.cos_y, pose.cos_z)
    gamma = _xi(geom) * budget.p_bar / (4 * math.pi) * total
    return SnrResult(max(gamma, 0.0), SnrMethod.CLOSED_FORM, valid)


def _angular(half_in, half_out, along, normal, xi, p_bar):
    """Angular-span SNR for a user in a plane containing one array axis.

    ``half_in`` is the half length of the array along the in-plane axis,
    ``half_out`` the half length along the other axis, ``along`` the user's
    coordinate along the in-plane axis and ``normal`` its distance from the
    array plane.
    """
    gap_1 = half_in - along
    gap_2 = half_in + along
    eta_1 = math.atan2(abs(gap_1), normal)
    eta_2 = math.atan2(abs(gap_2), normal)
    beta_1 = math.asin(half_out / math.sqrt(normal**2 + gap_1**2 + half_out**2))
    beta_2 = math.asin(half_out / math.sqrt(normal**2 + gap_2**2 + half_out**2))
    if along > half_in:
        sign_i, sign_j = 1, 0
    elif along < -half_in:
        sign_i, sign_j = 0, 1
    else:
        sign_i, sign_j = 0, 0
    total = ((-1) ** sign_i * math.atan(math.tan(eta_1) * math.sin(beta_1))
             + (-1) ** sign_j * math.atan(math.tan(eta_2) * math.sin(beta_2)))
    gamma = xi * p_bar / (2 * math.pi) * total
    spans = AngularSpans(eta_1, eta_2, beta_1, beta_2, sign_i, sign_j)
    return max(gamma, 0.0), spans


def snr_angular_theta_pi2(geom: ArrayGeometry, pose: UserPose, budget: LinkBudget
                          ) -> Tuple[SnrResult, AngularSpans]:
    """SNR for a user in the x-y plane in terms of its angular spans."""
    if pose.theta != math.pi / 2:
        raise ValueError(f"requires theta == pi/2, got {pose.theta!r}")
    if pose.cos_x == 0:
        edge = math.pi / 2
        return (SnrResult(0.0, SnrMethod.ANGULAR_FORM),
                AngularSpans(edge, edge, 0.0, 0.0, 0, 0))
    gamma, spans = _angular(geom.l_y / 2, geom.l_z / 2, pose.r * math.sin(pose.phi),
                            pose.r * math.cos(pose.phi), _xi(geom), budget.p_bar)
    return SnrResult(gamma, SnrMethod.ANGULAR_FORM), spans


def snr_angular_phi0(geom: ArrayGeometry, pose: UserPose, budget: LinkBudget
                     ) -> Tuple[SnrResult, AngularSpans]:
    """SNR for a user in the x-z plane in terms of its angular spans."""
    if pose.phi != 0:
        raise ValueError(f"requires phi == 0, got {pose.phi!r}")
    if pose.cos_x == 0:
        edge = math.pi / 2
        return (SnrResult(0.0, SnrMethod.ANGULAR_FORM),
                AngularSpans(edge, edge, 0.0, 0.0, 0, 0))
    gamma, spans = _angular(geom.l_z / 2, geom.l_y / 2, pose.r * pose.cos_z,
                            pose.r * math.sin(pose.theta), _xi(geom), budget.p_bar)
    return SnrResult(gamma, SnrMethod.ANGULAR_FORM), spans


def snr_boresight(geom: ArrayGeometry, r: float, budget: LinkBudget) -> SnrResult:
    half_y, half_z = geom.l_y / 2, geom.l_z / 2
    ratio = half_y * half_z / (r * math.sqrt(r * r + half_y**2 + half_z**2))
    gamma = _xi(geom) * budget.p_bar / math.pi * math.atan(ratio)
    return SnrResult(gamma, SnrMethod.CLOSED_FORM, r >= VALID_R_OVER_D * geom.d)


def snr_asymptotic_limit(geom: ArrayGeometry, budget: LinkBudget) -> SnrResult:
    """SNR of an infinitely large array: half the occupied fraction of ``p_bar``."""
    return SnrResult(_xi(geom) * budget.p_bar / 2, SnrMethod.ASYMPTOTIC)


def far_field_cross_metric(geom: ArrayGeometry, pose: UserPose) -> float:
    """Largest cross-term ratio that the far-field reduction neglects.

    Small values mean the mixed y-z term of the closed form is negligible.
    No cutoff is applied; callers judge the value.
    """
    cos_x = pose.cos_x
    if cos_x == 0:
        return math.inf
    ty, tz = pose.cos_y / cos_x, pose.cos_z / cos_x
    uy, uz = geom.l_y / (2 * pose.r * cos_x), geom.l_z / (2 * pose.r * cos_x)
    return max(abs(ty * tz) / math.sqrt(1 + (uy + sy * ty) ** 2 + (uz + sz * tz) ** 2)
               for sy in (-1, 1) for sz in (-1, 1))


def snr_far_field(geom: ArrayGeometry, pose: UserPose, budget: LinkBudget) -> SnrResult:
    """Far-field SNR, linear in the total projected aperture ``M A_e cos_x``."""
    cos_x = pose.cos_x
    gamma = budget.p_bar * geom.m * geom.effective_area * cos_x / (4 * math.pi * pose.r**2)
    valid = pose.r * cos_x >= FAR_FIELD_MARGIN * max(geom.l_y, geom.l_z)
    return SnrResult(gamma, SnrMethod.FAR_FIELD, valid, far_field_cross_metric(geom, pose))


def snr_upw_reference(m: int, r: float, budget: LinkBudget) -> SnrResult:
    """Plane-wave SNR ``p_bar M beta_0 / r^2``; also the uniform spherical-wave SNR."""
    if m < 1 or not r > 0:
        raise ValueError("m must be >= 1 and r positive")
    return SnrResult(budget.p_bar * m * budget.beta_0 / r**2, SnrMethod.UPW_REFERENCE)


def snr_nusw_reference(geom: ArrayGeometry, pose: UserPose, budget: LinkBudget) -> SnrResult:
    """Non-uniform spherical-wave SNR as a sum of ``beta_0 / r_elem^2`` terms."""
    gamma = budget.p_bar * total_gain(ChannelModel.NUSW, geom, pose, budget)
    return SnrResult(gamma, SnrMethod.NUSW_REFERENCE)
