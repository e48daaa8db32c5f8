"""Per-element channel power gains and array response vectors.

Four array models are supported:

* ``PROPOSED`` - exact distance per element plus the element's projected
  aperture towards the user.
* ``UPW`` - uniform plane wave: common amplitude, linear phase.
* ``USW`` - uniform spherical wave: common amplitude, exact phase.
* ``NUSW`` - non-uniform spherical wave: amplitude and phase from the
  exact distance, isotropic elements.

Phases follow ``exp(-j 2 pi r / lambda)``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import (ArrayGeometry, ElementIndex, UserPose, distance_factor,
                       element_distance, element_distances, grid_blocks)


class ConvergenceWarning(UserWarning):
    """Issued when doubling the quadrature order still moves the result."""


class ChannelModel(enum.Enum):
    PROPOSED = "proposed"
    UPW = "upw"
    USW = "usw"
    NUSW = "nusw"

    @classmethod
    def parse(cls, value: "str | ChannelModel") -> "ChannelModel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown channel model {value!r} (expected one of {names})") from None


@dataclass(frozen=True)
class LinkBudget:
    """Transmit SNR ``p_bar`` (linear), ``wavelength`` in metres, reference gain ``beta_0``.

    ``beta_0`` is the channel power at 1 m and defaults to
    ``(wavelength / 4 pi)**2``, the value for isotropic elements.
    """

    p_bar: float
    wavelength: float
    beta_0: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.p_bar > 0:
            raise ValueError(f"p_bar must be positive, got {self.p_bar!r}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        if self.beta_0 is None:
            object.__setattr__(self, "beta_0", (self.wavelength / (4 * math.pi)) ** 2)
        elif not self.beta_0 > 0:
            raise ValueError(f"beta_0 must be positive, got {self.beta_0!r}")

    @classmethod
    def from_db(cls, p_bar_db: float, wavelength: float, beta_0: float | None = None):
        return cls(10 ** (p_bar_db / 10), wavelength, beta_0)


@dataclass(frozen=True)
class ArrayResponse:
    """Complex response of every element, shaped ``(m_z, m_y)``."""

    entries: np.ndarray
    model: ChannelModel

    def norm_squared(self) -> float:
        return math.fsum((np.abs(self.entries) ** 2).ravel().tolist())


def element_gain(geom: ArrayGeometry, pose: UserPose, idx: ElementIndex) -> float:
    """Power gain of one element under the projected-aperture model.

    Uses the element-centre distance and the projection of the array normal
    on the direction towards the user.  Zero when the user lies in the array
    plane.
    """
    cos_x = pose.cos_x
    if cos_x == 0:
        return 0.0
    dist = element_distance(geom, pose, idx)
    return geom.effective_area * pose.r * cos_x / (4 * math.pi * dist**3)


def proposed_gains(geom: ArrayGeometry, pose: UserPose, i_y, i_z) -> np.ndarray:
    """Vectorised projected-aperture gains at grid offsets ``(i_y, i_z)``."""
    i_y, i_z = np.broadcast_arrays(np.asarray(i_y, dtype=float), np.asarray(i_z, dtype=float))
    cos_x = pose.cos_x
    if cos_x == 0:
        return np.zeros(i_y.shape)
    eps = pose.epsilon(geom)
    scale = geom.effective_area / (geom.d * geom.d) * eps * eps * cos_x / (4 * math.pi)
    return scale / distance_factor(eps, pose.cos_y, pose.cos_z, i_y, i_z) ** 1.5


def model_gains(model: ChannelModel, geom: ArrayGeometry, pose: UserPose,
                budget: LinkBudget, i_y, i_z) -> np.ndarray:
    """Per-element power gain of ``model`` at offsets ``(i_y, i_z)``.

    Evaluates the scalar gain formulas in terms of ``d/r``; the response
    vectors below are built from coordinate-space distances instead.
    """
    model = ChannelModel.parse(model)
    if model is ChannelModel.PROPOSED:
        return proposed_gains(geom, pose, i_y, i_z)
    i_y, i_z = np.broadcast_arrays(np.asarray(i_y, dtype=float), np.asarray(i_z, dtype=float))
    if model is ChannelModel.NUSW:
        eps = pose.epsilon(geom)
        return budget.beta_0 / pose.r**2 / distance_factor(eps, pose.cos_y, pose.cos_z, i_y, i_z)
    return np.full(i_y.shape, budget.beta_0 / pose.r**2)


def total_gain(model: ChannelModel, geom: ArrayGeometry, pose: UserPose,
               budget: LinkBudget) -> float:
    """Exactly rounded sum of :func:`model_gains` over the whole grid.

    ``math.fsum`` makes the result independent of block size and order.
    """
    def terms():
        for i_y, i_z in grid_blocks(geom):
            yield from model_gains(model, geom, pose, budget, i_y, i_z).ravel().tolist()
    return math.fsum(terms())


def response_block(model: ChannelModel, geom: ArrayGeometry, pose: UserPose,
                   budget: LinkBudget, i_y, i_z) -> np.ndarray:
    """Complex response entries at offsets ``(i_y, i_z)``."""
    model = ChannelModel.parse(model)
    i_y, i_z = np.broadcast_arrays(np.asarray(i_y, dtype=float), np.asarray(i_z, dtype=float))
    k = 2 * math.pi / budget.wavelength
    if model is ChannelModel.UPW:
        amp = math.sqrt(budget.beta_0) / pose.r
        linear = k * geom.d * (i_y * pose.cos_y + i_z * pose.cos_z)
        return amp * np.exp(-1j * k * pose.r) * np.exp(1j * linear)
    dist = element_distances(geom, pose, i_y, i_z)
    if model is ChannelModel.PROPOSED:
        amp = np.sqrt(geom.effective_area * pose.r * pose.cos_x / (4 * math.pi * dist**3))
    elif model is ChannelModel.USW:
        amp = np.full(dist.shape, math.sqrt(budget.beta_0) / pose.r)
    else:
        amp = math.sqrt(budget.beta_0) / dist
    return amp * np.exp(-1j * k * dist)


def array_response(model: ChannelModel, geom: ArrayGeometry, pose: UserPose,
                   budget: LinkBudget) -> ArrayResponse:
    """Array response vector of ``model``, shaped ``(m_z, m_y)``."""
    model = ChannelModel.parse(model)
    entries = response_block(model, geom, pose, budget,
                             geom.offsets_y()[None, :], geom.offsets_z()[:, None])
    return ArrayResponse(np.ascontiguousarray(entries, dtype=complex), model)


def response_power(model: ChannelModel, geom: ArrayGeometry, pose: UserPose,
                   budget: LinkBudget) -> float:
    """``||a||^2`` accumulated block by block, exactly rounded."""
    def terms():
        for i_y, i_z in grid_blocks(geom):
            block = response_block(model, geom, pose, budget, i_y, i_z)
            yield from (block.real**2 + block.imag**2).ravel().tolist()
    return math.fsum(terms())


def element_gain_exact(geom: ArrayGeometry, pose: UserPose, idx: ElementIndex,
                       quad_order: int = 16) -> float:
    """Integrate the free-space and projection factors over the element square.

    Tensor-product Gauss-Legendre quadrature of ``quad_order`` points per
    axis.  The result is checked against twice the order; a
    :class:`ConvergenceWarning` is issued if they differ by more than 1e-6
    relative.
    """
    if quad_order < 2:
        raise ValueError("quad_order must be at least 2")
    idx.check(geom)
    cos_x = pose.cos_x
    if cos_x == 0:
        return 0.0
    value = _square_integral(geom, pose, idx, quad_order)
    check = _square_integral(geom, pose, idx, 2 * quad_order)
    if abs(check - value) > 1e-6 * abs(check):
        warnings.warn(
            f"element gain quadrature not converged at order {quad_order} "
            f"(relative change {abs(check - value) / abs(check):.2e} on doubling)",
            ConvergenceWarning, stacklevel=2)
    return geom.e_a * value


def _square_integral(geom, pose, idx, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = math.sqrt(geom.a) / 2
    q = pose.position
    ys = idx.i_y * geom.d + half * nodes
    zs = idx.i_z * geom.d + half * nodes
    dy = q[1] - ys[None, :]
    dz = q[2] - zs[:, None]
    dist_sq = q[0] ** 2 + dy * dy + dz * dz
    # (1 / 4 pi |q-s|^2) * ((q-s).x / |q-s|); the square sits in the x = 0 plane.
    integrand = q[0] / (4 * math.pi * dist_sq**1.5)
    return half * half * float(weights @ integrand @ weights)
