"""Tabulated sweeps behind the standard comparison figures.

Each ``fig*`` function returns ``(header, rows)`` where rows are tuples of
numbers in ascending sweep order.  Points are evaluated in a thread pool of
``XLARRAY_THREADS`` workers; every point is computed independently with
exactly rounded sums, so the output does not depend on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from .channel import ChannelModel, LinkBudget
from .fieldregions import BracketError, classical_rayleigh, dd_rayleigh, upd
from .geometry import ArrayGeometry, UserPose
from .snr import (snr_asymptotic_limit, snr_bruteforce, snr_closed_form, snr_nusw_reference,
                  snr_upw_reference, to_db)
from .ula import (constant_span_pose, ula_angles, ula_critical_point, ula_nusw_snr,
                  ula_rho_factors, ula_snr)

# Element-by-element columns are left as NaN above this many elements.
BRUTE_FORCE_CAP = 400_000

Table = Tuple[List[str], List[tuple]]


@dataclass(frozen=True)
class FigureSetup:
    """Common parameters; defaults are half-wavelength spacing at 2.39 GHz, 90 dB, 25 m."""

    wavelength: float = 0.1256
    d: float | None = None
    a: float | None = None
    p_bar_db: float = 90.0
    beta_0: float | None = None
    r: float = 25.0

    @property
    def spacing(self) -> float:
        return self.wavelength / 2 if self.d is None else self.d

    @property
    def area(self) -> float:
        return self.wavelength**2 / (4 * math.pi) if self.a is None else self.a

    @property
    def budget(self) -> LinkBudget:
        return LinkBudget.from_db(self.p_bar_db, self.wavelength, self.beta_0)

    def geometry(self, m_y: int, m_z: int) -> ArrayGeometry:
        return ArrayGeometry(m_y, m_z, self.spacing, self.area)

    def with_overrides(self, **kwargs) -> "FigureSetup":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def thread_count() -> int:
    raw = os.environ.get("XLARRAY_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"XLARRAY_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"XLARRAY_THREADS must be a positive integer, got {raw!r}")
    return value


def parallel_map(fn: Callable, items: Iterable) -> list:
    """``map`` over a thread pool, results in input order."""
    items = list(items)
    workers = min(thread_count(), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def log_integers(lo: float, hi: float, points: int) -> List[int]:
    """Distinct integers from ``points`` log-spaced samples of ``[lo, hi]``."""
    return sorted({int(round(v)) for v in np.geomspace(lo, hi, points)})


def with_db(name: str, value: float) -> Tuple[Tuple[str, str], Tuple[float, float]]:
    return (name, name + "_db"), (value, to_db(value) if not math.isnan(value) else math.nan)


def model_columns(geom: ArrayGeometry, pose: UserPose, budget: LinkBudget) -> Tuple[list, list]:
    """SNR of every model at one point, linear and dB.

    Brute-force sums are skipped (NaN) above :data:`BRUTE_FORCE_CAP` elements.
    """
    small = geom.m <= BRUTE_FORCE_CAP
    values = [
        ("gamma_proposed", snr_closed_form(geom, pose, budget).gamma),
        ("gamma_proposed_bruteforce",
         snr_bruteforce(ChannelModel.PROPOSED, geom, pose, budget).gamma if small else math.nan),
        ("gamma_upw_usw", snr_upw_reference(geom.m, pose.r, budget).gamma),
        ("gamma_nusw", snr_nusw_reference(geom, pose, budget).gamma if small else math.nan),
        ("gamma_limit", snr_asymptotic_limit(geom, budget).gamma),
    ]
    names, row = [], []
    for name, value in values:
        n, v = with_db(name, value)
        names.extend(n)
        row.extend(v)
    return names, row


def _fig7(theta: float, phi: float, setup: FigureSetup, points: int) -> Table:
    sizes = log_integers(1, 1e6, points)
    budget = setup.budget

    def point(n):
        geom = setup.geometry(n, n)
        names, row = model_columns(geom, UserPose(setup.r, theta, phi), budget)
        return names, [n, geom.m] + row

    results = parallel_map(point, sizes)
    header = ["m_per_axis", "m"] + results[0][0]
    return header, [tuple(r) for _, r in results]


def fig7a(setup: FigureSetup = FigureSetup(), points: int = 61) -> Table:
    """SNR of every model versus square-array size at (pi/6, pi/3)."""
    return _fig7(math.pi / 6, math.pi / 3, setup, points)


def fig7b(setup: FigureSetup = FigureSetup(), points: int = 61) -> Table:
    """SNR of every model versus square-array size at (pi/2, pi/4)."""
    return _fig7(math.pi / 2, math.pi / 4, setup, points)


def fig8(setup: FigureSetup = FigureSetup(), size: int = 400) -> Table:
    """SNR of every model versus zenith angle at phi = 0, 400 x 400 elements."""
    geom = setup.geometry(size, size)
    budget = setup.budget
    thetas = [k * math.pi / 180 for k in range(181)]
    thetas[-1] = math.pi

    def point(theta):
        names, row = model_columns(geom, UserPose(setup.r, theta, 0.0), budget)
        return names, [theta] + row

    results = parallel_map(point, thetas)
    return ["theta_rad"] + results[0][0], [tuple(r) for _, r in results]


def fig9(setup: FigureSetup = FigureSetup(), m: int = 64, gamma_th: float = 0.9) -> Table:
    """Near/far-field boundaries versus zenith angle for a linear array, phi = 0.

    Failed solves are reported as NaN with ``flagged = 1``.
    """
    geom = setup.geometry(1, m)
    rayleigh = classical_rayleigh(geom.l_d, setup.wavelength)
    thetas = [k * math.pi / 180 for k in range(1, 180)]
    thetas[89] = math.pi / 2

    def point(theta):
        flagged = 0
        values = []
        for solve in (lambda: upd(ChannelModel.PROPOSED, geom, theta, 0.0, gamma_th),
                      lambda: upd(ChannelModel.NUSW, geom, theta, 0.0, gamma_th),
                      lambda: dd_rayleigh(geom, theta, 0.0, setup.wavelength)):
            try:
                res = solve()
            except BracketError:
                values.append(math.nan)
                flagged = 1
                continue
            values.append(res.distance)
            flagged |= int(res.flagged)
        return (theta, values[0], values[1], rayleigh, values[2], flagged)

    header = ["theta_rad", "r_upd_proposed_m", "r_upd_nusw_m", "r_rayleigh_m",
              "r_dd_rayleigh_m", "flagged"]
    return header, parallel_map(point, thetas)


def fig10(setup: FigureSetup = FigureSetup(), ratio_th: float = 0.95, points: int = 61) -> Table:
    """Linear-array SNR versus element count, projected-aperture and spherical-wave models."""
    budget = setup.budget
    d, a = setup.spacing, setup.area
    poses = {"pi2": UserPose(setup.r, math.pi / 2, 0.0), "pi6": UserPose(setup.r, math.pi / 6, 0.0)}
    critical = {k: ula_critical_point(d, p, budget, ratio_th, a).m for k, p in poses.items()}
    sizes = log_integers(1, 1e6, points)

    def point(m):
        row = [m]
        for key, pose in poses.items():
            g = ula_snr(m, d, a, pose, budget).gamma
            g_nusw = ula_nusw_snr(m, d, pose, budget).gamma
            row.extend([g, to_db(g), g_nusw, to_db(g_nusw), g / g_nusw, critical[key]])
        return tuple(row)

    header = ["m"]
    for key in poses:
        header.extend([f"gamma_proposed_{key}", f"gamma_proposed_{key}_db", f"gamma_nusw_{key}",
                       f"gamma_nusw_{key}_db", f"ratio_{key}", f"critical_m_{key}"])
    return header, parallel_map(point, sizes)


def fig5(setup: FigureSetup = FigureSetup(), m: int = 64, span: float = math.pi / 3) -> Table:
    """Angular-difference factor along a constant-span arc (phi = 0)."""
    rows = []
    for k in range(1, 180):
        theta = math.pi / 2 if k == 90 else k * math.pi / 180
        pose = constant_span_pose(m, setup.spacing, 0.0, span, theta)
        ang = ula_angles(m, setup.spacing, pose)
        rows.append((theta, pose.r, ang.delta_span, ang.delta_diff, math.cos(ang.delta_diff / 2)))
    return ["theta_rad", "r_m", "delta_span_rad", "delta_diff_rad", "cos_half_diff"], rows


def fig6(setup: FigureSetup = FigureSetup(), points: int = 80) -> Table:
    """End-to-centre gain factors versus half angular span at (pi/2, 0)."""
    pose = UserPose(setup.r, math.pi / 2, 0.0)
    d = setup.spacing
    top = 2 * setup.r * math.tan(1.5) / d
    sizes = sorted({m if m % 2 else m + 1 for m in log_integers(3, top, points)})
    rows = []
    for m in sizes:
        rho = ula_rho_factors(m, d, pose)
        rows.append((m, math.atan(m * d / (2 * setup.r)), rho.rho_pl, rho.rho_aper, rho.rho))
    return ["m", "alpha_rad", "rho_pl", "rho_aper", "rho"], rows


FIGURES = {
    "fig5": fig5,
    "fig6": fig6,
    "fig7a": fig7a,
    "fig7b": fig7b,
    "fig8": fig8,
    "fig9": fig9,
    "fig10": fig10,
}


def figure(name: str, setup: FigureSetup = FigureSetup()) -> Table:
    try:
        fn = FIGURES[name]
    except KeyError:
        raise ValueError(f"unknown figure {name!r} (expected one of {', '.join(FIGURES)})") from None
    return fn(setup)
