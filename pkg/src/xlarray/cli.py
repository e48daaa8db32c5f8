"""``xlarray`` command line: single-point SNR, sweeps, field boundaries, figure tables.

All subcommands write CSV (UTF-8, comma separated, one header row) to
standard output or ``--out``.  Linear SNR columns are paired with ``*_db``
columns; a zero SNR is written as ``-inf`` in dB, and quantities that were
not computed are written as ``nan``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import figures
from .channel import ChannelModel, LinkBudget
from .fieldregions import BracketError, classical_rayleigh, dd_rayleigh, upd
from .figures import FigureSetup, model_columns, parallel_map
from .geometry import ArrayGeometry, UserPose
from .snr import snr_far_field, to_db
from .ula import ula_angles, ula_critical_point, ula_nusw_snr, ula_snr, ula_snr_limit

DEFAULTS = {
    "my": 1,
    "mz": 1,
    "lambda": 0.1256,
    "theta": math.pi / 2,
    "phi": 0.0,
    "pbar_db": 90.0,
    "gamma_th": 0.9,
    "ratio_th": 0.95,
    "points": 50,
    "log": False,
}
# Keys accepted in a scenario file, mapped to their flag spelling.
FIELDS = {
    "my": "--my", "mz": "--mz", "d": "--d", "a": "--a", "lambda": "--lambda", "r": "--r",
    "theta": "--theta", "phi": "--phi", "pbar_db": "--pbar-db", "beta0": "--beta0",
    "model": "--model", "gamma_th": "--gamma-th", "ratio_th": "--ratio-th", "var": "--var",
    "from": "--from", "to": "--to", "points": "--points", "log": "--log",
}
SWEEP_VARS = ("m", "my", "mz", "r", "theta", "phi")
INTEGER_VARS = ("m", "my", "mz")


class UsageError(Exception):
    """Invalid configuration; the message names the offending field."""


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(header: Sequence[str], rows: Sequence[Sequence], out: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(v) for v in row])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--scenario", metavar="PATH", help="JSON object with default values; flags override it")
    g.add_argument("--my", type=int, help="elements along y")
    g.add_argument("--mz", type=int, help="elements along z")
    g.add_argument("--d", type=float, help="element spacing [m] (default lambda/2)")
    g.add_argument("--a", type=float, help="element area [m^2] (default lambda^2/4pi)")
    g.add_argument("--lambda", dest="lambda_", type=float, help="wavelength [m] (default 0.1256)")
    g.add_argument("--r", type=float, help="link distance [m]")
    g.add_argument("--theta", type=float, help="zenith angle [rad] (default pi/2)")
    g.add_argument("--phi", type=float, help="azimuth angle [rad] (default 0)")
    g.add_argument("--pbar-db", dest="pbar_db", type=float, help="transmit SNR [dB] (default 90)")
    g.add_argument("--beta0", type=float, help="reference channel gain at 1 m (default (lambda/4pi)^2)")
    g.add_argument("--model", help="channel model: proposed, upw, usw or nusw")
    g.add_argument("--gamma-th", dest="gamma_th", type=float, help="power-ratio threshold (default 0.9)")
    g.add_argument("--out", metavar="PATH", help="write CSV here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xlarray", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snr", help="SNR of every channel model at one user position")
    _add_common(p)

    p = sub.add_parser("sweep", help="SNR of every channel model along one swept variable")
    _add_common(p)
    p.add_argument("--var", help=f"swept variable: {', '.join(SWEEP_VARS)} (m = square array)")
    p.add_argument("--from", dest="from_", type=float, help="first value")
    p.add_argument("--to", type=float, help="last value")
    p.add_argument("--points", type=int, help="number of points (default 50)")
    p.add_argument("--log", action="store_true", default=None, help="log spacing")

    p = sub.add_parser("field-distances", help="uniform-power and Rayleigh distances for one direction")
    _add_common(p)

    p = sub.add_parser("ula", help="linear-array SNR, angles and critical size (uses --mz)")
    _add_common(p)
    p.add_argument("--ratio-th", dest="ratio_th", type=float, help="critical-point SNR ratio (default 0.95)")

    p = sub.add_parser("figure", help="table behind one of the comparison figures")
    p.add_argument("name", help=f"one of {', '.join(figures.FIGURES)}")
    _add_common(p)
    return parser


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    """Merge defaults, scenario file and flags (in increasing priority)."""
    values: Dict[str, object] = dict(DEFAULTS)
    if args.scenario:
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"scenario: cannot read {args.scenario!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("scenario: expected a JSON object")
        unknown = sorted(set(loaded) - set(FIELDS))
        if unknown:
            raise UsageError(f"{unknown[0]}: unknown scenario field")
        values.update(loaded)
    for key in FIELDS:
        attr = {"lambda": "lambda_", "from": "from_"}.get(key, key)
        flag = getattr(args, attr, None)
        if flag is not None:
            values[key] = flag
    return values


def _number(values, key, kind=float, required=True):
    value = values.get(key)
    if value is None:
        if required:
            raise UsageError(f"{key}: missing required value ({FIELDS[key]})")
        return None
    try:
        number = kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: expected a number, got {value!r}") from None
    if kind is int and number != float(value):
        raise UsageError(f"{key}: expected an integer, got {value!r}")
    return number


def _setup(values) -> FigureSetup:
    wavelength = _number(values, "lambda")
    if not wavelength > 0:
        raise UsageError(f"lambda: must be positive, got {wavelength!r}")
    return FigureSetup(wavelength=wavelength,
                       d=_number(values, "d", required=False),
                       a=_number(values, "a", required=False),
                       p_bar_db=_number(values, "pbar_db"),
                       beta_0=_number(values, "beta0", required=False))


def _checked(field: str, build):
    try:
        return build()
    except ValueError as exc:
        raise UsageError(f"{field}: {exc}") from None


def _geometry(setup: FigureSetup, m_y, m_z) -> ArrayGeometry:
    return _checked("geometry", lambda: setup.geometry(m_y, m_z))


def _pose(r, theta, phi) -> UserPose:
    return _checked("pose", lambda: UserPose(r, theta, phi))


def _budget(setup: FigureSetup) -> LinkBudget:
    return _checked("budget", lambda: setup.budget)


def _models(values) -> List[ChannelModel]:
    if values.get("model") is None:
        return list(ChannelModel)
    return [_checked("model", lambda: ChannelModel.parse(values["model"]))]


def _filter(names, row, models):
    """Keep the columns of the requested models (limit columns always stay)."""
    keep_tags = {"gamma_limit", "gamma_far_field", "far_field_valid"}
    for model in models:
        keep_tags.update({ChannelModel.PROPOSED: {"gamma_proposed", "gamma_proposed_bruteforce"},
                          ChannelModel.UPW: {"gamma_upw_usw"},
                          ChannelModel.USW: {"gamma_upw_usw"},
                          ChannelModel.NUSW: {"gamma_nusw"}}[model])
    pairs = [(n, v) for n, v in zip(names, row) if n.removesuffix("_db") in keep_tags]
    return [n for n, _ in pairs], [v for _, v in pairs]


def cmd_snr(values, out):
    setup = _setup(values)
    geom = _geometry(setup, _number(values, "my", int), _number(values, "mz", int))
    pose = _pose(_number(values, "r"), _number(values, "theta"), _number(values, "phi"))
    budget = _budget(setup)
    names, row = model_columns(geom, pose, budget)
    ff = snr_far_field(geom, pose, budget)
    names += ["gamma_far_field", "gamma_far_field_db", "far_field_valid"]
    row += [ff.gamma, to_db(ff.gamma), ff.valid]
    names, row = _filter(names, row, _models(values))
    header = ["m_y", "m_z", "r_m", "theta_rad", "phi_rad"] + names
    write_csv(header, [[geom.m_y, geom.m_z, pose.r, pose.theta, pose.phi] + row], out)


def cmd_sweep(values, out):
    var = values.get("var")
    if var is None:
        raise UsageError("var: missing required value (--var)")
    if var not in SWEEP_VARS:
        raise UsageError(f"var: unknown sweep variable {var!r} (expected one of {', '.join(SWEEP_VARS)})")
    start, stop = _number(values, "from"), _number(values, "to")
    points = _number(values, "points", int)
    if points < 2:
        raise UsageError(f"points: need at least 2, got {points}")
    log = bool(values.get("log"))
    if log and not (start > 0 and stop > 0):
        raise UsageError("from: log spacing needs positive bounds")
    grid = np.geomspace(start, stop, points) if log else np.linspace(start, stop, points)
    grid = np.sort(grid)
    if var in INTEGER_VARS:
        grid = np.rint(grid)

    setup = _setup(values)
    budget = _budget(setup)
    base = {k: values.get(k) for k in ("my", "mz", "r", "theta", "phi")}
    for key in ("my", "mz", "r", "theta", "phi"):
        if key != var and not (var == "m" and key in ("my", "mz")):
            _number(values, key, int if key in INTEGER_VARS else float)
    models = _models(values)

    def configure(value):
        cfg = dict(base)
        if var == "m":
            side = max(1, int(round(math.sqrt(value))))
            cfg["my"] = cfg["mz"] = side
        else:
            cfg[var] = value
        geom = _geometry(setup, int(cfg["my"]), int(cfg["mz"]))
        pose = _pose(float(cfg["r"]), float(cfg["theta"]), float(cfg["phi"]))
        return geom, pose

    configs = [configure(v) for v in grid]  # validate everything before computing

    def point(item):
        value, (geom, pose) = item
        names, row = _filter(*model_columns(geom, pose, budget), models)
        swept = int(value) if var in INTEGER_VARS else float(value)
        return names, [swept, geom.m_y, geom.m_z, pose.r, pose.theta, pose.phi] + row

    results = parallel_map(point, list(zip(grid, configs)))
    header = [var, "m_y", "m_z", "r_m", "theta_rad", "phi_rad"] + results[0][0]
    write_csv(header, [r for _, r in results], out)


def cmd_field_distances(values, out):
    setup = _setup(values)
    geom = _geometry(setup, _number(values, "my", int), _number(values, "mz", int))
    theta, phi = _number(values, "theta"), _number(values, "phi")
    _pose(1.0, theta, phi)
    gamma_th = _number(values, "gamma_th")
    if not 0 < gamma_th < 1:
        raise UsageError(f"gamma_th: must lie in (0, 1), got {gamma_th!r}")
    flagged = 0
    results = []
    for solve in (lambda: upd(ChannelModel.PROPOSED, geom, theta, phi, gamma_th),
                  lambda: upd(ChannelModel.NUSW, geom, theta, phi, gamma_th),
                  lambda: dd_rayleigh(geom, theta, phi, setup.wavelength)):
        try:
            res = solve()
        except (BracketError, ValueError):
            results.append(math.nan)
            flagged = 1
            continue
        results.append(res.distance)
        flagged |= int(res.flagged)
    header = ["m_y", "m_z", "theta_rad", "phi_rad", "gamma_th", "r_upd_proposed_m",
              "r_upd_nusw_m", "r_rayleigh_m", "r_dd_rayleigh_m", "flagged"]
    row = [geom.m_y, geom.m_z, theta, phi, gamma_th, results[0], results[1],
           classical_rayleigh(geom.l_d, setup.wavelength), results[2], flagged]
    write_csv(header, [row], out)


def cmd_ula(values, out):
    setup = _setup(values)
    if values.get("my") not in (None, 1):
        raise UsageError(f"my: a linear array has m_y = 1, got {values['my']!r}")
    m = _number(values, "mz", int)
    if m < 1:
        raise UsageError(f"mz: must be >= 1, got {m}")
    pose = _pose(_number(values, "r"), _number(values, "theta"), _number(values, "phi"))
    if pose.theta in (0.0, math.pi):
        raise UsageError("theta: user on the array axis")
    budget = _budget(setup)
    ratio_th = _number(values, "ratio_th")
    if not 0 < ratio_th < 1:
        raise UsageError(f"ratio_th: must lie in (0, 1), got {ratio_th!r}")
    d, a = setup.spacing, setup.area
    ang = ula_angles(m, d, pose)
    g = ula_snr(m, d, a, pose, budget).gamma
    g_nusw = ula_nusw_snr(m, d, pose, budget).gamma
    g_lim = ula_snr_limit(d, a, pose, budget).gamma
    crit = ula_critical_point(d, pose, budget, ratio_th, a)
    header = ["m", "r_m", "theta_rad", "phi_rad", "alpha_1_rad", "alpha_2_rad", "delta_span_rad",
              "delta_diff_rad", "gamma_proposed", "gamma_proposed_db", "gamma_nusw",
              "gamma_nusw_db", "gamma_limit", "gamma_limit_db", "critical_m", "critical_capped",
              "critical_below_threshold"]
    row = [m, pose.r, pose.theta, pose.phi, ang.alpha_1, ang.alpha_2, ang.delta_span,
           ang.delta_diff, g, to_db(g), g_nusw, to_db(g_nusw), g_lim, to_db(g_lim), crit.m,
           crit.capped, crit.below_threshold]
    write_csv(header, [row], out)


def cmd_figure(name, values, out):
    if name not in figures.FIGURES:
        raise UsageError(f"name: unknown figure {name!r} (expected one of {', '.join(figures.FIGURES)})")
    setup = _setup(values)
    if values.get("r") is not None:
        r = _number(values, "r")
        if not r > 0:
            raise UsageError(f"r: must be positive, got {r!r}")
        setup = setup.with_overrides(r=r)
    _geometry(setup, 1, 1)
    _budget(setup)
    header, rows = figures.figure(name, setup)
    write_csv(header, rows, out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        values = resolve(args)
        if args.command == "snr":
            cmd_snr(values, args.out)
        elif args.command == "sweep":
            cmd_sweep(values, args.out)
        elif args.command == "field-distances":
            cmd_field_distances(values, args.out)
        elif args.command == "ula":
            cmd_ula(values, args.out)
        else:
            cmd_figure(args.name, values, args.out)
    except UsageError as exc:
        print(f"xlarray: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"xlarray: error: out: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
