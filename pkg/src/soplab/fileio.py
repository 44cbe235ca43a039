"""File formats for parameters, OCV tables, SOA boxes, current profiles, and
report rendering.

All numeric output is rendered with 12 significant digits; re-parsing a
report and re-rendering it reproduces the same bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

from .ecm import BatteryParams, OcvCurve
from .exceptions import ConfigurationError, InputError
from .soa import Soa

_PARAMS_KEYS = ("r0_ohm", "r1_ohm", "tau_s", "capacity_ah", "coulombic_eff")
_SOA_KEYS = ("vt_min", "vt_max", "i_max_dis", "i_max_chg", "soc_min", "soc_max")
_OCV_HEADER = "soc,ocv_volts"
_PROFILE_HEADER = "t_s,current_a"


def format_float(value: float) -> str:
    """Canonical 12-significant-digit rendering used in every report."""
    return f"{value + 0.0:.12g}"  # +0.0 folds negative zero into plain 0


def parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise InputError(f"{where}: not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise InputError(f"{where}: non-finite value: {text!r}")
    return value


def _read_lines(path: str | Path, what: str) -> list[str]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {what} file {p}: {exc}") from exc
    return text.splitlines()


def _read_keyvalue(path: str | Path, keys: tuple[str, ...], what: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(_read_lines(path, what), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{what} file line {lineno}: expected key=value, got {raw!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in keys:
            raise InputError(f"{what} file line {lineno}: unknown key {key!r}")
        if key in values:
            raise InputError(f"{what} file line {lineno}: duplicate key {key!r}")
        values[key] = parse_float(text.strip(), f"{what} file line {lineno}")
    missing = [k for k in keys if k not in values]
    if missing:
        raise InputError(f"{what} file {path}: missing keys {missing}")
    return values


def read_params(path: str | Path) -> BatteryParams:
    v = _read_keyvalue(path, _PARAMS_KEYS, "params")
    try:
        return BatteryParams(
            r0=v["r0_ohm"],
            r1=v["r1_ohm"],
            tau=v["tau_s"],
            capacity_ah=v["capacity_ah"],
            coulombic_eff=v["coulombic_eff"],
        )
    except ConfigurationError as exc:
        raise InputError(f"params file {path}: {exc}") from exc


def read_soa(path: str | Path) -> Soa:
    v = _read_keyvalue(path, _SOA_KEYS, "soa")
    try:
        return Soa(
            vt_min=v["vt_min"],
            vt_max=v["vt_max"],
            i_max_dis=v["i_max_dis"],
            i_max_chg=v["i_max_chg"],
            soc_min=v["soc_min"],
            soc_max=v["soc_max"],
        )
    except ConfigurationError as exc:
        raise InputError(f"soa file {path}: {exc}") from exc


def _read_csv(
    path: str | Path, header: str, what: str
) -> list[tuple[float, float]]:
    lines = [l for l in _read_lines(path, what) if l.strip()]
    if not lines:
        raise InputError(f"{what} file {path} is empty")
    if [c.strip() for c in lines[0].split(",")] != header.split(","):
        raise InputError(f"{what} file {path}: first line must be the header {header!r}")
    rows: list[tuple[float, float]] = []
    for lineno, raw in enumerate(lines[1:], 2):
        cells = raw.split(",")
        if len(cells) != 2:
            raise InputError(f"{what} file line {lineno}: expected two columns, got {raw!r}")
        rows.append(
            (
                parse_float(cells[0].strip(), f"{what} file line {lineno}"),
                parse_float(cells[1].strip(), f"{what} file line {lineno}"),
            )
        )
    if not rows:
        raise InputError(f"{what} file {path} has a header but no data rows")
    return rows


def read_ocv(path: str | Path) -> OcvCurve:
    rows = _read_csv(path, _OCV_HEADER, "ocv")
    try:
        return OcvCurve(tuple(rows))
    except ConfigurationError as exc:
        raise InputError(f"ocv file {path}: {exc}") from exc


def read_profile(path: str | Path) -> list[tuple[float, float]]:
    rows = _read_csv(path, _PROFILE_HEADER, "profile")
    times = [t for t, _ in rows]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InputError(f"profile file {path}: times must be strictly increasing")
    return rows


def write_text(text: str, out: str | Path | None) -> None:
    """Write a report to ``out``, or to standard output when ``out`` is None."""
    if out is None:
        print(text, end="")
    else:
        Path(out).write_text(text)
