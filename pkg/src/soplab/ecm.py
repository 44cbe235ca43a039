"""Discrete-time Thevenin equivalent-circuit model.

Single-step dynamics, a closed-form constant-current window prediction with a
linearized OCV slope, and piecewise-linear OCV table services. Everything here
is a pure function of its inputs; all value types are frozen.

Sign convention: current is positive for discharge, negative for charge.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .exceptions import ConfigurationError, InputError

# Secant pairs closer than this fall back to the local segment slope.
SLOPE_SECANT_EPS = 1e-6

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class BatteryParams:
    """Thevenin cell parameters: series resistance, one RC branch, capacity."""

    r0: float
    r1: float
    tau: float
    capacity_ah: float
    coulombic_eff: float = 1.0

    def __post_init__(self) -> None:
        if not (self.r0 > 0.0):
            raise ConfigurationError(f"r0 must be > 0, got {self.r0}")
        if not (self.r1 >= 0.0):
            raise ConfigurationError(f"r1 must be >= 0, got {self.r1}")
        if not (self.tau > 0.0):
            raise ConfigurationError(f"tau must be > 0, got {self.tau}")
        if not (self.capacity_ah > 0.0):
            raise ConfigurationError(f"capacity_ah must be > 0, got {self.capacity_ah}")
        if not (0.0 < self.coulombic_eff <= 1.0):
            raise ConfigurationError(
                f"coulombic_eff must be in (0, 1], got {self.coulombic_eff}"
            )

    @property
    def soc_per_amp_second(self) -> float:
        """SOC drop per ampere-second of discharge (eta / 3600 C_a)."""
        return self.coulombic_eff / (SECONDS_PER_HOUR * self.capacity_ah)


@dataclass(frozen=True)
class OcvCurve:
    """Monotone SOC -> OCV table, interpolated piecewise-linearly."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(s), float(v)) for s, v in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ConfigurationError("OCV curve needs at least two points")
        socs = [s for s, _ in pts]
        vs = [v for _, v in pts]
        if any(b <= a for a, b in zip(socs, socs[1:])):
            raise ConfigurationError("OCV curve SOC values must be strictly increasing")
        if any(b < a for a, b in zip(vs, vs[1:])):
            raise ConfigurationError("OCV curve must be non-decreasing in voltage")
        if not (0.0 <= socs[0] and socs[-1] <= 1.0):
            raise ConfigurationError("OCV curve SOC values must lie in [0, 1]")


@dataclass(frozen=True)
class BatteryState:
    """Electrical state: SOC fraction and polarization voltage."""

    soc: float
    vp: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.soc <= 1.0):
            raise ConfigurationError(f"soc must be in [0, 1], got {self.soc}")
        if not math.isfinite(self.vp):
            raise ConfigurationError(f"vp must be finite, got {self.vp}")


@dataclass(frozen=True)
class Window:
    """Prediction window: number of steps and sampling interval in seconds."""

    steps: int
    dt: float

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ConfigurationError(f"window steps must be >= 1, got {self.steps}")
        if not (self.dt > 0.0):
            raise ConfigurationError(f"window dt must be > 0, got {self.dt}")

    @property
    def duration(self) -> float:
        return self.steps * self.dt


@dataclass(frozen=True)
class CcPrediction:
    """End-of-window quantities under a constant current.

    ocv_end          open-circuit voltage after the window's charge throughput
    vp_relax_end     decayed share of the initial polarization voltage
    eff_r1           polarization resistance built up by the window, R1*(1-exp(-K*dt/tau))
    vt_end           terminal voltage at the last step
    soc_end          SOC at the last step, clamped to [0, 1]
    """

    ocv_end: float
    vp_relax_end: float
    eff_r1: float
    vt_end: float
    soc_end: float


class StepResult(NamedTuple):
    state: BatteryState
    vt: float
    soc_clamped: bool


class ProfileSample(NamedTuple):
    t: float
    current: float
    soc: float
    vp: float
    vt: float


def ocv(curve: OcvCurve, soc: float) -> float:
    """Interpolate the OCV table at ``soc``; clamps to the knot range."""
    pts = curve.points
    if soc <= pts[0][0]:
        return pts[0][1]
    if soc >= pts[-1][0]:
        return pts[-1][1]
    socs = [s for s, _ in pts]
    i = bisect_right(socs, soc)
    x0, y0 = pts[i - 1]
    x1, y1 = pts[i]
    if soc == x0:  # exact knot hit
        return y0
    return y0 + (soc - x0) * (y1 - y0) / (x1 - x0)


def _segment_slope(curve: OcvCurve, soc: float) -> float:
    """Slope of the table segment containing ``soc`` (right segment at knots)."""
    pts = curve.points
    socs = [s for s, _ in pts]
    i = bisect_right(socs, soc)
    i = min(max(i, 1), len(pts) - 1)
    x0, y0 = pts[i - 1]
    x1, y1 = pts[i]
    return (y1 - y0) / (x1 - x0)


def ocv_slope(curve: OcvCurve, soc_a: float, soc_b: float) -> float:
    """Window slope of the OCV curve between two SOC points.

    Returns the secant slope when the points are distinguishable, otherwise
    the local segment slope at ``soc_a``.
    """
    if abs(soc_a - soc_b) > SLOPE_SECANT_EPS:
        return (ocv(curve, soc_b) - ocv(curve, soc_a)) / (soc_b - soc_a)
    return _segment_slope(curve, soc_a)


def step(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    current: float,
    dt: float,
) -> StepResult:
    """Advance the model by one interval under ``current``.

    The polarization branch relaxes and accumulates the step's load, SOC moves
    by the step's charge throughput (clamped to [0, 1] and flagged), and the
    returned terminal voltage carries the same current's ohmic drop.
    """
    if not (dt > 0.0):
        raise InputError(f"dt must be > 0, got {dt}")
    alpha = math.exp(-dt / params.tau)
    vp_next = state.vp * alpha + current * params.r1 * (1.0 - alpha)
    soc_raw = state.soc - current * dt * params.soc_per_amp_second
    soc_next = min(max(soc_raw, 0.0), 1.0)
    clamped = soc_next != soc_raw
    vt = ocv(curve, soc_next) - vp_next - current * params.r0
    return StepResult(BatteryState(soc_next, vp_next), vt, clamped)


def predict_cc(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    kappa: float,
    current: float,
    window: Window,
) -> CcPrediction:
    """End-of-window prediction for a constant current, OCV linearized at ``kappa``.

    The voltage path is closed-form. The SOC path subtracts the per-step
    throughput ``window.steps`` times with the same rounding as ``step`` so the
    two routes agree bit-for-bit.
    """
    k_dt = window.duration
    alpha_k = math.exp(-k_dt / params.tau)
    vp_relax_end = state.vp * alpha_k
    eff_r1 = params.r1 * (1.0 - alpha_k)
    ocv_end = ocv(curve, state.soc) - kappa * k_dt * current * params.soc_per_amp_second
    vt_end = ocv_end - vp_relax_end - current * eff_r1 - current * params.r0

    d_soc = current * window.dt * params.soc_per_amp_second
    soc_end = state.soc
    for _ in range(window.steps):
        soc_end = min(max(soc_end - d_soc, 0.0), 1.0)

    return CcPrediction(
        ocv_end=ocv_end,
        vp_relax_end=vp_relax_end,
        eff_r1=eff_r1,
        vt_end=vt_end,
        soc_end=soc_end,
    )


def simulate_profile(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    profile: Sequence[tuple[float, float]] | Iterable[tuple[float, float]],
) -> list[ProfileSample]:
    """Replay a (time, current) series through repeated ``step`` calls.

    Each profile current flows from its own timestamp to the next one. Every
    sample reports the state at its timestamp with the just-started current's
    ohmic drop, so the trace has exactly one row per profile row.
    """
    rows = list(profile)
    if not rows:
        raise InputError("profile must contain at least one (t, current) row")
    times = []
    currents = []
    for row in rows:
        try:
            t, i = row
            t = float(t)
            i = float(i)
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed profile row: {row!r}") from exc
        if not (math.isfinite(t) and math.isfinite(i)):
            raise InputError(f"non-finite profile row: {row!r}")
        times.append(t)
        currents.append(i)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InputError("profile times must be strictly increasing")

    trace = [
        ProfileSample(
            times[0],
            currents[0],
            state.soc,
            state.vp,
            ocv(curve, state.soc) - state.vp - currents[0] * params.r0,
        )
    ]
    for j in range(1, len(rows)):
        dt = times[j] - times[j - 1]
        state, _, _ = step(state, params, curve, currents[j - 1], dt)
        vt = ocv(curve, state.soc) - state.vp - currents[j] * params.r0
        trace.append(ProfileSample(times[j], currents[j], state.soc, state.vp, vt))
    return trace
