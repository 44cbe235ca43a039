"""Stepwise peak-operation-mode engines: CV, CC-CV, and CP windows.

Each engine returns the full per-step trace plus a SopResult whose ``sop`` is
the minimum per-step power magnitude across the window.

Stepwise traces use a hold-style step: entering step j the polarization
voltage relaxes by one interval, the step current is chosen against that
relaxed state, and the recorded terminal voltage carries that current's ohmic
drop. A voltage hold therefore pins the recorded voltage exactly, and a
current cap leaves it strictly inside the cut-off.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from . import ecm
from .ecm import BatteryParams, BatteryState, OcvCurve, Window
from .exceptions import AnalyticDomainError, PowerInfeasibleError
from .peak_cc import Direction, SopResult
from .soa import Soa, check_point


class PomStep(NamedTuple):
    index: int  # 1-based window step
    current: float
    vt: float
    soc: float
    vp: float
    power: float


@dataclass(frozen=True)
class PomTrace:
    steps: tuple[PomStep, ...]
    mode_shift_index: int | None = None


class CcCvCase(enum.Enum):
    CC_ONLY = "cc_only"  # shift falls beyond the window
    TRANSITIONAL = "transitional"  # shift inside the window
    CV_ONLY = "cv_only"  # shift completed before the window


class ModeShift(NamedTuple):
    case: CcCvCase
    k_c: int | None  # populated only for TRANSITIONAL


def _clip_current(raw: float, direction: Direction, i_lim: float, headroom: float) -> float:
    """Clip a step current to the direction's sign, the manufacturer limit,
    and the remaining SOC headroom of this step."""
    if direction is Direction.DISCHARGE:
        return max(0.0, min(raw, i_lim, headroom))
    return min(0.0, max(raw, i_lim, headroom))


def _soc_headroom_current(
    soc: float, params: BatteryParams, direction: Direction, soa: Soa, dt: float
) -> float:
    """Current that lands this step's SOC exactly on its bound."""
    bound = direction.soc_bound(soa)
    return (soc - bound) / (dt * params.soc_per_amp_second)


def constant_current_trace(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    current: float,
    window: Window,
) -> PomTrace:
    """Hold-style trace of a constant current, used by the CC leg of CC-CV
    and for cross-mode comparisons."""
    alpha = math.exp(-window.dt / params.tau)
    soc, vp = state.soc, state.vp
    steps: list[PomStep] = []
    for j in range(1, window.steps + 1):
        vp_rel = vp * alpha
        vt = ecm.ocv(curve, soc) - vp_rel - current * params.r0
        vp = vp_rel + current * params.r1 * (1.0 - alpha)
        soc = min(max(soc - current * window.dt * params.soc_per_amp_second, 0.0), 1.0)
        steps.append(PomStep(j, current, vt, soc, vp, current * vt))
    return PomTrace(tuple(steps))


def _min_power_step(steps: tuple[PomStep, ...]) -> PomStep:
    return min(steps, key=lambda s: abs(s.power))


def sop_cv(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
) -> tuple[SopResult, PomTrace]:
    """Constant-terminal-voltage window.

    Level selection is two-phase: if holding the cut-off at step one would
    demand more than the current limit, the region is current-governed -- the
    first step runs at the limit and its resulting voltage becomes the hold
    level for the rest of the window. Otherwise the cut-off itself is held
    throughout.
    """
    if not (params.r0 > 0.0):
        raise AnalyticDomainError("CV hold current is undefined for r0 = 0")
    alpha = math.exp(-window.dt / params.tau)
    i_lim = direction.current_limit(soa)
    cutoff = direction.vt_cutoff(soa)

    vp_rel_1 = state.vp * alpha
    need = (ecm.ocv(curve, state.soc) - vp_rel_1 - cutoff) / params.r0
    if abs(need) > abs(i_lim):
        v_star = ecm.ocv(curve, state.soc) - vp_rel_1 - i_lim * params.r0
        governed = "current"
    else:
        v_star = cutoff
        governed = "voltage"

    soc, vp = state.soc, state.vp
    steps: list[PomStep] = []
    for j in range(1, window.steps + 1):
        vp_rel = vp * alpha
        headroom = _soc_headroom_current(soc, params, direction, soa, window.dt)
        if j == 1 and governed == "current":
            # The first step runs the limit itself; v_star was defined as the
            # voltage that results, so pin both rather than re-deriving them.
            current = _clip_current(i_lim, direction, i_lim, headroom)
            held = current == i_lim
        else:
            hold = (ecm.ocv(curve, soc) - vp_rel - v_star) / params.r0
            current = _clip_current(hold, direction, i_lim, headroom)
            held = current == hold
        # An uncapped step holds v_star by construction; a capped one is
        # recomputed and sits strictly inside the cut-off.
        vt = v_star if held else ecm.ocv(curve, soc) - vp_rel - current * params.r0
        vp = vp_rel + current * params.r1 * (1.0 - alpha)
        soc = min(max(soc - current * window.dt * params.soc_per_amp_second, 0.0), 1.0)
        steps.append(PomStep(j, current, vt, soc, vp, current * vt))

    trace = PomTrace(tuple(steps))
    binding = _min_power_step(trace.steps)
    sop = abs(binding.power)
    result = SopResult(
        i_current_limit=None,
        i_voltage_limit=None,
        i_soc_limit=None,
        i_mc=binding.current,
        dominant=governed,
        vt_end=steps[-1].vt,
        power_signed=binding.power,
        sop=sop,
        feasible=sop > 0.0,
    )
    return result, trace


def find_mode_shift_kc(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
) -> ModeShift:
    """Locate the CC-to-CV shift step for a CC-CV window.

    Simulates the current limit across the window; the shift is the first
    step whose voltage reaches the cut-off. No crossing means the window is
    current-governed throughout; a crossing already at step one means the
    shift predates the window and the whole window is voltage-governed.
    """
    i_lim = direction.current_limit(soa)
    cutoff = direction.vt_cutoff(soa)
    sign = direction.sign
    trace = constant_current_trace(state, params, curve, i_lim, window)
    for step_row in trace.steps:
        if (cutoff - step_row.vt) * sign >= 0.0:  # cut-off reached or crossed
            if step_row.index == 1 and (cutoff - step_row.vt) * sign > 0.0:
                return ModeShift(CcCvCase.CV_ONLY, None)
            return ModeShift(CcCvCase.TRANSITIONAL, step_row.index)
    return ModeShift(CcCvCase.CC_ONLY, None)


def sop_cccv(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
) -> tuple[SopResult, PomTrace]:
    """Constant-current / constant-voltage window with an in-window shift.

    Degenerate cases delegate: a never-reached cut-off reproduces the CC
    trace at the current limit, a pre-window shift reproduces the CV window.
    Otherwise each step takes the smaller of the current limit and the
    cut-off hold current, so the current binds up to the shift and the
    voltage binds from the shift step onward.
    """
    shift = find_mode_shift_kc(state, params, curve, window, direction, soa)
    if shift.case is CcCvCase.CV_ONLY:
        result, trace = sop_cv(state, params, curve, window, direction, soa)
        return result, trace

    i_lim = direction.current_limit(soa)
    cutoff = direction.vt_cutoff(soa)
    alpha = math.exp(-window.dt / params.tau)

    # Unified step rule for the CC-only and transitional cases: each step takes
    # the smaller of the current limit and the cut-off hold current (plus the
    # SOC headroom). While the limit wins this is bit-for-bit the constant-
    # current trace; once the hold wins the voltage is pinned for good.
    soc, vp = state.soc, state.vp
    steps: list[PomStep] = []
    k_c: int | None = None
    for j in range(1, window.steps + 1):
        vp_rel = vp * alpha
        hold = (ecm.ocv(curve, soc) - vp_rel - cutoff) / params.r0
        headroom = _soc_headroom_current(soc, params, direction, soa, window.dt)
        current = _clip_current(hold, direction, i_lim, headroom)
        if current == hold:
            if k_c is None:
                k_c = j
            vt = cutoff
        else:
            vt = ecm.ocv(curve, soc) - vp_rel - current * params.r0
        vp = vp_rel + current * params.r1 * (1.0 - alpha)
        soc = min(max(soc - current * window.dt * params.soc_per_amp_second, 0.0), 1.0)
        steps.append(PomStep(j, current, vt, soc, vp, current * vt))

    trace = PomTrace(tuple(steps), mode_shift_index=k_c)
    binding = _min_power_step(trace.steps)
    sop = abs(binding.power)
    result = SopResult(
        i_current_limit=None,
        i_voltage_limit=None,
        i_soc_limit=None,
        i_mc=binding.current,
        dominant="current" if k_c is None else "dual",
        vt_end=steps[-1].vt,
        power_signed=binding.power,
        sop=sop,
        feasible=sop > 0.0,
    )
    return result, trace


def solve_cp_step(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    power: float,
    direction: Direction,
) -> tuple[float, float]:
    """Current and terminal voltage delivering ``power`` at this state.

    Solves R0*I^2 - (V_oc - V_p)*I + P = 0 on the physical branch: the
    smaller-magnitude root, continuous through I = 0 as P -> 0. The caller
    passes the step's relaxed state (``vp`` already decayed).
    """
    if power * direction.sign < 0.0:
        raise PowerInfeasibleError(
            f"power {power} has the wrong sign for {direction.value}"
        )
    emf = ecm.ocv(curve, state.soc) - state.vp
    disc = emf * emf - 4.0 * params.r0 * power
    if disc < 0.0:
        raise PowerInfeasibleError(
            f"power {power} W exceeds the step ceiling {emf * emf / (4.0 * params.r0)} W"
        )
    current = 2.0 * power / (emf + math.sqrt(disc))
    return current, emf - current * params.r0


def _cp_probe(
    power_abs: float,
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
) -> tuple[PomStep, ...] | None:
    """Simulate a constant-|power| window; None when any step is infeasible
    or leaves the safe operation area."""
    alpha = math.exp(-window.dt / params.tau)
    power = power_abs * direction.sign
    soc, vp = state.soc, state.vp
    steps: list[PomStep] = []
    for j in range(1, window.steps + 1):
        vp_rel = vp * alpha
        try:
            current, vt = solve_cp_step(
                BatteryState(soc, vp_rel), params, curve, power, direction
            )
        except PowerInfeasibleError:
            return None
        soc_next = min(max(soc - current * window.dt * params.soc_per_amp_second, 0.0), 1.0)
        if check_point(vt, current, soc_next, soa):
            return None
        vp = vp_rel + current * params.r1 * (1.0 - alpha)
        soc = soc_next
        steps.append(PomStep(j, current, vt, soc, vp, current * vt))
    return tuple(steps)


def sop_cp(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
    tol_watts: float = 1e-6,
    max_iter: int = 200,
) -> tuple[SopResult, PomTrace]:
    """Constant-power window: the largest sustainable power magnitude, found
    by bisection over full-window feasibility probes."""
    if not (tol_watts > 0.0):
        raise ValueError(f"tol_watts must be > 0, got {tol_watts}")

    zero_trace = _cp_probe(0.0, state, params, curve, window, direction, soa)
    if zero_trace is None:
        empty = PomTrace(())
        result = SopResult(
            i_current_limit=None,
            i_voltage_limit=None,
            i_soc_limit=None,
            i_mc=0.0,
            dominant="voltage",
            vt_end=ecm.ocv(curve, state.soc) - state.vp,
            power_signed=0.0,
            sop=0.0,
            feasible=False,
        )
        return result, empty

    i_lim = direction.current_limit(soa)
    if direction is Direction.DISCHARGE:
        p_hi = abs(i_lim) * ecm.ocv(curve, state.soc)
    else:
        p_hi = abs(i_lim) * soa.vt_max
    for _ in range(10):  # p_hi is an over-bound; expand defensively if not
        if _cp_probe(p_hi, state, params, curve, window, direction, soa) is None:
            break
        p_hi *= 2.0

    lo, lo_trace = 0.0, zero_trace
    hi = p_hi
    iterations = 0
    while hi - lo > tol_watts and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        probe = _cp_probe(mid, state, params, curve, window, direction, soa)
        if probe is None:
            hi = mid
        else:
            lo, lo_trace = mid, probe
        iterations += 1

    trace = PomTrace(lo_trace)
    sop = lo
    dominant = _cp_dominant(lo_trace, direction, soa)
    binding_current = lo_trace[-1].current if direction is Direction.DISCHARGE else lo_trace[0].current
    result = SopResult(
        i_current_limit=None,
        i_voltage_limit=None,
        i_soc_limit=None,
        i_mc=binding_current,
        dominant=dominant,
        vt_end=lo_trace[-1].vt,
        power_signed=sop * direction.sign,
        sop=sop,
        feasible=sop > 0.0,
    )
    return result, trace


def _cp_dominant(steps: tuple[PomStep, ...], direction: Direction, soa: Soa) -> str:
    """Constraint with the smallest margin anywhere along the trace."""
    sign = direction.sign
    cutoff = direction.vt_cutoff(soa)
    i_lim = direction.current_limit(soa)
    bound = direction.soc_bound(soa)
    v_margin = min((s.vt - cutoff) * sign for s in steps)
    i_margin = min((i_lim - s.current) * sign for s in steps)
    soc_margin = min((s.soc - bound) * sign for s in steps)
    margins = [(v_margin, "voltage"), (soc_margin, "soc"), (i_margin, "current")]
    return min(margins, key=lambda m: m[0])[1]
