"""Closed-form peak power under a constant-current window.

Per-constraint peak currents (manufacturer current limit, terminal-voltage
cut-off, SOC bound), composed into the multi-constraint peak as the
minimum-magnitude current, with the deliverable power evaluated at the
end-of-window terminal voltage.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import ecm
from .ecm import BatteryParams, BatteryState, OcvCurve, Window
from .exceptions import AnalyticDomainError
from .soa import Soa

# Dominance label priority when constraint currents tie in magnitude.
_TIE_PRIORITY = ("voltage", "soc", "current")


class Direction(enum.Enum):
    DISCHARGE = "discharge"
    CHARGE = "charge"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.DISCHARGE else -1

    def current_limit(self, soa: Soa) -> float:
        return soa.i_max_dis if self is Direction.DISCHARGE else soa.i_max_chg

    def vt_cutoff(self, soa: Soa) -> float:
        return soa.vt_min if self is Direction.DISCHARGE else soa.vt_max

    def soc_bound(self, soa: Soa) -> float:
        return soa.soc_min if self is Direction.DISCHARGE else soa.soc_max


@dataclass(frozen=True)
class SopResult:
    """Peak-power estimate with per-constraint diagnostics.

    The per-constraint currents are populated by the constant-current closed
    forms; stepwise mode engines leave them as None. ``sop`` is the magnitude
    of ``power_signed``; ``feasible`` is False when no nonzero current can be
    sustained.
    """

    i_current_limit: float | None
    i_voltage_limit: float | None
    i_soc_limit: float | None
    i_mc: float
    dominant: str
    vt_end: float
    power_signed: float
    sop: float
    feasible: bool


def peak_current_current_constraint(direction: Direction, soa: Soa) -> float:
    """Manufacturer current limit for the direction (pass-through)."""
    return direction.current_limit(soa)


def window_denominator(params: BatteryParams, kappa: float, window: Window) -> float:
    """Shared denominator: OCV-drift term plus ohmic and built-up polarization
    resistance, eta*K*dt*kappa/(3600*C_a) + R0 + R1*(1-exp(-K*dt/tau))."""
    k_dt = window.duration
    eff_r1 = params.r1 * (1.0 - math.exp(-k_dt / params.tau))
    return kappa * k_dt * params.soc_per_amp_second + params.r0 + eff_r1


def peak_current_voltage_constraint(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    kappa: float,
    window: Window,
    direction: Direction,
    soa: Soa,
) -> float:
    """Constant current that lands the end-of-window voltage on the cut-off.

    Returns 0 when the rested voltage already sits past the cut-off for the
    direction (the window is voltage-infeasible).
    """
    denom = window_denominator(params, kappa, window)
    if not (denom > 0.0):
        raise AnalyticDomainError(
            f"voltage-constraint denominator must be > 0, got {denom}"
        )
    vp_relax = state.vp * math.exp(-window.duration / params.tau)
    numer = ecm.ocv(curve, state.soc) - vp_relax - direction.vt_cutoff(soa)
    current = numer / denom
    if current * direction.sign < 0.0:
        return 0.0
    return current


def peak_current_soc_constraint(
    state: BatteryState,
    window: Window,
    params: BatteryParams,
    direction: Direction,
    soa: Soa,
) -> float:
    """Constant current that lands the end-of-window SOC on its bound."""
    current = (state.soc - direction.soc_bound(soa)) / (
        window.duration * params.soc_per_amp_second
    )
    if current * direction.sign < 0.0:
        return 0.0
    return current


def _compose(candidates: list[tuple[float, str]]) -> tuple[float, str]:
    """Minimum-magnitude current; ties resolved by fixed label priority."""
    best_mag = min(abs(i) for i, _ in candidates)
    by_label = {label: i for i, label in candidates}
    for label in _TIE_PRIORITY:
        if label in by_label and abs(by_label[label]) == best_mag:
            return by_label[label], label
    raise AssertionError("unreachable: tie priority covers all labels")


def sop_cc(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
    power_eval: str = "end_of_window",
) -> SopResult:
    """Multi-constraint peak power for a constant-current window.

    The window OCV slope is extracted in two passes: the local segment slope
    seeds the candidate current, then the secant to the SOC that candidate
    would reach replaces it (the slope is held constant across the window).

    ``power_eval`` selects how the deliverable power is reported:
    "end_of_window" multiplies the peak current by the last-step voltage;
    "min_over_window" takes the smallest per-step power magnitude along the
    simulated window, which moves the binding step to the front for a charge.
    """
    if power_eval not in ("end_of_window", "min_over_window"):
        raise ValueError(f"unknown power_eval mode: {power_eval!r}")

    i_current = peak_current_current_constraint(direction, soa)
    i_soc = peak_current_soc_constraint(state, window, params, direction, soa)

    kappa = ecm.ocv_slope(curve, state.soc, state.soc)
    i_voltage = peak_current_voltage_constraint(
        state, params, curve, kappa, window, direction, soa
    )
    i_mc, _ = _compose(
        [(i_voltage, "voltage"), (i_soc, "soc"), (i_current, "current")]
    )

    # Second pass: secant slope to the SOC the candidate current would reach.
    soc_reach = state.soc - i_mc * window.duration * params.soc_per_amp_second
    soc_reach = min(max(soc_reach, 0.0), 1.0)
    kappa = ecm.ocv_slope(curve, state.soc, soc_reach)
    i_voltage = peak_current_voltage_constraint(
        state, params, curve, kappa, window, direction, soa
    )
    i_mc, dominant = _compose(
        [(i_voltage, "voltage"), (i_soc, "soc"), (i_current, "current")]
    )

    prediction = ecm.predict_cc(state, params, curve, kappa, i_mc, window)
    vt_end = prediction.vt_end
    power_signed = i_mc * vt_end
    sop = abs(power_signed)

    if power_eval == "min_over_window":
        sim_state = state
        best: float | None = None
        for _ in range(window.steps):
            sim_state, vt, _ = ecm.step(sim_state, params, curve, i_mc, window.dt)
            p = i_mc * vt
            if best is None or abs(p) < abs(best):
                best = p
        assert best is not None
        power_signed = best
        sop = abs(best)

    return SopResult(
        i_current_limit=i_current,
        i_voltage_limit=i_voltage,
        i_soc_limit=i_soc,
        i_mc=i_mc,
        dominant=dominant,
        vt_end=vt_end,
        power_signed=power_signed,
        sop=sop,
        feasible=i_mc != 0.0,
    )
