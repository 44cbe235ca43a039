"""Error calculus for constant-current peak-power estimation.

Five error sources (SOC, relaxed polarization voltage, lumped resistance,
OCV window slope, and the capacity/efficiency composite x = eta/(3600*C_a))
are each propagated through the three constraint closed forms, twice over:

* ``analytic_error`` evaluates the closed-form error expressions directly;
* ``empirical_error`` runs the reference estimator twice -- once with true
  inputs, once with the one corrupted input -- and differences the outputs.

Conventions, applied uniformly: every error is "true minus estimated"
(delta_sop = sop - sop_hat), and the estimator consumes the biased quantity
``true - delta``. One source is corrupted at a time; all others stay exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from . import ecm
from .ecm import BatteryParams, BatteryState, OcvCurve, Window
from .exceptions import AnalyticDomainError
from .peak_cc import Direction
from .soa import Soa

CONSTRAINTS = ("current", "voltage", "soc")


class ErrorSource(enum.Enum):
    SOC = "soc"
    VP_RELAX = "vp_relax"
    R_SUM = "r_sum"
    KAPPA = "kappa"
    X = "x"


@dataclass(frozen=True)
class ErrorBreakdown:
    """Peak-current, end-voltage, and power errors for one (source, constraint)
    cell. ``coefficients`` carries the (a, b) pair of the SOC-error parabola or
    the (alpha, beta) pair of the capacity-composite form, where one exists."""

    delta_i: float
    delta_vt: float
    delta_sop: float
    coefficients: tuple[float, float] | None = None


@dataclass(frozen=True)
class TrueContext:
    """Unbiased quantities every error formula consumes, precomputed once."""

    state: BatteryState
    params: BatteryParams
    curve: OcvCurve
    kappa: float
    window: Window
    direction: Direction
    soa: Soa
    # derived, all true-valued
    f_soc: float  # OCV at the window-start SOC
    vp_relax: float  # initial polarization voltage decayed across the window
    r_sum: float  # R0 + R1*(1-exp(-K*dt/tau))
    x: float  # eta / (3600 * C_a)
    k_dt: float  # K * dt
    y: float  # k_dt * x
    cutoff: float
    soc_bound: float
    i_lim: float


def build_true_context(
    state: BatteryState,
    params: BatteryParams,
    curve: OcvCurve,
    window: Window,
    direction: Direction,
    soa: Soa,
    kappa: float | None = None,
) -> TrueContext:
    """Assemble the true context; the window slope defaults to the local
    segment slope at the starting SOC."""
    if kappa is None:
        kappa = ecm.ocv_slope(curve, state.soc, state.soc)
    k_dt = window.duration
    x = params.soc_per_amp_second
    return TrueContext(
        state=state,
        params=params,
        curve=curve,
        kappa=kappa,
        window=window,
        direction=direction,
        soa=soa,
        f_soc=ecm.ocv(curve, state.soc),
        vp_relax=state.vp * math.exp(-k_dt / params.tau),
        r_sum=params.r0 + params.r1 * (1.0 - math.exp(-k_dt / params.tau)),
        x=x,
        k_dt=k_dt,
        y=k_dt * x,
        cutoff=direction.vt_cutoff(soa),
        soc_bound=direction.soc_bound(soa),
        i_lim=direction.current_limit(soa),
    )


class _EstimatorInputs(NamedTuple):
    f_soc: float
    vp_relax: float
    r_sum: float
    kappa: float
    y: float
    soc: float
    soc_bound: float
    cutoff: float
    i_lim: float


def _true_inputs(ctx: TrueContext) -> _EstimatorInputs:
    return _EstimatorInputs(
        ctx.f_soc,
        ctx.vp_relax,
        ctx.r_sum,
        ctx.kappa,
        ctx.y,
        ctx.state.soc,
        ctx.soc_bound,
        ctx.cutoff,
        ctx.i_lim,
    )


def _corrupt(ctx: TrueContext, source: ErrorSource, delta: float) -> _EstimatorInputs:
    """Estimator-side inputs with one quantity biased to (true - delta)."""
    inp = _true_inputs(ctx)
    if source is ErrorSource.SOC:
        soc_hat = ctx.state.soc - delta
        return inp._replace(soc=soc_hat, f_soc=ecm.ocv(ctx.curve, soc_hat))
    if source is ErrorSource.VP_RELAX:
        return inp._replace(vp_relax=ctx.vp_relax - delta)
    if source is ErrorSource.R_SUM:
        return inp._replace(r_sum=ctx.r_sum - delta)
    if source is ErrorSource.KAPPA:
        return inp._replace(kappa=ctx.kappa - delta)
    if source is ErrorSource.X:
        return inp._replace(y=ctx.k_dt * (ctx.x - delta))
    raise AssertionError(f"unhandled source {source}")


def _estimate(constraint: str, inp: _EstimatorInputs) -> tuple[float, float, float]:
    """Reference estimator for one constraint: (peak current, end voltage, sop).

    The end voltage is always the linearized window prediction at the
    constraint's peak current; under the voltage constraint it reduces to the
    cut-off identically, which is therefore assigned rather than recomputed.
    """
    if constraint == "current":
        current = inp.i_lim
        vt = inp.f_soc - inp.vp_relax - current * (inp.kappa * inp.y + inp.r_sum)
        return current, vt, current * vt
    if constraint == "voltage":
        denom = inp.kappa * inp.y + inp.r_sum
        if not (denom > 0.0):
            raise AnalyticDomainError(f"voltage-constraint denominator {denom} <= 0")
        current = (inp.f_soc - inp.vp_relax - inp.cutoff) / denom
        return current, inp.cutoff, current * inp.cutoff
    if constraint == "soc":
        if not (inp.y > 0.0):
            raise AnalyticDomainError(f"soc-constraint denominator {inp.y} <= 0")
        current = (inp.soc - inp.soc_bound) / inp.y
        vt = inp.f_soc - inp.kappa * inp.y * current - inp.vp_relax - current * inp.r_sum
        return current, vt, current * vt
    raise ValueError(f"unknown constraint: {constraint!r}")


def _check_constraint(constraint: str) -> None:
    if constraint not in CONSTRAINTS:
        raise ValueError(f"constraint must be one of {CONSTRAINTS}, got {constraint!r}")


def empirical_error(
    source: ErrorSource, delta: float, ctx: TrueContext, constraint: str
) -> ErrorBreakdown:
    """Paired estimator runs: true inputs versus one corrupted input.

    Differences the per-constraint peak current, end-of-window voltage, and
    power as (true - estimated).
    """
    _check_constraint(constraint)
    i_true, vt_true, sop_true = _estimate(constraint, _true_inputs(ctx))
    i_hat, vt_hat, sop_hat = _estimate(constraint, _corrupt(ctx, source, delta))
    return ErrorBreakdown(
        delta_i=i_true - i_hat,
        delta_vt=vt_true - vt_hat,
        delta_sop=sop_true - sop_hat,
    )


def analytic_error(
    source: ErrorSource, delta: float, ctx: TrueContext, constraint: str
) -> ErrorBreakdown:
    """Closed-form error for one (source, constraint) cell.

    Structural zeros are returned as exact zeros: the current-constraint peak
    current never moves, the voltage-constraint end voltage is pinned, and the
    SOC-constraint current ignores the polarization, resistance, and slope
    sources.
    """
    _check_constraint(constraint)
    if not math.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta}")

    kappa, y, r_sum, k_dt, x = ctx.kappa, ctx.y, ctx.r_sum, ctx.k_dt, ctx.x
    denom = kappa * y + r_sum  # voltage-constraint denominator, true-valued
    numer = ctx.f_soc - ctx.vp_relax - ctx.cutoff
    c_soc = ctx.state.soc - ctx.soc_bound
    i_cc = ctx.i_lim
    i_soc = c_soc / y

    if constraint == "current":
        if source is ErrorSource.SOC:
            dvt = kappa * delta
        elif source is ErrorSource.VP_RELAX:
            dvt = -delta
        elif source is ErrorSource.R_SUM:
            dvt = -i_cc * delta
        elif source is ErrorSource.KAPPA:
            dvt = -i_cc * y * delta
        else:  # X
            dvt = -i_cc * k_dt * kappa * delta
        return ErrorBreakdown(delta_i=0.0, delta_vt=dvt, delta_sop=i_cc * dvt)

    if constraint == "voltage":
        if source is ErrorSource.SOC:
            di = kappa * delta / denom
        elif source is ErrorSource.VP_RELAX:
            di = -delta / denom
        else:
            # Denominator-shifting sources: the estimator's denominator must
            # stay positive for the closed form to hold.
            if source is ErrorSource.R_SUM:
                shift = delta
            elif source is ErrorSource.KAPPA:
                shift = y * delta
            else:  # X
                shift = k_dt * kappa * delta
            denom_hat = denom - shift
            if not (denom_hat > 0.0):
                raise AnalyticDomainError(
                    f"perturbed voltage-constraint denominator {denom_hat} <= 0"
                )
            di = -numer * shift / (denom * denom_hat)
        return ErrorBreakdown(delta_i=di, delta_vt=0.0, delta_sop=ctx.cutoff * di)

    # soc constraint
    a_emf = ctx.f_soc - kappa * c_soc - ctx.vp_relax  # end EMF less relaxation
    if source is ErrorSource.SOC:
        a_coef = r_sum / (y * y)
        b_coef = a_emf / y - 2.0 * c_soc * r_sum / (y * y)
        di = delta / y
        return ErrorBreakdown(
            delta_i=di,
            delta_vt=-di * r_sum,
            delta_sop=a_coef * delta * delta + b_coef * delta,
            coefficients=(a_coef, b_coef),
        )
    if source is ErrorSource.VP_RELAX:
        return ErrorBreakdown(delta_i=0.0, delta_vt=-delta, delta_sop=-i_soc * delta)
    if source is ErrorSource.R_SUM:
        return ErrorBreakdown(
            delta_i=0.0, delta_vt=-i_soc * delta, delta_sop=-i_soc * i_soc * delta
        )
    if source is ErrorSource.KAPPA:
        return ErrorBreakdown(
            delta_i=0.0, delta_vt=-c_soc * delta, delta_sop=-c_soc * c_soc * delta / y
        )
    # X under the soc constraint
    x_hat = x - delta
    if not (x_hat > 0.0):
        raise AnalyticDomainError(f"perturbed capacity composite {x_hat} <= 0")
    alpha = -c_soc * a_emf / k_dt
    beta = (c_soc / k_dt) ** 2 * r_sum
    di = -c_soc * delta / (k_dt * x * x_hat)
    dsop = alpha * delta / (x * x_hat) + beta * (2.0 * x * delta - delta * delta) / (
        x * x * x_hat * x_hat
    )
    return ErrorBreakdown(
        delta_i=di,
        delta_vt=-di * r_sum,
        delta_sop=dsop,
        coefficients=(alpha, beta),
    )


class SweepRow(NamedTuple):
    delta: float
    analytic_dsop: float
    empirical_dsop: float
    residual: float
    in_domain: bool


def sweep(
    source: ErrorSource, delta_grid: list[float], ctx: TrueContext, constraint: str
) -> list[SweepRow]:
    """Analytic-versus-empirical power-error table over a delta grid.

    Deltas outside the analytic domain produce flagged NaN rows instead of
    aborting the sweep.
    """
    if not delta_grid:
        raise ValueError("delta grid must not be empty")
    rows: list[SweepRow] = []
    for delta in delta_grid:
        try:
            ana = analytic_error(source, delta, ctx, constraint).delta_sop
            emp = empirical_error(source, delta, ctx, constraint).delta_sop
        except AnalyticDomainError:
            rows.append(SweepRow(delta, math.nan, math.nan, math.nan, False))
            continue
        rows.append(SweepRow(delta, ana, emp, ana - emp, True))
    return rows
