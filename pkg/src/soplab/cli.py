"""Command-line surface: peak-power reports, error sweeps, oracle validation
runs, and profile replay.

Exit codes: 0 success, 1 infeasible scenario or validation failure, 2
malformed input. Reports go to standard output unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from . import ecm, error_lab, fileio, modes, oracle, peak_cc
from .ecm import BatteryParams, BatteryState, OcvCurve, Window
from .exceptions import (
    AnalyticDomainError,
    ConfigurationError,
    InfeasibleStateError,
    InputError,
)
from .fileio import format_float as ff
from .peak_cc import Direction
from .soa import Soa, check_point

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2

# One-second sampling over a few tens of seconds: the usual BMS horizon.
DEFAULT_DT = 1.0
DEFAULT_STEPS = 30

MODES = ("cc", "cv", "cccv", "cp")
_TRACE_HEADER = "step,current_a,vt_v,soc,vp_v,power_w"


@dataclass(frozen=True)
class Scenario:
    state: BatteryState
    params: BatteryParams
    curve: OcvCurve
    soa: Soa
    window: Window
    mode: str
    direction: Direction


def _direction(name: str) -> Direction:
    try:
        return Direction(name)
    except ValueError as exc:
        raise InputError(f"unknown direction: {name!r}") from exc


def _scenario_from_args(args: argparse.Namespace) -> Scenario:
    params = fileio.read_params(args.params)
    curve = fileio.read_ocv(args.ocv)
    soa = fileio.read_soa(args.soa)
    try:
        state = BatteryState(soc=args.soc, vp=args.vp)
        window = Window(steps=args.steps, dt=args.dt)
    except ConfigurationError as exc:
        raise InputError(str(exc)) from exc
    mode = getattr(args, "mode", "cc")
    if mode not in MODES:
        raise InputError(f"unknown mode: {mode!r}")
    return Scenario(state, params, curve, soa, window, mode, _direction(args.direction))


def _trace_csv(trace: modes.PomTrace) -> str:
    lines = [_TRACE_HEADER]
    for s in trace.steps:
        lines.append(
            ",".join(
                (str(s.index), ff(s.current), ff(s.vt), ff(s.soc), ff(s.vp), ff(s.power))
            )
        )
    return "\n".join(lines) + "\n"


def cmd_sop(scenario: Scenario, power_eval: str, tol_watts: float) -> tuple[int, str]:
    """Peak-power report for one scenario; exit 1 when infeasible."""
    trace = None
    if scenario.mode == "cc":
        result = peak_cc.sop_cc(
            scenario.state,
            scenario.params,
            scenario.curve,
            scenario.window,
            scenario.direction,
            scenario.soa,
            power_eval=power_eval,
        )
    elif scenario.mode == "cv":
        result, trace = modes.sop_cv(
            scenario.state,
            scenario.params,
            scenario.curve,
            scenario.window,
            scenario.direction,
            scenario.soa,
        )
    elif scenario.mode == "cccv":
        result, trace = modes.sop_cccv(
            scenario.state,
            scenario.params,
            scenario.curve,
            scenario.window,
            scenario.direction,
            scenario.soa,
        )
    else:
        result, trace = modes.sop_cp(
            scenario.state,
            scenario.params,
            scenario.curve,
            scenario.window,
            scenario.direction,
            scenario.soa,
            tol_watts=tol_watts,
        )

    lines = [
        f"mode={scenario.mode}",
        f"direction={scenario.direction.value}",
        f"feasible={'true' if result.feasible else 'false'}",
        f"dominant={result.dominant}",
        f"sop_w={ff(result.sop)}",
        f"power_w={ff(result.power_signed)}",
        f"vt_end_v={ff(result.vt_end)}",
        f"i_mc_a={ff(result.i_mc)}",
    ]
    if result.i_current_limit is not None:
        lines.append(f"i_current_limit_a={ff(result.i_current_limit)}")
        lines.append(f"i_voltage_limit_a={ff(result.i_voltage_limit)}")
        lines.append(f"i_soc_limit_a={ff(result.i_soc_limit)}")
    if trace is not None and trace.mode_shift_index is not None:
        lines.append(f"mode_shift_step={trace.mode_shift_index}")
    report = "\n".join(lines) + "\n"
    if trace is not None and trace.steps:
        report += _trace_csv(trace)
    return (EXIT_OK if result.feasible else EXIT_INFEASIBLE), report


def cmd_simulate(scenario: Scenario, profile_path: str) -> tuple[int, str]:
    """Replay a current profile and annotate each sample with SOA violations."""
    profile = fileio.read_profile(profile_path)
    trace = ecm.simulate_profile(scenario.state, scenario.params, scenario.curve, profile)
    lines = ["t_s,current_a,soc,vp_v,vt_v,violations"]
    for sample in trace:
        kinds = ";".join(
            v.kind
            for v in check_point(sample.vt, sample.current, sample.soc, scenario.soa)
        )
        lines.append(
            ",".join(
                (
                    ff(sample.t),
                    ff(sample.current),
                    ff(sample.soc),
                    ff(sample.vp),
                    ff(sample.vt),
                    kinds,
                )
            )
        )
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_sweep_error(
    scenario: Scenario, source: str, constraint: str, grid: list[float]
) -> tuple[int, str]:
    """Analytic-versus-empirical power-error sweep over a delta grid."""
    try:
        src = error_lab.ErrorSource(source)
    except ValueError as exc:
        raise InputError(f"unknown error source: {source!r}") from exc
    ctx = error_lab.build_true_context(
        scenario.state,
        scenario.params,
        scenario.curve,
        scenario.window,
        scenario.direction,
        scenario.soa,
    )
    rows = error_lab.sweep(src, grid, ctx, constraint)
    lines = ["delta,analytic_dsop_w,empirical_dsop_w,residual_w,in_domain"]
    for row in rows:
        lines.append(
            ",".join(
                (
                    ff(row.delta),
                    ff(row.analytic_dsop),
                    ff(row.empirical_dsop),
                    ff(row.residual),
                    "true" if row.in_domain else "false",
                )
            )
        )
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_validate(
    scenario: Scenario,
    soc_grid: list[float],
    steps_list: list[int],
    directions: list[Direction],
    tol_amps: float,
) -> tuple[int, str]:
    """Closed-form versus brute-force peak current over a grid; exit 1 on any
    disagreement beyond tolerance."""
    if not soc_grid or not steps_list or not directions:
        raise InputError("validation grid is empty")
    lines = ["soc,steps,direction,analytic_a,oracle_a,residual_a,pass"]
    failures = 0
    max_residual = 0.0
    count = 0
    for soc in soc_grid:
        try:
            state = BatteryState(soc=soc, vp=scenario.state.vp)
        except ConfigurationError as exc:
            raise InputError(str(exc)) from exc
        for steps in steps_list:
            window = Window(steps=steps, dt=scenario.window.dt)
            for direction in directions:
                result = peak_cc.sop_cc(
                    state, scenario.params, scenario.curve, window, direction, scenario.soa
                )
                brute = oracle.brute_peak_current_cc(
                    state, scenario.params, scenario.curve, window, direction, scenario.soa,
                    tol_amps=tol_amps,
                )
                record = oracle.compare_report(result, brute, tol_amps, quantity="current")
                count += 1
                max_residual = max(max_residual, abs(record.residual))
                if not record.passed:
                    failures += 1
                lines.append(
                    ",".join(
                        (
                            ff(soc),
                            str(steps),
                            direction.value,
                            ff(record.analytic),
                            ff(record.brute),
                            ff(record.residual),
                            "true" if record.passed else "false",
                        )
                    )
                )
    lines.append(f"points={count}")
    lines.append(f"passed={count - failures}")
    lines.append(f"max_residual_a={ff(max_residual)}")
    code = EXIT_OK if failures == 0 else EXIT_INFEASIBLE
    return code, "\n".join(lines) + "\n"


def _parse_grid(text: str) -> list[float]:
    """Comma list ("0.1,0.2") or start:stop:step range, inclusive of the stop
    within half a step."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"range grid must be start:stop:step, got {text!r}")
        start = fileio.parse_float(parts[0], "grid start")
        stop = fileio.parse_float(parts[1], "grid stop")
        step = fileio.parse_float(parts[2], "grid step")
        if step <= 0 or stop < start:
            raise InputError(f"bad grid range: {text!r}")
        n = int(round((stop - start) / step))
        return [start + i * step for i in range(n + 1) if start + i * step <= stop + step / 2]
    if not text:
        raise InputError("empty grid")
    return [fileio.parse_float(cell, "grid value") for cell in text.split(",")]


def _parse_steps_list(text: str) -> list[int]:
    out = []
    for cell in text.split(","):
        try:
            out.append(int(cell))
        except ValueError as exc:
            raise InputError(f"bad steps value: {cell!r}") from exc
        if out[-1] < 1:
            raise InputError(f"steps must be >= 1, got {out[-1]}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soplab",
        description="Battery peak-power estimation on a Thevenin model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_mode: bool = False) -> None:
        p.add_argument("--params", required=True, help="params file (key=value)")
        p.add_argument("--ocv", required=True, help="OCV table csv")
        p.add_argument("--soa", required=True, help="SOA file (key=value)")
        p.add_argument("--soc", type=float, default=0.5, help="initial SOC fraction")
        p.add_argument("--vp", type=float, default=0.0, help="initial polarization voltage")
        p.add_argument("-K", "--steps", type=int, default=DEFAULT_STEPS, help="window steps")
        p.add_argument("--dt", type=float, default=DEFAULT_DT, help="sampling interval [s]")
        p.add_argument(
            "--direction", choices=[d.value for d in Direction], default="discharge"
        )
        p.add_argument("--out", default=None, help="write the report to this path")
        if with_mode:
            p.add_argument("--mode", choices=MODES, default="cc")

    p_sop = sub.add_parser("sop", help="peak-power report for one scenario")
    add_common(p_sop, with_mode=True)
    p_sop.add_argument(
        "--power-eval",
        choices=("end_of_window", "min_over_window"),
        default="end_of_window",
        help="CC power convention: end-of-window voltage or the literal window minimum",
    )
    p_sop.add_argument("--tol-watts", type=float, default=1e-6, help="CP bisection tolerance")

    p_sweep = sub.add_parser("sweep-error", help="error-source sensitivity sweep")
    add_common(p_sweep)
    p_sweep.add_argument(
        "--source", required=True, choices=[s.value for s in error_lab.ErrorSource]
    )
    p_sweep.add_argument(
        "--constraint", required=True, choices=list(error_lab.CONSTRAINTS)
    )
    p_sweep.add_argument(
        "--grid", required=True, help="delta grid: comma list or start:stop:step"
    )

    p_val = sub.add_parser("validate", help="closed form vs brute-force oracle grid")
    add_common(p_val)
    p_val.add_argument("--soc-grid", required=True, help="comma list or start:stop:step")
    p_val.add_argument("--steps-list", required=True, help="comma list of window lengths")
    p_val.add_argument(
        "--directions", default="both", choices=("both", "discharge", "charge")
    )
    p_val.add_argument("--tol", type=float, default=1e-6, help="agreement tolerance [A]")

    p_sim = sub.add_parser("simulate", help="replay a current profile")
    add_common(p_sim)
    p_sim.add_argument("--profile", required=True, help="profile csv (t_s,current_a)")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        scenario = _scenario_from_args(args)
        if args.command == "sop":
            code, report = cmd_sop(scenario, args.power_eval, args.tol_watts)
        elif args.command == "sweep-error":
            grid = _parse_grid(args.grid)
            code, report = cmd_sweep_error(scenario, args.source, args.constraint, grid)
        elif args.command == "validate":
            if args.directions == "both":
                directions = [Direction.DISCHARGE, Direction.CHARGE]
            else:
                directions = [_direction(args.directions)]
            code, report = cmd_validate(
                scenario,
                _parse_grid(args.soc_grid),
                _parse_steps_list(args.steps_list),
                directions,
                args.tol,
            )
        else:
            code, report = cmd_simulate(scenario, args.profile)
    except (InputError, ConfigurationError) as exc:
        print(f"error: {exc}")
        return EXIT_INPUT
    except (AnalyticDomainError, InfeasibleStateError) as exc:
        print(f"infeasible: {exc}")
        return EXIT_INFEASIBLE

    fileio.write_text(report, args.out)
    return code


def console_main() -> None:
    raise SystemExit(main())
