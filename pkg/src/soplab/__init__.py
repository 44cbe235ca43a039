"""Battery state-of-power workbench on a Thevenin equivalent circuit.

Closed-form multi-constraint peak power for constant-current windows,
stepwise engines for constant-voltage, CC-CV, and constant-power operation,
an exact error calculus for five input-error sources, and a brute-force
simulation oracle that validates the closed forms.
"""

from .ecm import (
    BatteryParams,
    BatteryState,
    CcPrediction,
    OcvCurve,
    ProfileSample,
    StepResult,
    Window,
    ocv,
    ocv_slope,
    predict_cc,
    simulate_profile,
    step,
)
from .error_lab import (
    ErrorBreakdown,
    ErrorSource,
    TrueContext,
    analytic_error,
    build_true_context,
    empirical_error,
    sweep,
)
from .exceptions import (
    AnalyticDomainError,
    ConfigurationError,
    InfeasibleStateError,
    InputError,
    PowerInfeasibleError,
)
from .modes import (
    CcCvCase,
    ModeShift,
    PomStep,
    PomTrace,
    constant_current_trace,
    find_mode_shift_kc,
    solve_cp_step,
    sop_cccv,
    sop_cp,
    sop_cv,
)
from .oracle import (
    BrutePower,
    ValidationRecord,
    brute_peak_current_cc,
    brute_peak_power_cp,
    compare_report,
)
from .peak_cc import (
    Direction,
    SopResult,
    peak_current_current_constraint,
    peak_current_soc_constraint,
    peak_current_voltage_constraint,
    sop_cc,
)
from .soa import Soa, Violation, check_point, check_trace

__all__ = [
    "AnalyticDomainError",
    "BatteryParams",
    "BatteryState",
    "BrutePower",
    "CcCvCase",
    "CcPrediction",
    "ConfigurationError",
    "Direction",
    "ErrorBreakdown",
    "ErrorSource",
    "InfeasibleStateError",
    "InputError",
    "ModeShift",
    "OcvCurve",
    "PomStep",
    "PomTrace",
    "PowerInfeasibleError",
    "ProfileSample",
    "Soa",
    "SopResult",
    "StepResult",
    "TrueContext",
    "ValidationRecord",
    "Violation",
    "Window",
    "analytic_error",
    "brute_peak_current_cc",
    "brute_peak_power_cp",
    "build_true_context",
    "check_point",
    "check_trace",
    "compare_report",
    "constant_current_trace",
    "empirical_error",
    "find_mode_shift_kc",
    "ocv",
    "ocv_slope",
    "peak_current_current_constraint",
    "peak_current_soc_constraint",
    "peak_current_voltage_constraint",
    "predict_cc",
    "simulate_profile",
    "solve_cp_step",
    "sop_cc",
    "sop_cccv",
    "sop_cp",
    "sop_cv",
    "step",
    "sweep",
]
