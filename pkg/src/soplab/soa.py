"""Safe-operation-area box and compliance checks.

All bounds are inclusive: a point sitting exactly on a cut-off is compliant,
so boundary conditions can be expressed as exact equalities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Protocol

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class Soa:
    """Voltage, current, and SOC limits enforced at every window step."""

    vt_min: float
    vt_max: float
    i_max_dis: float
    i_max_chg: float
    soc_min: float
    soc_max: float

    def __post_init__(self) -> None:
        if not (self.vt_min < self.vt_max):
            raise ConfigurationError("vt_min must be < vt_max")
        if not (self.i_max_chg < 0.0 < self.i_max_dis):
            raise ConfigurationError("need i_max_chg < 0 < i_max_dis")
        if not (0.0 <= self.soc_min < self.soc_max <= 1.0):
            raise ConfigurationError("need 0 <= soc_min < soc_max <= 1")


class Violation(NamedTuple):
    kind: str  # voltage_low | voltage_high | current_high_dis | current_high_chg | soc_low | soc_high
    step_index: int
    magnitude: float  # excess beyond the bound, in native units, > 0


class TracePoint(Protocol):
    current: float
    vt: float
    soc: float


def check_point(
    vt: float, current: float, soc: float, soa: Soa, step_index: int = 0
) -> list[Violation]:
    """Violations of the SOA box at one operating point; empty when compliant."""
    out: list[Violation] = []
    if vt < soa.vt_min:
        out.append(Violation("voltage_low", step_index, soa.vt_min - vt))
    elif vt > soa.vt_max:
        out.append(Violation("voltage_high", step_index, vt - soa.vt_max))
    if current > soa.i_max_dis:
        out.append(Violation("current_high_dis", step_index, current - soa.i_max_dis))
    elif current < soa.i_max_chg:
        out.append(Violation("current_high_chg", step_index, soa.i_max_chg - current))
    if soc < soa.soc_min:
        out.append(Violation("soc_low", step_index, soa.soc_min - soc))
    elif soc > soa.soc_max:
        out.append(Violation("soc_high", step_index, soc - soa.soc_max))
    return out


def check_trace(trace: Iterable[TracePoint], soa: Soa) -> list[Violation]:
    """Apply ``check_point`` at every trace step.

    Rows that carry their own ``index`` attribute keep it in the violation
    records; otherwise the enumeration position is used.
    """
    out: list[Violation] = []
    for position, point in enumerate(trace):
        index = getattr(point, "index", position)
        out.extend(check_point(point.vt, point.current, point.soc, soa, step_index=index))
    return out
