"""Transient response characteristics and integral error indices.

Conventions: the steady-state value is the mean of the last 5% of samples
(robust to residual ripple), the settling band defaults to 2% of that value,
and a peak time is only reported when the overshoot exceeds 0.1% (a "peak"
of a monotone response is meaningless).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import SimTrace

ERROR_INDEX_KINDS = ("ITAE", "IAE", "ISE", "ITSE")


class DegenerateTrace(ValueError):
    """Too few samples to extract transient characteristics."""


@dataclass(frozen=True)
class TransientMetrics:
    peak_time: float | None
    percent_overshoot: float
    settling_time: float | None
    rise_time_10_90: float | None
    steady_state_value: float


@dataclass(frozen=True)
class ErrorIndex:
    kind: str
    value: float

    def __post_init__(self) -> None:
        if self.kind not in ERROR_INDEX_KINDS:
            raise ValueError(f"unknown error index {self.kind!r}; expected one of {ERROR_INDEX_KINDS}")
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"index value must be finite and nonnegative, got {self.value}")


def transient_metrics(trace: SimTrace, band_fraction: float = 0.02) -> TransientMetrics:
    """Step-response characteristics of the output channel of a trace.

    settling_time is the earliest time after which |y - ss| stays within
    band_fraction*|ss| through the end of the trace (None if it never does);
    rise_time_10_90 is the span between the first crossings of 10% and 90%
    of the steady-state value.
    """
    if not 0.0 < band_fraction < 0.5:
        raise ValueError(f"band_fraction must be in (0, 0.5), got {band_fraction}")
    y, t = trace.y, trace.t
    if len(y) < 20:
        raise DegenerateTrace(f"need at least 20 samples, got {len(y)}")

    n_tail = max(1, math.ceil(0.05 * len(y)))
    ss = float(np.mean(y[-n_tail:]))

    y_max = float(np.max(y))
    if abs(ss) > 1e-9:
        overshoot = max(0.0, (y_max - ss) / abs(ss) * 100.0)
    else:
        amp = abs(float(trace.r[-1]))
        overshoot = max(0.0, (y_max - ss) / amp * 100.0) if amp > 1e-9 else 0.0

    peak_time = float(t[int(np.argmax(y))]) if overshoot > 0.1 else None

    outside = np.nonzero(np.abs(y - ss) > band_fraction * abs(ss))[0]
    if len(outside) == 0:
        settling_time = 0.0
    elif outside[-1] == len(y) - 1:
        settling_time = None
    else:
        settling_time = float(t[outside[-1] + 1])

    rise_time = None
    if abs(ss) > 1e-9:
        reached = y >= 0.9 * ss if ss > 0 else y <= 0.9 * ss
        started = y >= 0.1 * ss if ss > 0 else y <= 0.1 * ss
        i90 = np.nonzero(reached)[0]
        i10 = np.nonzero(started)[0]
        if len(i90) and len(i10) and i90[0] >= i10[0]:
            rise_time = float(t[i90[0]] - t[i10[0]])

    return TransientMetrics(
        peak_time=peak_time,
        percent_overshoot=overshoot,
        settling_time=settling_time,
        rise_time_10_90=rise_time,
        steady_state_value=ss,
    )


def error_index(trace: SimTrace, kind: str = "ITAE") -> ErrorIndex:
    """Trapezoidal quadrature of the chosen error functional over the horizon."""
    e, t = trace.e, trace.t
    if kind == "ITAE":
        w = t * np.abs(e)
    elif kind == "IAE":
        w = np.abs(e)
    elif kind == "ISE":
        w = e * e
    elif kind == "ITSE":
        w = t * e * e
    else:
        raise ValueError(f"unknown error index {kind!r}; expected one of {ERROR_INDEX_KINDS}")
    # trapezoid rule on the uniform trace grid
    value = trace.dt * (float(np.sum(w)) - 0.5 * (float(w[0]) + float(w[-1])))
    return ErrorIndex(kind, max(0.0, value))
