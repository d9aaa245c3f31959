"""PI tuning toolkit for ROV yaw steering.

Closed-loop simulation of the yaw plant under PI control, transient and
integral-error metrics, and GA/SA gain optimizers with a reproducible
multi-run harness.
"""

from .lti import (
    AlgebraicLoop,
    DegenerateDenominator,
    Polynomial,
    StateSpace,
    TransferFunction,
    default_yaw_plant,
    is_stable,
    poly_add,
    poly_mul,
    series,
    to_state_space,
    unity_feedback,
)
from .metrics import (
    ERROR_INDEX_KINDS,
    DegenerateTrace,
    ErrorIndex,
    TransientMetrics,
    error_index,
    transient_metrics,
)
from .sim import (
    NumericalBlowup,
    PIGains,
    SimConfig,
    SimTrace,
    ZeroController,
    pi_tf,
    simulate_pi_loop,
    simulate_step,
)
from .tuners import (
    GAConfig,
    GainBounds,
    InvalidConfig,
    RunSet,
    SAConfig,
    TuningResult,
    ga_tune,
    multi_run,
    objective,
    sa_tune,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraicLoop",
    "DegenerateDenominator",
    "DegenerateTrace",
    "ERROR_INDEX_KINDS",
    "ErrorIndex",
    "GAConfig",
    "GainBounds",
    "InvalidConfig",
    "NumericalBlowup",
    "PIGains",
    "Polynomial",
    "RunSet",
    "SAConfig",
    "SimConfig",
    "SimTrace",
    "StateSpace",
    "TransferFunction",
    "TransientMetrics",
    "TuningResult",
    "ZeroController",
    "default_yaw_plant",
    "error_index",
    "ga_tune",
    "is_stable",
    "multi_run",
    "objective",
    "pi_tf",
    "poly_add",
    "poly_mul",
    "series",
    "simulate_pi_loop",
    "simulate_step",
    "to_state_space",
    "transient_metrics",
    "unity_feedback",
]
