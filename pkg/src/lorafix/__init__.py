"""TDoA localization over a counter-synchronized LoRa gateway triangle.

The package models a three-gateway deployment that timestamps packet
arrivals with free-running n-bit counters reset by a stationary sync
transmitter, and provides:

* exact forward/inverse position solvers (analytic and closed-form routes),
* the stochastic timestamp-error model (quantization, drift, slippage,
  sync placement skew),
* LoRa time-on-air and duty-cycle arithmetic for sizing the sync period,
* reproducible Monte Carlo experiments mapping timing error to position
  error across the triangle.
"""

from .constants import SPEED_OF_LIGHT
from .counter import (
    CounterConfig,
    CounterOverflowError,
    ProcessorClock,
    counter_to_time,
    overflow_time,
    quantize,
    rtc_drift_error,
)
from .error_model import (
    SIGN_PATTERNS,
    DegenerateSyncTimingError,
    ErrorModelParams,
    ToAErrorSample,
    ideal_error_bound,
    sample_error,
    sign_permutations,
    sync_offset,
)
from .experiments import (
    DEFAULT_PL_CAPS,
    AlphaBounds,
    DutyCycleCell,
    EmaxResult,
    ErrorMapConfig,
    ErrorMapResult,
    SweepConfig,
    alpha_bounds,
    duty_cycle_grid,
    error_map,
    sweep_emax,
)
from .geometry import (
    CollinearGatewaysError,
    GatewayTriple,
    Position,
    SyncNodeConfig,
    barycentric,
    canonical_triangle,
    circumcenter,
    contains,
    distance,
    sample_in_triangle,
    sample_points_in_triangle,
)
from .lora_phy import (
    DUTY_CYCLE_PRESETS,
    DutyCyclePreset,
    RadioParams,
    duty_cycle,
    low_dr_opt_auto,
    payload_symbol_count,
    preamble_duration,
    symbol_duration,
    time_on_air,
)
from .solver import (
    BatchSolveResult,
    LocalizationEstimate,
    NoRealRootError,
    SingularGeometryError,
    ToAObservation,
    forward_toa,
    forward_toa_batch,
    localization_error,
    residual,
    solve_analytic,
    solve_closed_form,
    solve_closed_form_batch,
)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT",
    "CounterConfig",
    "CounterOverflowError",
    "ProcessorClock",
    "counter_to_time",
    "overflow_time",
    "quantize",
    "rtc_drift_error",
    "SIGN_PATTERNS",
    "DegenerateSyncTimingError",
    "ErrorModelParams",
    "ToAErrorSample",
    "ideal_error_bound",
    "sample_error",
    "sign_permutations",
    "sync_offset",
    "AlphaBounds",
    "DEFAULT_PL_CAPS",
    "DutyCycleCell",
    "EmaxResult",
    "ErrorMapConfig",
    "ErrorMapResult",
    "SweepConfig",
    "alpha_bounds",
    "duty_cycle_grid",
    "error_map",
    "sweep_emax",
    "CollinearGatewaysError",
    "GatewayTriple",
    "Position",
    "SyncNodeConfig",
    "barycentric",
    "canonical_triangle",
    "circumcenter",
    "contains",
    "distance",
    "sample_in_triangle",
    "sample_points_in_triangle",
    "DUTY_CYCLE_PRESETS",
    "DutyCyclePreset",
    "RadioParams",
    "duty_cycle",
    "low_dr_opt_auto",
    "payload_symbol_count",
    "preamble_duration",
    "symbol_duration",
    "time_on_air",
    "BatchSolveResult",
    "LocalizationEstimate",
    "NoRealRootError",
    "SingularGeometryError",
    "ToAObservation",
    "forward_toa",
    "forward_toa_batch",
    "localization_error",
    "residual",
    "solve_analytic",
    "solve_closed_form",
    "solve_closed_form_batch",
]
