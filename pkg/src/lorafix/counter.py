"""The n-bit synchronous counter: quantization, overflow, drift arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass


class CounterOverflowError(ValueError):
    """The arrival time falls past the counter's rollover point."""


@dataclass(frozen=True)
class CounterConfig:
    """An n-bit counter ticking with period T = ``period_s``."""

    n_bits: int
    period_s: float

    def __post_init__(self):
        if not 1 <= self.n_bits <= 64:
            raise ValueError(f"n_bits must be in 1..64, got {self.n_bits!r}")
        if not (self.period_s > 0):
            raise ValueError(f"period_s must be positive, got {self.period_s!r}")


@dataclass(frozen=True)
class ProcessorClock:
    """The gateway processor clock; one slippage costs one period."""

    period_s: float

    def __post_init__(self):
        if not (self.period_s > 0):
            raise ValueError(f"period_s must be positive, got {self.period_s!r}")


def quantize(t_true_s: float, cfg: CounterConfig) -> int:
    """Counter reading for a true arrival time: floor(t / T).

    Raises CounterOverflowError if the reading would not fit in n bits,
    i.e. the packet arrived after the counter wrapped.
    """
    if not (t_true_s >= 0):
        raise ValueError(f"arrival time must be non-negative, got {t_true_s!r}")
    n = math.floor(t_true_s / cfg.period_s)
    if n >= (1 << cfg.n_bits):
        raise CounterOverflowError(
            f"t={t_true_s!r} s exceeds the {cfg.n_bits}-bit counter range "
            f"({overflow_time(cfg)!r} s)"
        )
    return n


def counter_to_time(count: int, cfg: CounterConfig) -> float:
    """Left grid point N * T for a counter reading; inverse of quantize."""
    if not 0 <= count < (1 << cfg.n_bits):
        raise ValueError(f"count {count!r} out of range for {cfg.n_bits} bits")
    return count * cfg.period_s


def overflow_time(cfg: CounterConfig) -> float:
    """Time span 2^n * T after which the counter wraps, seconds."""
    return float(1 << cfg.n_bits) * cfg.period_s


def rtc_drift_error(ppm: float, elapsed_s: float) -> float:
    """Accumulated clock error of a crystal with the given ppm drift."""
    if ppm < 0:
        raise ValueError(f"ppm must be non-negative, got {ppm!r}")
    if elapsed_s < 0:
        raise ValueError(f"elapsed_s must be non-negative, got {elapsed_s!r}")
    return ppm * 1e-6 * elapsed_s
