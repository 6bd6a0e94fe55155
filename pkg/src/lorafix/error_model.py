"""Stochastic model of the per-gateway arrival-time error.

For one received packet, a gateway's timestamp error decomposes into

    e_t = sync_offset + N * w1 + U2[0, T) + U1{0..k} * (T_g + w2)

where ``sync_offset`` is the deterministic skew caused by a misplaced sync
transmitter, ``N * w1`` is counter-clock drift accumulated over N ticks
(w1 ~ Normal(0, sigma1^2)), ``U2[0, T)`` is the unavoidable quantization
residue of the free-running counter, and the last term models 0..k whole
processor cycles of latching slippage, each costing T_g plus its own jitter
(w2 ~ Normal(0, sigma2^2), drawn once per packet since all slips belong to
the same reception).

The ideal mode — drift and slippage disabled, perfectly placed sync node —
leaves exactly the quantization residue, uniform on [0, T).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .counter import CounterConfig, ProcessorClock
from .geometry import Position, SyncNodeConfig
from .solver import ToAObservation


class DegenerateSyncTimingError(ValueError):
    """Sync propagation delay of zero: gateway and sync node coincide."""


# The 8 sign patterns of a (+/-e, +/-e, +/-e) perturbation, in a fixed order.
SIGN_PATTERNS = np.array(list(itertools.product((1.0, -1.0), repeat=3)))


@dataclass(frozen=True)
class ErrorModelParams:
    """Knobs of the timing-error model.

    sigma1_s / sigma2_s are the per-tick counter drift and per-slip jitter
    standard deviations; max_slippages bounds the discrete slippage count.
    The two flags gate the drift and slippage terms so the ideal mode can
    switch them off wholesale.
    """

    counter: CounterConfig = CounterConfig(32, 40e-9)
    proc: ProcessorClock = ProcessorClock(2.5e-9)
    sigma1_s: float = 0.0
    sigma2_s: float = 0.0
    max_slippages: int = 0
    drift_enabled: bool = False
    slippage_enabled: bool = False

    def __post_init__(self):
        if self.sigma1_s < 0 or self.sigma2_s < 0:
            raise ValueError("drift/jitter standard deviations must be >= 0")
        if self.max_slippages < 0:
            raise ValueError(f"max_slippages must be >= 0, got {self.max_slippages!r}")


@dataclass(frozen=True)
class ToAErrorSample:
    """One realized timestamp error, with its additive breakdown."""

    sync_offset_s: float
    drift_s: float
    rounding_s: float
    slippage_s: float

    @property
    def total_s(self) -> float:
        """The full error e_t; by construction the sum of the components."""
        return self.sync_offset_s + self.drift_s + self.rounding_s + self.slippage_s


def sync_offset(sync: SyncNodeConfig, gw: Position, t_d_s: float) -> float:
    """Counter-reset skew at one gateway caused by sync-node placement error.

    ``t_d_s`` is the (signed) propagation delay from the sync node to the
    gateway along the assumed geometry; it enters inversely, so a gateway
    closer to the sync node is hurt more by the same placement error.

    Parameters
    ----------
    sync : SyncNodeConfig
        Assumed sync position plus its (dx0, dy0) placement error.
    gw : Position
        The gateway.
    t_d_s : float
        Sync propagation delay, seconds; must be nonzero.
    """
    if t_d_s == 0:
        raise DegenerateSyncTimingError("sync propagation delay must be nonzero")
    dx0, dy0 = sync.pos_error
    num = (sync.pos.x - gw.x) * dx0 + (sync.pos.y - gw.y) * dy0
    return num / (SPEED_OF_LIGHT * SPEED_OF_LIGHT * t_d_s)


def ideal_error_bound(period_s: float) -> float:
    """Worst-case timestamp error in the ideal mode: one counter period."""
    if not (period_s > 0):
        raise ValueError(f"period_s must be positive, got {period_s!r}")
    return period_s


def sample_error(
    params: ErrorModelParams,
    count: int,
    rng: np.random.Generator,
    sync_offset_s: float = 0.0,
) -> ToAErrorSample:
    """Draw one gateway's timestamp error for a packet latched at reading ``count``.

    The quantization residue is always present; drift and slippage appear
    only when their flags are set. The caller supplies the deterministic
    sync-offset component (see :func:`sync_offset`), since it depends on
    geometry this module does not hold.
    """
    if not 0 <= count < (1 << params.counter.n_bits):
        raise ValueError(f"count {count!r} out of counter range")
    drift = 0.0
    if params.drift_enabled and params.sigma1_s > 0.0:
        drift = count * rng.normal(0.0, params.sigma1_s)
    rounding = rng.random() * params.counter.period_s
    slippage = 0.0
    if params.slippage_enabled and params.max_slippages > 0:
        w2 = rng.normal(0.0, params.sigma2_s) if params.sigma2_s > 0.0 else 0.0
        slips = int(rng.integers(0, params.max_slippages + 1))
        slippage = slips * (params.proc.period_s + w2)
    return ToAErrorSample(
        sync_offset_s=sync_offset_s,
        drift_s=drift,
        rounding_s=rounding,
        slippage_s=slippage,
    )


def sign_permutations(toa: ToAObservation, e_s: float) -> tuple[ToAObservation, ...]:
    """All 8 observations reachable by shifting each timestamp by +/- ``e_s``.

    Worst-case analysis uses these to bracket what a bounded timing error of
    magnitude ``e_s`` can do to the position fix.
    """
    if e_s < 0:
        raise ValueError(f"e_s must be non-negative, got {e_s!r}")
    out = []
    for s1, s2, s3 in SIGN_PATTERNS:
        out.append(ToAObservation(toa.t1 + s1 * e_s, toa.t2 + s2 * e_s, toa.t3 + s3 * e_s))
    return tuple(out)
