"""Monte Carlo studies over the gateway triangle.

Three numerical experiments plus one design sweep:

* ``sweep_emax`` — worst-case localization error as a function of the counter
  period T: each sampled target's arrival times are shifted by +/-T in all
  8 sign combinations, and the per-target worst error is averaged.
* ``error_map`` — spatial error map: per target, many transmissions each
  draw a uniform [0, T) timing error per gateway, the 8 sign patterns are
  applied on top, and the worst error over all estimates is kept.
* ``duty_cycle_grid`` — channel occupancy over a (time-on-air, counter bits)
  grid with feasibility against the 10% and 1% regulatory caps.
* ``alpha_bounds`` — the admissible sync-period interval implied by sweeping
  the slowest spreading factor over bandwidth/payload/coding-rate limits.

Reproducibility contract: every random draw is made upfront in the parent
process from the master seed; workers receive contiguous index slices of
that pre-drawn state and all reductions happen in the parent. Results are
therefore bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .counter import CounterConfig, overflow_time
from .error_model import SIGN_PATTERNS
from .geometry import GatewayTriple, canonical_triangle, sample_points_in_triangle
from .lora_phy import RadioParams, duty_cycle, low_dr_opt_auto, time_on_air
from .solver import forward_toa_batch, solve_closed_form_batch


def _default_triangle() -> GatewayTriple:
    return canonical_triangle(10000.0)


@dataclass(frozen=True)
class SweepConfig:
    """Protocol of the e_max-vs-T sweep."""

    T_range: tuple[float, float, float] = (2.5e-9, 100e-9, 2.5e-9)
    n_points: int = 100_000
    seed: int = 0
    gws: GatewayTriple = field(default_factory=_default_triangle)
    sigma_bands: bool = True

    def __post_init__(self):
        if not (self.T_range[2] > 0):
            raise ValueError(f"T step must be positive, got {self.T_range[2]!r}")
        if self.n_points < 1:
            raise ValueError(f"n_points must be >= 1, got {self.n_points!r}")


@dataclass(frozen=True)
class EmaxResult:
    """Per-T rows of the sweep: mean worst-case error and its spread."""

    T_s: np.ndarray
    e_max_m: np.ndarray
    sigma_m: np.ndarray
    failed_solves: np.ndarray
    n_points: int

    def band(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) of the mean +/- k*sigma confidence band."""
        return (self.e_max_m - k * self.sigma_m, self.e_max_m + k * self.sigma_m)


@dataclass(frozen=True)
class ErrorMapConfig:
    """Protocol of the spatial error map."""

    T_s: float = 40e-9
    n_bits: int = 32
    n_points: int = 7050
    n_transmissions: int = 23
    seed: int = 0
    gws: GatewayTriple = field(default_factory=_default_triangle)

    def __post_init__(self):
        if not (self.T_s > 0):
            raise ValueError(f"T_s must be positive, got {self.T_s!r}")
        if self.n_points < 1 or self.n_transmissions < 1:
            raise ValueError("n_points and n_transmissions must be >= 1")


@dataclass(frozen=True)
class ErrorMapResult:
    """Per-target worst-case localization error."""

    points: np.ndarray
    max_error_m: np.ndarray
    failed_solves: np.ndarray
    T_s: float


@dataclass(frozen=True)
class DutyCycleCell:
    """One (tau, n) grid cell with its occupancy and feasibility verdicts."""

    tau_s: float
    n_bits: int
    T_s: float
    delta: float
    feasible_10pct: bool
    feasible_1pct: bool
    feasible: bool | None = None  # against a caller-supplied cap, if any


@dataclass(frozen=True)
class AlphaBounds:
    """Admissible sync-period interval and the configurations attaining it."""

    tau_min_s: float
    tau_max_s: float
    argmin: RadioParams
    argmax: RadioParams


def _t_grid(T_range: tuple[float, float, float]) -> np.ndarray:
    start, stop, step = T_range
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return start + step * np.arange(count)


def _chunk_slices(n: int, workers: int) -> list[slice]:
    k = max(1, min(int(workers), n))
    base, rem = divmod(n, k)
    out, start = [], 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        if size:
            out.append(slice(start, start + size))
        start += size
    return out


def _sweep_chunk(pts, t_clean, T_values, gws):
    """Worst-case errors for one slice of targets, all T values."""
    n = pts.shape[0]
    worst = np.empty((len(T_values), n))
    fails = np.empty((len(T_values), n), dtype=np.int64)
    for i, T in enumerate(T_values):
        w = np.full(n, -np.inf)
        f = np.zeros(n, dtype=np.int64)
        for s in SIGN_PATTERNS:
            out = solve_closed_form_batch(t_clean + T * s[None, :], gws)
            err = np.where(out.ok, np.hypot(out.x - pts[:, 0], out.y - pts[:, 1]), -np.inf)
            w = np.maximum(w, err)
            f += (~out.ok).astype(np.int64)
        worst[i] = w
        fails[i] = f
    return worst, fails


def _sweep_chunk_call(args):
    return _sweep_chunk(*args)


def sweep_emax(cfg: SweepConfig, workers: int = 1) -> EmaxResult:
    """Mean worst-case localization error per counter period T.

    One target set is sampled once and reused across every T so the sweep
    varies only the perturbation magnitude. For each target and each T, the
    arrival triple is shifted by +/-T in all 8 sign combinations; the target
    contributes the largest of its 8 localization errors. ``e_max`` is the
    mean of those per-target worst cases, ``sigma`` their sample spread.
    """
    T_values = _t_grid(cfg.T_range)
    rng = np.random.default_rng(cfg.seed)
    pts = sample_points_in_triangle(cfg.gws, cfg.n_points, rng)
    t_clean = forward_toa_batch(pts, cfg.gws, 0.0)

    slices = _chunk_slices(cfg.n_points, workers)
    if len(slices) == 1:
        parts = [_sweep_chunk(pts, t_clean, T_values, cfg.gws)]
    else:
        jobs = [(pts[s], t_clean[s], T_values, cfg.gws) for s in slices]
        with ProcessPoolExecutor(max_workers=len(slices)) as ex:
            parts = list(ex.map(_sweep_chunk_call, jobs))
    worst = np.concatenate([p[0] for p in parts], axis=1)
    fails = np.concatenate([p[1] for p in parts], axis=1)

    valid = np.isfinite(worst)  # -inf rows are targets whose 8 solves all failed
    e_max = np.empty(len(T_values))
    sigma = np.empty(len(T_values))
    for i in range(len(T_values)):
        w = worst[i][valid[i]]
        e_max[i] = w.mean() if w.size else math.nan
        sigma[i] = w.std(ddof=1) if w.size > 1 else 0.0
    return EmaxResult(
        T_s=T_values,
        e_max_m=e_max,
        sigma_m=sigma,
        failed_solves=fails.sum(axis=1),
        n_points=cfg.n_points,
    )


def _map_chunk(pts, t_clean, errs, gws):
    """Worst-case error for one slice of targets over all transmissions."""
    m = pts.shape[0]
    worst = np.full(m, -np.inf)
    fails = np.zeros(m, dtype=np.int64)
    for k in range(errs.shape[1]):
        e = errs[:, k, :]
        for s in SIGN_PATTERNS:
            out = solve_closed_form_batch(t_clean + s[None, :] * e, gws)
            err = np.where(out.ok, np.hypot(out.x - pts[:, 0], out.y - pts[:, 1]), -np.inf)
            worst = np.maximum(worst, err)
            fails += (~out.ok).astype(np.int64)
    return worst, fails


def _map_chunk_call(args):
    return _map_chunk(*args)


def error_map(cfg: ErrorMapConfig, workers: int = 1) -> ErrorMapResult:
    """Spatial map of worst-case localization error.

    Each sampled target is "transmitted" ``n_transmissions`` times; every
    transmission draws an independent uniform [0, T) timing error per
    gateway, and all 8 sign patterns of those magnitudes are solved. The
    target keeps the largest error over its 8 * n_transmissions estimates.
    """
    rng = np.random.default_rng(cfg.seed)
    pts = sample_points_in_triangle(cfg.gws, cfg.n_points, rng)
    errs = rng.random((cfg.n_points, cfg.n_transmissions, 3)) * cfg.T_s
    t_clean = forward_toa_batch(pts, cfg.gws, 0.0)

    span = overflow_time(CounterConfig(cfg.n_bits, cfg.T_s))
    if float(t_clean.max()) + cfg.T_s >= span:
        raise ValueError(
            f"arrival times reach {t_clean.max():.3e} s, past the counter span {span:.3e} s"
        )

    slices = _chunk_slices(cfg.n_points, workers)
    if len(slices) == 1:
        parts = [_map_chunk(pts, t_clean, errs, cfg.gws)]
    else:
        jobs = [(pts[s], t_clean[s], errs[s], cfg.gws) for s in slices]
        with ProcessPoolExecutor(max_workers=len(slices)) as ex:
            parts = list(ex.map(_map_chunk_call, jobs))
    worst = np.concatenate([p[0] for p in parts])
    fails = np.concatenate([p[1] for p in parts])
    worst = np.where(np.isfinite(worst), worst, math.nan)
    return ErrorMapResult(points=pts, max_error_m=worst, failed_solves=fails, T_s=cfg.T_s)


def duty_cycle_grid(
    tau_values, n_values, T_s: float, delta_max: float | None = None
) -> list[DutyCycleCell]:
    """Occupancy ratio and cap feasibility over a (tau, n) grid.

    Every cell's delta comes from :func:`lorafix.lora_phy.duty_cycle`; the
    10% and 1% preset verdicts are always included, and ``delta_max`` adds
    a verdict against a custom cap when given.
    """
    cells = []
    for tau in tau_values:
        for n in n_values:
            d = duty_cycle(tau, n, T_s)
            cells.append(
                DutyCycleCell(
                    tau_s=float(tau),
                    n_bits=int(n),
                    T_s=float(T_s),
                    delta=d,
                    feasible_10pct=d <= 0.10,
                    feasible_1pct=d <= 0.01,
                    feasible=None if delta_max is None else d <= delta_max,
                )
            )
    return cells


# Regulatory payload caps (bytes) per bandwidth for the slow sync packets:
# 51 B at the low-rate bandwidths, 33 B where dwell-time rules bite.
DEFAULT_PL_CAPS = {125000: 51, 250000: 51, 500000: 33}


def alpha_bounds(
    sf: int = 12,
    bw_set=None,
    pl_caps=None,
    cr_range=(1, 2, 3, 4),
    n_preamble: int = 8,
) -> AlphaBounds:
    """Admissible sync-period interval from the airtime cross-product.

    Sweeps payload length 1..cap and coding rate over every bandwidth (the
    low-data-rate flag follows the symbol-duration rule) and returns the
    extreme packet durations together with the configurations attaining
    them. A sync period must be at least the longest packet and gains
    nothing below the shortest, so [tau_min, tau_max] brackets the design.
    """
    caps = dict(DEFAULT_PL_CAPS if pl_caps is None else pl_caps)
    if bw_set is not None:
        caps = {bw: caps[bw] for bw in bw_set}
    best_min = None
    best_max = None
    for bw in sorted(caps):
        de = low_dr_opt_auto(sf, bw)
        for cr in cr_range:
            for pl in range(1, caps[bw] + 1):
                p = RadioParams(
                    sf=sf,
                    bw_hz=bw,
                    cr=cr,
                    payload_len=pl,
                    n_preamble=n_preamble,
                    header_disabled=0,
                    low_dr_opt=de,
                )
                tau = time_on_air(p)
                if best_min is None or tau < best_min[0]:
                    best_min = (tau, p)
                if best_max is None or tau > best_max[0]:
                    best_max = (tau, p)
    return AlphaBounds(
        tau_min_s=best_min[0], tau_max_s=best_max[0], argmin=best_min[1], argmax=best_max[1]
    )
