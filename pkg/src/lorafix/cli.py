"""Command-line front end: config ingestion, dispatch, CSV/JSON emission.

Exit codes: 0 success, 1 configuration/parse error, 2 domain error
(singular geometry, no real root, counter overflow), 3 I/O error.

Output routing: with --out, the data table goes to the file and a short
human summary to stdout; without --out, the table goes to stdout and the
summary to stderr. Progress notes always go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .counter import CounterConfig, CounterOverflowError
from .error_model import DegenerateSyncTimingError
from .experiments import (
    ErrorMapConfig,
    SweepConfig,
    alpha_bounds,
    duty_cycle_grid,
    error_map,
    sweep_emax,
)
from .geometry import CollinearGatewaysError, GatewayTriple, Position, canonical_triangle
from .lora_phy import (
    RadioParams,
    duty_cycle,
    low_dr_opt_auto,
    payload_symbol_count,
    preamble_duration,
    symbol_duration,
    time_on_air,
)
from .solver import NoRealRootError, SingularGeometryError, ToAObservation, solve_analytic

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DOMAIN = 2
EXIT_IO = 3


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; 2 is reserved for domain errors.
    def error(self, message):
        self.exit(EXIT_CONFIG, f"error: {message}\n")


DEFAULTS = {
    "seed": None,
    "workers": 1,
    "geometry": {"diameter_m": 10000.0, "gateways": None},
    "toa": None,
    "counter": {"n_bits": 32, "T_ns": 40.0},
    "radio": {
        "sf": 12,
        "bw_hz": 125000,
        "cr": 1,
        "payload": 51,
        "preamble": 8,
        "header_disabled": 0,
        "low_dr_opt": None,  # null = pick by the symbol-duration rule
    },
    "sweep": {"start_ns": 2.5, "stop_ns": 100.0, "step_ns": 2.5, "points": 100000},
    "map": {"points": 7050, "transmissions": 23},
    "grid": {
        "tau_s": [0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.6],
        "n_bits": [24, 26, 28, 30, 32, 34, 36, 38],
    },
    "alpha": {
        "sf": 12,
        "pl_caps": {"125000": 51, "250000": 51, "500000": 33},
        "cr": [1, 2, 3, 4],
        "preamble": 8,
    },
}


def _merge(base, override):
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _load_config(args) -> dict:
    cfg = DEFAULTS
    if getattr(args, "config", None):
        with open(args.config, "r") as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}") from e
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = _merge(cfg, user)
    return cfg


def _resolve_seed(args, cfg) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if cfg.get("seed") is not None:
        return int(cfg["seed"])
    env = os.environ.get("LORAFIX_SEED")
    if env is not None and env != "":
        try:
            return int(env)
        except ValueError as e:
            raise ConfigError(f"LORAFIX_SEED must be an integer, got {env!r}") from e
    raise ConfigError("stochastic commands need a seed (--seed, config, or LORAFIX_SEED)")


def _geometry(args, cfg) -> GatewayTriple:
    geo = cfg["geometry"]
    if getattr(args, "diameter_m", None) is not None:
        return canonical_triangle(args.diameter_m)
    if geo.get("gateways"):
        gws = geo["gateways"]
        if len(gws) != 3:
            raise ConfigError(f"geometry.gateways needs exactly 3 entries, got {len(gws)}")
        return GatewayTriple(*(Position(float(x), float(y)) for x, y in gws))
    return canonical_triangle(float(geo["diameter_m"]))


def _counter(args, cfg) -> CounterConfig:
    n_bits = args.n_bits if getattr(args, "n_bits", None) is not None else cfg["counter"]["n_bits"]
    T_ns = args.T_ns if getattr(args, "T_ns", None) is not None else cfg["counter"]["T_ns"]
    return CounterConfig(int(n_bits), float(T_ns) * 1e-9)


def _radio(args, cfg) -> RadioParams:
    r = cfg["radio"]
    sf = args.sf if getattr(args, "sf", None) is not None else r["sf"]
    bw = args.bw_hz if getattr(args, "bw_hz", None) is not None else r["bw_hz"]
    cr = args.cr if getattr(args, "cr", None) is not None else r["cr"]
    pl = args.payload if getattr(args, "payload", None) is not None else r["payload"]
    de = r["low_dr_opt"]
    if de is None:
        de = low_dr_opt_auto(int(sf), int(bw))
    return RadioParams(
        sf=int(sf),
        bw_hz=int(bw),
        cr=int(cr),
        payload_len=int(pl),
        n_preamble=int(r["preamble"]),
        header_disabled=int(r["header_disabled"]),
        low_dr_opt=int(de),
    )


def _fmt(v) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _render(cols, rows, fmt: str) -> str:
    if fmt == "json":
        doc = {"columns": list(cols), "rows": [[_jsonable(v) for v in r] for r in rows]}
        return json.dumps(doc, separators=(",", ":")) + "\n"
    lines = [",".join(cols)]
    lines.extend(",".join(_fmt(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"


def _emit(cols, rows, summary: str, args) -> None:
    text = _render(cols, rows, args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_solve(args, cfg) -> int:
    toa = args.toa if args.toa else cfg.get("toa")
    if not toa:
        raise ConfigError("solve needs three ToA values (positional args or config 'toa')")
    if len(toa) != 3:
        raise ConfigError(f"solve needs exactly 3 ToA values, got {len(toa)}")
    gws = _geometry(args, cfg)
    est = solve_analytic(ToAObservation(*(float(t) for t in toa)), gws)
    cols = ["x_m", "y_m", "t0_s", "residual_m", "root_index"]
    rows = [[est.pos.x, est.pos.y, est.t0_s, est.residual_m, est.root_index]]
    summary = (
        f"position ({est.pos.x:.3f}, {est.pos.y:.3f}) m, t0 {est.t0_s:.6e} s, "
        f"residual {est.residual_m:.3e} m, root {est.root_index}"
    )
    _emit(cols, rows, summary, args)
    return EXIT_OK


def cmd_airtime(args, cfg) -> int:
    radio = _radio(args, cfg)
    ctr = _counter(args, cfg)
    tau = time_on_air(radio)
    delta = duty_cycle(tau, ctr.n_bits, ctr.period_s)
    cols = ["T_sym_s", "T_preamble_s", "payload_symbols", "tau_s", "n_bits", "T_s", "delta"]
    rows = [[
        symbol_duration(radio),
        preamble_duration(radio),
        payload_symbol_count(radio),
        tau,
        ctr.n_bits,
        ctr.period_s,
        delta,
    ]]
    summary = (
        f"sf{radio.sf} bw{radio.bw_hz} cr{radio.cr} pl{radio.payload_len} "
        f"de{radio.low_dr_opt}: tau {tau:.6f} s, duty cycle {delta * 100:.4f}% "
        f"at n={ctr.n_bits}, T={ctr.period_s:.3e} s"
    )
    _emit(cols, rows, summary, args)
    return EXIT_OK


def cmd_sweep_emax(args, cfg) -> int:
    seed = _resolve_seed(args, cfg)
    gws = _geometry(args, cfg)
    sw = cfg["sweep"]
    points = args.points if args.points is not None else int(sw["points"])
    T_range = (float(sw["start_ns"]) * 1e-9, float(sw["stop_ns"]) * 1e-9, float(sw["step_ns"]) * 1e-9)
    scfg = SweepConfig(T_range=T_range, n_points=points, seed=seed, gws=gws)
    workers = args.workers if args.workers is not None else int(cfg["workers"])
    _progress(f"sweep-emax: {points} targets, T {sw['start_ns']}..{sw['stop_ns']} ns, workers={workers}")
    res = sweep_emax(scfg, workers=workers)
    cols = ["T_s", "e_max_m", "sigma_m", "failed_solves"]
    rows = [
        [res.T_s[i], res.e_max_m[i], res.sigma_m[i], int(res.failed_solves[i])]
        for i in range(len(res.T_s))
    ]
    anchor_ns = args.T_ns if args.T_ns is not None else cfg["counter"]["T_ns"]
    idx = int(np.argmin(np.abs(res.T_s - float(anchor_ns) * 1e-9)))
    summary = (
        f"e_max(T={res.T_s[idx] * 1e9:g} ns) = {res.e_max_m[idx]:.2f} m "
        f"(sigma {res.sigma_m[idx]:.2f} m) over {points} targets"
    )
    _emit(cols, rows, summary, args)
    return EXIT_OK


def cmd_dutycycle_grid(args, cfg) -> int:
    grid = cfg["grid"]
    ctr = _counter(args, cfg)
    tau_values = [float(t) for t in grid["tau_s"]]
    n_values = [int(n) for n in grid["n_bits"]]
    if args.n_bits is not None:
        n_values = [int(args.n_bits)]
    cells = duty_cycle_grid(tau_values, n_values, ctr.period_s)
    cols = ["tau_s", "n_bits", "T_s", "delta", "feasible_10pct", "feasible_1pct"]
    rows = [
        [c.tau_s, c.n_bits, c.T_s, c.delta, c.feasible_10pct, c.feasible_1pct] for c in cells
    ]
    k10 = sum(c.feasible_10pct for c in cells)
    k1 = sum(c.feasible_1pct for c in cells)
    summary = f"{len(cells)} cells at T={ctr.period_s:.3e} s: {k10} feasible at 10%, {k1} at 1%"
    _emit(cols, rows, summary, args)
    return EXIT_OK


def cmd_error_map(args, cfg) -> int:
    seed = _resolve_seed(args, cfg)
    gws = _geometry(args, cfg)
    ctr = _counter(args, cfg)
    m = cfg["map"]
    points = args.points if args.points is not None else int(m["points"])
    transmissions = (
        args.transmissions if args.transmissions is not None else int(m["transmissions"])
    )
    mcfg = ErrorMapConfig(
        T_s=ctr.period_s,
        n_bits=ctr.n_bits,
        n_points=points,
        n_transmissions=transmissions,
        seed=seed,
        gws=gws,
    )
    workers = args.workers if args.workers is not None else int(cfg["workers"])
    _progress(
        f"error-map: {points} targets x {transmissions} transmissions, "
        f"T={ctr.period_s:.3e} s, workers={workers}"
    )
    res = error_map(mcfg, workers=workers)
    cols = ["x_m", "y_m", "max_error_m", "failed_solves"]
    rows = [
        [res.points[i, 0], res.points[i, 1], res.max_error_m[i], int(res.failed_solves[i])]
        for i in range(points)
    ]
    finite = res.max_error_m[np.isfinite(res.max_error_m)]
    summary = (
        f"max error {finite.max():.2f} m, mean {finite.mean():.2f} m over {points} targets "
        f"({int(res.failed_solves.sum())} failed solves)"
    )
    _emit(cols, rows, summary, args)
    return EXIT_OK


def cmd_alpha_bounds(args, cfg) -> int:
    a = cfg["alpha"]
    sf = args.sf if getattr(args, "sf", None) is not None else int(a["sf"])
    caps = {int(bw): int(cap) for bw, cap in a["pl_caps"].items()}
    cr_lo, cr_hi = (int(a["cr"][0]), int(a["cr"][-1]))
    bounds = alpha_bounds(
        sf=sf, pl_caps=caps, cr_range=range(cr_lo, cr_hi + 1), n_preamble=int(a["preamble"])
    )

    def _params_str(p: RadioParams) -> str:
        return f"sf={p.sf} bw={p.bw_hz} cr={p.cr} pl={p.payload_len} de={p.low_dr_opt}"

    cols = ["tau_min_s", "tau_max_s", "argmin_params", "argmax_params"]
    rows = [[bounds.tau_min_s, bounds.tau_max_s, _params_str(bounds.argmin), _params_str(bounds.argmax)]]
    summary = (
        f"sync period bounds [{bounds.tau_min_s:.6f}, {bounds.tau_max_s:.6f}] s "
        f"(min: {_params_str(bounds.argmin)}; max: {_params_str(bounds.argmax)})"
    )
    _emit(cols, rows, summary, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lorafix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--seed", type=int, help="master seed for stochastic commands")
    common.add_argument("--workers", type=int, help="parallel workers (default 1)")
    common.add_argument("--out", help="write the data table to this file")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("solve", parents=[common], help="solve one ToA observation")
    p.add_argument("toa", nargs="*", type=float, help="t1 t2 t3 in seconds")
    p.add_argument("--diameter-m", type=float, dest="diameter_m")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("airtime", parents=[common], help="packet timing and duty cycle")
    p.add_argument("--sf", type=int)
    p.add_argument("--bw-hz", type=int, dest="bw_hz")
    p.add_argument("--cr", type=int)
    p.add_argument("--payload", type=int)
    p.add_argument("--n-bits", type=int, dest="n_bits")
    p.add_argument("--T-ns", type=float, dest="T_ns")
    p.set_defaults(func=cmd_airtime)

    p = sub.add_parser("sweep-emax", parents=[common], help="worst-case error vs counter period")
    p.add_argument("--points", type=int)
    p.add_argument("--T-ns", type=float, dest="T_ns", help="summary anchor period")
    p.add_argument("--diameter-m", type=float, dest="diameter_m")
    p.set_defaults(func=cmd_sweep_emax)

    p = sub.add_parser("dutycycle-grid", parents=[common], help="occupancy/feasibility grid")
    p.add_argument("--n-bits", type=int, dest="n_bits")
    p.add_argument("--T-ns", type=float, dest="T_ns")
    p.set_defaults(func=cmd_dutycycle_grid)

    p = sub.add_parser("error-map", parents=[common], help="spatial worst-case error map")
    p.add_argument("--points", type=int)
    p.add_argument("--transmissions", type=int)
    p.add_argument("--n-bits", type=int, dest="n_bits")
    p.add_argument("--T-ns", type=float, dest="T_ns")
    p.add_argument("--diameter-m", type=float, dest="diameter_m")
    p.set_defaults(func=cmd_error_map)

    p = sub.add_parser("alpha-bounds", parents=[common], help="sync period interval from airtime")
    p.add_argument("--sf", type=int)
    p.set_defaults(func=cmd_alpha_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except (CollinearGatewaysError, SingularGeometryError) as e:
        print(f"error: singular-geometry: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except NoRealRootError as e:
        print(f"error: no-real-root: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except CounterOverflowError as e:
        print(f"error: counter-overflow: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except DegenerateSyncTimingError as e:
        print(f"error: degenerate-sync-timing: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConfigError, ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: io: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
