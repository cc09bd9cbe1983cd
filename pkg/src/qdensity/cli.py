"""Command line interface.

Subcommands: ``estimate``, ``grid``, ``select``, ``kde``, ``simulate``,
``mse-curve``. Options can also be placed in an INI config file with one
section per subcommand; explicit flags override file values, which
override built-in defaults. Every command is a pure function of its
inputs, flags and seed, so outputs are byte-identical across runs and
worker counts.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError, QdensityError
from .kde import KdeConfig, cv_bandwidth, default_bandwidth_grid, kde_density
from .resampling import LsConfig, _ls_value, ls_density
from .rng import normal_draws
from .selection import SigmaGrid, grid_estimates, select_sigma
from .simulate import (
    Cauchy,
    Exponential,
    GridSearch,
    ScenarioSpec,
    mse_curve_detail,
    run_comparison,
)
from .survival import SurvivalSample, km_fit, km_fit_censoring, quantile


@dataclass(frozen=True)
class XyTable:
    """Two-column numeric table written as plot-ready text."""

    rows: list[tuple[float, float]]

    def __post_init__(self):
        if not self.rows:
            raise InvalidInputError("XY table must contain at least one row")
        for x, y in self.rows:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InvalidInputError(f"non-finite XY row ({x}, {y})")


def format_xy(table: XyTable) -> str:
    return "x y\n" + "".join(f"{x:.6g} {y:.6g}\n" for x, y in table.rows)


def emit_xy(table: XyTable, path) -> None:
    """Write the table: header line ``x y``, then one ``%.6g %.6g`` row per line."""
    with open(path, "w", newline="\n") as fh:
        fh.write(format_xy(table))


def ingest_csv(path, allow_negative: bool = False) -> SurvivalSample:
    """Read a ``time,event`` CSV into a validated sample.

    Times must be finite and positive (any finite value with
    ``allow_negative``); events must be 0 or 1. Errors name the offending
    line (the header is line 1).
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidInputError(f"{path}: empty file")
        if [c.strip().lower() for c in header] != ["time", "event"]:
            raise ParseError(f"{path}: line 1: expected header 'time,event'")
        times: list[float] = []
        events: list[bool] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 2 columns, got {len(row)}")
            try:
                t = float(row[0])
            except ValueError as exc:
                raise ParseError(
                    f"{path}: line {lineno}, column 1: invalid time {row[0]!r}"
                ) from exc
            if not math.isfinite(t):
                raise ParseError(f"{path}: line {lineno}, column 1: time must be finite")
            if not allow_negative and t <= 0:
                raise ParseError(
                    f"{path}: line {lineno}, column 1: time must be > 0 "
                    "(pass --allow-negative to accept it)"
                )
            token = row[1].strip()
            if token not in ("0", "1"):
                raise ParseError(
                    f"{path}: line {lineno}, column 2: event must be 0 or 1, got {row[1]!r}"
                )
            times.append(t)
            events.append(token == "1")
        if not times:
            raise InvalidInputError(f"{path}: no data rows")
    return SurvivalSample(times, events, require_positive=not allow_negative)


def _parse_sigma_grid(text: str) -> SigmaGrid:
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise ParseError(f"invalid sigma grid {text!r}; expected lo:hi:step") from exc
    return SigmaGrid.from_range(lo, hi, step)


def _parse_bandwidth_grid(text: str) -> KdeConfig:
    try:
        lo, hi, num = text.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError as exc:
        raise ParseError(f"invalid bandwidth grid {text!r}; expected lo:hi:count") from exc
    if num < 1 or lo <= 0 or hi < lo:
        raise ParseError(f"invalid bandwidth grid {text!r}")
    return KdeConfig(np.geomspace(lo, hi, num)) if num > 1 else KdeConfig([lo])


_DEFAULTS: dict[str, dict] = {
    "estimate": {
        "input": None, "p": 0.5, "B": 100_000, "sigma": None,
        "sigma_grid": "0.05:10:0.05", "h": 20, "seed": 0,
        "out_dir": None, "allow_negative": False,
    },
    "grid": {
        "input": None, "p": 0.5, "B": 100_000,
        "sigma_grid": "0.05:10:0.05", "h": 20, "seed": 0,
        "out_dir": None, "allow_negative": False,
    },
    "select": {
        "input": None, "p": 0.5, "B": 100_000,
        "sigma_grid": "0.05:10:0.05", "h": 20, "seed": 0,
        "out_dir": None, "allow_negative": False,
    },
    "kde": {
        "input": None, "p": 0.5, "bandwidth_grid": None,
        "allow_negative": False,
    },
    "simulate": {
        "scenario": "exp", "censoring": 0.25, "n": 200, "reps": 500,
        "B": 1000, "p": 0.5, "sigma_grid": "0.05:10:0.05", "h": 20,
        "seed": 0, "out_dir": None, "jobs": 1,
    },
    "mse-curve": {
        "scenario": "exp", "censoring": 0.25, "n": 200, "reps": 100,
        "B": 100_000, "p": 0.5, "sigma_grid": "0.05:15:0.05",
        "seed": 0, "out_dir": None, "jobs": 1,
    },
}

_BOOL_KEYS = {"allow_negative"}
_INT_KEYS = {"B", "h", "seed", "n", "reps", "jobs"}
_FLOAT_KEYS = {"p", "sigma", "censoring"}


def _read_config_section(path: str, command: str) -> dict:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case (B vs b)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ParseError(f"cannot open config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ParseError(f"bad config {path}: {exc}") from exc
    if not parser.has_section(command):
        return {}
    known = _DEFAULTS[command]
    out = {}
    for key, raw in parser.items(command):
        if key not in known:
            raise ParseError(f"{path}: unknown option {key!r} in section [{command}]")
        try:
            if key in _BOOL_KEYS:
                out[key] = parser.getboolean(command, key)
            elif key in _INT_KEYS:
                out[key] = int(raw)
            elif key in _FLOAT_KEYS:
                out[key] = float(raw)
            else:
                out[key] = raw
        except ValueError as exc:
            raise ParseError(f"{path}: option {key!r}: {exc}") from exc
    return out


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        cfg.update(_read_config_section(args.config, command))
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdensity",
        description="Density-at-quantile estimation for right-censored data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, with_input: bool):
        p.add_argument("--config", help="INI config file with a section per command")
        p.add_argument("--p", type=float, help="quantile level in (0,1)")
        if with_input:
            p.add_argument("--input", help="CSV file with columns time,event")
            p.add_argument(
                "--allow-negative",
                action=argparse.BooleanOptionalAction,
                dest="allow_negative",
                help="accept non-positive times",
            )
        p.add_argument("--out-dir", dest="out_dir", help="directory for output files")

    def add_ls_options(p):
        p.add_argument("--B", type=int, help="number of Gaussian draws")
        p.add_argument("--sigma-grid", dest="sigma_grid", help="grid as lo:hi:step")
        p.add_argument("--h", type=int, help="plateau neighborhood width")
        p.add_argument("--seed", type=int, help="random seed")

    p_est = sub.add_parser("estimate", help="density at the quantile (auto or fixed sigma)")
    add_common(p_est, with_input=True)
    add_ls_options(p_est)
    p_est.add_argument("--sigma", type=float, help="fixed perturbation sd (skips selection)")

    p_grid = sub.add_parser("grid", help="per-sigma estimates over the grid")
    add_common(p_grid, with_input=True)
    add_ls_options(p_grid)

    p_sel = sub.add_parser("select", help="plateau-based sigma selection")
    add_common(p_sel, with_input=True)
    add_ls_options(p_sel)

    p_kde = sub.add_parser("kde", help="IPCW kernel density at the quantile")
    add_common(p_kde, with_input=True)
    p_kde.add_argument(
        "--bandwidth-grid", dest="bandwidth_grid", help="log grid as lo:hi:count"
    )

    p_sim = sub.add_parser("simulate", help="Monte Carlo comparison table")
    add_common(p_sim, with_input=False)
    add_ls_options(p_sim)
    p_sim.add_argument("--scenario", choices=("exp", "cauchy"))
    p_sim.add_argument("--censoring", type=float, help="target censoring fraction")
    p_sim.add_argument("--n", type=int, help="sample size per replicate")
    p_sim.add_argument("--reps", type=int, help="Monte Carlo replications")
    p_sim.add_argument("--jobs", type=int, help="worker processes")

    p_curve = sub.add_parser("mse-curve", help="MSE as a function of sigma")
    add_common(p_curve, with_input=False)
    add_ls_options(p_curve)
    p_curve.add_argument("--scenario", choices=("exp", "cauchy"))
    p_curve.add_argument("--censoring", type=float)
    p_curve.add_argument("--n", type=int)
    p_curve.add_argument("--reps", type=int)
    p_curve.add_argument("--jobs", type=int)

    return parser


def _require_input(cfg: dict) -> SurvivalSample:
    if not cfg["input"]:
        raise InvalidInputError("--input is required for this command")
    return ingest_csv(cfg["input"], allow_negative=bool(cfg["allow_negative"]))


def _survival_model(name: str):
    # Built-in scenario presets: exponential rate 1.5, standard Cauchy.
    if name == "exp":
        return Exponential(rate=1.5)
    if name == "cauchy":
        return Cauchy()
    raise InvalidInputError(f"unknown scenario {name!r}")


def _print_kv(pairs):
    for key, value in pairs:
        print(f"{key:<10} {value}")


def _out_path(cfg: dict, filename: str) -> Path:
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / filename


def _cmd_estimate(cfg: dict) -> int:
    sample = _require_input(cfg)
    curve = km_fit(sample)
    q_hat = quantile(curve, cfg["p"]).q_hat
    pairs = [("p", f"{cfg['p']:.4f}"), ("q_hat", f"{q_hat:.4f}")]
    if cfg["sigma"] is not None:
        fit = ls_density(curve, cfg["p"], LsConfig(cfg["B"], cfg["sigma"], cfg["seed"]))
        pairs += [("sigma", f"{fit.config.sigma:.4f}"), ("density", f"{fit.value:.4f}")]
    else:
        grid = _parse_sigma_grid(cfg["sigma_grid"])
        trace = grid_estimates(curve, cfg["p"], grid, cfg["B"], cfg["seed"], h=cfg["h"])
        chosen = select_sigma(grid, trace)
        hits = np.flatnonzero(grid.values == chosen.sigma)
        if hits.size:
            value = float(trace.estimates[hits[0]])
        else:
            draws = normal_draws(cfg["seed"], (), cfg["B"])
            value = _ls_value(
                curve, q_hat, curve.n_obs, cfg["p"], chosen.sigma * draws
            )[0]
        lo, hi = chosen.plateau
        pairs += [
            ("sigma", f"{chosen.sigma:.4f}"),
            ("density", f"{value:.4f}"),
            ("stage", chosen.stage),
            ("plateau", f"{grid.values[lo]:.4f} {grid.values[hi]:.4f}"),
        ]
        if cfg["out_dir"]:
            table = XyTable(list(zip(grid.values.tolist(), trace.estimates.tolist())))
            emit_xy(table, _out_path(cfg, "estimates_vs_sigma.txt"))
    _print_kv(pairs)
    return 0


def _cmd_grid(cfg: dict) -> int:
    sample = _require_input(cfg)
    curve = km_fit(sample)
    grid = _parse_sigma_grid(cfg["sigma_grid"])
    trace = grid_estimates(curve, cfg["p"], grid, cfg["B"], cfg["seed"], h=cfg["h"])
    table = XyTable(list(zip(grid.values.tolist(), trace.estimates.tolist())))
    if cfg["out_dir"]:
        path = _out_path(cfg, "estimates_vs_sigma.txt")
        emit_xy(table, path)
        print(f"wrote {path}")
    else:
        sys.stdout.write(format_xy(table))
    return 0


def _cmd_select(cfg: dict) -> int:
    sample = _require_input(cfg)
    curve = km_fit(sample)
    grid = _parse_sigma_grid(cfg["sigma_grid"])
    trace = grid_estimates(curve, cfg["p"], grid, cfg["B"], cfg["seed"], h=cfg["h"])
    chosen = select_sigma(grid, trace)
    lo, hi = chosen.plateau
    _print_kv(
        [
            ("p", f"{cfg['p']:.4f}"),
            ("sigma", f"{chosen.sigma:.4f}"),
            ("stage", chosen.stage),
            ("plateau", f"{grid.values[lo]:.4f} {grid.values[hi]:.4f}"),
        ]
    )
    return 0


def _cmd_kde(cfg: dict) -> int:
    sample = _require_input(cfg)
    curve = km_fit(sample)
    q_hat = quantile(curve, cfg["p"]).q_hat
    cens_curve = km_fit_censoring(sample)
    config = (
        default_bandwidth_grid(sample)
        if cfg["bandwidth_grid"] is None
        else _parse_bandwidth_grid(cfg["bandwidth_grid"])
    )
    bandwidth = cv_bandwidth(sample, cens_curve, config)
    value = kde_density(sample, cens_curve, q_hat, bandwidth)
    _print_kv(
        [
            ("p", f"{cfg['p']:.4f}"),
            ("q_hat", f"{q_hat:.4f}"),
            ("bandwidth", f"{bandwidth:.4f}"),
            ("density", f"{value:.4f}"),
        ]
    )
    return 0


def _scenario_spec(cfg: dict) -> ScenarioSpec:
    return ScenarioSpec(
        survival=_survival_model(cfg["scenario"]),
        target_censoring=cfg["censoring"],
        n=cfg["n"],
        p=cfg["p"],
        replications=cfg["reps"],
        B=cfg["B"],
        master_seed=cfg["seed"],
    )


def _cmd_simulate(cfg: dict) -> int:
    spec = _scenario_spec(cfg)
    selector = GridSearch(grid=_parse_sigma_grid(cfg["sigma_grid"]), h=cfg["h"])
    result = run_comparison(spec, selector, jobs=cfg["jobs"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "n", "censoring", "method", "bias", "variance", "mse"])
    for row in result.rows:
        writer.writerow(
            [
                result.scenario,
                row.n,
                f"{row.censoring:g}",
                row.method,
                f"{row.bias:.4f}",
                f"{row.variance:.4f}",
                f"{row.mse:.4f}",
            ]
        )
    text = buf.getvalue()
    sys.stdout.write(text)
    if cfg["out_dir"]:
        with open(_out_path(cfg, "results.csv"), "w", newline="\n") as fh:
            fh.write(text)
        metadata = {
            "command": "simulate",
            "scenario": result.scenario,
            "n": spec.n,
            "censoring": spec.target_censoring,
            "replications": spec.replications,
            "B": spec.B,
            "p": spec.p,
            "seed": spec.master_seed,
            "true_density": result.true_density,
            "n_excluded": result.n_excluded,
            "n_used": result.n_used,
        }
        with open(_out_path(cfg, "run_metadata.json"), "w", newline="\n") as fh:
            json.dump(metadata, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def _cmd_mse_curve(cfg: dict) -> int:
    spec = _scenario_spec(cfg)
    grid = _parse_sigma_grid(cfg["sigma_grid"])
    points, n_excluded = mse_curve_detail(spec, grid, jobs=cfg["jobs"])
    table = XyTable([(pt.sigma, pt.mse) for pt in points])
    if cfg["out_dir"]:
        path = _out_path(cfg, "mse_vs_sigma.txt")
        emit_xy(table, path)
        print(f"wrote {path}")
        metadata = {
            "command": "mse-curve",
            "scenario": spec.survival.name,
            "n": spec.n,
            "censoring": spec.target_censoring,
            "replications": spec.replications,
            "B": spec.B,
            "p": spec.p,
            "seed": spec.master_seed,
            "n_excluded": n_excluded,
        }
        with open(_out_path(cfg, "run_metadata.json"), "w", newline="\n") as fh:
            json.dump(metadata, fh, sort_keys=True, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(format_xy(table))
    return 0


_HANDLERS = {
    "estimate": _cmd_estimate,
    "grid": _cmd_grid,
    "select": _cmd_select,
    "kde": _cmd_kde,
    "simulate": _cmd_simulate,
    "mse-curve": _cmd_mse_curve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args.command, args)
        return _HANDLERS[args.command](cfg)
    except QdensityError as exc:
        print(f"qdensity: error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
