"""Command-line entry point.

Subcommands: simulate-path | build-phi | solve | oscillatory | corrector |
covariance | taqqu | hermite-path.  Each run writes a manifest plus CSV
tables (and gnuplot-ready .dat files for report modes) into the output
directory.  All randomness flows from the config seed, so reruns with the
same config produce byte-identical numeric files.  Exit codes: 0 success,
1 usage, 2 invalid configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from .config import (
    config_hash,
    experiment_from,
    kernel_from,
    load_config,
    phi_from,
)
from .errors import OscillabError, ParameterError
from .hermite_core import coefficient_sampler
from .hermite_process import HermiteProcessConfig, simulate_Z
from .homogenize1d import ProblemSpec, decompose, sample_fast_path, solve_random
from .limit_lab import run_convergence
from .lrd_gauss import simulate_path

SUBCOMMANDS = (
    "simulate-path",
    "build-phi",
    "solve",
    "oscillatory",
    "corrector",
    "covariance",
    "taqqu",
    "hermite-path",
)

USAGE = (
    "usage: oscillab <subcommand> [options]\n"
    f"subcommands: {' | '.join(SUBCOMMANDS)}\n"
    "run 'oscillab <subcommand> --help' for options"
)


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format(v) for v in row) + "\n")


def write_dat(path: str, columns, rows) -> None:
    with open(path, "w") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for row in rows:
            fh.write(" ".join(_format(v) for v in row) + "\n")


def _write_manifest(out_dir: str, cfg: dict, seed_base, outputs) -> None:
    manifest = {
        "config_hash": config_hash(cfg),
        "seed_base": seed_base,
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": sorted(outputs),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.bool_,)):
        return bool(value)
    raise TypeError(f"not JSON serializable: {type(value)}")


def _cmd_simulate_path(args) -> list[str]:
    cfg = load_config(args.config)
    kernel = kernel_from(cfg)
    path = simulate_path(
        kernel,
        n=int(cfg.get("n", 1000)),
        delta=float(cfg.get("delta", 0.1)),
        window=float(cfg.get("window", 200.0)),
        seed=int(cfg.get("seed", 0)),
        truncation_tol=float(cfg.get("truncation_tol", 1e-4)),
    )
    out = os.path.join(args.out, "path.csv")
    write_csv(out, ["x", "g"], zip(path.grid, path.values))
    return [out]


def _cmd_hermite_path(args) -> list[str]:
    cfg = load_config(args.config)
    z_cfg = HermiteProcessConfig(
        m=int(cfg.get("m", 1)),
        h0=float(cfg.get("h0", 0.75)),
        t_max=float(cfg.get("t_max", 1.0)),
        n_grid=int(cfg.get("n_grid", 100)),
        delta_xi=cfg.get("delta_xi"),
        t_left=cfg.get("t_left"),
        seed=int(cfg.get("seed", 0)),
    )
    path = simulate_Z(z_cfg)
    out = os.path.join(args.out, "hermite_path.csv")
    write_csv(out, ["t", "Z"], zip(path.times, path.values))
    return [out]


def _cmd_build_phi(args) -> list[str]:
    cfg = load_config(args.config)
    phi = phi_from(cfg)
    out = os.path.join(args.out, "phi_expansion.csv")
    write_csv(
        out,
        ["q", "V_q"],
        ((q, v) for q, v in enumerate(phi.expansion.coeffs)),
    )
    return [out]


def _solve_config(args) -> dict:
    return {
        "epsilon": args.epsilon,
        "b": args.b,
        "f": args.f,
        "m": args.m,
        "h0": args.h0,
        "seed": args.seed,
        "a_star": args.a_star,
        "cells": args.cells,
        "phi_method": args.phi_method,
    }


def _cmd_solve(args) -> list[str]:
    from .limit_lab import _source_fn

    cfg = _solve_config(args)
    kernel = kernel_from({"m": args.m, "h0": args.h0})
    phi = phi_from(
        {"phi": {"method": args.phi_method, "m": args.m, "a_star": args.a_star}},
        default_m=args.m,
    )
    sampler = coefficient_sampler(phi, args.a_star)
    cells = args.cells
    spec = ProblemSpec(
        f=_source_fn(args.f),
        b=args.b,
        epsilon=args.epsilon,
        coeff=sampler,
        quad_grid=cells,
    )
    path = sample_fast_path(kernel, args.epsilon, cells, seed=args.seed)
    pair = solve_random(spec, path)
    dec = decompose(spec, path, pair)
    out = os.path.join(args.out, "solution.csv")
    write_csv(
        out,
        ["x", "u_eps", "u_bar", "corrector", "U_eps"],
        zip(
            pair.grid,
            pair.u_eps,
            pair.u_bar,
            pair.u_eps - pair.u_bar,
            dec.u_limit_term,
        ),
    )
    return [out], cfg


def _report_outputs(args, report, table_spec) -> list[str]:
    outputs = []
    report_path = os.path.join(args.out, "report.json")
    with open(report_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    outputs.append(report_path)
    columns, rows = table_spec
    csv_path = os.path.join(args.out, "table.csv")
    write_csv(csv_path, columns, rows)
    outputs.append(csv_path)
    dat_path = os.path.join(args.out, "table.dat")
    write_dat(dat_path, columns, rows)
    outputs.append(dat_path)
    return outputs


def _cmd_report_mode(args, mode: str) -> list[str]:
    cfg = load_config(args.config)
    config = experiment_from(cfg, mode)
    report = run_convergence(config)
    if mode == "oscillatory":
        columns = ["epsilon", "mean", "variance", "energy_distance", "energy_p"]
        rows = [
            (
                lvl["epsilon"],
                lvl["summary"]["mean"],
                lvl["summary"]["variance"],
                lvl["energy_distance"],
                lvl["energy_p"],
            )
            for lvl in report.levels
        ]
    elif mode == "corrector":
        columns = ["epsilon", "energy_distance", "energy_p", "rho_ratio"]
        rows = [
            (lvl["epsilon"], lvl["energy_distance"], lvl["energy_p"], lvl["rho_ratio"])
            for lvl in report.levels
        ]
    elif mode == "covariance":
        columns = ["lag", "r_q_chaos", "r_q_mc", "asymptote_ratio"]
        rows = [
            (lvl["lag"], lvl["r_q_chaos"], lvl["r_q_mc"], lvl["asymptote_ratio"])
            for lvl in report.levels
        ]
    else:
        columns = ["horizon", "variance_mc", "se_variance", "variance_oracle"]
        rows = [
            (
                lvl["horizon"],
                lvl["variance_mc"],
                lvl["se_variance"],
                lvl["variance_oracle"],
            )
            for lvl in report.levels
        ]
    return _report_outputs(args, report, (columns, rows))


def _build_parser(subcommand: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=f"oscillab {subcommand}", add_help=True)
    parser.add_argument("--out", default=".", help="output directory")
    if subcommand == "solve":
        parser.add_argument("--epsilon", type=float, required=True)
        parser.add_argument("--b", type=float, default=1.0)
        parser.add_argument("--f", default="const", help="source: const | linear | sin")
        parser.add_argument("--m", type=int, default=1)
        parser.add_argument("--h0", type=float, default=0.75)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--a-star", dest="a_star", type=float, default=1.0)
        parser.add_argument("--cells", type=int, default=1000)
        parser.add_argument(
            "--phi-method", dest="phi_method", default="ou_vandermonde",
            help="pure_hermite | rank2_bounded | ou_vandermonde",
        )
    else:
        parser.add_argument("--config", required=True, help="JSON config path")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return 0 if argv else 1
    subcommand, rest = argv[0], argv[1:]
    if subcommand not in SUBCOMMANDS:
        print(f"unknown subcommand: {subcommand!r}", file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 1
    parser = _build_parser(subcommand)
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        os.makedirs(args.out, exist_ok=True)
        if subcommand == "simulate-path":
            cfg = load_config(args.config)
            outputs = _cmd_simulate_path(args)
            seed = cfg.get("seed", 0)
        elif subcommand == "hermite-path":
            cfg = load_config(args.config)
            outputs = _cmd_hermite_path(args)
            seed = cfg.get("seed", 0)
        elif subcommand == "build-phi":
            cfg = load_config(args.config)
            outputs = _cmd_build_phi(args)
            seed = cfg.get("seed", 0)
        elif subcommand == "solve":
            outputs, cfg = _cmd_solve(args)
            seed = args.seed
        else:
            cfg = load_config(args.config)
            outputs = _cmd_report_mode(args, subcommand)
            seed = cfg.get("seed_base", 0)
        _write_manifest(args.out, cfg, seed, [os.path.basename(o) for o in outputs])
        return 0
    except ParameterError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OscillabError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
