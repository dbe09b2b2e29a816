"""JSON experiment configs: parsing, validation, and object construction.

Configs are plain JSON dicts.  A kernel block is
{"m": 1, "h0": 0.75, "slowly_varying": {"kind": "log_power", "p": 1.0}};
a transform block names one of the construction methods; integrands are
either named functions on [0, 1] or explicit step specifications.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ParameterError
from .hermite_core import (
    RankedFunction,
    construct_rank_2_bounded,
    construct_rank_m,
    logistic,
    pure_hermite,
    shifted_logistic,
    zero_transform,
)
from .hermite_process import IntegrandFn, continuous_integrand, step_integrand
from .limit_lab import ExperimentConfig
from .lrd_gauss import CONSTANT_ONE, KernelSpec, SlowVaryingSpec

__all__ = [
    "load_config",
    "config_hash",
    "kernel_from",
    "phi_from",
    "integrand_from",
    "experiment_from",
    "NAMED_INTEGRANDS",
    "NAMED_PSI",
]

NAMED_PSI = {"logistic": logistic, "shifted_logistic": shifted_logistic}


def _named_integrands() -> dict:
    return {
        "one": continuous_integrand(lambda y: np.ones_like(y), 0.0, 1.0),
        "indicator_half": step_integrand([0.0, 0.5], [1.0]),
        "sin_pi": continuous_integrand(lambda y: np.sin(np.pi * y), 0.0, 1.0),
        "linear": continuous_integrand(lambda y: np.asarray(y, dtype=float), 0.0, 1.0),
    }


NAMED_INTEGRANDS = _named_integrands()


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ParameterError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ParameterError("config root must be a JSON object")
    return cfg


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _require(cfg: dict, key: str, context: str):
    if key not in cfg:
        raise ParameterError(f"{context}: missing required key {key!r}")
    return cfg[key]


def kernel_from(cfg: dict) -> KernelSpec:
    block = cfg.get("kernel", cfg)
    m = int(_require(block, "m", "kernel"))
    h0 = float(_require(block, "h0", "kernel"))
    sv_block = block.get("slowly_varying")
    if sv_block is None:
        sv = CONSTANT_ONE
    else:
        sv = SlowVaryingSpec(
            kind=str(sv_block.get("kind", "constant_one")),
            p=float(sv_block.get("p", 0.0)),
        )
    gamma = block.get("gamma")
    return KernelSpec(m=m, h0=h0, slowly_varying=sv, gamma=gamma)


def phi_from(cfg: dict, default_m: int | None = None) -> RankedFunction:
    block = cfg.get("phi", {})
    method = block.get("method", "pure_hermite")
    m = int(block.get("m", default_m if default_m is not None else 1))
    a_star = float(block.get("a_star", cfg.get("a_star", 1.0)))
    if method == "pure_hermite":
        return pure_hermite(m)
    if method == "zero":
        return zero_transform(m)
    if method == "rank2_bounded":
        return construct_rank_2_bounded(a_star)
    if method == "ou_vandermonde":
        nodes = block.get("nodes")
        psi_name = block.get("psi", "shifted_logistic")
        if psi_name not in NAMED_PSI:
            raise ParameterError(
                f"phi.psi must be one of {sorted(NAMED_PSI)}, got {psi_name!r}"
            )
        return construct_rank_m(m, a_star, psi=NAMED_PSI[psi_name], nodes=nodes)
    raise ParameterError(
        f"phi.method must be pure_hermite | rank2_bounded | ou_vandermonde | zero, got {method!r}"
    )


def integrand_from(cfg: dict) -> IntegrandFn:
    block = cfg.get("h", "one")
    if isinstance(block, str):
        name = block
    elif isinstance(block, dict) and "name" in block:
        name = block["name"]
    elif isinstance(block, dict) and "step" in block:
        step = block["step"]
        return step_integrand(step["breakpoints"], step["levels"])
    else:
        raise ParameterError("h must be a named integrand or a step specification")
    if name not in NAMED_INTEGRANDS:
        raise ParameterError(
            f"unknown integrand {name!r}; use one of {sorted(NAMED_INTEGRANDS)}"
        )
    return NAMED_INTEGRANDS[name]


def experiment_from(cfg: dict, mode: str) -> ExperimentConfig:
    kernel = kernel_from(cfg)
    phi = phi_from(cfg, default_m=kernel.m)
    if phi.declared_rank != kernel.m:
        raise ParameterError(
            f"phi rank {phi.declared_rank} does not match kernel m={kernel.m}"
        )
    kwargs = {}
    for key in (
        "replicas",
        "seed_base",
        "resolution",
        "window",
        "truncation_tol",
        "a_star",
        "b",
        "source",
        "permutations",
        "z_grid",
        "time_step",
    ):
        if key in cfg:
            kwargs[key] = cfg[key]
    for key, cast in (
        ("epsilons", tuple),
        ("probes", tuple),
        ("lags", tuple),
        ("horizons", tuple),
    ):
        if key in cfg:
            kwargs[key] = cast(cfg[key])
    return ExperimentConfig(
        kernel=kernel,
        phi=phi,
        mode=mode,
        h=integrand_from(cfg),
        **kwargs,
    )
