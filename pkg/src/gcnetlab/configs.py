"""Structured-text configuration (INI: key = value, grouped sections).

A parsed configuration is a plain dict of sections, each a dict of
string values; that same dict is the manifest snapshot, so a run can be
reproduced from its manifest byte-for-byte. Shipped configurations live
in ``gcnetlab/configs/``: desk-scale profiles (reduced trajectory
counts and epochs, exact scenario constants frozen in) and paper-scale
profiles with the published hyperparameters.
"""

from __future__ import annotations

import configparser
from importlib import resources

import numpy as np

from .data import PROBLEMS
from .dynamics import (
    DroneParams,
    DroneSystem,
    LandingParams,
    LandingSystem,
    TransferParams,
    TransferSystem,
)
from .errors import ConfigError
from .network import Activation
from .ocp.bundle import BundleConfig
from .optim import TrainConfig
from .training import ExperimentConfig, network_spec


def read_ini(path) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def shipped_config(name: str) -> dict:
    """Load one of the configurations packaged with gcnetlab."""
    ref = resources.files("gcnetlab") / "configs" / f"{name}.ini"
    if not ref.is_file():
        raise ConfigError(f"no shipped config named {name!r}")
    with resources.as_file(ref) as path:
        return read_ini(path)


def _floats(text):
    return np.array([float(tok) for tok in str(text).split()])


def _require(cfg, section, context=""):
    if section not in cfg:
        raise ConfigError(f"missing [{section}] section{context}")
    return cfg[section]


def problem_name(cfg) -> str:
    sec = _require(cfg, "problem")
    name = sec.get("name", "").strip()
    if name not in PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}; expected one of {PROBLEMS}")
    return name


def system_params(cfg):
    name = problem_name(cfg)
    sec = _require(cfg, "system", f" for problem {name}")
    try:
        if name == "transfer":
            return TransferParams(mu=float(sec["mu"]), radius=float(sec["radius"]),
                                  gamma=float(sec["gamma"]))
        if name == "landing":
            return LandingParams(mu=float(sec["mu"]), omega=float(sec["omega"]),
                                 c1=float(sec["c1"]), isp=float(sec["isp"]),
                                 g0=float(sec["g0"]))
        return DroneParams(
            inertia=tuple(_floats(sec["inertia"])),
            k_x=float(sec["k_x"]), k_y=float(sec["k_y"]), k_omega=float(sec["k_omega"]),
            k_z=float(sec["k_z"]), k_h=float(sec["k_h"]),
            k_p=float(sec["k_p"]), k_pv=float(sec["k_pv"]),
            k_q=float(sec["k_q"]), k_qv=float(sec["k_qv"]),
            k_r1=float(sec["k_r1"]), k_r2=float(sec["k_r2"]), k_rr=float(sec["k_rr"]),
            tau=float(sec["tau"]),
            omega_min=float(sec["omega_min"]), omega_max=float(sec["omega_max"]),
            mass=float(sec.get("mass", 1.0)), g=float(sec.get("g", 9.81)),
            m_ext=tuple(_floats(sec.get("m_ext", "0 0 0"))),
        )
    except KeyError as exc:
        raise ConfigError(f"[system] missing key {exc.args[0]!r} for {name}") from exc


def build_system(cfg):
    name = problem_name(cfg)
    params = system_params(cfg)
    if name == "transfer":
        target = scenario_target(cfg)
        return TransferSystem(params, target)
    if name == "landing":
        return LandingSystem(params, scenario_target(cfg))
    return DroneSystem(params)


def scenario_target(cfg):
    sec = _require(cfg, "scenario")
    return _floats(sec["target"])


def scenario_values(cfg):
    name = problem_name(cfg)
    if name == "drone":
        raise ConfigError("the drone problem has no shooting scenario; ingest data instead")
    sec = _require(cfg, "scenario")
    try:
        x0 = _floats(sec["x0"])
        target = _floats(sec["target"])
    except KeyError as exc:
        raise ConfigError(f"[scenario] missing key {exc.args[0]!r}") from exc
    warm = _floats(sec["warm_start"]) if "warm_start" in sec else None
    sd = {"transfer": 6, "landing": 7}[name]
    if len(x0) != sd:
        raise ConfigError(f"[scenario] x0 needs {sd} components for {name}")
    if len(target) != 6:
        raise ConfigError("[scenario] target needs 6 components (position, velocity)")
    return x0, target, warm


def bundle_config(cfg) -> BundleConfig:
    sec = _require(cfg, "bundle")
    try:
        kwargs = dict(
            n_trajectories=int(sec["trajectories"]),
            seed=int(sec["seed"]),
        )
    except KeyError as exc:
        raise ConfigError(f"[bundle] missing key {exc.args[0]!r}") from exc
    if "samples" in sec:
        kwargs["samples_per_trajectory"] = int(sec["samples"])
    if "abs_half_widths" in sec:
        kwargs["abs_half_widths"] = tuple(_floats(sec["abs_half_widths"]))
    if "rel_half_widths" in sec:
        kwargs["rel_half_widths"] = tuple(_floats(sec["rel_half_widths"]))
    for key in ("duration_scale", "primer_scale", "costate_scale", "mass_scale",
                "min_convergence", "tol"):
        if key in sec:
            kwargs[key] = float(sec[key])
    if "draw_budget" in sec:
        kwargs["draw_budget"] = int(sec["draw_budget"])
    return BundleConfig(**kwargs)


def parse_activation(text, omega0: float = 30.0) -> Activation:
    kind = str(text).strip().lower()
    if kind == "sine":
        return Activation.sine(omega0)
    if kind == "relu":
        return Activation.relu()
    if kind == "softplus":
        return Activation.softplus()
    raise ConfigError(f"unknown hidden activation {text!r}")


def experiment_config(cfg) -> ExperimentConfig:
    name = problem_name(cfg)
    net = _require(cfg, "network")
    tr = _require(cfg, "training")
    omega0 = float(net.get("omega0", 30.0))
    activation = parse_activation(net.get("activation", "sine"), omega0)
    hidden = [int(w) for w in str(net.get("hidden", "128 128 128")).split()]
    try:
        tc = TrainConfig(
            learning_rate=float(tr.get("learning_rate", 5e-5)),
            batch_size=int(tr["batch_size"]),
            epochs=int(tr["epochs"]),
            scheduler_factor=float(tr.get("scheduler_factor", 0.9)),
            scheduler_patience=int(tr.get("scheduler_patience", 10)),
            weight_decay=float(tr.get("weight_decay", 0.0)),
            seed=int(tr.get("seed", 0)),
        )
    except KeyError as exc:
        raise ConfigError(f"[training] missing key {exc.args[0]!r}") from exc
    return ExperimentConfig(
        name,
        network_spec(name, hidden, activation),
        tc,
        train_fraction=float(tr.get("train_fraction", 0.8)),
        split_seed=int(tr.get("split_seed", 0)),
    )


def evaluation_settings(cfg):
    sec = cfg.get("evaluation", {})
    return {
        "cases": int(sec.get("cases", 100)),
        "dt_divisor": int(sec.get("dt_divisor", 1000)),
        "seed": int(sec.get("seed", 0)),
        "use_best": str(sec.get("checkpoint", "best")).strip() == "best",
    }
