"""Command-line entry point: generate, ingest, train, compare, eval,
inspect.

Every command writes a manifest into its output directory holding the
fully resolved configuration snapshot; rerunning with
``--from-manifest`` reproduces the primary outputs byte for byte.

Exit codes: 0 success, 2 configuration error, 3 I/O or file-format
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .checkpoint import read_network, write_network
from .configs import (
    build_system,
    bundle_config,
    evaluation_settings,
    experiment_config,
    parse_activation,
    problem_name,
    read_ini,
    scenario_values,
    shipped_config,
    system_params,
)
from .data import (
    PROBLEM_DIMS,
    ScalingTransform,
    SplitSpec,
    export_csv,
    import_csv,
    read_dataset,
    split,
    write_dataset,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    CorruptHeaderError,
    DatasetError,
    DimensionMismatchError,
    GCNetError,
    GimbalLockError,
    NonFiniteError,
    ProblemMismatchError,
    SingularStateError,
    TruncatedDataError,
)
from .evaluation import build_eval_cases, emit_report, evaluate
from .manifest import read_manifest, write_manifest
from .ocp.bundle import generate_bundle
from .ocp.shooting import BANGBANG_SCHEDULE, solve_landing, solve_transfer
from .training import compare_activations, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def _load_config(args) -> dict:
    given = sum(x is not None for x in (args.config, args.profile, args.from_manifest))
    if given != 1:
        raise ConfigError("give exactly one of --config, --profile, --from-manifest")
    if args.from_manifest:
        doc = read_manifest(args.from_manifest)
        return doc["snapshot"]
    if args.profile:
        return {"_config": shipped_config(args.profile)}
    return {"_config": read_ini(args.config)}


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("GCNETLAB_THREADS")
    return max(1, int(env)) if env else 1


# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    snapshot = _load_config(args)
    cfg = snapshot["_config"]
    if args.trajectories is not None:
        cfg.setdefault("bundle", {})["trajectories"] = str(args.trajectories)
    if args.seed is not None:
        cfg.setdefault("bundle", {})["seed"] = str(args.seed)

    name = problem_name(cfg)
    if name == "drone":
        raise ConfigError("the drone problem is ingest-only; use `gcnetlab ingest`")
    params = system_params(cfg)
    x0, target, warm = scenario_values(cfg)
    bcfg = bundle_config(cfg)

    if name == "transfer":
        nominal = solve_transfer(x0, params, target=target, guess=warm)
    else:
        schedule = BANGBANG_SCHEDULE if warm is None else (0.0,)
        nominal = solve_landing(x0, params, target, guess=warm, schedule=schedule)
    logger.info("nominal solved: tf=%g residual=%g", nominal.tf, nominal.residual_norm)
    dataset, report = generate_bundle(nominal, params, bcfg, workers=_threads(args))

    os.makedirs(args.out, exist_ok=True)
    data_path = os.path.join(args.out, "dataset.gcdt")
    write_dataset(data_path, dataset)
    report_path = os.path.join(args.out, "generation_report.txt")
    with open(report_path, "w") as fh:
        fh.write(report.summary() + "\n")
    write_manifest(args.out, "generate", snapshot, outputs=[data_path, report_path])
    print(report.summary())
    print(f"wrote {data_path}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    dataset = import_csv(args.csv, args.problem)
    os.makedirs(args.out, exist_ok=True)
    data_path = os.path.join(args.out, "dataset.gcdt")
    write_dataset(data_path, dataset)
    snapshot = {"csv": os.path.abspath(args.csv), "problem": args.problem}
    write_manifest(args.out, "ingest", snapshot, inputs=[args.csv], outputs=[data_path])
    sd, cd = PROBLEM_DIMS[args.problem]
    print(f"ingested {dataset.n_trajectories} trajectories x "
          f"{dataset.samples_per_trajectory} samples (state_dim {sd}, control_dim {cd})")
    print(f"wrote {data_path}")
    return EXIT_OK


def _resolve_dataset(args, snapshot) -> str:
    path = args.dataset or snapshot.get("_dataset")
    if not path:
        raise ConfigError("a --dataset path is required")
    if not os.path.exists(path):
        raise ConfigError(f"dataset file {path!r} does not exist")
    snapshot["_dataset"] = os.path.abspath(path)
    return path


def cmd_train(args) -> int:
    snapshot = _load_config(args)
    cfg = snapshot["_config"]
    if args.activation:
        cfg.setdefault("network", {})["activation"] = args.activation
    if args.epochs is not None:
        cfg.setdefault("training", {})["epochs"] = str(args.epochs)
    if args.seed is not None:
        cfg.setdefault("training", {})["seed"] = str(args.seed)
    data_path = _resolve_dataset(args, snapshot)
    exp = experiment_config(cfg)
    dataset = read_dataset(data_path, expect_problem=exp.problem)
    result = train(dataset, exp, out_dir=args.out)
    outputs = [os.path.join(args.out, n)
               for n in ("final.gcnet", "best.gcnet", "losscurve.csv", "scaler.json")]
    write_manifest(args.out, "train", snapshot, inputs=[data_path], outputs=outputs)
    print(f"trained {exp.spec.hidden_activation.kind} network for {exp.train.epochs} epochs: "
          f"final train loss {result.curve.train_loss[-1]:.6e}, "
          f"best validation {result.curve.val_loss[result.best_epoch]:.6e} "
          f"at epoch {result.best_epoch}")
    return EXIT_OK


def cmd_compare(args) -> int:
    snapshot = _load_config(args)
    cfg = snapshot["_config"]
    if args.activations:
        snapshot["_activations"] = args.activations
    acts_text = snapshot.get("_activations", "sine,relu,softplus")
    omega0 = float(cfg.get("network", {}).get("omega0", 30.0))
    activations = [parse_activation(tok, omega0) for tok in acts_text.split(",") if tok]
    data_path = _resolve_dataset(args, snapshot)
    exp = experiment_config(cfg)
    dataset = read_dataset(data_path, expect_problem=exp.problem)
    report = compare_activations(dataset, exp, activations, out_dir=args.out)
    outputs = [os.path.join(args.out, "curves.csv"), os.path.join(args.out, "summary.txt")]
    write_manifest(args.out, "compare", snapshot, inputs=[data_path], outputs=outputs)
    print(report.summary())
    return EXIT_OK


def cmd_eval(args) -> int:
    snapshot = _load_config(args)
    cfg = snapshot["_config"]
    if args.cases is not None:
        cfg.setdefault("evaluation", {})["cases"] = str(args.cases)
    data_path = _resolve_dataset(args, snapshot)
    if args.checkpoint:
        snapshot["_checkpoint"] = os.path.abspath(args.checkpoint)
    if args.scaler:
        snapshot["_scaler"] = os.path.abspath(args.scaler)
    ckpt_path = snapshot.get("_checkpoint")
    scaler_path = snapshot.get("_scaler")
    if not ckpt_path or not scaler_path:
        raise ConfigError("--checkpoint and --scaler are required")
    for p in (ckpt_path, scaler_path):
        if not os.path.exists(p):
            raise ConfigError(f"input file {p!r} does not exist")

    exp = experiment_config(cfg)
    dataset = read_dataset(data_path, expect_problem=exp.problem)
    network = read_network(ckpt_path)
    with open(scaler_path) as fh:
        doc = json.load(fh)
    if doc.get("problem") != exp.problem:
        raise ConfigError(f"scaler belongs to {doc.get('problem')!r}, not {exp.problem!r}")
    scaler = ScalingTransform.from_dict(doc)

    ev = evaluation_settings(cfg)
    system = build_system(cfg)
    _, validation = split(dataset, SplitSpec(exp.train_fraction, exp.split_seed))
    cases = build_eval_cases(validation, ev["cases"], system.target, seed=ev["seed"])
    label = args.label or network.spec.hidden_activation.kind
    report = evaluate(network, scaler, system, cases, dt_divisor=ev["dt_divisor"], label=label)
    written = emit_report([report], args.out)
    write_manifest(args.out, "eval", snapshot,
                   inputs=[data_path, ckpt_path, scaler_path], outputs=written)
    mp, mv = report.mean_errors()
    print(f"{label}: mean position error {mp:.6e}, mean velocity error {mv:.6e} "
          f"over {report.n_cases} cases ({report.aggregate()['failures']} failures)")
    return EXIT_OK


def cmd_inspect(args) -> int:
    path = args.path
    if os.path.isdir(path):
        path = os.path.join(path, "manifest.json")
    if not os.path.exists(path):
        raise ConfigError(f"nothing to inspect at {args.path!r}")
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head[:4] == b"GCDT":
        ds = read_dataset(path)
        print(f"dataset: problem={ds.problem} trajectories={ds.n_trajectories} "
              f"samples={ds.samples_per_trajectory} state_dim={ds.state_dim} "
              f"control_dim={ds.control_dim} aux_dim={ds.aux.shape[1]}")
        print(f"tf range [{ds.tfs.min():.6g}, {ds.tfs.max():.6g}]")
    elif head == b"GCNET":
        net = read_network(path)
        spec = net.spec
        n = sum(w.size for w in net.weights) + sum(b.size for b in net.biases)
        print(f"network: {spec.input_dim} -> {list(spec.hidden_widths)} -> {spec.output_dim}")
        print(f"hidden activation: {spec.hidden_activation.kind}"
              + (f" (omega0={spec.hidden_activation.omega0})"
                 if spec.hidden_activation.kind == "sine" else ""))
        print(f"output heads: {' '.join(h.kind for h in spec.output_heads)}")
        print(f"parameters: {n}")
    else:
        doc = read_manifest(path)
        print(json.dumps(doc, indent=1, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_config_options(p):
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--profile", help="name of a shipped configuration (e.g. transfer_desk)")
    p.add_argument("--from-manifest", help="reproduce a previous run from its manifest")


def build_parser():
    parser = argparse.ArgumentParser(prog="gcnetlab",
                                     description="guidance & control network laboratory")
    parser.add_argument("--version", action="version", version=f"gcnetlab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="solve a bundle of optimal trajectories")
    _add_config_options(p)
    p.add_argument("--out", required=True)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="convert an externally produced CSV dataset")
    p.add_argument("--csv", required=True)
    p.add_argument("--problem", required=True, choices=("drone", "landing", "transfer"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="behavioural-clone a network on a dataset")
    _add_config_options(p)
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--activation", choices=("sine", "relu", "softplus"))
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="train one network per activation, identical schedule")
    _add_config_options(p)
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--activations", help="comma-separated, e.g. sine,relu,softplus")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("eval", help="closed-loop evaluation of a trained network")
    _add_config_options(p)
    p.add_argument("--dataset")
    p.add_argument("--checkpoint")
    p.add_argument("--scaler")
    p.add_argument("--out", required=True)
    p.add_argument("--cases", type=int)
    p.add_argument("--label")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="summarize a dataset, checkpoint or manifest")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ProblemMismatchError, DimensionMismatchError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorruptHeaderError, TruncatedDataError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, NonFiniteError, SingularStateError, GimbalLockError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, DatasetError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
