"""Behavioural-cloning training loop and activation comparisons."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .backprop import backward
from .checkpoint import write_network
from .data import ScalingTransform, SplitSpec, TrajectoryDataset, batches, fit_scaler, split
from .errors import ConfigError, NonFiniteError
from .losses import default_loss
from .network import Activation, Network, NetworkSpec, init_network
from .optim import AdamState, PlateauScheduler, TrainConfig, adam_step

logger = logging.getLogger(__name__)

PROBLEM_INPUT_DIMS = {"drone": 16, "landing": 7, "transfer": 6}
PROBLEM_OUTPUT_DIMS = {"drone": 4, "landing": 4, "transfer": 3}


def output_heads(problem: str) -> tuple:
    """Per-problem output heads: bounded throttles are sigmoid, thrust
    directions stay linear."""
    if problem == "drone":
        return (Activation.sigmoid(),) * 4
    if problem == "landing":
        return (Activation.sigmoid(),) + (Activation.linear(),) * 3
    return (Activation.linear(),) * 3


def network_spec(problem: str, hidden_widths, activation: Activation) -> NetworkSpec:
    return NetworkSpec(
        PROBLEM_INPUT_DIMS[problem],
        tuple(hidden_widths),
        PROBLEM_OUTPUT_DIMS[problem],
        activation,
        output_heads(problem),
    )


@dataclass
class ExperimentConfig:
    problem: str
    spec: NetworkSpec
    train: TrainConfig
    loss: str = None
    train_fraction: float = 0.8
    split_seed: int = 0

    def __post_init__(self):
        if self.loss is None:
            self.loss = default_loss(self.problem)
        expected = default_loss(self.problem)
        if self.loss != expected:
            raise ConfigError(f"{self.problem} pairs with the {expected!r} loss, got {self.loss!r}")
        if self.spec.input_dim != PROBLEM_INPUT_DIMS[self.problem]:
            raise ConfigError("network input dimension does not match the problem")
        if self.spec.output_dim != PROBLEM_OUTPUT_DIMS[self.problem]:
            raise ConfigError("network output dimension does not match the problem")
        if tuple(h.kind for h in self.spec.output_heads) != tuple(
            h.kind for h in output_heads(self.problem)
        ):
            raise ConfigError("output heads do not match the problem convention")


@dataclass
class LossCurve:
    train_loss: np.ndarray
    val_loss: np.ndarray
    lr: np.ndarray

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("epoch,train_loss,val_loss,lr\n")
            for e, (a, b, c) in enumerate(zip(self.train_loss, self.val_loss, self.lr)):
                fh.write(f"{e},{float(a)!r},{float(b)!r},{float(c)!r}\n")

    @staticmethod
    def from_csv(path):
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return LossCurve(rows[:, 1].copy(), rows[:, 2].copy(), rows[:, 3].copy())


@dataclass
class TrainResult:
    network: Network            # final epoch
    best_network: Network       # lowest validation loss
    curve: LossCurve
    scaler: ScalingTransform
    best_epoch: int


def weights_digest(net: Network) -> str:
    h = hashlib.sha256()
    for w, b in zip(net.weights, net.biases):
        h.update(w.tobytes())
        h.update(b.tobytes())
    return h.hexdigest()


def _dataset_loss(net, states, controls, kind, chunk=16384):
    total = 0.0
    n = len(states)
    for start in range(0, n, chunk):
        xs = states[start:start + chunk]
        pred = net.forward(xs)
        from .losses import loss_value

        total += loss_value(kind, pred, controls[start:start + chunk]) * len(xs)
    return total / n


def train(dataset: TrajectoryDataset, config: ExperimentConfig, out_dir=None) -> TrainResult:
    """Clone the dataset's optimal controls into a network.

    Deterministic given the config seeds: initialization, batch order,
    and the optimizer trajectory are all reproducible. The validation
    pass never touches parameters. Checkpoints (final and best
    validation) land in ``out_dir`` when given.
    """
    if dataset.problem != config.problem:
        raise ConfigError(f"dataset holds {dataset.problem!r}, config wants {config.problem!r}")
    tc = config.train
    train_split, val_split = split(dataset, SplitSpec(config.train_fraction, config.split_seed))
    scaler = fit_scaler(train_split)
    val_states = scaler.check_range(val_split.flat_states(), "validation states")
    val_controls = val_split.flat_controls()

    net = init_network(config.spec, tc.seed)
    adam = AdamState(net)
    sched = PlateauScheduler(lr=tc.learning_rate, factor=tc.scheduler_factor,
                             patience=tc.scheduler_patience)
    train_hist, val_hist, lr_hist = [], [], []
    best_val = np.inf
    best_epoch = -1
    best_net = net.copy()
    for epoch in range(tc.epochs):
        epoch_sum = 0.0
        n_seen = 0
        for xs, ys in batches(train_split, scaler, tc.batch_size, (tc.seed, 1 + epoch)):
            try:
                value, gw, gb = backward(net, xs, ys, config.loss)
            except NonFiniteError as exc:
                raise NonFiniteError(f"epoch {epoch}, batch at sample {n_seen}: {exc}") from exc
            adam_step(adam, net, gw, gb, sched.lr, tc.weight_decay)
            epoch_sum += value * len(xs)
            n_seen += len(xs)
        train_loss = epoch_sum / n_seen
        val_loss = _dataset_loss(net, val_states, val_controls, config.loss)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise NonFiniteError(f"non-finite loss at epoch {epoch}")
        lr_hist.append(sched.lr)
        sched.step(train_loss)
        train_hist.append(train_loss)
        val_hist.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_net = net.copy()
        logger.debug("epoch %d: train %.3e val %.3e lr %.3e", epoch, train_loss, val_loss, sched.lr)

    curve = LossCurve(np.array(train_hist), np.array(val_hist), np.array(lr_hist))
    result = TrainResult(net, best_net, curve, scaler, best_epoch)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_network(os.path.join(out_dir, "final.gcnet"), net)
        write_network(os.path.join(out_dir, "best.gcnet"), best_net)
        curve.to_csv(os.path.join(out_dir, "losscurve.csv"))
        with open(os.path.join(out_dir, "scaler.json"), "w") as fh:
            json.dump({"problem": config.problem, **scaler.to_dict()}, fh, indent=1)
    return result


@dataclass
class ComparisonReport:
    problem: str
    results: dict          # activation kind -> TrainResult
    final_train: dict      # activation kind -> float

    def ordering(self):
        return sorted(self.final_train, key=self.final_train.get)

    def summary(self) -> str:
        lines = [f"problem: {self.problem}", "final training loss:"]
        for kind in self.ordering():
            lines.append(f"  {kind:10s} {self.final_train[kind]:.6e}")
        lines.append(f"lowest: {self.ordering()[0]}")
        return "\n".join(lines)


def compare_activations(dataset: TrajectoryDataset, config: ExperimentConfig,
                        activations, out_dir=None) -> ComparisonReport:
    """Train once per activation under identical data, seeds and
    schedule; only the initialization scheme and nonlinearity differ."""
    if len(activations) < 1:
        raise ConfigError("need at least one activation to compare")
    results = {}
    for act in activations:
        spec = NetworkSpec(config.spec.input_dim, config.spec.hidden_widths,
                           config.spec.output_dim, act, config.spec.output_heads)
        sub = ExperimentConfig(config.problem, spec, config.train, config.loss,
                               config.train_fraction, config.split_seed)
        sub_dir = None if out_dir is None else os.path.join(out_dir, act.kind)
        results[act.kind] = train(dataset, sub, sub_dir)
    final = {k: float(r.curve.train_loss[-1]) for k, r in results.items()}
    report = ComparisonReport(config.problem, results, final)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        kinds = list(results)
        with open(os.path.join(out_dir, "curves.csv"), "w") as fh:
            cols = ["epoch"]
            for k in kinds:
                cols += [f"train_{k}", f"val_{k}", f"lr_{k}"]
            fh.write(",".join(cols) + "\n")
            epochs = len(next(iter(results.values())).curve.train_loss)
            for e in range(epochs):
                row = [str(e)]
                for k in kinds:
                    c = results[k].curve
                    row += [repr(float(c.train_loss[e])), repr(float(c.val_loss[e])),
                            repr(float(c.lr[e]))]
                fh.write(",".join(row) + "\n")
        with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
            fh.write(report.summary() + "\n")
        from .plotting import plot_loss_curves

        plot_loss_curves({k: r.curve for k, r in results.items()},
                         os.path.join(out_dir, "curves.svg"),
                         title=f"{config.problem}: training loss")
    return report
