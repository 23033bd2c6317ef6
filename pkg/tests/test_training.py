import numpy as np
import pytest

from gcnetlab.data import SplitSpec, TrajectoryDataset, split
from gcnetlab.errors import ConfigError
from gcnetlab.network import Activation
from gcnetlab.optim import TrainConfig
from gcnetlab.training import (
    ComparisonReport,
    ExperimentConfig,
    LossCurve,
    compare_activations,
    network_spec,
    train,
    weights_digest,
)


def toy_transfer_dataset(n=12, s=20, seed=0):
    """Synthetic smooth policy: direction depends sinusoidally on state."""
    rng = np.random.default_rng(seed)
    tfs = rng.uniform(2, 3, n)
    times = np.linspace(0, 1, s)[None, :] * tfs[:, None]
    states = rng.uniform(-1, 1, size=(n, s, 6))
    raw = np.stack([
        np.sin(2 * states[..., 0]) + states[..., 3],
        np.cos(states[..., 1]) - 0.5 * states[..., 4],
        0.3 * states[..., 2] + 0.1,
    ], axis=-1)
    controls = raw / np.linalg.norm(raw, axis=-1, keepdims=True)
    return TrajectoryDataset("transfer", times, states, controls, tfs)


def config(epochs=5, width=16, act=None, seed=1):
    act = act or Activation.sine()
    return ExperimentConfig(
        "transfer",
        network_spec("transfer", [width, width], act),
        TrainConfig(learning_rate=1e-4, batch_size=64, epochs=epochs, seed=seed),
    )


class TestExperimentConfig:
    def test_rejects_mismatched_loss(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("transfer", network_spec("transfer", [8], Activation.sine()),
                             TrainConfig(batch_size=8, epochs=1), loss="mse")

    def test_rejects_wrong_heads(self):
        from gcnetlab.network import NetworkSpec

        bad_spec = NetworkSpec.uniform_heads(6, [8], 3, Activation.sine(), Activation.sigmoid())
        with pytest.raises(ConfigError):
            ExperimentConfig("transfer", bad_spec, TrainConfig(batch_size=8, epochs=1))

    def test_heads_per_problem(self):
        assert [h.kind for h in network_spec("drone", [8], Activation.relu()).output_heads] == ["sigmoid"] * 4
        landing = network_spec("landing", [8], Activation.relu()).output_heads
        assert [h.kind for h in landing] == ["sigmoid", "linear", "linear", "linear"]
        transfer = network_spec("transfer", [8], Activation.relu()).output_heads
        assert [h.kind for h in transfer] == ["linear"] * 3


class TestTrain:
    def test_deterministic(self):
        ds = toy_transfer_dataset()
        a = train(ds, config())
        b = train(ds, config())
        assert np.array_equal(a.curve.train_loss, b.curve.train_loss)
        assert np.array_equal(a.curve.val_loss, b.curve.val_loss)
        assert weights_digest(a.network) == weights_digest(b.network)

    def test_loss_decreases(self):
        ds = toy_transfer_dataset(n=30)
        cfg = ExperimentConfig(
            "transfer", network_spec("transfer", [16, 16], Activation.sine()),
            TrainConfig(learning_rate=1e-3, batch_size=64, epochs=40, seed=1))
        res = train(ds, cfg)
        assert res.curve.train_loss[-1] < res.curve.train_loss[0] * 0.5

    def test_lr_curve_non_increasing_with_exact_drops(self):
        ds = toy_transfer_dataset()
        res = train(ds, config(epochs=40))
        lr = res.curve.lr
        assert np.all(np.diff(lr) <= 0)
        drops = lr[1:][np.diff(lr) < 0] / lr[:-1][np.diff(lr) < 0]
        assert np.allclose(drops, 0.9)

    def test_validation_does_not_mutate(self):
        # training on zero epochs leaves initialization untouched
        ds = toy_transfer_dataset()
        cfg = config(epochs=0)
        res = train(ds, cfg)
        from gcnetlab.network import init_network

        fresh = init_network(cfg.spec, cfg.train.seed)
        assert weights_digest(res.network) == weights_digest(fresh)

    def test_constant_target_reaches_floor(self):
        # interpolation-trivial dataset: constant unit direction target
        rng = np.random.default_rng(4)
        n, s = 100, 25
        tfs = rng.uniform(2, 3, n)
        times = np.linspace(0, 1, s)[None, :] * tfs[:, None]
        states = rng.uniform(-1, 1, size=(n, s, 6))
        controls = np.tile(np.array([1.0, 0.0, 0.0]), (n, s, 1))
        ds = TrajectoryDataset("transfer", times, states, controls, tfs)
        for act in (Activation.sine(), Activation.relu(), Activation.softplus()):
            res = train(ds, ExperimentConfig(
                "transfer", network_spec("transfer", [16, 16], act),
                TrainConfig(learning_rate=5e-3, batch_size=100, epochs=200, seed=1,
                            scheduler_patience=5)))
            assert res.curve.train_loss[-1] < 1e-6, act.kind

    def test_problem_mismatch_rejected(self):
        ds = toy_transfer_dataset()
        cfg = ExperimentConfig("landing", network_spec("landing", [8], Activation.sine()),
                               TrainConfig(batch_size=8, epochs=1))
        with pytest.raises(ConfigError):
            train(ds, cfg)

    def test_checkpoints_written(self, tmp_path):
        ds = toy_transfer_dataset()
        train(ds, config(epochs=2), out_dir=tmp_path / "run")
        for name in ("final.gcnet", "best.gcnet", "losscurve.csv", "scaler.json"):
            assert (tmp_path / "run" / name).exists()
        curve = LossCurve.from_csv(tmp_path / "run" / "losscurve.csv")
        assert len(curve.train_loss) == 2


class TestCompare:
    def test_single_activation_degenerate(self, tmp_path):
        ds = toy_transfer_dataset()
        rep = compare_activations(ds, config(epochs=2), [Activation.sine()],
                                  out_dir=tmp_path / "cmp")
        assert list(rep.results) == ["sine"]
        assert (tmp_path / "cmp" / "curves.csv").exists()
        assert (tmp_path / "cmp" / "curves.svg").exists()

    def test_shared_seed_controlled_experiment(self):
        ds = toy_transfer_dataset()
        rep = compare_activations(ds, config(epochs=3),
                                  [Activation.sine(), Activation.relu()])
        # identical split and batching: both saw exactly the same data;
        # verify via the shared scaler fitted on the shared train split
        sine_scaler = rep.results["sine"].scaler
        relu_scaler = rep.results["relu"].scaler
        assert np.array_equal(sine_scaler.lo, relu_scaler.lo)
        assert np.array_equal(sine_scaler.hi, relu_scaler.hi)
        assert set(rep.final_train) == {"sine", "relu"}
        assert rep.ordering()[0] in ("sine", "relu")
