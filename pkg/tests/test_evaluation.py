import numpy as np
import pytest

from gcnetlab.data import SplitSpec, split
from gcnetlab.dynamics import TransferParams, TransferSystem
from gcnetlab.evaluation import EvalCase, build_eval_cases, emit_report, evaluate, evaluate_policy
from gcnetlab.network import Activation
from gcnetlab.optim import TrainConfig
from gcnetlab.training import ExperimentConfig, network_spec, train, weights_digest

from test_training import toy_transfer_dataset

TP = TransferParams(mu=1.0, radius=1.0, gamma=0.1)
TARGET = np.array([1.0, 0, 0, 0, 0, 0])


def anchor_cases(n=5):
    ds = toy_transfer_dataset(n=10)
    # keep positions away from the origin so propagation stays regular
    ds.states[:, :, 0:3] += 2.0
    _, val = split(ds, SplitSpec(0.7, 0))
    return ds, build_eval_cases(val, min(n, val.n_trajectories), TARGET, seed=1)


class TestCases:
    def test_uses_every_validation_trajectory_once(self):
        ds = toy_transfer_dataset(n=10)
        _, val = split(ds, SplitSpec(0.8, 0))
        cases = build_eval_cases(val, val.n_trajectories, TARGET)
        assert sorted(c.index for c in cases) == list(range(val.n_trajectories))

    def test_deterministic_selection(self):
        ds = toy_transfer_dataset(n=12)
        _, val = split(ds, SplitSpec(0.7, 0))
        a = build_eval_cases(val, 3, TARGET, seed=5)
        b = build_eval_cases(val, 3, TARGET, seed=5)
        assert [c.index for c in a] == [c.index for c in b]

    def test_insufficient_trajectories(self):
        ds = toy_transfer_dataset(n=5)
        _, val = split(ds, SplitSpec(0.8, 0))
        with pytest.raises(ValueError):
            build_eval_cases(val, 10, TARGET)


class TestEvaluate:
    def test_read_only_and_reports(self):
        ds, cases = anchor_cases()
        cfg = ExperimentConfig("transfer", network_spec("transfer", [8, 8], Activation.sine()),
                               TrainConfig(batch_size=32, epochs=1, seed=0))
        res = train(ds, cfg)
        before = weights_digest(res.network)
        rep = evaluate(res.network, res.scaler, TransferSystem(TP), cases, dt_divisor=50)
        assert weights_digest(res.network) == before
        assert rep.n_cases == len(cases)
        assert np.all(rep.pos_err[~rep.failed] >= 0)

    def test_failures_recorded_not_raised(self):
        ds, cases = anchor_cases(3)

        def exploding(case):
            def policy(t, state):
                return np.full(3, np.nan)

            return policy, None

        rep = evaluate_policy(exploding, TransferSystem(TP), cases, dt_divisor=10)
        assert np.all(rep.failed)
        assert rep.mean_errors() == (np.inf, np.inf)

    def test_aggregates_match_csv(self, tmp_path):
        ds, cases = anchor_cases(4)

        def steering(case):
            return (lambda t, state: TARGET[:3] - state[:3]), None

        rep = evaluate_policy(steering, TransferSystem(TP), cases, dt_divisor=50, label="steer")
        paths = emit_report([rep], tmp_path)
        csv = [p for p in paths if p.endswith("errors_steer.csv")][0]
        rows = np.loadtxt(csv, delimiter=",", skiprows=1, ndmin=2)
        assert len(rows) == rep.n_cases
        assert np.allclose(rows[:, 1], rep.pos_err)
        agg = rep.aggregate()
        assert np.isclose(agg["pos"]["mean"], rep.pos_err.mean())

    def test_emit_is_reproducible(self, tmp_path):
        ds, cases = anchor_cases(3)

        def steering(case):
            return (lambda t, state: TARGET[:3] - state[:3]), None

        rep = evaluate_policy(steering, TransferSystem(TP), cases, dt_divisor=20, label="x")
        a = tmp_path / "a"
        b = tmp_path / "b"
        emit_report([rep], a)
        emit_report([rep], b)
        assert (a / "errors_x.csv").read_bytes() == (b / "errors_x.csv").read_bytes()
        assert (a / "summary.txt").read_bytes() == (b / "summary.txt").read_bytes()

    def test_positive_tf_required(self):
        with pytest.raises(ValueError):
            EvalCase(0, np.zeros(6), 0.0, TARGET)
