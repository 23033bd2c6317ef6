import numpy as np
import pytest

from gcnetlab import loss_grad, loss_value


class TestLossValues:
    def test_cosine_parallel(self):
        assert loss_value("cosine", [1.0, 0, 0], [1.0, 0, 0]) == 0.0

    def test_cosine_orthogonal(self):
        assert np.isclose(loss_value("cosine", [1.0, 0, 0], [0, 1.0, 0]), 1.0)

    def test_cosine_antiparallel(self):
        assert np.isclose(loss_value("cosine", [1.0, 0, 0], [-1.0, 0, 0]), 2.0)

    def test_mse_mean_over_components(self):
        assert loss_value("mse", [1.0, 1.0], [0.0, 0.0]) == 1.0

    def test_throttle_direction_composite(self):
        pred = [0.5, 1.0, 0.0, 0.0]
        target = [1.0, 0.0, 1.0, 0.0]
        assert np.isclose(loss_value("throttle_direction", pred, target), 0.25 + 1.0)

    def test_cosine_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = rng.normal(size=3)
            t = rng.normal(size=3)
            alpha = float(rng.uniform(0.01, 100.0))
            assert np.isclose(
                loss_value("cosine", alpha * p, t), loss_value("cosine", p, t), atol=1e-12
            )

    def test_cosine_range(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            v = loss_value("cosine", rng.normal(size=3), rng.normal(size=3))
            assert 0.0 <= v <= 2.0

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            loss_value("cosine", [0.0, 0.0, 0.0], [1.0, 0, 0])

    def test_batch_is_mean_of_samples(self):
        rng = np.random.default_rng(2)
        p = rng.normal(size=(8, 3))
        t = rng.normal(size=(8, 3))
        per = [loss_value("cosine", pi, ti) for pi, ti in zip(p, t)]
        assert np.isclose(loss_value("cosine", p, t), np.mean(per))


class TestLossGradients:
    @pytest.mark.parametrize("kind,dim", [("mse", 4), ("cosine", 3), ("throttle_direction", 4)])
    def test_matches_finite_differences(self, kind, dim):
        rng = np.random.default_rng(5)
        p = rng.normal(size=(6, dim))
        t = rng.normal(size=(6, dim))
        if kind == "throttle_direction":
            t[:, 0] = rng.uniform(0, 1, size=6)
        g = loss_grad(kind, p, t)
        h = 1e-7
        for i in range(6):
            for j in range(dim):
                pp, pm = p.copy(), p.copy()
                pp[i, j] += h
                pm[i, j] -= h
                fd = (loss_value(kind, pp, t) - loss_value(kind, pm, t)) / (2 * h)
                assert abs(g[i, j] - fd) < 1e-6 * max(1.0, abs(fd))
