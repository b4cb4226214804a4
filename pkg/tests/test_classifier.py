import numpy as np
import pytest

from oracles import finite_difference_grads

import fmaguard.classifier as zcc


def toy_blobs(n=60, dim=108, gap=4.0, seed=0, noise=0.5):
    """Linearly separable two-class toy set embedded in the feature space."""
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=noise, size=(n, dim))
    y = rng.integers(0, 2, size=n)
    x[:, 0] += np.where(y == 1, gap, -gap)
    return x, y


class TestForward:
    def test_softmax_normalization(self, rng):
        model = zcc.init_model((108, 16, 2), seed=1)
        x = rng.normal(size=(40, 108))
        probs, _ = zcc.forward(model, x)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9
        assert (probs >= 0).all()

    def test_predict_deterministic(self, rng):
        model = zcc.init_model((108, 8, 2), seed=2)
        x = rng.normal(size=108)
        a = zcc.predict(model, x)
        b = zcc.predict(model, x)
        assert a[0] == b[0]
        assert np.array_equal(a[1], b[1])

    def test_predict_shapes(self, rng):
        model = zcc.init_model((108, 8, 2), seed=3)
        labels, probs = zcc.predict(model, rng.normal(size=(7, 108)))
        assert labels.shape == (7,)
        assert probs.shape == (7, 2)


class TestGradients:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_analytic_matches_central_differences(self, seed):
        """Random small network (5 -> 7 -> 4 -> 2) against the finite
        difference oracle."""
        rng = np.random.default_rng(seed)
        model = zcc.init_model((5, 7, 4, 2), seed=seed, l2_lambda=1e-4)
        x = rng.normal(size=(12, 5))
        y = rng.integers(0, 2, size=12)
        w = zcc.sample_weights(y, zcc.TrainConfig())
        _, gw, gb = zcc.loss_and_grads(model, x, y, w)
        ref_w, ref_b = finite_difference_grads(
            lambda: zcc.loss_only(model, x, y, w), model)
        for got, ref in zip(gw + gb, ref_w + ref_b):
            scale = max(np.abs(ref).max(), 1e-6)
            assert np.abs(got - ref).max() / scale < 1e-5

    def test_nonfinite_loss_raises(self):
        model = zcc.init_model((4, 3, 2), seed=0)
        model.weights[0][:] = 1e200
        x = np.full((4, 4), 1e200)
        y = np.array([0, 1, 0, 1])
        with np.errstate(all="ignore"), pytest.raises(zcc.NonFiniteLoss):
            zcc.loss_and_grads(model, x, y, np.ones(4))


class TestTraining:
    def test_separable_toy_reaches_full_accuracy(self):
        x, y = toy_blobs()
        cfg = zcc.TrainConfig(epochs=60, batch_size=16, seed=1, hidden=(16, 8),
                              val_fraction=0.0)
        result = zcc.train(x, y, cfg)
        assert zcc.accuracy(result.model, x, y) == 1.0

    def test_zero_epochs_returns_initialized_model(self):
        x, y = toy_blobs(n=40)
        cfg = zcc.TrainConfig(epochs=0, seed=4, hidden=(8,), val_fraction=0.0)
        result = zcc.train(x, y, cfg)
        probs, _ = zcc.forward(result.model, x)
        # an untrained head stays near the symmetric prior
        assert np.abs(probs.mean(axis=0) - 0.5).max() < 0.2

    def test_determinism_given_seed(self):
        x, y = toy_blobs()
        cfg = zcc.TrainConfig(epochs=10, seed=7, hidden=(12,))
        a = zcc.train(x, y, cfg)
        b = zcc.train(x, y, cfg)
        for wa, wb in zip(a.model.weights, b.model.weights):
            assert np.array_equal(wa, wb)

    def test_training_order_invariance_full_batch(self):
        """With full-batch updates a permutation of the training set does
        not change the learned weights."""
        x, y = toy_blobs(n=32)
        cfg = zcc.TrainConfig(epochs=5, batch_size=64, seed=3, hidden=(6,),
                              val_fraction=0.0)
        a = zcc.train(x, y, cfg)
        perm = np.random.default_rng(0).permutation(len(y))
        b = zcc.train(x[perm], y[perm], cfg)
        for wa, wb in zip(a.model.weights, b.model.weights):
            assert np.allclose(wa, wb, atol=1e-12)

    def test_cost_ratio_pushes_boundary(self):
        """On an ambiguous overlap, the 10x false-positive cost yields
        fewer false positives than misses."""
        rng = np.random.default_rng(5)
        n = 400
        x = rng.normal(size=(n, 8))
        y = rng.integers(0, 2, size=n)
        x[:, 0] += np.where(y == 1, 0.6, -0.6)  # heavy class overlap
        cfg = zcc.TrainConfig(epochs=80, batch_size=32, seed=5, hidden=(16,),
                              val_fraction=0.0)
        result = zcc.train(x, y, cfg)
        labels, _ = zcc.predict(result.model, x)
        fp = int(((labels == 1) & (y == 0)).sum())
        fn = int(((labels == 0) & (y == 1)).sum())
        assert fp < fn

    def test_single_class_rejected(self):
        x = np.random.default_rng(0).normal(size=(10, 4))
        with pytest.raises(zcc.InsufficientData):
            zcc.train(x, np.zeros(10, dtype=int), zcc.TrainConfig(epochs=1))

    def test_standardizer_from_training_split_only(self):
        """Shifting held-out rows must not move the stored standardizer."""
        x, y = toy_blobs(n=100, seed=2)
        cfg = zcc.TrainConfig(epochs=1, seed=9, hidden=(4,), val_fraction=0.2)
        base = zcc.train(x, y, cfg)
        rng = np.random.default_rng(cfg.seed)
        order = rng.permutation(len(y))
        val_idx = order[: int(round(0.2 * len(y)))]
        shifted = x.copy()
        shifted[val_idx] += 1000.0
        again = zcc.train(shifted, y, cfg)
        assert np.array_equal(base.model.standardizer.mean, again.model.standardizer.mean)
        assert np.array_equal(base.model.standardizer.std, again.model.standardizer.std)


class TestKFold:
    def test_fold_sizes_balanced(self):
        y = np.array([0] * 23 + [1] * 17)
        folds = zcc.kfold_split(y, 10, seed=0)
        sizes = [len(f) for f in folds]
        assert sum(sizes) == 40
        assert max(sizes) - min(sizes) <= 2  # per-class remainder spread
        flat = np.concatenate(folds)
        assert len(np.unique(flat)) == 40

    def test_symmetric_dataset_gives_identical_fold_accuracy(self):
        """All class members identical: every fold sees the same problem."""
        x0 = np.tile(np.linspace(-1, -0.5, 6), (20, 1))
        x1 = np.tile(np.linspace(0.5, 1, 6), (20, 1))
        x = np.vstack([x0, x1])
        y = np.array([0] * 20 + [1] * 20)
        cfg = zcc.TrainConfig(epochs=30, batch_size=8, seed=2, hidden=(6,), k_folds=2)
        results = zcc.kfold_evaluate(x, y, cfg)
        assert len(results) == 2
        assert results[0].accuracy == results[1].accuracy == 1.0

    def test_insufficient_data(self):
        x = np.random.default_rng(0).normal(size=(5, 3))
        y = np.array([0, 0, 0, 0, 1])
        cfg = zcc.TrainConfig(k_folds=3, epochs=1, hidden=(3,))
        with pytest.raises(zcc.InsufficientData):
            zcc.kfold_evaluate(x, y, cfg)


class TestSerialization:
    def test_round_trip(self, tmp_path, rng):
        x, y = toy_blobs(n=50)
        result = zcc.train(x, y, zcc.TrainConfig(epochs=5, seed=1, hidden=(10, 4)))
        path = tmp_path / "model.bin"
        zcc.save_model(result.model, path)
        loaded = zcc.load_model(path)
        probe = rng.normal(size=(5, x.shape[1]))
        p1, _ = zcc.forward(result.model, probe)
        p2, _ = zcc.forward(loaded, probe)
        assert np.array_equal(p1, p2)
        assert loaded.layer_sizes == result.model.layer_sizes
        assert loaded.l2_lambda == result.model.l2_lambda

    def test_byte_identical_saves(self, tmp_path):
        x, y = toy_blobs(n=50)
        result = zcc.train(x, y, zcc.TrainConfig(epochs=3, seed=6, hidden=(8,)))
        p1 = tmp_path / "a.bin"
        p2 = tmp_path / "b.bin"
        zcc.save_model(result.model, p1)
        zcc.save_model(result.model, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"not a model")
        with pytest.raises(ValueError):
            zcc.load_model(path)
