import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from kernlin import _pycore
from kernlin.data import Dataset, SparseVector
from kernlin.sketch import EncodedVector
from kernlin.trainer import (ModelFormatError, SvmModel, TrainConfig, accuracy, as_csr, c_sweep,
                             dual_objective, predict, solve_dual, train_binary, train_multiclass)

TINY_X = np.array([[1.0, 0.2], [0.8, 0.9], [0.1, 1.0], [0.6, 0.3]])
TINY_Y = np.array([1.0, 1.0, -1.0, -1.0])


def grid_dual_max(X, y, C, points=51):
    """Exhaustive search of the dual over a regular grid on [0, C]^n."""
    grid = np.linspace(0.0, C, points)
    A = np.array(list(itertools.product(grid, repeat=len(y))))
    W = (A * y) @ X
    values = A.sum(axis=1) - 0.5 * np.einsum("ij,ij->i", W, W)
    return values.max()


def clusters(rng, n_per=60, centers=((4, 0, 0), (0, 4, 0), (0, 0, 4)), spread=0.6):
    X, y = [], []
    for label, c in enumerate(centers):
        X.append(np.abs(rng.normal(c, spread, size=(n_per, len(c)))))
        y += [label] * n_per
    return np.vstack(X), np.array(y)


class TestDual:
    def test_matches_grid_oracle(self, backend):
        cfg = TrainConfig(C=0.5, max_outer_iters=10000, tolerance=1e-10)
        sol = solve_dual(TINY_X, TINY_Y, cfg, backend=backend)
        assert sol.converged
        best = grid_dual_max(TINY_X, TINY_Y, 0.5)
        assert abs(dual_objective(sol.alpha, sol.w) - best) <= 1e-3
        assert dual_objective(sol.alpha, sol.w) >= best - 1e-12

    def test_kkt(self, rng):
        X, y = clusters(rng)
        yb = np.where(y == 0, 1.0, -1.0)
        C = 1.0
        sol = solve_dual(X, yb, TrainConfig(C=C, max_outer_iters=5000, tolerance=1e-8))
        margin = yb * (X @ sol.w)
        np.testing.assert_allclose(sol.w, (sol.alpha * yb) @ X, rtol=1e-9, atol=1e-9)
        assert np.all(sol.alpha >= 0) and np.all(sol.alpha <= C)
        assert np.all(margin[sol.alpha == 0] >= 1 - 1e-6)
        assert np.all(margin[sol.alpha == C] <= 1 + 1e-6)
        free = (sol.alpha > 0) & (sol.alpha < C)
        np.testing.assert_allclose(margin[free], 1.0, atol=1e-6)

    def test_monotone(self, rng):
        X, y = clusters(rng, spread=2.0)
        sol = solve_dual(X, np.where(y == 1, 1.0, -1.0), TrainConfig(C=10.0, max_outer_iters=50))
        assert np.all(np.diff(sol.dual_history) >= -1e-12)

    def test_deterministic(self, rng):
        X, y = clusters(rng, spread=2.0)
        yb = np.where(y == 2, 1.0, -1.0)
        cfg = TrainConfig(C=1.0, max_outer_iters=7, shuffle_seed=3)
        np.testing.assert_array_equal(train_binary(X, yb, cfg), train_binary(X, yb, cfg))

    def test_backends_agree(self, rng):
        X, y = clusters(rng, spread=2.0)
        yb = np.where(y == 0, 1.0, -1.0)
        cfg = TrainConfig(C=1.0, max_outer_iters=20)
        w_py = solve_dual(X, yb, cfg, backend=_pycore).w
        w = solve_dual(X, yb, cfg).w
        np.testing.assert_allclose(w, w_py, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("labels,match", [
        ([1.0, 1.0, 1.0, 1.0], "both classes"),
        ([1.0, 0.0, 1.0, -1.0], "-1 or"),
        ([1.0, -1.0], "labels"),
    ])
    def test_bad_labels(self, labels, match):
        with pytest.raises(ValueError, match=match):
            solve_dual(TINY_X, labels, TrainConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(C=0)
        with pytest.raises(ValueError):
            TrainConfig(max_outer_iters=0)


class TestSeparable:
    def test_one_dimensional(self):
        X = np.array([[1.0], [1.0], [-1.0], [-1.0]])
        y = [1, 1, -1, -1]
        model = train_multiclass(X, y, TrainConfig())
        assert accuracy(predict(model, X), y) == 1.0

    def test_clusters(self, rng):
        X, y = clusters(rng)
        model = train_multiclass(X, y, TrainConfig(C=1.0))
        assert accuracy(predict(model, X), y) >= 0.95

    def test_two_class_reduces_to_binary(self, rng):
        X, y = clusters(rng, centers=((3, 0), (0, 3)), spread=1.5)
        cfg = TrainConfig(C=0.3)
        model = train_multiclass(X, y + 5, cfg)
        w = train_binary(X, np.where(y == 0, 1.0, -1.0), cfg)
        np.testing.assert_array_equal(model.weights[0], w)
        pred = predict(model, X)
        assert pred == [5 if s > 0 else 6 for s in X @ w]


class TestPredict:
    def test_empty(self):
        model = SvmModel(np.eye(2), [0, 1], 1.0)
        with pytest.raises(ValueError):
            predict(model, np.zeros((0, 2)))
        with pytest.raises(ValueError, match="empty"):
            accuracy([], [])

    def test_all_wrong(self):
        assert accuracy([1, 1], [2, 2]) == 0.0

    def test_ties_to_lowest_id(self):
        model = SvmModel(np.array([[1.0, 0.0], [1.0, 0.0]]), [3, 7], 1.0)
        assert predict(model, np.array([[1.0, 1.0]])) == [3]

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            SvmModel(np.eye(2), [0, 1], 1.0).scores(np.ones((1, 3)))


class TestModelText:
    def test_round_trip(self, rng):
        X, y = clusters(rng)
        model = train_multiclass(X, y, TrainConfig())
        back = SvmModel.from_text(model.to_text(precision=17))
        np.testing.assert_array_equal(back.weights, model.weights)
        assert back.class_ids == model.class_ids
        assert back.C == model.C

    @pytest.mark.parametrize("text", ["", "garbage\n", "kernlin-svm classes=1,2 dim=2 C=1\n1 2\n",
                                      "kernlin-svm classes=1,2 dim=2 C=1\n1 2\n3 x\n",
                                      "kernlin-svm dim=2 C=1\n1 2\n"])
    def test_corrupt(self, text):
        with pytest.raises(ModelFormatError):
            SvmModel.from_text(text)


class TestSweep:
    def test_single(self, rng):
        X, y = clusters(rng)
        res = c_sweep(X, y, X, y, [1.0])
        assert len(res.table) == 1
        assert res.best_C == 1.0

    def test_deterministic(self, rng):
        X, y = clusters(rng, spread=2.5)
        a = c_sweep(X, y, X, y, [0.1, 1.0, 10.0], TrainConfig(shuffle_seed=2))
        b = c_sweep(X, y, X, y, [0.1, 1.0, 10.0], TrainConfig(shuffle_seed=2))
        assert a == b

    def test_empty_grid(self, rng):
        X, y = clusters(rng)
        with pytest.raises(ValueError):
            c_sweep(X, y, X, y, [])


class TestAsCsr:
    def test_sources_agree(self):
        dense = np.array([[0.0, 2.0, 0.0], [1.0, 0.0, 3.0]])
        sparse_rows = [SparseVector.from_dense(r) for r in dense]
        encoded = [EncodedVector(3, r.indices - 1, r.values) for r in sparse_rows]
        for source in (dense, sp.csc_matrix(dense), sparse_rows, encoded, Dataset(3, [0, 1], sparse_rows)):
            np.testing.assert_array_equal(as_csr(source).toarray(), dense)

    def test_ragged(self):
        with pytest.raises(ValueError, match="disagree"):
            as_csr([SparseVector(2), SparseVector(3)])
