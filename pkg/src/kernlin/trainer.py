"""L2-regularized hinge-loss linear SVM by dual coordinate descent.

Solves ``min_w 0.5 |w|^2 + C sum_i max(0, 1 - y_i w.x_i)`` without a bias
term through its dual ``max_a sum_i a_i - 0.5 |sum_i a_i y_i x_i|^2`` over
the box ``0 <= a_i <= C``.  Multiclass problems are one-vs-rest.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from kernlin._backend import core as _default_core
from kernlin.data import Dataset, SparseVector
from kernlin.sketch import EncodedDataset, EncodedVector

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    max_outer_iters: int = 200
    tolerance: float = 1e-4
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def with_C(self, C: float) -> "TrainConfig":
        return TrainConfig(C, self.max_outer_iters, self.tolerance, self.shuffle_seed)


def as_csr(rows, dim: int | None = None) -> sp.csr_matrix:
    """Stack encoded vectors, sparse vectors or a dense/sparse matrix into CSR.

    ``SparseVector`` indices are 1-based and shift down by one;
    ``EncodedVector`` indices are already 0-based.
    """
    if isinstance(rows, (EncodedDataset, Dataset)):
        dim = rows.total_dim if isinstance(rows, EncodedDataset) else rows.dim
        rows = rows.rows
    if sp.issparse(rows):
        return sp.csr_matrix(rows, dtype=np.float64)
    if isinstance(rows, np.ndarray):
        return sp.csr_matrix(np.atleast_2d(rows).astype(np.float64))
    rows = list(rows)
    if not rows:
        raise ValueError("no rows")
    indptr = [0]
    indices = []
    data = []
    widths = set()
    for r in rows:
        if isinstance(r, EncodedVector):
            indices.append(r.indices)
            widths.add(r.total_dim)
        elif isinstance(r, SparseVector):
            indices.append(r.indices - 1)
            widths.add(r.dim)
        else:
            raise TypeError(f"cannot train on {type(r).__name__}")
        data.append(r.values)
        indptr.append(indptr[-1] + r.values.size)
    if len(widths) != 1:
        raise ValueError(f"rows disagree on dimension: {sorted(widths)}")
    width = widths.pop() if dim is None else dim
    return sp.csr_matrix((np.concatenate(data), np.concatenate(indices), np.array(indptr)),
                         shape=(len(rows), width))


@dataclass
class DualSolution:
    w: np.ndarray
    alpha: np.ndarray
    dual_history: list[float] = field(default_factory=list)
    sweeps: int = 0
    converged: bool = False


def dual_objective(alpha: np.ndarray, w: np.ndarray) -> float:
    return float(alpha.sum() - 0.5 * np.dot(w, w))


def solve_dual(X, y: Sequence[float], cfg: TrainConfig, backend=None) -> DualSolution:
    """Dual coordinate descent with a fresh random permutation per sweep.

    Stops once the largest projected-gradient violation in a sweep drops
    below ``cfg.tolerance`` or after ``cfg.max_outer_iters`` sweeps.  Each
    coordinate step maximizes the dual exactly along that coordinate, so
    ``dual_history`` (one value per sweep) never decreases.
    """
    backend = backend or _default_core
    X = as_csr(X)
    X.sort_indices()
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("training data must contain both classes")
    n = X.shape[0]
    indptr = X.indptr.astype(np.int64)
    indices = X.indices.astype(np.int64)
    data = X.data.astype(np.float64)
    qii = np.asarray(X.multiply(X).sum(axis=1)).ravel()
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    rng = np.random.default_rng(cfg.shuffle_seed)
    sol = DualSolution(w, alpha)
    for sweep in range(cfg.max_outer_iters):
        order = rng.permutation(n).astype(np.int64)
        violation = backend.dcd_sweep(indptr, indices, data, y, alpha, w, qii, float(cfg.C), order)
        sol.sweeps = sweep + 1
        sol.dual_history.append(dual_objective(alpha, w))
        if violation < cfg.tolerance:
            sol.converged = True
            break
    return sol


def train_binary(X, y: Sequence[float], cfg: TrainConfig) -> np.ndarray:
    return solve_dual(X, y, cfg).w


@dataclass
class SvmModel:
    weights: np.ndarray  # (n_classes, dim)
    class_ids: list[int]
    C: float

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def scores(self, X) -> np.ndarray:
        X = as_csr(X)
        if X.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: model has {self.dim}, data has {X.shape[1]}")
        return np.asarray(X @ self.weights.T)

    def to_text(self, precision: int = 9) -> str:
        buf = io.StringIO()
        classes = ",".join(str(c) for c in self.class_ids)
        buf.write(f"kernlin-svm classes={classes} dim={self.dim} C={self.C!r}\n")
        for row in self.weights:
            buf.write(" ".join(f"{x:.{precision}g}" for x in row.tolist()) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "SvmModel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("kernlin-svm "):
            raise ModelFormatError("not a kernlin model file (missing header)")
        try:
            fields = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
            class_ids = [int(c) for c in fields["classes"].split(",")]
            dim = int(fields["dim"])
            C = float(fields["C"])
            weights = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
        except (KeyError, ValueError) as exc:
            raise ModelFormatError(f"corrupt model file: {exc}") from None
        if weights.shape != (len(class_ids), dim):
            raise ModelFormatError(
                f"corrupt model file: expected {len(class_ids)} rows of {dim} weights")
        return cls(weights, class_ids, C)


def train_multiclass(X, labels: Sequence[int], cfg: TrainConfig) -> SvmModel:
    """One-vs-rest.  With two classes a single problem is solved and the
    second weight row is its negation, matching :func:`train_binary` exactly.
    """
    X = as_csr(X)
    labels = np.asarray(labels)
    class_ids = sorted(set(labels.tolist()))
    if len(class_ids) < 2:
        raise ValueError("need at least two classes")
    if len(class_ids) == 2:
        y = np.where(labels == class_ids[0], 1.0, -1.0)
        w = train_binary(X, y, cfg)
        weights = np.vstack([w, -w])
    else:
        weights = np.vstack([
            train_binary(X, np.where(labels == c, 1.0, -1.0), cfg) for c in class_ids
        ])
    return SvmModel(weights, class_ids, cfg.C)


def predict(model: SvmModel, X) -> list[int]:
    """Argmax of the class scores; ties go to the lowest class id."""
    s = model.scores(X)
    if s.shape[0] == 0:
        raise ValueError("nothing to predict")
    return [model.class_ids[i] for i in np.argmax(s, axis=1)]


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    if len(pred) != len(truth):
        raise ValueError("prediction and truth lengths differ")
    if len(pred) == 0:
        raise ValueError("empty test set")
    return float(np.mean(np.asarray(pred) == np.asarray(truth)))


@dataclass(frozen=True)
class SweepResult:
    table: list[tuple[float, float]]
    best_C: float
    best_accuracy: float


def c_sweep(train_X, train_labels, test_X, test_labels, c_grid: Sequence[float] = DEFAULT_C_GRID,
            cfg: TrainConfig | None = None) -> SweepResult:
    """Train once per C and score on the test rows; the first best C wins ties."""
    if len(c_grid) == 0:
        raise ValueError("empty C grid")
    cfg = cfg or TrainConfig()
    train_X = as_csr(train_X)
    test_X = as_csr(test_X)
    table = []
    for C in c_grid:
        model = train_multiclass(train_X, train_labels, cfg.with_C(float(C)))
        table.append((float(C), accuracy(predict(model, test_X), test_labels)))
    best_C, best_acc = max(table, key=lambda t: t[1])
    return SweepResult(table, best_C, best_acc)
