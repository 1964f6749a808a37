"""Exact kernel values and precomputed-kernel export.

All kernels here are defined on nonnegative data.  The correlation-based
ones (``rho``, ``acos``, ``rbf``, ``frbf``) are invariant to positive
rescaling; ``chi2`` and ``acos_chi2`` require L1-normalized inputs; the
min-max kernel uses the raw magnitudes.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from kernlin.data import Dataset, NormMode, SparseVector, _text, format_value, normalize

L1_TOLERANCE = 1e-9
CLAMP_TOLERANCE = 1e-12


class KernelKind(enum.Enum):
    LINEAR_RHO = "rho"
    ACOS = "acos"
    CHI2 = "chi2"
    ACOS_CHI2 = "acos-chi2"
    MINMAX = "minmax"
    RBF = "rbf"
    FRBF = "frbf"
    MM_ACOS = "mm-acos"
    MM_ACOS_CHI2 = "mm-acos-chi2"
    MM_RBF = "mm-rbf"

    @property
    def needs_gamma(self) -> bool:
        return self in (KernelKind.RBF, KernelKind.FRBF, KernelKind.MM_RBF)

    @classmethod
    def parse(cls, name: str | "KernelKind") -> "KernelKind":
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("_", "-")
        aliases = {"linear": "rho", "linear-rho": "rho", "mm": "minmax", "min-max": "minmax",
                   "acoschi2": "acos-chi2", "mm-acoschi2": "mm-acos-chi2"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown kernel {name!r}; choose one of {names}") from None


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    gamma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind.parse(self.kind))
        if self.kind.needs_gamma:
            if self.gamma is None:
                raise ValueError(f"kernel {self.kind.value} requires gamma")
            if not self.gamma > 0:
                raise ValueError(f"gamma must be positive, got {self.gamma}")
        elif self.gamma is not None:
            raise ValueError(f"kernel {self.kind.value} takes no gamma")

    def __call__(self, u: SparseVector, v: SparseVector) -> float:
        return evaluate(self, u, v)

    def __str__(self):
        return self.kind.value if self.gamma is None else f"{self.kind.value}(gamma={self.gamma:g})"


def _align(u: SparseVector, v: SparseVector) -> tuple[np.ndarray, np.ndarray]:
    """Dense copies of ``u`` and ``v`` restricted to the union of supports."""
    union = np.union1d(u.indices, v.indices)
    a = np.zeros(union.size)
    b = np.zeros(union.size)
    a[np.searchsorted(union, u.indices)] = u.values
    b[np.searchsorted(union, v.indices)] = v.values
    return a, b


def _require_nonzero(*vectors: SparseVector):
    for name, x in zip("uv", vectors):
        if x.nnz == 0:
            raise ValueError(f"{name} is an all-zero vector")


def _require_l1(u: SparseVector, v: SparseVector):
    for name, x in (("u", u), ("v", v)):
        total = float(x.values.sum())
        if abs(total - 1.0) > L1_TOLERANCE:
            raise ValueError(f"{name} is not L1-normalized (sum = {total!r})")


def _clamp_unit(x: float) -> float:
    if x > 1.0:
        if x > 1.0 + CLAMP_TOLERANCE:
            raise ArithmeticError(f"correlation {x!r} exceeds 1 beyond rounding")
        return 1.0
    if x < -1.0:
        if x < -1.0 - CLAMP_TOLERANCE:
            raise ArithmeticError(f"correlation {x!r} below -1 beyond rounding")
        return -1.0
    return x


def rho(u: SparseVector, v: SparseVector) -> float:
    _require_nonzero(u, v)
    a, b = _align(u, v)
    r = float(np.dot(a, b)) / (math.sqrt(float(np.dot(a, a))) * math.sqrt(float(np.dot(b, b))))
    return _clamp_unit(r)


def angle(u: SparseVector, v: SparseVector) -> float:
    """Angle between ``u`` and ``v`` in ``[0, pi]``.

    Uses ``2 atan2(|u^ - v^|, |u^ + v^|)`` on the unit vectors, which equals
    ``arccos(rho)`` but stays accurate near ``rho = 1`` where ``arccos``
    amplifies rounding in ``rho``.
    """
    _require_nonzero(u, v)
    a, b = _align(u, v)
    a = a / math.sqrt(float(np.dot(a, a)))
    b = b / math.sqrt(float(np.dot(b, b)))
    return 2.0 * math.atan2(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))


def acos_kernel(u: SparseVector, v: SparseVector) -> float:
    return 1.0 - angle(u, v) / math.pi


def chi2(u: SparseVector, v: SparseVector) -> float:
    _require_l1(u, v)
    common, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True, return_indices=True)
    if common.size == 0:
        return 0.0
    a = u.values[iu]
    b = v.values[iv]
    return float(np.sum(2.0 * a * b / (a + b)))


def acos_chi2(u: SparseVector, v: SparseVector) -> float:
    return 1.0 - math.acos(_clamp_unit(chi2(u, v))) / math.pi


def minmax(u: SparseVector, v: SparseVector) -> float:
    if u.nnz == 0 and v.nnz == 0:
        raise ValueError("min-max kernel is undefined for two all-zero vectors")
    a, b = _align(u, v)
    return float(np.minimum(a, b).sum() / np.maximum(a, b).sum())


def rbf(u: SparseVector, v: SparseVector, gamma: float) -> float:
    return math.exp(-gamma * (1.0 - rho(u, v)))


def frbf(u: SparseVector, v: SparseVector, gamma: float) -> float:
    r = rho(u, v)
    return 0.5 * math.exp(-gamma * (1.0 - r)) + 0.5 * math.exp(-gamma * (1.0 + r))


def mm_acos(u: SparseVector, v: SparseVector) -> float:
    return minmax(u, v) * acos_kernel(u, v)


def mm_acos_chi2(u: SparseVector, v: SparseVector, chi2_norm: NormMode | str = NormMode.L1) -> float:
    """Min-max on the raw vectors times acos-chi2 on ``chi2_norm``-scaled copies.

    Pass ``chi2_norm="none"`` when the inputs are already L1-normalized and
    both factors should see the same values.
    """
    return minmax(u, v) * acos_chi2(normalize(u, chi2_norm), normalize(v, chi2_norm))


def mm_rbf(u: SparseVector, v: SparseVector, gamma: float) -> float:
    return minmax(u, v) * rbf(u, v, gamma)


def evaluate(spec: KernelSpec, u: SparseVector, v: SparseVector) -> float:
    kind = spec.kind
    if kind is KernelKind.LINEAR_RHO:
        return rho(u, v)
    if kind is KernelKind.ACOS:
        return acos_kernel(u, v)
    if kind is KernelKind.CHI2:
        return chi2(u, v)
    if kind is KernelKind.ACOS_CHI2:
        return acos_chi2(u, v)
    if kind is KernelKind.MINMAX:
        return minmax(u, v)
    if kind is KernelKind.RBF:
        return rbf(u, v, spec.gamma)
    if kind is KernelKind.FRBF:
        return frbf(u, v, spec.gamma)
    if kind is KernelKind.MM_ACOS:
        return mm_acos(u, v)
    if kind is KernelKind.MM_ACOS_CHI2:
        return mm_acos_chi2(u, v)
    return mm_rbf(u, v, spec.gamma)


@dataclass
class KernelMatrix:
    values: np.ndarray
    row_labels: list[int]
    col_labels: list[int] | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def kernel_matrix(a: Dataset, b: Dataset | None, spec: KernelSpec) -> KernelMatrix:
    """Dense ``K[i, j] = spec(a.rows[i], b.rows[j])``; ``b=None`` means ``a``.

    On a single dataset only the upper triangle is evaluated and mirrored, so
    the result is exactly symmetric.
    """
    symmetric = b is None or b is a
    b = a if b is None else b
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    n, m = len(a), len(b)
    out = np.empty((n, m))
    for i, u in enumerate(a.rows):
        start = i if symmetric else 0
        for j in range(start, m):
            try:
                out[i, j] = evaluate(spec, u, b.rows[j])
            except (ValueError, ArithmeticError) as exc:
                raise ValueError(f"kernel {spec} at row {i + 1}, column {j + 1}: {exc}") from None
            if symmetric:
                out[j, i] = out[i, j]
    return KernelMatrix(out, list(a.labels), list(b.labels))


def export_precomputed(matrix: KernelMatrix, precision: int = 9) -> str:
    """LIBSVM precomputed-kernel text: ``<label> 0:<serial> 1:K ... m:K``."""
    buf = io.StringIO()
    for serial, (label, row) in enumerate(zip(matrix.row_labels, matrix.values), start=1):
        cells = " ".join(f"{j}:{format_value(x, precision)}" for j, x in enumerate(row.tolist(), start=1))
        buf.write(f"{int(label)} 0:{serial} {cells}\n" if cells else f"{int(label)} 0:{serial}\n")
    return buf.getvalue()


def parse_precomputed(source) -> KernelMatrix:
    labels: list[int] = []
    rows: list[list[float]] = []
    for lineno, raw in enumerate(_text(source).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        labels.append(int(float(tokens[0])))
        cells = dict(tok.split(":", 1) for tok in tokens[1:])
        if cells.get("0") != str(len(rows) + 1):
            raise ValueError(f"line {lineno}: expected serial 0:{len(rows) + 1}")
        width = len(cells) - 1
        rows.append([float(cells[str(j)]) for j in range(1, width + 1)])
    if not rows:
        raise ValueError("empty precomputed kernel file")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("ragged precomputed kernel rows")
    return KernelMatrix(np.array(rows), labels)
