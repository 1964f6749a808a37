"""Sparse nonnegative vectors, labelled datasets and svmlight text I/O."""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


class SvmlightFormatError(ValueError):
    """Raised for malformed svmlight input; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NormMode(enum.Enum):
    NONE = "none"
    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, name: str | "NormMode") -> "NormMode":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown normalization {name!r}; use l1, l2 or none") from None


@dataclass(eq=False)
class SparseVector:
    """Nonnegative sparse vector with 1-based, strictly increasing indices.

    Zeros are never stored.  ``allow_negative`` exists only for reading
    real-valued feature files back in (RFF outputs); every kernel in the
    package assumes nonnegative data.
    """

    dim: int
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.float64))
    allow_negative: bool = field(default=False, repr=False)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values differ in length")
        if self.indices.size:
            if self.indices[0] < 1 or self.indices[-1] > self.dim:
                raise ValueError(f"indices must lie in [1, {self.dim}]")
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if not np.all(np.isfinite(self.values)):
                raise ValueError("values must be finite")
            if not self.allow_negative and np.any(self.values < 0):
                raise ValueError("values must be nonnegative")
            if np.any(self.values == 0):
                raise ValueError("zero values must not be stored")

    @classmethod
    def from_dict(cls, dim: int, entries: dict[int, float]) -> "SparseVector":
        items = sorted((int(i), float(v)) for i, v in entries.items() if v != 0)
        return cls(dim, [i for i, _ in items], [v for _, v in items])

    @classmethod
    def from_dense(cls, x: Sequence[float]) -> "SparseVector":
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return cls(x.size, nz + 1, x[nz])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices - 1] = self.values
        return out

    def to_dict(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def scaled(self, c: float) -> "SparseVector":
        if c <= 0:
            raise ValueError("scale must be positive")
        return SparseVector(self.dim, self.indices.copy(), self.values * c)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"SparseVector(dim={self.dim}, {self.to_dict()})"


@dataclass(eq=False)
class Dataset:
    dim: int
    labels: list[int]
    rows: list[SparseVector]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("a dataset needs at least one row")
        if len(self.labels) != len(self.rows):
            raise ValueError("labels and rows differ in length")
        for n, row in enumerate(self.rows):
            if row.dim != self.dim:
                raise ValueError(f"row {n} has dim {row.dim}, dataset has {self.dim}")

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[tuple[int, SparseVector]]:
        return iter(zip(self.labels, self.rows))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.dim == other.dim and list(self.labels) == list(other.labels)
                and all(a == b for a, b in zip(self.rows, other.rows)))

    def with_dim(self, dim: int) -> "Dataset":
        rows = [SparseVector(dim, r.indices, r.values, r.allow_negative) for r in self.rows]
        return Dataset(dim, list(self.labels), rows)

    def normalized(self, mode: NormMode) -> "Dataset":
        rows = []
        for n, row in enumerate(self.rows):
            try:
                rows.append(normalize(row, mode))
            except ValueError as exc:
                raise ValueError(f"row {n + 1}: {exc}") from None
        return Dataset(self.dim, list(self.labels), rows)


def _parse_label(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        x = float(token)
    except ValueError:
        raise SvmlightFormatError(lineno, f"bad label {token!r}") from None
    if not math.isfinite(x) or x != int(x):
        raise SvmlightFormatError(lineno, f"label {token!r} is not an integer class id")
    return int(x)


def _text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def parse_svmlight(source, dim: int | None = None, allow_negative: bool = False) -> Dataset:
    """Parse svmlight/libsvm text (``str``, ``bytes`` or a file object).

    ``dim`` overrides the inferred dimension (the largest index seen) so that
    train and test files can share one ambient space.  ``idx:0`` entries are
    dropped.  Blank lines and ``#`` comments are ignored.
    """
    labels: list[int] = []
    parsed: list[tuple[list[int], list[float]]] = []
    max_index = 0
    for lineno, raw in enumerate(_text(source).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label = _parse_label(tokens[0], lineno)
        idx: list[int] = []
        val: list[float] = []
        prev = 0
        for tok in tokens[1:]:
            key, sep, value = tok.partition(":")
            if not sep:
                raise SvmlightFormatError(lineno, f"expected index:value, got {tok!r}")
            try:
                i = int(key)
                x = float(value)
            except ValueError:
                raise SvmlightFormatError(lineno, f"cannot parse {tok!r}") from None
            if i < 1:
                raise SvmlightFormatError(lineno, f"index {i} is not 1-based")
            if i <= prev:
                raise SvmlightFormatError(lineno, f"index {i} is not ascending")
            if not math.isfinite(x):
                raise SvmlightFormatError(lineno, f"non-finite value at index {i}")
            if x < 0 and not allow_negative:
                raise SvmlightFormatError(lineno, f"negative value {value} at index {i}")
            prev = i
            if x != 0:
                idx.append(i)
                val.append(x)
        max_index = max(max_index, prev)
        labels.append(label)
        parsed.append((idx, val))
    if not parsed:
        raise SvmlightFormatError(0, "empty input")
    if dim is None:
        dim = max(max_index, 1)
    elif dim < max_index:
        raise ValueError(f"dimension override {dim} is smaller than index {max_index} in the data")
    rows = [SparseVector(dim, i, v, allow_negative) for i, v in parsed]
    return Dataset(dim, labels, rows)


def format_value(x: float, precision: int = 9) -> str:
    return f"{x:.{precision}g}"


def format_row(label: int, pairs: Iterable[tuple[int, float]], precision: int = 9) -> str:
    parts = [str(int(label))]
    parts.extend(f"{i}:{format_value(v, precision)}" for i, v in pairs)
    return " ".join(parts) + "\n"


def write_svmlight(dataset: Dataset, precision: int = 9, header: str | None = None) -> str:
    """Render ``dataset`` as svmlight text with LF line endings.

    ``header`` is written as a leading ``#`` comment line when given.
    """
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    for label, row in dataset:
        out.write(format_row(label, zip(row.indices.tolist(), row.values.tolist()), precision))
    return out.getvalue()


def normalize(v: SparseVector, mode: NormMode | str) -> SparseVector:
    mode = NormMode.parse(mode)
    if mode is NormMode.NONE:
        return v
    if v.nnz == 0:
        raise ValueError("zero vector cannot be normalized")
    if mode is NormMode.L1:
        scale = np.abs(v.values).sum()
    else:
        scale = math.sqrt(float(np.dot(v.values, v.values)))
    return SparseVector(v.dim, v.indices.copy(), v.values / scale, v.allow_negative)
