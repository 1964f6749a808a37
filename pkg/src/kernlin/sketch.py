"""Randomized linearizations of the nonlinear kernels.

Every map turns a nonnegative sparse vector into an :class:`EncodedVector`
with exactly ``k`` stored entries, one per sample block, such that
``dot(f(u), f(v)) / k`` estimates the target kernel:

=============  ===========================  ====================
method         target                       block width
=============  ===========================  ====================
sign-gauss     acos                         2
sign-cauchy    acos-chi2 (approximately)    2
rff            rbf                          1
frff           frbf                         1
cws0           min-max (0-bit CWS)          2**b
mm-acos        min-max x acos               2**(b+1)
mm-acos-chi2   min-max x acos-chi2          2**(b+1)
mm-rbf         min-max x rbf                2**b
=============  ===========================  ====================

Randomness is addressed by ``(seed, j, i)`` through :mod:`kernlin.randstream`,
so train and test files featurized with one plan share their projections.
"""
from __future__ import annotations

import enum
import io
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from kernlin import randstream as rs
from kernlin._backend import core
from kernlin.data import (Dataset, NormMode, SparseVector, _text, format_row, normalize,
                          parse_svmlight)
from kernlin.kernels import KernelKind

GAUSS = 0
CAUCHY = 1
MAX_BITS = 16
UNIT_NORM_TOLERANCE = 1e-6
_SQRT2 = math.sqrt(2.0)


class Method(enum.Enum):
    SIGN_GAUSS = "sign-gauss"
    SIGN_CAUCHY = "sign-cauchy"
    RFF = "rff"
    FRFF = "frff"
    CWS_0BIT = "cws0"
    MM_ACOS = "mm-acos"
    MM_ACOS_CHI2 = "mm-acos-chi2"
    MM_RBF = "mm-rbf"

    @classmethod
    def parse(cls, name: str | "Method") -> "Method":
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("_", "-")
        key = {"cws": "cws0", "cws-0bit": "cws0", "0bit-cws": "cws0"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {name!r}; choose one of {names}") from None

    @property
    def uses_bits(self) -> bool:
        return self in (Method.CWS_0BIT, Method.MM_ACOS, Method.MM_ACOS_CHI2, Method.MM_RBF)

    @property
    def uses_gamma(self) -> bool:
        return self in (Method.RFF, Method.FRFF, Method.MM_RBF)

    @property
    def one_hot(self) -> bool:
        return self not in (Method.RFF, Method.FRFF, Method.MM_RBF)

    @property
    def target(self) -> KernelKind:
        """Kernel whose value ``dot / k`` estimates."""
        return {
            Method.SIGN_GAUSS: KernelKind.ACOS,
            Method.SIGN_CAUCHY: KernelKind.ACOS_CHI2,
            Method.RFF: KernelKind.RBF,
            Method.FRFF: KernelKind.FRBF,
            Method.CWS_0BIT: KernelKind.MINMAX,
            Method.MM_ACOS: KernelKind.MM_ACOS,
            Method.MM_ACOS_CHI2: KernelKind.MM_ACOS_CHI2,
            Method.MM_RBF: KernelKind.MM_RBF,
        }[self]


@dataclass(frozen=True)
class SketchPlan:
    method: Method
    k: int
    b: int | None = None
    gamma: float | None = None
    seed: int = 0
    norm: NormMode = NormMode.NONE

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "norm", NormMode.parse(self.norm))
        object.__setattr__(self, "seed", int(self.seed) & rs.MASK64)
        m = self.method
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if m.uses_bits:
            if self.b is None:
                raise ValueError(f"method {m.value} requires b")
            if not 1 <= self.b <= MAX_BITS:
                raise ValueError(f"b must lie in [1, {MAX_BITS}], got {self.b}")
        elif self.b is not None:
            raise ValueError(f"method {m.value} takes no b")
        if m.uses_gamma:
            if self.gamma is None:
                raise ValueError(f"method {m.value} requires gamma")
            if not self.gamma > 0:
                raise ValueError(f"gamma must be positive, got {self.gamma}")
        elif self.gamma is not None:
            raise ValueError(f"method {m.value} takes no gamma")

    @property
    def block_width(self) -> int:
        m = self.method
        if m in (Method.SIGN_GAUSS, Method.SIGN_CAUCHY):
            return 2
        if m in (Method.RFF, Method.FRFF):
            return 1
        if m in (Method.MM_ACOS, Method.MM_ACOS_CHI2):
            return 2 ** (self.b + 1)
        return 2 ** self.b

    @property
    def total_dim(self) -> int:
        return self.k * self.block_width

    def with_k(self, k: int) -> "SketchPlan":
        return SketchPlan(self.method, k, self.b, self.gamma, self.seed, self.norm)

    def with_seed(self, seed: int) -> "SketchPlan":
        return SketchPlan(self.method, self.k, self.b, self.gamma, seed, self.norm)

    def header(self) -> str:
        b = "none" if self.b is None else str(self.b)
        g = "none" if self.gamma is None else repr(float(self.gamma))
        return (f"method={self.method.value} k={self.k} b={b} gamma={g} "
                f"seed={self.seed} norm={self.norm.value} dim={self.total_dim}")

    @classmethod
    def from_header(cls, line: str) -> "SketchPlan":
        fields = dict(re.findall(r"(\w+)=(\S+)", line))
        try:
            b = None if fields.get("b", "none") == "none" else int(fields["b"])
            g = None if fields.get("gamma", "none") == "none" else float(fields["gamma"])
            return cls(fields["method"], int(fields["k"]), b, g, int(fields["seed"]),
                       fields.get("norm", "none"))
        except KeyError as exc:
            raise ValueError(f"sketch header lacks {exc.args[0]!r}") from None


class CwsSample(NamedTuple):
    i_star: int
    t_star: int


@dataclass(eq=False)
class BitSketch:
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.int8)
        if not np.all((self.bits == 1) | (self.bits == -1)):
            raise ValueError("sign bits must be -1 or +1")

    def __len__(self):
        return int(self.bits.size)

    def __eq__(self, other):
        return isinstance(other, BitSketch) and np.array_equal(self.bits, other.bits)

    def match_fraction(self, other: "BitSketch") -> float:
        if len(self) != len(other):
            raise ValueError("sketch lengths differ")
        return float(np.mean(self.bits == other.bits))


@dataclass(eq=False)
class EncodedVector:
    """Sparse feature vector with 0-based indices."""

    total_dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values differ in length")
        if self.indices.size and (self.indices[0] < 0 or self.indices[-1] >= self.total_dim):
            raise ValueError(f"indices must lie in [0, {self.total_dim})")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def dot(self, other: "EncodedVector") -> float:
        if self.total_dim != other.total_dim:
            raise ValueError(f"dimension mismatch: {self.total_dim} vs {other.total_dim}")
        _, ia, ib = np.intersect1d(self.indices, other.indices, assume_unique=True,
                                   return_indices=True)
        return float(np.dot(self.values[ia], other.values[ib]))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.total_dim)
        out[self.indices] = self.values
        return out

    def __eq__(self, other):
        return (isinstance(other, EncodedVector) and self.total_dim == other.total_dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))


def _require_nonzero(v: SparseVector):
    if v.nnz == 0:
        raise ValueError("cannot sketch an all-zero vector")


def _require_unit_norm(v: SparseVector):
    norm = math.sqrt(float(np.dot(v.values, v.values)))
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        raise ValueError(f"vector is not L2-normalized (norm = {norm!r})")


def _dist_code(dist) -> int:
    if dist in (GAUSS, "gauss", "gaussian", "normal"):
        return GAUSS
    if dist in (CAUCHY, "cauchy"):
        return CAUCHY
    raise ValueError(f"unknown projection distribution {dist!r}")


def project(v: SparseVector, j: int, dist, seed: int) -> float:
    """Random projection ``x_j = sum_i v_i r_ij`` for one sample index."""
    return float(core.project(v.indices, v.values, seed, 1, _dist_code(dist), rs.SLOT_PROJ, j)[0])


def project_all(v: SparseVector, k: int, dist, seed: int) -> np.ndarray:
    return core.project(v.indices, v.values, seed, k, _dist_code(dist), rs.SLOT_PROJ)


def sign_sketch(v: SparseVector, k: int, dist, seed: int) -> BitSketch:
    _require_nonzero(v)
    x = project_all(v, k, dist, seed)
    return BitSketch(np.where(x >= 0, 1, -1))


def encode_signs(s: BitSketch) -> EncodedVector:
    k = len(s)
    idx = 2 * np.arange(k, dtype=np.int64) + (s.bits == 1)
    return EncodedVector(2 * k, idx, np.ones(k))


def cws_sample(v: SparseVector, j: int, seed: int) -> CwsSample:
    _require_nonzero(v)
    i_star, t_star = core.cws(v.indices, v.values, seed, 1, j)
    return CwsSample(int(i_star[0]), int(t_star[0]))


def cws_samples(v: SparseVector, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(i*, t*)`` for samples ``0 .. k-1``."""
    _require_nonzero(v)
    return core.cws(v.indices, v.values, seed, k)


def buckets(i_star, b: int) -> np.ndarray:
    """Lowest ``b`` bits of the 0-based winning index."""
    return (np.asarray(i_star, dtype=np.int64) - 1) % (1 << b)


def encode_zero_bit_cws(samples: Sequence[CwsSample] | np.ndarray, b: int) -> EncodedVector:
    if not 1 <= b <= MAX_BITS:
        raise ValueError(f"b must lie in [1, {MAX_BITS}], got {b}")
    if isinstance(samples, np.ndarray):
        i_star = samples
    else:
        i_star = np.array([s[0] for s in samples], dtype=np.int64)
    k = i_star.size
    width = 1 << b
    idx = np.arange(k, dtype=np.int64) * width + buckets(i_star, b)
    return EncodedVector(k * width, idx, np.ones(k))


def _phases(k: int, seed: int) -> np.ndarray:
    return rs.uniform_0_2pi(seed, np.arange(k, dtype=np.int64), 0, rs.SLOT_PHASE)


def _rff_values(v: SparseVector, k: int, gamma: float, seed: int) -> np.ndarray:
    x = project_all(v, k, GAUSS, seed)
    return _SQRT2 * np.cos(math.sqrt(gamma) * x + _phases(k, seed))


def rff_features(v: SparseVector, k: int, gamma: float, seed: int) -> EncodedVector:
    """``sqrt(2) cos(sqrt(gamma) x_j + w_j)``; ``dot / k`` targets ``exp(-gamma (1 - rho))``.

    The ``sqrt(2)`` compensates ``E_w[cos(A + w) cos(B + w)] = cos(A - B) / 2``.
    """
    _require_unit_norm(v)
    return EncodedVector(k, np.arange(k, dtype=np.int64), _rff_values(v, k, gamma, seed))


def frff_features(v: SparseVector, k: int, gamma: float, seed: int) -> EncodedVector:
    """Phase-free ``cos(sqrt(gamma) x_j)``; ``dot / k`` targets the folded RBF kernel."""
    _require_unit_norm(v)
    x = project_all(v, k, GAUSS, seed)
    return EncodedVector(k, np.arange(k, dtype=np.int64), np.cos(math.sqrt(gamma) * x))


def combined_mm_sign_sketch(v: SparseVector, k: int, b: int, inner: str, seed: int) -> EncodedVector:
    """0-bit CWS bucket and an independent sign bit packed into one block.

    Block ``j`` is ``2**(b+1)`` wide and holds its 1 at ``2 c + (s == +1)``
    where ``c`` is the CWS bucket and ``s`` the projection sign.  ``inner`` is
    ``"acos"`` (Gaussian projections) or ``"acos-chi2"`` (Cauchy projections
    of the L1-normalized vector).
    """
    _require_nonzero(v)
    inner = inner.lower().replace("_", "-")
    if inner == "acos":
        signs = sign_sketch(v, k, GAUSS, seed)
    elif inner in ("acos-chi2", "acoschi2"):
        signs = sign_sketch(normalize(v, NormMode.L1), k, CAUCHY, seed)
    else:
        raise ValueError(f"inner kernel must be 'acos' or 'acos-chi2', got {inner!r}")
    i_star, _ = cws_samples(v, k, seed)
    width = 1 << (b + 1)
    idx = (np.arange(k, dtype=np.int64) * width + 2 * buckets(i_star, b)
           + (signs.bits == 1))
    return EncodedVector(k * width, idx, np.ones(k))


def combined_mm_rbf_sketch(v: SparseVector, k: int, b: int, gamma: float, seed: int) -> EncodedVector:
    """0-bit CWS bucket carrying an RFF value instead of a 1.

    The RFF factor sees the L2-normalized vector; the CWS factor the raw one.
    """
    _require_nonzero(v)
    vals = _rff_values(normalize(v, NormMode.L2), k, gamma, seed)
    i_star, _ = cws_samples(v, k, seed)
    width = 1 << b
    idx = np.arange(k, dtype=np.int64) * width + buckets(i_star, b)
    return EncodedVector(k * width, idx, vals)


def encode(v: SparseVector, plan: SketchPlan) -> EncodedVector:
    """Apply ``plan`` (including its normalization) to one vector."""
    v = normalize(v, plan.norm)
    m, k, seed = plan.method, plan.k, plan.seed
    if m is Method.SIGN_GAUSS:
        return encode_signs(sign_sketch(v, k, GAUSS, seed))
    if m is Method.SIGN_CAUCHY:
        return encode_signs(sign_sketch(v, k, CAUCHY, seed))
    if m is Method.RFF:
        return rff_features(v, k, plan.gamma, seed)
    if m is Method.FRFF:
        return frff_features(v, k, plan.gamma, seed)
    if m is Method.CWS_0BIT:
        i_star, _ = cws_samples(v, k, seed)
        return encode_zero_bit_cws(i_star, plan.b)
    if m is Method.MM_ACOS:
        return combined_mm_sign_sketch(v, k, plan.b, "acos", seed)
    if m is Method.MM_ACOS_CHI2:
        return combined_mm_sign_sketch(v, k, plan.b, "acos-chi2", seed)
    return combined_mm_rbf_sketch(v, k, plan.b, plan.gamma, seed)


@dataclass(eq=False)
class EncodedDataset:
    total_dim: int
    labels: list[int]
    rows: list[EncodedVector]
    plan: SketchPlan | None = field(default=None)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return (isinstance(other, EncodedDataset) and self.total_dim == other.total_dim
                and list(self.labels) == list(other.labels)
                and all(a == b for a, b in zip(self.rows, other.rows)))

    def to_svmlight(self, precision: int = 9) -> str:
        """svmlight text (1-based indices) led by a ``# method=...`` plan header."""
        buf = io.StringIO()
        if self.plan is not None:
            buf.write(f"# {self.plan.header()}\n")
        else:
            buf.write(f"# dim={self.total_dim}\n")
        for label, row in zip(self.labels, self.rows):
            buf.write(format_row(label, zip((row.indices + 1).tolist(), row.values.tolist()),
                                 precision))
        return buf.getvalue()


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("KERNLIN_THREADS", "1")))
    except ValueError:
        return 1


def featurize_dataset(d: Dataset, plan: SketchPlan, threads: int | None = None) -> EncodedDataset:
    """Encode every row of ``d``; output order follows input order."""
    threads = default_threads() if threads is None else max(1, int(threads))

    def one(item):
        n, row = item
        try:
            return encode(row, plan)
        except (ValueError, ArithmeticError) as exc:
            raise ValueError(f"row {n + 1}: {exc}") from None

    items = list(enumerate(d.rows))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(item) for item in items]
    return EncodedDataset(plan.total_dim, list(d.labels), rows, plan)


def read_encoded(source, dim: int | None = None) -> EncodedDataset:
    """Parse a featurized svmlight file, honouring the ``dim=`` of its header.

    ``dim`` applies only when the file carries no header, e.g. raw svmlight
    input scored against a model of known width.
    """
    text = _text(source)
    plan = None
    header_dim = None
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            header = stripped.lstrip("#")
            if "method=" in header:
                plan = SketchPlan.from_header(header)
            found = re.search(r"\bdim=(\d+)", header)
            if found:
                header_dim = int(found.group(1))
        break
    if header_dim is not None:
        dim = header_dim
    ds = parse_svmlight(text, dim=dim, allow_negative=True)
    rows = [EncodedVector(ds.dim, r.indices - 1, r.values) for r in ds.rows]
    return EncodedDataset(ds.dim, list(ds.labels), rows, plan)
