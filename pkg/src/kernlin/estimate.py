"""Kernel estimates from sketches and Monte Carlo convergence studies."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from kernlin import randstream as rs
from kernlin.data import SparseVector, normalize
from kernlin.kernels import KernelSpec, evaluate
from kernlin.sketch import EncodedVector, SketchPlan, encode


def estimate_pair(eu: EncodedVector, ev: EncodedVector, k: int | None = None) -> float:
    """``dot(eu, ev) / k``; ``k`` defaults to the number of stored entries."""
    if eu.total_dim != ev.total_dim:
        raise ValueError(f"dimension mismatch: {eu.total_dim} vs {ev.total_dim}")
    k = eu.nnz if k is None else k
    return eu.dot(ev) / k


def per_sample_products(eu: EncodedVector, ev: EncodedVector) -> np.ndarray:
    """Per-block contributions ``z_j``, so that ``estimate_pair == z.mean()``.

    Relies on the block layout every sketch produces: entry ``j`` of both
    vectors lives in block ``j``, so the blocks meet only when the two
    stored indices coincide.
    """
    if eu.total_dim != ev.total_dim or eu.nnz != ev.nnz:
        raise ValueError("encodings come from different plans")
    hit = eu.indices == ev.indices
    return np.where(hit, eu.values * ev.values, 0.0)


def replicate_estimates(u: SparseVector, v: SparseVector, plan: SketchPlan,
                        k_grid: Sequence[int], reps: int, seed: int) -> np.ndarray:
    """Estimates of shape ``(reps, len(k_grid))``.

    Each replicate draws a fresh seed and sketches once at ``max(k_grid)``;
    the estimate at ``k`` uses the first ``k`` samples, which is exactly the
    sketch a plan with that ``k`` would produce.
    """
    k_max = max(k_grid)
    out = np.empty((reps, len(k_grid)))
    for r in range(reps):
        p = plan.with_k(k_max).with_seed(rs.derive_seed(seed, r))
        z = per_sample_products(encode(u, p), encode(v, p))
        csum = np.cumsum(z)
        for c, k in enumerate(k_grid):
            out[r, c] = csum[k - 1] / k
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    method: str
    kernel: str
    k: int
    reps: int
    mean_abs_err: float
    std_err: float


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "kernel", "k", "reps", "mean_abs_err", "std_err"])
        for r in self.rows:
            writer.writerow([r.method, r.kernel, r.k, r.reps,
                             f"{r.mean_abs_err:.9g}", f"{r.std_err:.9g}"])
        return buf.getvalue()

    def errors(self) -> dict[int, float]:
        return {r.k: r.mean_abs_err for r in self.rows}


def convergence_study(pairs: Sequence[tuple[SparseVector, SparseVector]], spec: KernelSpec,
                      plan: SketchPlan, k_grid: Sequence[int], reps: int,
                      seed: int) -> ConvergenceReport:
    """Mean absolute kernel error per ``k`` over ``reps`` replicates of every pair.

    ``plan`` fixes the method, ``b``, ``gamma`` and normalization; its ``k``
    and ``seed`` are ignored.  The exact kernel is evaluated on the vectors
    after ``plan.norm``.
    """
    k_grid = [int(k) for k in k_grid]
    if not k_grid:
        raise ValueError("k_grid must not be empty")
    if any(b <= a for a, b in zip(k_grid, k_grid[1:])):
        raise ValueError("k_grid must be strictly increasing")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if not pairs:
        raise ValueError("no pairs to study")
    errors = []
    for n, (u, v) in enumerate(pairs):
        u = normalize(u, plan.norm)
        v = normalize(v, plan.norm)
        exact = evaluate(spec, u, v)
        est = replicate_estimates(u, v, plan, k_grid, reps, rs.derive_seed(seed, n))
        errors.append(np.abs(est - exact))
    err = np.concatenate(errors, axis=0)
    count = err.shape[0]
    rows = []
    for c, k in enumerate(k_grid):
        col = err[:, c]
        se = float(col.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        rows.append(ConvergenceRow(plan.method.value, str(spec), k, reps, float(col.mean()), se))
    return ConvergenceReport(rows)


def frbf_closed_form(rho: float, gamma: float) -> float:
    return 0.5 * math.exp(-gamma * (1.0 - rho)) + 0.5 * math.exp(-gamma * (1.0 + rho))


def frbf_oracle_samples(rho: float, gamma: float, n: int, seed: int) -> np.ndarray:
    """``cos(sqrt(gamma) x) cos(sqrt(gamma) y)`` for ``n`` correlated normal pairs."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if n < 1:
        raise ValueError("n must be at least 1")
    j = np.arange(n, dtype=np.int64)
    x = rs.gaussian(seed, j, 1)
    z = rs.gaussian(seed, j, 2)
    y = rho * x + math.sqrt(1.0 - rho * rho) * z
    t = math.sqrt(gamma)
    return np.cos(t * x) * np.cos(t * y)


def frbf_oracle(rho: float, gamma: float, n: int, seed: int) -> float:
    """Monte Carlo value of ``E[cos(sqrt(gamma) x) cos(sqrt(gamma) y)]``, corr(x, y) = rho."""
    return float(frbf_oracle_samples(rho, gamma, n, seed).mean())
