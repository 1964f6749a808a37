"""Pure numpy implementations of the hot kernels.

Same signatures and arithmetic as the compiled ``_ccore`` module, which is
preferred when it imports.  Work over the ``k`` samples is done in chunks so
memory stays bounded at roughly ``_CHUNK_CELLS`` doubles per temporary.
"""
from __future__ import annotations

import numpy as np

from kernlin import randstream as rs

NAME = "python"

GAUSS = 0
CAUCHY = 1

_CHUNK_CELLS = 1 << 20


def _chunks(k: int, nnz: int):
    step = max(1, _CHUNK_CELLS // max(nnz, 1))
    for start in range(0, k, step):
        yield start, min(k, start + step)


def project(indices, values, seed, k, dist, slot=rs.SLOT_PROJ, j0=0):
    """``x_j = sum_i v_i r_ij`` for ``j0 <= j < j0 + k``, Gaussian or Cauchy ``r``."""
    indices = np.asarray(indices, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    out = np.zeros(k, dtype=np.float64)
    if indices.size == 0:
        return out
    draw = rs.gaussian if dist == GAUSS else rs.cauchy
    for lo, hi in _chunks(k, indices.size):
        j = np.arange(j0 + lo, j0 + hi, dtype=np.int64)[:, None]
        r = draw(seed, j, indices[None, :], slot)
        # explicit left-to-right sum so both backends accumulate alike
        acc = np.zeros(hi - lo)
        for col in range(indices.size):
            acc += values[col] * r[:, col]
        out[lo:hi] = acc
    return out


def cws(indices, values, seed, k, j0=0):
    """Consistent weighted samples ``(i*, t*)`` for ``j0 <= j < j0 + k``.

    Works with ``ln a_i = ln c_i - r_i (t_i - beta_i + 1)``, which orders the
    candidates exactly as ``a_i = c_i / (y_i exp(r_i))``.  Ties go to the
    lowest dimension index (``argmin`` returns the first minimum and the
    support is sorted).
    """
    indices = np.asarray(indices, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if indices.size == 0:
        raise ValueError("consistent weighted sampling needs a nonzero vector")
    log_u = np.log(values)[None, :]
    istar = np.empty(k, dtype=np.int64)
    tstar = np.empty(k, dtype=np.int64)
    for lo, hi in _chunks(k, indices.size):
        j = np.arange(j0 + lo, j0 + hi, dtype=np.int64)[:, None]
        dims = indices[None, :]
        r = rs.gamma21(seed, j, dims, rs.SLOT_CWS_R)
        c = rs.gamma21(seed, j, dims, rs.SLOT_CWS_C)
        beta = rs.uniform01(seed, j, dims, rs.SLOT_CWS_BETA)
        t = np.floor(log_u / r + beta)
        ln_a = np.log(c) - r * (t - beta + 1.0)
        best = np.argmin(ln_a, axis=1)
        rows = np.arange(hi - lo)
        istar[lo:hi] = indices[best]
        tstar[lo:hi] = t[rows, best].astype(np.int64)
    return istar, tstar


def dcd_sweep(indptr, indices, data, y, alpha, w, qii, C, order):
    """One pass of dual coordinate descent for the hinge-loss SVM.

    Updates ``alpha`` and ``w`` in place and returns the largest absolute
    projected gradient seen during the pass.
    """
    max_pg = 0.0
    for i in order:
        lo, hi = indptr[i], indptr[i + 1]
        if qii[i] <= 0.0:
            continue
        idx = indices[lo:hi]
        val = data[lo:hi]
        yi = y[i]
        g = yi * float(np.dot(w[idx], val)) - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = min(g, 0.0)
        elif a >= C:
            pg = max(g, 0.0)
        else:
            pg = g
        if abs(pg) > max_pg:
            max_pg = abs(pg)
        if abs(pg) > 1e-12:
            new = min(max(a - g / qii[i], 0.0), C)
            alpha[i] = new
            w[idx] += (new - a) * yi * val
    return max_pg
