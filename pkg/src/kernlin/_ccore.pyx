# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; drop-in for ``kernlin._pycore``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, tan, floor, fabs, M_PI
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

NAME = "cython"

GAUSS = 0
CAUCHY = 1

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15
cdef uint64_t J_STEP = 0x9E3779B97F4A7C15
cdef uint64_t I_STEP = 0xC2B2AE3D27D4EB4F
cdef uint64_t LANE_STEP = 0x165667B19E3779F9
cdef uint64_t M1 = 0xBF58476D1CE4E5B9
cdef uint64_t M2 = 0x94D049BB133111EB

cdef int SLOT_CWS_R = 0
cdef int SLOT_CWS_C = 1
cdef int SLOT_CWS_BETA = 2
cdef int SLOT_PROJ = 3


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>M1
    z = (z ^ (z >> 27)) * <uint64_t>M2
    return z ^ (z >> 31)


cdef inline uint64_t seed_state(uint64_t seed) noexcept nogil:
    return mix64(seed ^ <uint64_t>GOLDEN)


cdef inline uint64_t sample_state(uint64_t h, int64_t j) noexcept nogil:
    return mix64(h + <uint64_t>(j + 1) * <uint64_t>J_STEP)


cdef inline uint64_t dim_state(uint64_t h, int64_t i) noexcept nogil:
    return mix64(h + <uint64_t>(i + 1) * <uint64_t>I_STEP)


cdef inline double unit(uint64_t h, int lane) noexcept nogil:
    cdef uint64_t w = mix64(h + <uint64_t>(lane + 1) * <uint64_t>LANE_STEP)
    return (<double>(w >> 12) + 0.5) * 2.220446049250313e-16


cdef inline double gauss_at(uint64_t h, int slot) noexcept nogil:
    cdef double u1 = unit(h, 2 * slot)
    cdef double u2 = unit(h, 2 * slot + 1)
    return sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)


cdef inline double cauchy_at(uint64_t h, int slot) noexcept nogil:
    return tan(M_PI * (unit(h, 2 * slot) - 0.5))


cdef inline double gamma21_at(uint64_t h, int slot) noexcept nogil:
    return -log(unit(h, 2 * slot)) - log(unit(h, 2 * slot + 1))


def stream_words(seed, j, i, int lane):
    """Vectorised raw words; used to cross-check against ``randstream``."""
    cdef cnp.ndarray[int64_t, ndim=1] jj = np.ascontiguousarray(np.ravel(j), dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] ii = np.ascontiguousarray(np.ravel(i), dtype=np.int64)
    cdef Py_ssize_t n = jj.shape[0], t
    cdef cnp.ndarray[uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef uint64_t h0 = seed_state(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    for t in range(n):
        out[t] = mix64(dim_state(sample_state(h0, jj[t]), ii[t])
                       + <uint64_t>(lane + 1) * <uint64_t>LANE_STEP)
    return out


def project(indices, values, seed, Py_ssize_t k, int dist, int slot=3, int64_t j0=0):
    cdef cnp.ndarray[int64_t, ndim=1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] val = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(k, dtype=np.float64)
    cdef Py_ssize_t nnz = idx.shape[0], j, c
    cdef uint64_t h0 = seed_state(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef uint64_t hj, h
    cdef double acc, r
    cdef int64_t* ip = <int64_t*>idx.data
    cdef double* vp = <double*>val.data
    cdef double* op = <double*>out.data
    with nogil:
        for j in range(k):
            hj = sample_state(h0, j0 + j)
            acc = 0.0
            for c in range(nnz):
                h = dim_state(hj, ip[c])
                if dist == 0:
                    r = gauss_at(h, slot)
                else:
                    r = cauchy_at(h, slot)
                acc = acc + vp[c] * r
            op[j] = acc
    return out


def cws(indices, values, seed, Py_ssize_t k, int64_t j0=0):
    cdef cnp.ndarray[int64_t, ndim=1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] val = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t nnz = idx.shape[0], j, c, best
    if nnz == 0:
        raise ValueError("consistent weighted sampling needs a nonzero vector")
    cdef cnp.ndarray[int64_t, ndim=1] istar = np.empty(k, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] tstar = np.empty(k, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] logu = np.log(val)
    cdef uint64_t h0 = seed_state(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef uint64_t hj, h
    cdef double r, cc, beta, t, ln_a, best_a, best_t
    cdef int64_t* ip = <int64_t*>idx.data
    cdef double* lp = <double*>logu.data
    cdef int64_t* isp = <int64_t*>istar.data
    cdef int64_t* tsp = <int64_t*>tstar.data
    with nogil:
        for j in range(k):
            hj = sample_state(h0, j0 + j)
            best = 0
            best_a = 0.0
            best_t = 0.0
            for c in range(nnz):
                h = dim_state(hj, ip[c])
                r = gamma21_at(h, SLOT_CWS_R)
                cc = gamma21_at(h, SLOT_CWS_C)
                beta = unit(h, 2 * SLOT_CWS_BETA)
                t = floor(lp[c] / r + beta)
                ln_a = log(cc) - r * (t - beta + 1.0)
                if c == 0 or ln_a < best_a:
                    best = c
                    best_a = ln_a
                    best_t = t
            isp[j] = ip[best]
            tsp[j] = <int64_t>best_t
    return istar, tstar


def dcd_sweep(indptr, indices, data, y, alpha, w, qii, double C, order):
    cdef cnp.ndarray[int64_t, ndim=1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] dat = np.ascontiguousarray(data, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] q = np.ascontiguousarray(qii, dtype=np.float64)
    cdef cnp.ndarray[int64_t, ndim=1] perm = np.ascontiguousarray(order, dtype=np.int64)
    cdef double[::1] al = alpha
    cdef double[::1] ww = w
    cdef Py_ssize_t n = perm.shape[0], p, i, s
    cdef double g, a, pg, new, d, max_pg = 0.0
    with nogil:
        for p in range(n):
            i = perm[p]
            if q[i] <= 0.0:
                continue
            g = 0.0
            for s in range(ptr[i], ptr[i + 1]):
                g = g + ww[ind[s]] * dat[s]
            g = yy[i] * g - 1.0
            a = al[i]
            if a <= 0.0:
                pg = g if g < 0.0 else 0.0
            elif a >= C:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            if fabs(pg) > max_pg:
                max_pg = fabs(pg)
            if fabs(pg) > 1e-12:
                new = a - g / q[i]
                if new < 0.0:
                    new = 0.0
                elif new > C:
                    new = C
                al[i] = new
                d = (new - a) * yy[i]
                for s in range(ptr[i], ptr[i + 1]):
                    ww[ind[s]] = ww[ind[s]] + d * dat[s]
    return max_pg
