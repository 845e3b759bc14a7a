# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels; same contract and draw layout as ``_kernels_py``."""
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef uint64_t G = 0x9E3779B97F4A7C15ULL
cdef uint64_t G2 = 0xD1B54A32D192ED03ULL
cdef uint64_t G3 = 0xF1357AEA2E62A9C5ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double unif(uint64_t k, uint64_t draw) noexcept nogil:
    return <double>(mix64(k + (draw + 1) * G2) >> 11) * INV_2_53


cdef inline bint accept(uint64_t k, double target_sp, const double[:] anc_sp,
                        const double[:] anc_m, bint *t_out) noexcept nogil:
    cdef Py_ssize_t j
    cdef bint t = unif(k, 0) < target_sp
    cdef bint a
    t_out[0] = t
    for j in range(anc_sp.shape[0]):
        a = (unif(k, 2 + 2 * j) < anc_sp[j]) ^ t
        if a ^ (unif(k, 3 + 2 * j) < anc_m[j]):
            return False
    return True


def uniforms(uint64_t key, uint64_t start, uint64_t stop, uint64_t draw):
    cdef Py_ssize_t n = <Py_ssize_t>(stop - start) if stop > start else 0
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = unif(mix64(key + (start + i + 1) * G), draw)
    return out


def mbac_counts(uint64_t key, uint64_t start, uint64_t stop, double target_sp,
                double target_m, anc_sp, anc_m):
    cdef const double[:] sp = np.ascontiguousarray(anc_sp, dtype=np.float64)
    cdef const double[:] m = np.ascontiguousarray(anc_m, dtype=np.float64)
    cdef int64_t n_acc = 0, n_acc_t1 = 0, n_acc_r1 = 0, n_rej_t1 = 0
    cdef uint64_t i, k
    cdef bint t
    with nogil:
        for i in range(start, stop):
            k = mix64(key + (i + 1) * G)
            if accept(k, target_sp, sp, m, &t):
                n_acc += 1
                n_acc_t1 += t
                n_acc_r1 += t ^ (unif(k, 1) < target_m)
            else:
                n_rej_t1 += t
    return int(n_acc), int(n_acc_t1), int(n_acc_r1), int(n_rej_t1)


def runs_to_success(uint64_t key, uint64_t start, uint64_t stop, double target_sp,
                    anc_sp, anc_m, int64_t max_runs):
    cdef const double[:] sp = np.ascontiguousarray(anc_sp, dtype=np.float64)
    cdef const double[:] m = np.ascontiguousarray(anc_m, dtype=np.float64)
    cdef int64_t total = 0, total_sq = 0, max_seen = 0, attempt
    cdef uint64_t i, tk
    cdef bint t
    cdef bint overflow = False
    with nogil:
        for i in range(start, stop):
            tk = mix64(key + (i + 1) * G)
            attempt = 0
            while True:
                attempt += 1
                if attempt > max_runs:
                    overflow = True
                    break
                if accept(mix64(tk + <uint64_t>attempt * G3), target_sp, sp, m, &t):
                    break
            if overflow:
                break
            total += attempt
            total_sq += attempt * attempt
            if attempt > max_seen:
                max_seen = attempt
    if overflow:
        return 0, 0, -1
    return int(total), int(total_sq), int(max_seen)
