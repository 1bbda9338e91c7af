# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled bulk kernels.  Must stay bitwise-equal to ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def eval_affinity_batch(const double[:, :, ::1] A, const double[::1] scales,
                        const long long[:, ::1] seqs, const long long[::1] lengths):
    cdef Py_ssize_t m = seqs.shape[0]
    cdef Py_ssize_t k = A.shape[0]
    cdef Py_ssize_t C = A.shape[1]
    cdef Py_ssize_t r, t, c, q, p, L
    cdef double total, acc, mx, v
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    for r in range(m):
        L = lengths[r]
        total = 0.0
        for t in range(k):
            p = t + 1 if t + 1 < L else L
            acc = 0.0
            for c in range(C):
                mx = 0.0
                for q in range(p):
                    v = A[t, c, seqs[r, q]]
                    if v > mx:
                        mx = v
                acc += mx
            total += scales[t] * acc
        out[r] = total
    return out_arr


def accumulate_buckets(const long long[:, ::1] seqs, const long long[::1] lengths,
                       const double[::1] phi, Py_ssize_t n, Py_ssize_t k):
    cdef Py_ssize_t m = seqs.shape[0]
    cdef Py_ssize_t r, q, i, L
    cdef double x
    last_sum_a = np.zeros((n, k + 1), dtype=np.float64)
    last_cnt_a = np.zeros((n, k + 1), dtype=np.int64)
    excl_sum_a = np.zeros((n, k + 1), dtype=np.float64)
    excl_cnt_a = np.zeros((n, k + 1), dtype=np.int64)
    member_a = np.zeros(n, dtype=np.uint8)
    cdef double[:, ::1] last_sum = last_sum_a
    cdef long long[:, ::1] last_cnt = last_cnt_a
    cdef double[:, ::1] excl_sum = excl_sum_a
    cdef long long[:, ::1] excl_cnt = excl_cnt_a
    cdef unsigned char[::1] member = member_a
    cdef double full_sum = 0.0
    cdef long long full_cnt = 0
    for r in range(m):
        L = lengths[r]
        x = phi[r]
        for q in range(L):
            member[seqs[r, q]] = 1
        i = seqs[r, L - 1]
        last_sum[i, L] += x
        last_cnt[i, L] += 1
        for i in range(n):
            if member[i] == 0:
                excl_sum[i, L] += x
                excl_cnt[i, L] += 1
        for q in range(L):
            member[seqs[r, q]] = 0
        if L == k:
            full_sum += x
            full_cnt += 1
    return last_sum_a, last_cnt_a, excl_sum_a, excl_cnt_a, full_sum, full_cnt
