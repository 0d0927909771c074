# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice-sum kernel; same contract as ``_theta_py.theta_sum``."""

import numpy as np
cimport numpy as cnp

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)

cdef double PI = 3.141592653589793


def theta_sum(lams, gamma, a, b, order, offsets, base):
    cdef double complex[:, ::1] L = np.ascontiguousarray(lams, dtype=np.complex128)
    cdef double complex[:, ::1] G = np.ascontiguousarray(gamma, dtype=np.complex128)
    cdef double[::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef long[::1] O = np.ascontiguousarray(order, dtype=np.int64)
    cdef long[:, ::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef long[:, ::1] bs = np.ascontiguousarray(base, dtype=np.int64)
    cdef Py_ssize_t N = L.shape[0], M = off.shape[0], g = L.shape[1]
    out = np.zeros(N, dtype=np.complex128)
    cdef double complex[::1] res = out
    cdef double v[16]
    cdef double complex quad, lin, acc, poly, fac
    cdef Py_ssize_t p, m, i, j, k
    cdef bint has_order = False
    if g > 16:
        raise ValueError("compiled kernel supports genus <= 16")
    for i in range(g):
        if O[i] != 0:
            has_order = True
    with nogil:
        for p in range(N):
            acc = 0
            for m in range(M):
                for i in range(g):
                    v[i] = bs[p, i] + off[m, i] + A[i]
                quad = 0
                lin = 0
                for i in range(g):
                    for j in range(g):
                        quad = quad + v[i] * G[i, j] * v[j]
                    lin = lin + v[i] * (L[p, i] + B[i])
                fac = cexp(1j * PI * quad + 2j * PI * lin)
                if has_order:
                    poly = 1
                    for i in range(g):
                        for k in range(O[i]):
                            poly = poly * (2j * PI * v[i])
                    fac = fac * poly
                acc = acc + fac
            res[p] = acc
    return out
