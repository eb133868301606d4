# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused bisection kernel for quadratic and hyperplane models.

Evaluates the model inline instead of going through the oracle object, so
only deterministic tie policies are supported. The caller charges the
oracle for every comparison made here.
"""
import numpy as np
from libc.math cimport sqrt


cdef inline double _value(const double[:, ::1] A, bint has_A, const double[::1] b,
                          double c, const double* y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, row
    for i in range(n):
        acc += b[i] * y[i]
    if has_A:
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += A[i, j] * y[j]
            acc += 0.5 * y[i] * row
    return acc + c


def grid_bisect(const double[::1] x, const double[:, ::1] frame, const double[:, ::1] ytilde,
                double k_lo, double k_hi, double width, double step,
                A, const double[::1] b, double c, double tie_eps, int tie):
    """Returns (last midpoint per row, max rounds, total comparisons, ties)."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t rows = ytilde.shape[0]
    cdef Py_ssize_t r, i, j
    cdef bint has_A = A is not None
    cdef const double[:, ::1] Am = np.ascontiguousarray(A if has_A else np.zeros((1, 1)), dtype=np.float64)
    cdef double[::1] k_out = np.zeros(rows)
    cdef double[::1] tail = np.zeros(n)
    cdef double[::1] y = np.zeros(n)
    cdef double fx = _value(Am, has_A, b, c, &x[0], n)
    cdef double k1, k2, k, tsq, norm, fy, scale
    cdef long depth = 0, rounds, ties = 0, total = 0
    cdef int answer
    with nogil:
        for r in range(rows):
            tsq = 0.0
            for i in range(n):
                tail[i] = 0.0
                for j in range(1, n):
                    tail[i] += frame[i, j] * ytilde[r, j - 1]
            for j in range(n - 1):
                tsq += ytilde[r, j] * ytilde[r, j]
            k1 = k_lo
            k2 = k_hi
            k = 0.0
            rounds = 0
            while k2 - k1 >= width:
                k = (k1 + k2) / 2
                norm = sqrt(k * k + tsq)
                scale = step / norm if norm > 0 else 0.0
                for i in range(n):
                    y[i] = x[i] + scale * (k * frame[i, 0] + tail[i])
                fy = _value(Am, has_A, b, c, &y[0], n)
                if fy > fx + tie_eps:
                    answer = 1
                elif fy < fx - tie_eps:
                    answer = -1
                else:
                    answer = tie
                    ties += 1
                if answer != 1:
                    k1 = k
                else:
                    k2 = k
                rounds += 1
            k_out[r] = k
            total += rounds
            if rounds > depth:
                depth = rounds
    return np.asarray(k_out), int(depth), int(total), int(ties)
