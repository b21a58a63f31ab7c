# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: simplex pivoting and batched Pfaffians."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    ITERATION_LIMIT = 1
    UNBOUNDED = 2


cdef void _pivot(double[:, ::1] T, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t r, c
    cdef Py_ssize_t nr = T.shape[0]
    cdef Py_ssize_t nc = T.shape[1]
    cdef double p = T[i, j]
    cdef double f
    for c in range(nc):
        T[i, c] /= p
    for r in range(nr):
        if r == i:
            continue
        f = T[r, j]
        if f == 0.0:
            continue
        for c in range(nc):
            T[r, c] -= f * T[i, c]
        T[r, j] = 0.0


cdef inline unsigned long long _basis_key(unsigned long long j) noexcept nogil:
    cdef unsigned long long z = j + 0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def basis_key(j):
    return int(_basis_key(<unsigned long long>j))


def simplex_pivot_loop(double[:, ::1] T, cnp.int64_t[::1] basis, double tol, long max_iter,
                       bint force_bland=False):
    """Steepest-edge pricing with a switch to Bland's rule once a basis repeats.

    Same contract as the pure-Python fallback: returns
    ``(status, iterations, used_bland)``.
    """
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t ncols = T.shape[1] - 1
    cdef Py_ssize_t i, j, r, leave
    cdef long it = 0
    cdef double ratio, best, b, a, slack, top, low, score, c
    w_arr = np.empty(ncols, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef int status = OPTIMAL
    cdef bint bland = force_bland
    cdef unsigned long long h = 0
    for i in range(m):
        h ^= _basis_key(<unsigned long long>basis[i])
    seen = {h}
    while True:
        j = -1
        if bland:
            for r in range(ncols):
                if T[m, r] < -tol:
                    j = r
                    break
        else:
            with nogil:
                for r in range(ncols):
                    w[r] = 1.0
                for i in range(m):
                    for r in range(ncols):
                        w[r] += T[i, r] * T[i, r]
                low = 0.0
                for r in range(ncols):
                    c = T[m, r]
                    if c < -tol:
                        score = c * c / w[r]
                        if j < 0 or score > low:
                            j = r
                            low = score
        if j < 0:
            status = OPTIMAL
            break
        if it >= max_iter:
            status = ITERATION_LIMIT
            break
        leave = -1
        best = 0.0
        for i in range(m):
            a = T[i, j]
            if a > tol:
                b = T[i, ncols]
                if b < 0.0:
                    b = 0.0
                ratio = b / a
                if leave < 0 or ratio < best:
                    best = ratio
                leave = i
        if leave < 0:
            status = UNBOUNDED
            break
        slack = 1e-12 * (fabs(best) if fabs(best) > 1.0 else 1.0)
        leave = -1
        top = 0.0
        for i in range(m):
            a = T[i, j]
            if a > tol:
                b = T[i, ncols]
                if b < 0.0:
                    b = 0.0
                if b / a > best + slack:
                    continue
                if leave < 0:
                    leave = i
                    top = a
                elif bland:
                    if basis[i] < basis[leave]:
                        leave = i
                elif a > top or (a == top and basis[i] < basis[leave]):
                    leave = i
                    top = a
        h ^= _basis_key(<unsigned long long>basis[leave]) ^ _basis_key(<unsigned long long>j)
        with nogil:
            _pivot(T, leave, j)
        basis[leave] = j
        it += 1
        if not bland:
            if best > slack:
                seen = {h}
            elif h in seen:
                bland = True
            else:
                seen.add(h)
    return status, it, bool(bland)


def pfaffian_batch(A):
    cdef double[:, :, ::1] M = np.array(A, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t N = M.shape[0]
    cdef Py_ssize_t n = M.shape[1]
    out_arr = np.ones(N, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t s, k, kp, r, a, b
    cdef double best, tmp, piv, pf
    if n % 2 == 1:
        return np.zeros(N)
    with nogil:
        for s in range(N):
            pf = 1.0
            for k in range(0, n - 1, 2):
                kp = k + 1
                best = fabs(M[s, k + 1, k])
                for r in range(k + 2, n):
                    if fabs(M[s, r, k]) > best:
                        best = fabs(M[s, r, k])
                        kp = r
                if kp != k + 1:
                    for r in range(n):
                        tmp = M[s, k + 1, r]
                        M[s, k + 1, r] = M[s, kp, r]
                        M[s, kp, r] = tmp
                    for r in range(n):
                        tmp = M[s, r, k + 1]
                        M[s, r, k + 1] = M[s, r, kp]
                        M[s, r, kp] = tmp
                    pf = -pf
                piv = M[s, k, k + 1]
                if piv == 0.0:
                    pf = 0.0
                    break
                pf *= piv
                for a in range(k + 2, n):
                    tmp = M[s, k, a] / piv
                    for b in range(k + 2, n):
                        M[s, a, b] += tmp * M[s, b, k + 1]
                for a in range(k + 2, n):
                    tmp = M[s, a, k + 1]
                    for b in range(k + 2, n):
                        M[s, a, b] -= tmp * M[s, k, b] / piv
            out[s] = pf
    return out_arr
