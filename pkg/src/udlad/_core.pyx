# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batched OMP and Gram power iteration.

Same contracts as ``udlad._fallback``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

cdef double DEPENDENCE_TOL = 1e-10


def omp_batch(const double[:, ::1] D, const double[:, ::1] G,
              const double[:, ::1] Y,
              Py_ssize_t s, const double[::1] rtol):
    cdef Py_ssize_t m = D.shape[0], n = D.shape[1], N = Y.shape[1]
    cdef Py_ssize_t j, i, k, t, l, a, best, pos = 0
    cdef double cmax, cv, acc, d, rn

    indptr_arr = np.zeros(N + 1, dtype=np.int64)
    indices_arr = np.empty(N * s, dtype=np.int64)
    coeffs_arr = np.empty(N * s, dtype=np.float64)
    cdef cnp.int64_t[::1] indptr = indptr_arr
    cdef cnp.int64_t[::1] indices = indices_arr
    cdef double[::1] coeffs = coeffs_arr

    cdef cnp.int64_t[::1] support = np.empty(s, dtype=np.int64)
    cdef double[:, ::1] L = np.zeros((s, s), dtype=np.float64)
    cdef double[::1] x = np.empty(s, dtype=np.float64)
    cdef double[::1] z = np.empty(s, dtype=np.float64)
    cdef double[::1] r = np.empty(m, dtype=np.float64)
    cdef double[::1] c = np.empty(n, dtype=np.float64)
    cdef double[::1] dty = np.empty(n, dtype=np.float64)

    with nogil:
        for j in range(N):
            t = 0
            for i in range(m):
                r[i] = Y[i, j]
            for k in range(n):
                acc = 0.0
                for i in range(m):
                    acc += D[i, k] * Y[i, j]
                dty[k] = acc
            while t < s:
                rn = 0.0
                for i in range(m):
                    rn += r[i] * r[i]
                if sqrt(rn) <= rtol[j]:
                    break
                # correlations with the residual via the Gram matrix
                for k in range(n):
                    acc = dty[k]
                    for l in range(t):
                        acc -= G[k, support[l]] * x[l]
                    c[k] = acc
                best = 0
                cmax = fabs(c[0])
                for k in range(1, n):
                    cv = fabs(c[k])
                    if cv > cmax:
                        cmax = cv
                        best = k
                if c[best] == 0.0:
                    break
                a = 0
                for l in range(t):
                    if support[l] == best:
                        a = 1
                if a:
                    break
                # extend the Cholesky factor of the support Gram matrix
                for l in range(t):
                    acc = G[support[l], best]
                    for k in range(l):
                        acc -= L[l, k] * L[t, k]
                    L[t, l] = acc / L[l, l]
                d = G[best, best]
                for l in range(t):
                    d -= L[t, l] * L[t, l]
                if d <= DEPENDENCE_TOL:
                    break
                L[t, t] = sqrt(d)
                support[t] = best
                t += 1
                # solve L L^T x = DtY[support]
                for l in range(t):
                    acc = dty[support[l]]
                    for k in range(l):
                        acc -= L[l, k] * z[k]
                    z[l] = acc / L[l, l]
                for l in range(t - 1, -1, -1):
                    acc = z[l]
                    for k in range(l + 1, t):
                        acc -= L[k, l] * x[k]
                    x[l] = acc / L[l, l]
                for i in range(m):
                    acc = Y[i, j]
                    for l in range(t):
                        acc -= D[i, support[l]] * x[l]
                    r[i] = acc
            for l in range(t):
                if x[l] != 0.0:
                    indices[pos] = support[l]
                    coeffs[pos] = x[l]
                    pos += 1
            indptr[j + 1] = pos
    return indptr_arr, indices_arr[:pos].copy(), coeffs_arr[:pos].copy()


def power_gram(const double[:, ::1] G, w0, double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t k = G.shape[0], i, it
    cdef double lam = 0.0, nrm, res, sigma, acc
    w_arr = np.ascontiguousarray(w0, dtype=np.float64).copy()
    cdef double[::1] w = w_arr
    cdef double[::1] z = np.empty(k, dtype=np.float64)
    cdef int ki = <int>k, inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef char* trans = b"T"

    nrm = 0.0
    for i in range(k):
        nrm += w[i] * w[i]
    nrm = sqrt(nrm)
    for i in range(k):
        w[i] /= nrm
    with nogil:
        for it in range(1, max_iter + 1):
            # row-major G is column-major G^T, so 'T' gives z = G w
            dgemv(trans, &ki, &ki, &one, &G[0, 0], &ki, &w[0], &inc, &zero, &z[0], &inc)
            lam = 0.0
            for i in range(k):
                lam += w[i] * z[i]
            if lam <= 0.0:
                with gil:
                    return w_arr, 0.0, it, True
            sigma = sqrt(lam)
            res = 0.0
            nrm = 0.0
            for i in range(k):
                res += (z[i] - lam * w[i]) * (z[i] - lam * w[i])
                nrm += z[i] * z[i]
            res = sqrt(res) / sigma
            if res <= tol * (sigma if sigma > 1.0 else 1.0):
                with gil:
                    return w_arr, lam, it, True
            nrm = sqrt(nrm)
            for i in range(k):
                w[i] = z[i] / nrm
    return w_arr, lam, max_iter, False
