"""Compiled eigensolver kernels: Householder tridiagonalization and
implicit-shift QL, eigenvalues only. Mirror of ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot, copysign

cnp.import_array()

COMPILED = True


def tridiagonalize(a_in):
    """Reduce a real symmetric matrix to tridiagonal form; returns (d, e)."""
    a = np.array(a_in, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] A = a
    cdef Py_ssize_t n = A.shape[0]
    d_arr = np.empty(n, dtype=np.float64)
    e_arr = np.zeros(n - 1 if n > 1 else 0, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    work = np.zeros(2 * n, dtype=np.float64)
    cdef double[::1] v = work[:n]
    cdef double[::1] q = work[n:]
    cdef Py_ssize_t k, i, j
    cdef double xnorm2, xnorm, alpha, vsq, beta, acc, kdot, kappa, vi, qi

    for k in range(n - 2):
        xnorm2 = 0.0
        for i in range(k + 1, n):
            xnorm2 += A[i, k] * A[i, k]
        if xnorm2 == 0.0:
            e[k] = 0.0
            continue
        xnorm = sqrt(xnorm2)
        alpha = -xnorm if A[k + 1, k] >= 0.0 else xnorm
        for i in range(k + 1, n):
            v[i] = A[i, k]
        v[k + 1] -= alpha
        vsq = 0.0
        for i in range(k + 1, n):
            vsq += v[i] * v[i]
        if vsq == 0.0:
            e[k] = alpha
            continue
        beta = 2.0 / vsq
        for i in range(k + 1, n):
            acc = 0.0
            for j in range(k + 1, n):
                acc += A[i, j] * v[j]
            q[i] = beta * acc
        kdot = 0.0
        for i in range(k + 1, n):
            kdot += v[i] * q[i]
        kappa = 0.5 * beta * kdot
        for i in range(k + 1, n):
            q[i] -= kappa * v[i]
        for i in range(k + 1, n):
            vi = v[i]
            qi = q[i]
            for j in range(k + 1, n):
                A[i, j] -= vi * q[j] + qi * v[j]
        e[k] = alpha
    if n > 1:
        e[n - 2] = A[n - 1, n - 2]
    for i in range(n):
        d[i] = A[i, i]
    return d_arr, e_arr


def tql_eigenvalues(d_in, e_in, double rel_tol=1e-12, int max_sweeps=50):
    """Eigenvalues of a symmetric tridiagonal matrix, ascending."""
    d_arr = np.array(d_in, dtype=np.float64, copy=True)
    cdef double[::1] d = d_arr
    cdef Py_ssize_t n = d.shape[0]
    work_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] work = work_arr
    cdef Py_ssize_t l, m, mm, i
    cdef int sweeps, underflow
    cdef double dd, g, r, s, c, p, f, b

    if n > 1:
        work_arr[: n - 1] = np.asarray(e_in, dtype=np.float64)
    for l in range(n):
        sweeps = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = fabs(d[mm]) + fabs(d[mm + 1])
                if fabs(work[mm]) <= rel_tol * dd:
                    m = mm
                    break
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise RuntimeError(
                    "QL iteration failed to converge after %d sweeps "
                    "(position %d of %d)" % (max_sweeps, l, n)
                )
            g = (d[l + 1] - d[l]) / (2.0 * work[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + work[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = 0
            for i in range(m - 1, l - 1, -1):
                f = s * work[i]
                b = c * work[i]
                r = hypot(f, g)
                work[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    work[m] = 0.0
                    underflow = 1
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            work[l] = g
            work[m] = 0.0
    d_arr.sort()
    return d_arr
