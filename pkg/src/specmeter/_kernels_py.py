"""Pure NumPy eigensolver kernels.

Fallback twin of the compiled extension ``specmeter._kernels``; same
signatures, same algorithm (Householder tridiagonalization followed by
implicit-shift QL, eigenvalues only).
"""

import math

import numpy as np

COMPILED = False


def tridiagonalize(a):
    """Reduce a real symmetric matrix to tridiagonal form.

    Returns (d, e) with d the diagonal (length n) and e the subdiagonal
    (length n-1). Only the lower triangle of ``a`` is read. The input is
    not modified.
    """
    a = np.array(a, dtype=np.float64, copy=True, order="C")
    n = a.shape[0]
    d = np.empty(n, dtype=np.float64)
    e = np.zeros(n - 1 if n > 1 else 0, dtype=np.float64)
    for k in range(n - 2):
        x = a[k + 1 :, k]
        xnorm = math.sqrt(float(np.dot(x, x)))
        if xnorm == 0.0:
            e[k] = 0.0
            continue
        alpha = -xnorm if x[0] >= 0.0 else xnorm
        v = x.copy()
        v[0] -= alpha
        vsq = float(np.dot(v, v))
        if vsq == 0.0:
            e[k] = alpha
            continue
        beta = 2.0 / vsq
        sub = a[k + 1 :, k + 1 :]
        p = beta * (sub @ v)
        kappa = 0.5 * beta * float(np.dot(v, p))
        q = p - kappa * v
        sub -= np.outer(v, q) + np.outer(q, v)
        e[k] = alpha
    if n > 1:
        e[n - 2] = a[n - 1, n - 2]
    d[:] = np.diagonal(a)
    return d, e


def tql_eigenvalues(d, e, rel_tol=1e-12, max_sweeps=50):
    """Eigenvalues of a symmetric tridiagonal matrix, ascending.

    Implicit-shift QL iteration. An off-diagonal entry counts as
    negligible when |e_i| <= rel_tol * (|d_i| + |d_{i+1}|). Raises
    RuntimeError if any eigenvalue needs more than ``max_sweeps`` sweeps.
    """
    d = np.array(d, dtype=np.float64, copy=True)
    n = d.shape[0]
    work = np.zeros(n, dtype=np.float64)
    if n > 1:
        work[: n - 1] = e
    for l in range(n):
        sweeps = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(work[mm]) <= rel_tol * dd:
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
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + work[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * work[i]
                b = c * work[i]
                r = math.hypot(f, g)
                work[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    work[m] = 0.0
                    underflow = True
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
    d.sort()
    return d
