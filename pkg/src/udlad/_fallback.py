"""Pure numpy implementations of the hot kernels.

Mirrors ``udlad._core`` call for call; used when the compiled extension is
missing or ``UDLAD_FORCE_PYTHON`` is set.
"""

import numpy as np

# Squared Cholesky pivot below which a new atom counts as linearly dependent.
DEPENDENCE_TOL = 1e-10


def omp_batch(D, G, Y, s, rtol):
    """Greedy OMP over every column of ``Y``.

    ``G`` is ``D.T @ D``. Returns CSC-style
    ``(indptr, indices, coeffs)`` with each column's atoms in selection order.
    """
    m, n = D.shape
    N = Y.shape[1]
    indptr = np.zeros(N + 1, dtype=np.int64)
    indices = np.empty(N * s, dtype=np.int64)
    coeffs = np.empty(N * s, dtype=np.float64)
    pos = 0
    for j in range(N):
        y = Y[:, j]
        dty = D.T @ y
        support = []
        x = np.zeros(0)
        r = y.copy()
        for _ in range(s):
            if np.sqrt(r @ r) <= rtol[j]:
                break
            c = dty - G[:, support] @ x if support else dty.copy()
            k = int(np.argmax(np.abs(c)))
            if c[k] == 0.0 or k in support:
                break
            trial = support + [k]
            try:
                L = np.linalg.cholesky(G[np.ix_(trial, trial)])
            except np.linalg.LinAlgError:
                break
            if L[-1, -1] * L[-1, -1] <= DEPENDENCE_TOL:
                break
            support = trial
            z = np.linalg.solve(L, dty[support])
            x = np.linalg.solve(L.T, z)
            r = y - D[:, support] @ x
        for k, v in zip(support, x):
            if v != 0.0:
                indices[pos] = k
                coeffs[pos] = v
                pos += 1
        indptr[j + 1] = pos
    return indptr, indices[:pos].copy(), coeffs[:pos].copy()


def power_gram(G, w0, tol, max_iter):
    """Power iteration on a symmetric PSD matrix.

    Stops once ``||G w - lam w|| / sqrt(lam) <= tol * max(1, sqrt(lam))``.
    Returns ``(w, lam, iterations, converged)`` with ``w`` unit norm.
    """
    w = w0 / np.linalg.norm(w0)
    lam = 0.0
    for it in range(1, max_iter + 1):
        z = G @ w
        lam = float(w @ z)
        if lam <= 0.0:
            return w, 0.0, it, True
        sigma = np.sqrt(lam)
        res = np.linalg.norm(z - lam * w) / sigma
        if res <= tol * max(1.0, sigma):
            return w, lam, it, True
        w = z / np.linalg.norm(z)
    return w, lam, max_iter, False
