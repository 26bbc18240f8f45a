"""Dense kernels for the learning loop: dominant singular triplet and norms.

Matrices are plain numpy ``float64`` arrays (row-major). Residual blocks are
``m x p`` with signals as columns.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels

SVD_TOL = 1e-10
SVD_MAX_ITER = 1000
# Entries of ``u`` smaller than this do not decide the sign convention.
SIGN_EPS = 1e-10
_START_SEED = 20220513


@dataclass(frozen=True)
class Rank1Triplet:
    u: np.ndarray
    sigma: float
    v: np.ndarray


class ConvergenceError(RuntimeError):
    """Power iteration hit ``max_iter``; ``best`` holds the last iterate."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


def fro_norm_sq(M):
    M = np.asarray(M, dtype=np.float64)
    return float(np.einsum("ij,ij->", M, M)) if M.ndim == 2 else float(M @ M)


def _fix_sign(u, v):
    nz = np.flatnonzero(np.abs(u) > SIGN_EPS)
    if nz.size and u[nz[0]] < 0:
        return -u, -v
    return u, v


def rank1_svd(R, tol=SVD_TOL, max_iter=SVD_MAX_ITER):
    """Dominant singular triplet of ``R`` by power iteration on its Gram matrix.

    The iteration runs on whichever of ``R R^T`` / ``R^T R`` is smaller. It
    starts from the normalized column of ``R`` with the largest norm plus a
    fixed pseudo-random combination of all columns (the column alone can be a
    non-dominant singular vector), so the result is deterministic. The first
    entry of ``u`` above ``SIGN_EPS`` in magnitude is made positive. An
    all-zero ``R`` gives ``sigma = 0`` with ``u = e1`` and ``v = e1``.

    Raises :class:`ConvergenceError` (carrying the last iterate) when the
    singular-pair residual is still above ``tol * max(1, sigma)`` after
    ``max_iter`` iterations.
    """
    R = np.ascontiguousarray(R, dtype=np.float64)
    if R.ndim != 2 or R.size == 0:
        raise ValueError(f"expected a non-empty matrix, got shape {R.shape}")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be > 0 and max_iter >= 1")
    m, p = R.shape
    col_norms = np.einsum("ij,ij->j", R, R)
    j0 = int(np.argmax(col_norms))
    if col_norms[j0] == 0.0:
        u = np.zeros(m)
        u[0] = 1.0
        v = np.zeros(p)
        v[0] = 1.0
        return Rank1Triplet(u, 0.0, v)

    kern = _kernels.active()
    u0 = R[:, j0] / np.sqrt(col_norms[j0])
    mix = R @ np.random.default_rng(_START_SEED).standard_normal(p)
    mix_norm = np.linalg.norm(mix)
    if mix_norm > 0.0:
        # sign-aligned sum, so ||u0|| >= sqrt(2)
        u0 = u0 + np.copysign(1.0, u0 @ mix) * mix / mix_norm
    if m <= p:
        w, lam, _, converged = kern.power_gram(R @ R.T, u0, tol, max_iter)
        u = np.asarray(w)
        z = R.T @ u
        sigma = float(np.linalg.norm(z))
        v = z / sigma
    else:
        w, lam, _, converged = kern.power_gram(R.T @ R, R.T @ u0, tol, max_iter)
        v = np.asarray(w)
        z = R @ v
        sigma = float(np.linalg.norm(z))
        u = z / sigma
    if sigma == 0.0:
        u = np.zeros(m)
        u[0] = 1.0
        v = np.zeros(p)
        v[0] = 1.0
        return Rank1Triplet(u, 0.0, v)
    u, v = _fix_sign(u, v)
    trip = Rank1Triplet(u, sigma, v)
    if not converged:
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} iterations", trip
        )
    return trip
