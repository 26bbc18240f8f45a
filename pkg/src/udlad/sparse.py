"""Orthogonal Matching Pursuit and the sparse representation container."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels

ATOM_NORM_TOL = 1e-9
RESIDUAL_RTOL = 1e-12


def sparsity_for_dim(m):
    """Default sparsity ``max(1, round_half_up(0.2 * sqrt(m)))``."""
    return max(1, math.floor(0.2 * math.sqrt(m) + 0.5))


def normalize_columns(D):
    D = np.array(D, dtype=np.float64)
    norms = np.linalg.norm(D, axis=0)
    if np.any(norms == 0):
        raise ValueError("dictionary has a zero column")
    return D / norms


def random_dictionary(m, n, seed):
    """i.i.d. standard normal ``m x n`` matrix with unit-norm columns."""
    rng = np.random.default_rng(seed)
    return normalize_columns(rng.standard_normal((m, n)))


def check_dictionary(D):
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2:
        raise ValueError(f"dictionary must be 2-D, got shape {D.shape}")
    norms = np.linalg.norm(D, axis=0)
    bad = np.flatnonzero(np.abs(norms - 1.0) > ATOM_NORM_TOL)
    if bad.size:
        raise ValueError(f"atoms {bad[:5].tolist()} are not unit norm")
    return D


@dataclass
class SparseCode:
    """Column-wise sparse storage of an ``n x N`` representation matrix.

    Column ``j`` owns ``indices[indptr[j]:indptr[j+1]]`` (atoms in the order
    OMP selected them) and the matching ``coeffs``. Stored coefficients are
    never exactly zero.
    """

    n: int
    N: int
    indptr: np.ndarray
    indices: np.ndarray
    coeffs: np.ndarray

    def support(self, j):
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def column(self, j):
        sl = slice(self.indptr[j], self.indptr[j + 1])
        return self.indices[sl], self.coeffs[sl]

    def supports(self):
        return [self.support(j) for j in range(self.N)]

    def to_csc(self):
        return sp.csc_matrix(
            (self.coeffs, self.indices, self.indptr), shape=(self.n, self.N)
        )

    def to_dense(self):
        X = np.zeros((self.n, self.N))
        cols = np.repeat(np.arange(self.N), np.diff(self.indptr))
        X[self.indices, cols] = self.coeffs
        return X

    def row_norms(self):
        out = np.zeros(self.n)
        np.add.at(out, self.indices, self.coeffs**2)
        return np.sqrt(out)

    def nonzero_rows(self):
        return np.unique(self.indices)

    def reconstruct(self, D):
        """Return ``D @ X`` as a dense ``m x N`` array."""
        return np.asarray((self.to_csc().T @ np.asarray(D).T).T)

    @classmethod
    def from_dense(cls, X):
        X = np.asarray(X, dtype=np.float64)
        csc = sp.csc_matrix(X)
        csc.eliminate_zeros()
        return cls(
            X.shape[0],
            X.shape[1],
            csc.indptr.astype(np.int64),
            csc.indices.astype(np.int64),
            csc.data.astype(np.float64),
        )


def _encode(Y, D, s, residual_tol):
    D = np.ascontiguousarray(check_dictionary(D))
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    m, n = D.shape
    if Y.shape[0] != m:
        raise ValueError(f"signals have {Y.shape[0]} rows, dictionary has {m}")
    if s < 1:
        raise ValueError("sparsity must be >= 1")
    if s > m:
        raise ValueError(f"sparsity {s} exceeds signal dimension {m}")
    bad = np.flatnonzero(~np.isfinite(Y).all(axis=0))
    if bad.size:
        raise ValueError(f"column {bad[0]}: signal has non-finite entries")
    norms = np.linalg.norm(Y, axis=0)
    if residual_tol is None:
        rtol = RESIDUAL_RTOL * norms
    else:
        if residual_tol < 0:
            raise ValueError("residual_tol must be >= 0")
        rtol = np.full(Y.shape[1], float(residual_tol))
    G = np.ascontiguousarray(D.T @ D)
    indptr, indices, coeffs = _kernels.active().omp_batch(
        D, G, Y, int(s), np.ascontiguousarray(rtol)
    )
    return SparseCode(n, Y.shape[1], np.asarray(indptr), np.asarray(indices),
                      np.asarray(coeffs))


def omp_encode(y, D, s, residual_tol=None):
    """Encode one signal; returns ``(support, coeffs)`` in selection order.

    ``residual_tol`` defaults to ``1e-12 * ||y||``. Selection also stops early
    when the next atom would be linearly dependent on the chosen ones.
    """
    y = np.asarray(y, dtype=np.float64)
    code = _encode(y[:, None], D, s, residual_tol)
    return code.column(0)


def omp_encode_batch(Y, D, s, residual_tol=None):
    """Encode every column of ``Y`` independently into a :class:`SparseCode`."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError(f"expected a 2-D signal matrix, got shape {Y.shape}")
    return _encode(Y, D, s, residual_tol)
