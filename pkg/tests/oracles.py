"""Independent reference computations used to check the closed forms."""

import numpy as np

GRID_STEP = 1e-4


def penalty(kind, t, eps=None):
    if kind == "l21":
        return t
    if kind == "l20":
        return (t != 0).astype(float)
    return np.minimum(t, eps)


def grid_magnitude(kind, sigma, lam, eps=None, step=GRID_STEP):
    """Minimize lam*phi(t) + t^2/2 - sigma*t over a grid on [0, sigma + lam]."""
    t = np.arange(0.0, sigma + lam + step, step)
    f = lam * penalty(kind, t, eps) + 0.5 * t * t - sigma * t
    return t[np.argmin(f)]


def dense_objective(D, X, Y, lam, kind, eps=None):
    E = D @ X - Y
    norms = np.sqrt((X * X).sum(axis=1))
    return 0.5 * np.sum(E * E) + lam * np.sum(penalty(kind, norms, eps))
