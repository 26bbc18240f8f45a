"""Regularized K-SVD with row-sparsity penalties.

The penalty acts on the ``l2`` norm of every row of the representation ``X``:

* ``l21``   phi(z) = z          (soft threshold on sigma_1)
* ``l20``   phi(z) = [z != 0]   (keep/zero test on the row energy)
* ``trunc`` phi(z) = min(z, eps)

Each row update solves the rank-1 subproblem exactly; only the magnitude of
the new row depends on the penalty. Training keeps the sparsity pattern
found by a single initial OMP pass and can only remove entries from it.
"""

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import SVD_MAX_ITER, SVD_TOL, ConvergenceError, fro_norm_sq, rank1_svd
from .sparse import SparseCode, check_dictionary, omp_encode_batch, random_dictionary

log = logging.getLogger(__name__)

RESIDUAL_DRIFT_TOL = 1e-8


class RegKind(str, enum.Enum):
    L21 = "l21"
    L20 = "l20"
    TRUNC = "trunc"


@dataclass(frozen=True)
class Regularizer:
    kind: RegKind = RegKind.L21
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RegKind(self.kind))
        if self.kind is RegKind.TRUNC and not self.epsilon > 0:
            raise ValueError("truncated penalty needs epsilon > 0")

    def phi(self, z):
        z = np.abs(np.asarray(z, dtype=np.float64))
        if self.kind is RegKind.L21:
            return z
        if self.kind is RegKind.L20:
            return (z != 0).astype(np.float64)
        return np.minimum(z, self.epsilon)


@dataclass(frozen=True)
class TrainConfig:
    lam: float
    sweeps: int = 20
    sparsity: int = 1
    regularizer: Regularizer = field(default_factory=Regularizer)
    seed: int = 0
    svd_tol: float = SVD_TOL

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.sparsity < 1:
            raise ValueError("sparsity must be >= 1")


@dataclass
class RowUpdate:
    atom: np.ndarray
    row_values: np.ndarray
    is_zero: bool


@dataclass
class Model:
    dictionary: np.ndarray
    support_set: np.ndarray
    config: TrainConfig
    objective_trace: list = field(default_factory=list)

    @property
    def m(self):
        return self.dictionary.shape[0]

    @property
    def n(self):
        return self.dictionary.shape[1]


class DegenerateTrainingError(RuntimeError):
    pass


def objective(D, X, Y, lam, phi):
    """``0.5 * ||D X - Y||_F^2 + lam * sum_i phi(||x_i||_2)`` over rows of X."""
    if not isinstance(X, SparseCode):
        X = SparseCode.from_dense(X)
    E = X.reconstruct(D) - np.asarray(Y, dtype=np.float64)
    return 0.5 * fro_norm_sq(E) + lam * float(np.sum(phi.phi(X.row_norms())))


# -- closed-form row magnitudes ---------------------------------------------
# Each takes sigma_1 of the residual and returns the minimizer over t >= 0 of
#   lam * phi(t) + 0.5 * t**2 - sigma_1 * t


def magnitude_l21(sigma, lam):
    return max(0.0, sigma - lam)


def magnitude_l20(sigma, lam):
    # keeping costs lam and saves sigma**2 / 2; ties keep the row
    if sigma > 0.0 and sigma * sigma >= 2.0 * lam:
        return sigma
    return 0.0


def magnitude_trunc(sigma, lam, eps):
    def f(t):
        return lam * min(t, eps) + 0.5 * t * t - sigma * t

    low = min(max(sigma - lam, 0.0), eps)
    high = max(eps, sigma)
    return low if f(low) <= f(high) else high


def _svd(R, tol):
    try:
        return rank1_svd(R, tol=tol, max_iter=SVD_MAX_ITER)
    except ConvergenceError as exc:
        log.debug("rank-1 SVD unconverged, using last iterate: %s", exc)
        return exc.best


def _row_update(R, t, trip):
    if t == 0.0:
        return RowUpdate(trip.u, np.zeros(R.shape[1]), True)
    return RowUpdate(trip.u, t * trip.v, False)


def rank1_update(R, tol=SVD_TOL):
    """Unregularized K-SVD step: ``(u1, sigma1 * v1)``."""
    trip = _svd(R, tol)
    return _row_update(R, trip.sigma, trip)


def row_update_l21(R, lam, tol=SVD_TOL):
    trip = _svd(R, tol)
    return _row_update(R, magnitude_l21(trip.sigma, lam), trip)


def row_update_l20(R, lam, tol=SVD_TOL):
    trip = _svd(R, tol)
    return _row_update(R, magnitude_l20(trip.sigma, lam), trip)


def row_update_trunc(R, lam, epsilon, tol=SVD_TOL):
    trip = _svd(R, tol)
    return _row_update(R, magnitude_trunc(trip.sigma, lam, epsilon), trip)


def row_update(R, lam, reg, tol=SVD_TOL):
    if reg.kind is RegKind.L21:
        return row_update_l21(R, lam, tol)
    if reg.kind is RegKind.L20:
        return row_update_l20(R, lam, tol)
    return row_update_trunc(R, lam, reg.epsilon, tol)


# -- training -----------------------------------------------------------------


def _rows_from_code(code):
    """Split a column-major code into per-atom ``(columns, values)`` rows."""
    cols = np.repeat(np.arange(code.N), np.diff(code.indptr))
    order = np.argsort(code.indices, kind="stable")
    atoms = code.indices[order]
    bounds = np.searchsorted(atoms, np.arange(code.n + 1))
    return [
        (cols[order[bounds[i]:bounds[i + 1]]], code.coeffs[order[bounds[i]:bounds[i + 1]]])
        for i in range(code.n)
    ]


def _code_from_rows(rows, N):
    n = len(rows)
    atoms = np.concatenate([np.full(len(c), i, dtype=np.int64) for i, (c, _) in enumerate(rows)])
    cols = np.concatenate([c for c, _ in rows]).astype(np.int64)
    vals = np.concatenate([v for _, v in rows])
    order = np.lexsort((atoms, cols))
    indptr = np.zeros(N + 1, dtype=np.int64)
    np.cumsum(np.bincount(cols, minlength=N), out=indptr[1:])
    return SparseCode(n, N, indptr, atoms[order], vals[order])


def init_dictionary(m, n, seed):
    return random_dictionary(m, n, seed)


def train(Y, D_init, cfg, *, callback=None, check_residual=False):
    """Learn a dictionary with uniform row support.

    One OMP pass fixes the candidate pattern, then ``cfg.sweeps`` sweeps
    update atoms ``0..n-1`` in order on the residual restricted to the
    columns that use each atom. ``objective_trace[0]`` is the objective after
    OMP; entry ``k`` is the value after sweep ``k``.

    ``callback(sweep, atom, D, X)`` runs after every row update with the
    current dictionary and a :class:`SparseCode` snapshot. With
    ``check_residual`` the incrementally maintained residual is compared with
    ``Y - D X`` after every sweep.

    Raises :class:`DegenerateTrainingError` when every row ends up zero.
    """
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    D = np.array(check_dictionary(D_init), dtype=np.float64)
    if Y.shape[0] != D.shape[0]:
        raise ValueError(f"signals have {Y.shape[0]} rows, dictionary has {D.shape[0]}")
    m, N = Y.shape
    n = D.shape[1]
    reg = cfg.regularizer
    lam = cfg.lam

    code = omp_encode_batch(Y, D, cfg.sparsity)
    rows = _rows_from_code(code)
    # residual stored samples-by-features so restricted blocks are row gathers
    Et = np.ascontiguousarray((Y - code.reconstruct(D)).T)

    def current_objective():
        pen = sum(float(reg.phi(np.linalg.norm(v))) for _, v in rows if len(v))
        return 0.5 * fro_norm_sq(Et) + lam * pen

    trace = [current_objective()]
    for sweep in range(cfg.sweeps):
        for i in range(n):
            cols, vals = rows[i]
            if cols.size == 0:
                continue
            Rt = Et[cols]
            Rt += np.outer(vals, D[:, i])
            upd = row_update(Rt.T, lam, reg, cfg.svd_tol)
            if upd.is_zero:
                Et[cols] = Rt
                rows[i] = (cols[:0], vals[:0])
            else:
                D[:, i] = upd.atom
                Rt -= np.outer(upd.row_values, upd.atom)
                Et[cols] = Rt
                keep = upd.row_values != 0.0
                rows[i] = (cols[keep], upd.row_values[keep])
            if callback is not None:
                callback(sweep, i, D.copy(), _code_from_rows(rows, N))
        trace.append(current_objective())
        if check_residual:
            fresh = Y - _code_from_rows(rows, N).reconstruct(D)
            drift = np.sqrt(fro_norm_sq(fresh - Et.T))
            if drift > RESIDUAL_DRIFT_TOL * max(1.0, np.sqrt(fro_norm_sq(Y))):
                raise RuntimeError(f"residual drift {drift:.3e} after sweep {sweep}")

    X = _code_from_rows(rows, N)
    support = np.array([i for i, (c, _) in enumerate(rows) if c.size], dtype=np.int64)
    if support.size == 0:
        raise DegenerateTrainingError("all rows annihilated; reduce λ")
    return Model(D, support, cfg, trace), X
