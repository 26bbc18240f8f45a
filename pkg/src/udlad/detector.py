"""Support-based anomaly rule: a signal is anomalous when its sparse code uses
any atom outside the uniform support set learned during training."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .sparse import omp_encode_batch

FULL_SUPPORT_WARNING = "uniform support covers every atom; no anomalies would be detected"


@dataclass
class DetectionReport:
    flags: np.ndarray
    scores: np.ndarray
    support_sets: list
    empty_support: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def n_anomalies(self):
        return int(self.flags.sum())


def support_set(X):
    """Sorted indices of rows of ``X`` holding at least one nonzero."""
    return np.unique(X.indices[X.coeffs != 0]).astype(np.int64)


def score_supports(supports, support_set_):
    """Count, per signal, the atoms outside ``support_set_``."""
    allowed = np.asarray(support_set_, dtype=np.int64)
    return np.array(
        [int(np.count_nonzero(~np.isin(J, allowed))) for J in supports], dtype=np.int64
    )


def detect(Y_test, model):
    """Encode the columns of ``Y_test`` with the model dictionary and flag
    every signal whose support ``J`` is not contained in ``I``.

    ``scores[i] = |J_i \\ I|``; a score of at least one is an anomaly. Signals
    with an empty support are inliers and listed in ``empty_support``.
    """
    Y_test = np.asarray(Y_test, dtype=np.float64)
    if Y_test.ndim != 2 or Y_test.shape[0] != model.m:
        raise ValueError(f"test signals must be {model.m} x N, got {Y_test.shape}")
    if len(model.support_set) == 0:
        raise ValueError("model has an empty support set")
    notes = []
    if len(model.support_set) == model.n:
        warnings.warn(FULL_SUPPORT_WARNING, RuntimeWarning, stacklevel=2)
        notes.append(FULL_SUPPORT_WARNING)
    code = omp_encode_batch(Y_test, model.dictionary, model.config.sparsity)
    supports = code.supports()
    scores = score_supports(supports, model.support_set)
    empty = np.flatnonzero(np.diff(code.indptr) == 0)
    return DetectionReport(scores >= 1, scores, supports, empty, notes)
