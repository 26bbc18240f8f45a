"""Datasets: synthetic union-of-dictionaries generator, CSV I/O, AD splits.

Signals are stored as columns of an ``m x N`` matrix; CSV files hold one
sample per row.
"""

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .sparse import normalize_columns, sparsity_for_dim


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    signals: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.signals = np.asarray(self.signals, dtype=np.float64)
        if self.signals.ndim != 2:
            raise DataError(f"signals must be 2-D, got shape {self.signals.shape}")
        if not np.isfinite(self.signals).all():
            raise DataError("signals contain non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool)
            if self.labels.shape != (self.N,):
                raise DataError(f"{self.labels.size} labels for {self.N} samples")

    @property
    def m(self):
        return self.signals.shape[0]

    @property
    def N(self):
        return self.signals.shape[1]

    def subset(self, idx, name=None):
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.signals[:, idx], labels, self.name if name is None else name)


@dataclass(frozen=True)
class SynthConfig:
    m: int = 64
    n_inlier: int = 32
    n_outlier: int = 32
    overlap: int = 0
    s_gen: int | None = None
    n_train: int = 900
    n_test_inliers: int = 100
    outlier_fraction: float = 0.10
    seed: int = 0

    @property
    def atoms_per_signal(self):
        return sparsity_for_dim(self.m) if self.s_gen is None else self.s_gen

    @property
    def n_outliers(self):
        f = self.outlier_fraction
        return math.floor(f / (1.0 - f) * self.n_test_inliers + 0.5)


@dataclass
class SynthTruth:
    inlier_dict: np.ndarray
    outlier_dict: np.ndarray
    train_supports: np.ndarray
    test_supports: np.ndarray


def _combine(rng, dictionary, count, s):
    n = dictionary.shape[1]
    supports = np.array([rng.choice(n, size=s, replace=False) for _ in range(count)],
                        dtype=np.int64).reshape(count, s)
    coeffs = rng.standard_normal((count, s))
    signals = np.einsum("mcs,cs->mc", dictionary[:, supports], coeffs)
    return signals, supports


def gen_synthetic(cfg, return_truth=False):
    """Generate ``(train, test)`` from two random dictionaries.

    The first ``cfg.overlap`` atoms of the outlier dictionary are copies of the
    inlier dictionary's. Every signal combines ``s_gen`` distinct atoms of one
    dictionary with standard-normal weights. ``train`` holds inliers only;
    ``test`` mixes inliers and outliers in shuffled order.
    """
    s = cfg.atoms_per_signal
    if not 0 <= cfg.overlap <= min(cfg.n_inlier, cfg.n_outlier):
        raise DataError("overlap must lie in [0, min(n_inlier, n_outlier)]")
    if s < 1 or s > min(cfg.n_inlier, cfg.n_outlier):
        raise DataError(f"s_gen={s} exceeds a generating dictionary size")
    if not 0.0 <= cfg.outlier_fraction < 1.0:
        raise DataError("outlier_fraction must lie in [0, 1)")
    rng = np.random.default_rng(cfg.seed)
    inlier_dict = normalize_columns(rng.standard_normal((cfg.m, cfg.n_inlier)))
    outlier_dict = normalize_columns(rng.standard_normal((cfg.m, cfg.n_outlier)))
    outlier_dict[:, :cfg.overlap] = inlier_dict[:, :cfg.overlap]

    train_sig, train_sup = _combine(rng, inlier_dict, cfg.n_train, s)
    in_sig, in_sup = _combine(rng, inlier_dict, cfg.n_test_inliers, s)
    out_sig, out_sup = _combine(rng, outlier_dict, cfg.n_outliers, s)
    test_sig = np.hstack([in_sig, out_sig])
    labels = np.r_[np.zeros(cfg.n_test_inliers, bool), np.ones(cfg.n_outliers, bool)]
    perm = rng.permutation(test_sig.shape[1])

    train = Dataset(train_sig, np.zeros(cfg.n_train, bool), "synthetic-train")
    test = Dataset(test_sig[:, perm], labels[perm], "synthetic-test")
    if return_truth:
        truth = SynthTruth(inlier_dict, outlier_dict, train_sup,
                           np.vstack([in_sup, out_sup])[perm])
        return train, test, truth
    return train, test


def synthetic_pool(cfg):
    """Train and test sets merged into one labeled dataset."""
    train, test = gen_synthetic(cfg)
    return Dataset(np.hstack([train.signals, test.signals]),
                   np.r_[train.labels, test.labels], f"synthetic-ov{cfg.overlap}")


def _parse_float(text, row, col):
    try:
        return float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col}: non-numeric field {text!r}") from None


def load_csv(path, has_header=False, label_column=None, name=None):
    """Read a CSV with one sample per row.

    ``label_column`` is a header name or an integer index (negative allowed);
    its values must be 0 (inlier) or 1 (outlier). Row numbers in errors are
    1-based file lines.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = None
    start = 1
    if has_header:
        if not rows:
            raise DataError(f"{path}: missing header")
        header, rows = rows[0], rows[1:]
        start = 2
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"row {i + start}: expected {width} fields, found {len(r)}")

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise DataError(f"label column {label_column!r} not found")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not -width <= label_idx < width:
                raise DataError(f"label column index {label_idx} out of range")
            label_idx %= width

    feat_idx = [c for c in range(width) if c != label_idx]
    values = np.empty((len(feat_idx), len(rows)))
    labels = None if label_idx is None else np.empty(len(rows), dtype=bool)
    for i, r in enumerate(rows):
        for k, c in enumerate(feat_idx):
            values[k, i] = _parse_float(r[c].strip(), i + start, c + 1)
        if labels is not None:
            v = _parse_float(r[label_idx].strip(), i + start, label_idx + 1)
            if v not in (0.0, 1.0):
                raise DataError(f"row {i + start}: label must be 0 or 1, got {r[label_idx]!r}")
            labels[i] = v == 1.0
    if not np.isfinite(values).all():
        raise DataError(f"{path}: non-finite feature values")
    return Dataset(values, labels, name or str(path))


def write_csv(data, path, header=True):
    """Write one sample per row; labels, when present, go in a final ``label`` column."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            cols = [f"x{k}" for k in range(data.m)]
            w.writerow(cols + (["label"] if data.labels is not None else []))
        for i in range(data.N):
            row = [repr(float(v)) for v in data.signals[:, i]]
            if data.labels is not None:
                row.append("1" if data.labels[i] else "0")
            w.writerow(row)


def split_indices(labels, train_inlier_fraction=0.9, seed=0):
    """Sample indices for an AD split: ``(train_idx, test_idx)``, both sorted."""
    labels = np.asarray(labels, dtype=bool)
    if not 0.0 < train_inlier_fraction < 1.0:
        raise DataError("train_inlier_fraction must lie in (0, 1)")
    inliers = np.flatnonzero(~labels)
    if inliers.size == 0:
        raise DataError("dataset has no inliers to train on")
    n_train = math.floor(train_inlier_fraction * inliers.size + 0.5)
    n_train = min(max(n_train, 1), inliers.size)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.permutation(inliers)[:n_train])
    mask = np.ones(labels.size, dtype=bool)
    mask[chosen] = False
    return chosen, np.flatnonzero(mask)


def split_for_ad(data, train_inlier_fraction=0.9, seed=0):
    """Train on a random fraction of the inliers; test on the rest plus all outliers."""
    if data.labels is None:
        raise DataError("splitting for anomaly detection requires labels")
    tr, te = split_indices(data.labels, train_inlier_fraction, seed)
    return data.subset(tr, f"{data.name}-train"), data.subset(te, f"{data.name}-test")


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, data):
        """Per-feature statistics from the inliers of ``data``."""
        X = data.signals if data.labels is None else data.signals[:, ~data.labels]
        mean = X.mean(axis=1)
        scale = X.std(axis=1)
        scale[scale == 0] = 1.0
        return cls(mean, scale)

    def apply(self, data):
        sig = (data.signals - self.mean[:, None]) / self.scale[:, None]
        return replace(data, signals=sig)
