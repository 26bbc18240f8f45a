"""Balanced accuracy and the lambda grid search used by ``udlad bench``."""

import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .data import Standardizer, split_for_ad
from .detector import detect
from .dictlearn import DegenerateTrainingError, init_dictionary, train

CHANCE_BA = 0.5


@dataclass(frozen=True)
class BenchResult:
    dataset_name: str
    regularizer: str
    lambda_best: float
    ba_mean: float
    ba_max: float
    ba_std: float
    train_seconds: float
    repeats: int

    def to_dict(self):
        return asdict(self)


def balanced_accuracy(labels, flags):
    """Mean of sensitivity and specificity, outliers being the positive class."""
    labels = np.asarray(labels, dtype=bool)
    flags = np.asarray(flags, dtype=bool)
    if labels.shape != flags.shape:
        raise ValueError("labels and flags differ in length")
    pos = labels.sum()
    neg = labels.size - pos
    if pos == 0 or neg == 0:
        raise ValueError("balanced accuracy needs both inliers and outliers")
    tpr = np.count_nonzero(flags & labels) / pos
    tnr = np.count_nonzero(~flags & ~labels) / neg
    return float((tpr + tnr) / 2)


def default_lambda_grid(signals, points=8, low=1e-3, high=1e1):
    """``points`` log-spaced values in ``[low, high]`` times the mean column norm."""
    scale = float(np.mean(np.linalg.norm(signals, axis=0)))
    return list(np.logspace(np.log10(low), np.log10(high), points) * scale)


def run_once(dataset, cfg, n_atoms, train_frac=0.9, standardize=False):
    """One split + init + train + detect round seeded by ``cfg.seed``.

    Returns ``(ba, train_seconds)``; a fully annihilated model scores chance.
    """
    tr, te = split_for_ad(dataset, train_frac, cfg.seed)
    if standardize:
        st = Standardizer.fit(tr)
        tr, te = st.apply(tr), st.apply(te)
    D0 = init_dictionary(tr.m, n_atoms, cfg.seed)
    t0 = time.perf_counter()
    try:
        model, _ = train(tr.signals, D0, cfg)
    except DegenerateTrainingError:
        return CHANCE_BA, time.perf_counter() - t0
    elapsed = time.perf_counter() - t0
    report = detect(te.signals, model)
    return balanced_accuracy(te.labels, report.flags), elapsed


def grid_search(dataset, lambdas, repeats, base_cfg, n_atoms=128, train_frac=0.9,
                standardize=False, runs=None):
    """Pick the lambda with the best mean balanced accuracy.

    Repeat ``r`` uses seed ``base_cfg.seed + r`` for both the split and the
    initial dictionary, so every lambda sees the same splits. Ties go to the
    earlier lambda. ``train_seconds`` is the mean training time per run at the
    selected lambda. When ``runs`` is a list, ``(lam, seed, ba, seconds)``
    tuples are appended to it.
    """
    lambdas = list(lambdas)
    if not lambdas:
        raise ValueError("empty lambda grid")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    best = None
    for lam in lambdas:
        bas, secs = [], []
        for r in range(repeats):
            cfg = replace(base_cfg, lam=float(lam), seed=base_cfg.seed + r)
            ba, sec = run_once(dataset, cfg, n_atoms, train_frac, standardize)
            bas.append(ba)
            secs.append(sec)
            if runs is not None:
                runs.append((float(lam), cfg.seed, ba, sec))
        mean = float(np.mean(bas))
        if best is None or mean > best[1]:
            best = (float(lam), mean, bas, secs)
    lam, mean, bas, secs = best
    return BenchResult(
        dataset_name=dataset.name,
        regularizer=base_cfg.regularizer.kind.value,
        lambda_best=lam,
        ba_mean=mean,
        ba_max=float(np.max(bas)),
        ba_std=float(np.std(bas)),
        train_seconds=float(np.mean(secs)),
        repeats=repeats,
    )
