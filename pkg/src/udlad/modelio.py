"""Binary model files.

Layout (little-endian): the 6-byte tag ``UDLAD1``; int64 ``m, n, |I|, kind``;
float64 ``lambda, eps``; int64 ``s, K, seed``; ``m*n`` float64 atoms in
column-major order; ``|I|`` int64 sorted support indices. ``kind`` is 0 for
l21, 1 for l20, 2 for trunc.
"""

import struct

import numpy as np

from .dictlearn import Model, Regularizer, RegKind, TrainConfig
from .sparse import check_dictionary

MAGIC = b"UDLAD1"
_HEADER = struct.Struct("<qqqqddqqq")
_KINDS = [RegKind.L21, RegKind.L20, RegKind.TRUNC]


class ModelFileError(ValueError):
    pass


def dumps(model):
    cfg = model.config
    D = np.asarray(model.dictionary, dtype="<f8")
    I = np.asarray(model.support_set, dtype="<i8")
    m, n = D.shape
    head = _HEADER.pack(m, n, I.size, _KINDS.index(cfg.regularizer.kind), float(cfg.lam),
                        float(cfg.regularizer.epsilon), cfg.sparsity, cfg.sweeps, cfg.seed)
    return MAGIC + head + D.tobytes(order="F") + I.tobytes()


def loads(buf):
    if len(buf) < len(MAGIC) or buf[:len(MAGIC)] != MAGIC:
        raise ModelFileError("unrecognized model file")
    off = len(MAGIC)
    if len(buf) < off + _HEADER.size:
        raise ModelFileError("model file truncated in header")
    m, n, k, kind, lam, eps, s, K, seed = _HEADER.unpack_from(buf, off)
    off += _HEADER.size
    if m < 1 or n < 1 or not 0 <= k <= n or not 0 <= kind < len(_KINDS):
        raise ModelFileError("model file header is corrupt")
    expected = off + 8 * (m * n + k)
    if len(buf) != expected:
        raise ModelFileError(f"model file has {len(buf)} bytes, expected {expected}")
    D = np.frombuffer(buf, dtype="<f8", count=m * n, offset=off).reshape((m, n), order="F")
    off += 8 * m * n
    I = np.frombuffer(buf, dtype="<i8", count=k, offset=off)
    if np.any(np.diff(I) <= 0) or (k and (I[0] < 0 or I[-1] >= n)):
        raise ModelFileError("support indices are not a sorted subset of the atoms")
    try:
        check_dictionary(D)
        cfg = TrainConfig(lam=lam, sweeps=K, sparsity=s,
                          regularizer=Regularizer(_KINDS[kind], eps), seed=seed)
    except ValueError as exc:
        raise ModelFileError(f"model file is corrupt: {exc}") from None
    return Model(np.array(D, dtype=np.float64), np.array(I, dtype=np.int64), cfg, [])


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def load_model(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
