"""Uniform-support dictionary learning for anomaly detection."""

from ._kernels import BACKEND
from .bench import BenchResult, balanced_accuracy, grid_search
from .data import Dataset, SynthConfig, gen_synthetic, load_csv, split_for_ad, write_csv
from .detector import DetectionReport, detect, support_set
from .dictlearn import (DegenerateTrainingError, Model, Regularizer, RegKind, TrainConfig,
                        init_dictionary,
                        objective, row_update_l20, row_update_l21, row_update_trunc, train)
from .linalg import Rank1Triplet, fro_norm_sq, rank1_svd
from .modelio import load_model, save_model
from .sparse import SparseCode, omp_encode, omp_encode_batch, sparsity_for_dim

__version__ = "0.1.0"
