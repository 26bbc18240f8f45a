import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_objective, grid_magnitude
from udlad.bench import default_lambda_grid
from udlad.data import SynthConfig, gen_synthetic
from udlad.dictlearn import (DegenerateTrainingError, Regularizer, TrainConfig,
                             init_dictionary, magnitude_l20, magnitude_l21, magnitude_trunc,
                             objective, rank1_update, row_update_l20, row_update_l21,
                             row_update_trunc, train)
from udlad.sparse import SparseCode, omp_encode_batch


def rank1_residual(sigma, m=5, p=7, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(m)
    v = rng.standard_normal(p)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    if u[0] < 0:
        u = -u
    return sigma * np.outer(u, v), u, v


# -- objective ---------------------------------------------------------------

def test_objective_zero_code():
    Y = np.arange(6.0).reshape(2, 3)
    D = np.eye(2)
    X = SparseCode.from_dense(np.zeros((2, 3)))
    assert objective(D, X, Y, 1.0, Regularizer("l21")) == 0.5 * 55.0


def test_objective_exact_fit():
    D = init_dictionary(4, 6, 0)
    Xd = np.zeros((6, 3))
    Xd[[0, 2, 5], [0, 1, 2]] = [1.0, -2.0, 0.5]
    assert objective(D, Xd, D @ Xd, 0.0, Regularizer("l20")) == pytest.approx(0.0, abs=1e-24)


@pytest.mark.parametrize("reg, expected", [
    (Regularizer("l21"), 3.2),
    (Regularizer("l20"), 2.7),
    (Regularizer("trunc", 1.5), 2.95),
])
def test_objective_hand_instance(reg, expected):
    # D X - Y = (0.4, -1.8); row norms 2 and 1
    D = np.array([[1.0, 0.6], [0.0, 0.8]])
    X = np.array([[2.0], [-1.0]])
    Y = np.array([[1.0], [1.0]])
    assert objective(D, X, Y, 0.5, reg) == pytest.approx(expected, rel=1e-14)


# -- row updates ----------------------------------------------------------------

def test_l21_soft_threshold(backend):
    R, u, v = rank1_residual(3.0)
    upd = row_update_l21(R, 1.0)
    assert not upd.is_zero
    np.testing.assert_allclose(upd.atom, u, atol=1e-12)
    np.testing.assert_allclose(upd.row_values, 2.0 * v, atol=1e-12)


def test_l21_zero_branch(backend):
    R, _, _ = rank1_residual(0.5)
    upd = row_update_l21(R, 1.0)
    assert upd.is_zero and not upd.row_values.any()


def test_l21_and_l20_reduce_to_ksvd_at_zero_lambda(backend, rng):
    R = rng.standard_normal((6, 9))
    ref = rank1_update(R)
    for upd in (row_update_l21(R, 0.0), row_update_l20(R, 0.0)):
        assert upd.atom.tobytes() == ref.atom.tobytes()
        assert upd.row_values.tobytes() == ref.row_values.tobytes()
    s = np.linalg.svd(R, compute_uv=False)[0]
    assert np.linalg.norm(ref.row_values) == pytest.approx(s, rel=1e-10)


def test_l20_keep_and_drop(backend):
    R, u, v = rank1_residual(2.0)
    upd = row_update_l20(R, 1.0)
    assert not upd.is_zero
    np.testing.assert_allclose(upd.row_values, 2.0 * v, atol=1e-12)
    R, _, _ = rank1_residual(1.0)
    assert row_update_l20(R, 1.0).is_zero


@pytest.mark.parametrize("sigma, lam, eps, expected", [
    (5.0, 1.0, 10.0, 4.0),  # soft-threshold regime
    (5.0, 1.0, 2.0, 5.0),   # saturated penalty regime
])
def test_trunc_regimes(backend, sigma, lam, eps, expected):
    assert abs(grid_magnitude("trunc", sigma, lam, eps) - expected) <= 2e-4
    R, u, v = rank1_residual(sigma)
    upd = row_update_trunc(R, lam, eps)
    np.testing.assert_allclose(upd.row_values, expected * v, atol=1e-10)


def test_zero_residual_gives_zero_row(backend):
    R = np.zeros((4, 3))
    for upd in (row_update_trunc(R, 0.3, 1.0), row_update_l21(R, 0.0), row_update_l20(R, 0.0)):
        assert upd.is_zero
        assert abs(np.linalg.norm(upd.atom) - 1) < 1e-12


def test_l20_tie_keeps_row():
    assert magnitude_l20(2.0, 2.0) == 2.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 10), st.floats(0, 5), st.floats(0.01, 5))
def test_magnitudes_minimize_scalar_objective(sigma, lam, eps):
    for kind, t in [("l21", magnitude_l21(sigma, lam)),
                    ("l20", magnitude_l20(sigma, lam)),
                    ("trunc", magnitude_trunc(sigma, lam, eps))]:
        grid_t = grid_magnitude(kind, sigma, lam, eps, step=1e-3)

        def f(x):
            pen = {"l21": x, "l20": float(x != 0), "trunc": min(x, eps)}[kind]
            return lam * pen + 0.5 * x * x - sigma * x

        # closed form never loses to the grid
        assert f(t) <= f(grid_t) + 1e-12


# -- training -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_problem():
    cfg = SynthConfig(m=16, n_inlier=8, n_outlier=8, s_gen=2, n_train=200,
                      n_test_inliers=20, seed=0)
    train_set, _ = gen_synthetic(cfg)
    return train_set.signals


def test_plain_ksvd_sweep(backend):
    rng = np.random.default_rng(1)
    D0 = init_dictionary(8, 12, 1)
    X = np.zeros((12, 40))
    for j in range(40):
        X[rng.choice(12, 2, replace=False), j] = rng.standard_normal(2)
    Y = D0 @ X
    cfg = TrainConfig(lam=0.0, sweeps=1, sparsity=2, regularizer=Regularizer("l20"))
    model, Xf = train(Y, D0, cfg, check_residual=True)
    used = omp_encode_batch(Y, D0, 2).nonzero_rows()
    assert model.objective_trace[1] <= model.objective_trace[0]
    assert model.support_set.tolist() == used.tolist()


def test_huge_lambda_annihilates(backend, small_problem):
    cfg = TrainConfig(lam=1e9, sweeps=2, sparsity=2, regularizer=Regularizer("l21"))
    with pytest.raises(DegenerateTrainingError, match="all rows annihilated"):
        train(small_problem, init_dictionary(16, 24, 0), cfg)


def test_mid_grid_l21(backend, small_problem):
    # lower grid points keep almost every atom; index 6 is where rows start dropping
    lam = default_lambda_grid(small_problem)[6]
    cfg = TrainConfig(lam=lam, sweeps=20, sparsity=2, regularizer=Regularizer("l21"))
    model, X = train(small_problem, init_dictionary(16, 24, 0), cfg, check_residual=True)
    trace = model.objective_trace
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert 1 <= len(model.support_set) <= 16
    assert model.support_set.tolist() == X.nonzero_rows().tolist()


@pytest.mark.parametrize("reg", [Regularizer("l21"), Regularizer("l20"),
                                 Regularizer("trunc", 2.0)])
def test_training_invariants(backend, small_problem, reg):
    Y = small_problem
    D0 = init_dictionary(16, 24, 3)
    lam = default_lambda_grid(Y)[5]
    initial = omp_encode_batch(Y, D0, 2)
    initial_pattern = [set(initial.support(j).tolist()) for j in range(Y.shape[1])]
    seen = {"zeroed": set(), "values": []}

    def check(sweep, atom, D, X):
        assert np.allclose(np.linalg.norm(D, axis=0), 1.0, atol=1e-9)
        rows = set(X.nonzero_rows().tolist())
        assert not (seen["zeroed"] & rows), "a zeroed row came back"
        seen["zeroed"] |= set(range(24)) - rows
        for j in range(X.N):
            assert set(X.support(j).tolist()) <= initial_pattern[j]
        seen["values"].append(dense_objective(D, X.to_dense(), Y, lam, reg.kind.value,
                                              reg.epsilon))

    cfg = TrainConfig(lam=lam, sweeps=5, sparsity=2, regularizer=reg)
    model, X = train(Y, D0, cfg, callback=check, check_residual=True)
    vals = seen["values"]
    for a, b in zip(vals, vals[1:]):
        assert b <= a + 1e-9 * max(1.0, a)
    assert model.objective_trace[-1] == pytest.approx(vals[-1], rel=1e-10)
    assert objective(model.dictionary, X, Y, lam, reg) == pytest.approx(vals[-1], rel=1e-10)


def test_training_is_deterministic(small_problem):
    cfg = TrainConfig(lam=1.0, sweeps=3, sparsity=2)
    a, _ = train(small_problem, init_dictionary(16, 24, 0), cfg)
    b, _ = train(small_problem, init_dictionary(16, 24, 0), cfg)
    assert a.dictionary.tobytes() == b.dictionary.tobytes()
    assert a.objective_trace == b.objective_trace


def test_backends_train_alike(small_problem):
    from udlad import _kernels
    if "compiled" not in _kernels.BACKENDS:
        pytest.skip("compiled core not built")
    cfg = TrainConfig(lam=1.0, sweeps=5, sparsity=2)
    out = {}
    prev = _kernels.BACKEND
    try:
        for name in ("python", "compiled"):
            _kernels.use(name)
            out[name] = train(small_problem, init_dictionary(16, 24, 0), cfg)[0]
    finally:
        _kernels.use(prev)
    np.testing.assert_allclose(out["python"].dictionary, out["compiled"].dictionary, atol=1e-8)
    assert out["python"].support_set.tolist() == out["compiled"].support_set.tolist()


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(lam=-1.0)
    with pytest.raises(ValueError):
        TrainConfig(lam=1.0, sweeps=0)
    with pytest.raises(ValueError):
        Regularizer("trunc")
