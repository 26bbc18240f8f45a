"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeats 5] [--quick]

Each case runs on every available backend with identical inputs; results are
checked for agreement before timings are reported.
"""

import argparse
import sys
import time

import numpy as np

from udlad import _kernels
from udlad.data import SynthConfig, gen_synthetic
from udlad.dictlearn import Regularizer, TrainConfig, init_dictionary, train
from udlad.linalg import rank1_svd
from udlad.sparse import omp_encode_batch, random_dictionary


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def case_omp(quick):
    rng = np.random.default_rng(0)
    m, n, N = (64, 128, 1000) if quick else (400, 128, 3000)
    D = random_dictionary(m, n, 0)
    Y = rng.standard_normal((m, N))
    s = max(1, int(np.floor(0.2 * np.sqrt(m) + 0.5)))
    return f"omp_encode_batch m={m} n={n} N={N} s={s}", lambda: omp_encode_batch(Y, D, s)


def case_svd(quick):
    rng = np.random.default_rng(1)
    m, p = (64, 200) if quick else (400, 600)
    R = rng.standard_normal((m, p))
    return f"rank1_svd {m}x{p}", lambda: rank1_svd(R)


def case_train(quick):
    cfg_s = SynthConfig(n_train=300 if quick else 900, seed=0)
    Y = gen_synthetic(cfg_s)[0].signals
    cfg = TrainConfig(lam=3.0, sweeps=3 if quick else 20, sparsity=2,
                      regularizer=Regularizer("l20"), seed=0)
    D0 = init_dictionary(Y.shape[0], 128, 0)
    return (f"train m={Y.shape[0]} N={Y.shape[1]} sweeps={cfg.sweeps}",
            lambda: train(Y, D0, cfg)[0])


def same(a, b):
    if hasattr(a, "indices"):
        return np.array_equal(a.indices, b.indices) and np.allclose(a.coeffs, b.coeffs, atol=1e-9)
    if hasattr(a, "sigma"):
        return abs(a.sigma - b.sigma) <= 1e-9 * max(1.0, a.sigma)
    return np.array_equal(a.support_set, b.support_set)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small inputs")
    args = ap.parse_args(argv)

    backends = sorted(_kernels.BACKENDS)
    if "compiled" not in backends:
        print("compiled extension not built; timing the numpy fallback only", file=sys.stderr)
    previous = _kernels.BACKEND
    print(f"{'case':<40} " + " ".join(f"{b:>10}" for b in backends) + "   speedup  agree")
    try:
        for make in (case_omp, case_svd, case_train):
            label, fn = make(args.quick)
            times, outs = {}, {}
            for b in backends:
                _kernels.use(b)
                times[b], outs[b] = best_of(fn, args.repeats)
            row = f"{label:<40} " + " ".join(f"{times[b]:>9.4f}s" for b in backends)
            if len(backends) == 2:
                speedup = times["python"] / times["compiled"]
                agree = same(outs["python"], outs["compiled"])
                row += f"  {speedup:>7.1f}x  {agree}"
            print(row)
    finally:
        _kernels.use(previous)


if __name__ == "__main__":
    main()
