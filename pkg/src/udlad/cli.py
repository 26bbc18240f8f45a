"""Command-line interface: ``udlad {synth,train,detect,bench}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate training.
"""

import argparse
import json
import sys
import warnings
from pathlib import Path

from .bench import BenchResult, balanced_accuracy, default_lambda_grid, grid_search
from .data import (DataError, Dataset, Standardizer, SynthConfig, load_csv,
                   synthetic_pool, gen_synthetic, write_csv)
from .detector import detect
from .dictlearn import DegenerateTrainingError, Regularizer, TrainConfig, init_dictionary, train
from .modelio import ModelFileError, load_model, save_model
from .sparse import sparsity_for_dim

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _overlap(text):
    """Atom count, or a fraction of ``min(n_inlier, n_outlier)`` when it has a '.'."""
    try:
        return float(text) if "." in text else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid overlap {text!r}")


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reg", choices=["l21", "l20", "trunc"], default="l21")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--lambda-grid", type=_float_list, default=None)
    p.add_argument("--eps", type=float, default=None, help="threshold for --reg trunc")
    p.add_argument("--sweeps", type=int, default=20)
    p.add_argument("--sparsity", type=int, default=None, help="default: round(0.2*sqrt(m))")
    p.add_argument("--atoms", type=int, default=128, help="dictionary size n")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--train-frac", type=float, default=0.9)
    p.add_argument("--repeats", type=int, default=10)


def _csv_args(p):
    p.add_argument("--header", action="store_true", help="first CSV row is a header")
    p.add_argument("--label-column", default=None, help="label column name or index")


def _synth_args(p):
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--n-inlier", type=int, default=32)
    p.add_argument("--n-outlier", type=int, default=32)
    p.add_argument("--overlap", type=_overlap, default=0)
    p.add_argument("--s-gen", type=int, default=None)
    p.add_argument("--n-train", type=int, default=900)
    p.add_argument("--n-test-inliers", type=int, default=100)
    p.add_argument("--outlier-fraction", type=float, default=0.10)


def build_parser():
    parser = _Parser(prog="udlad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth", help="write synthetic train/test CSVs")
    _common(p)
    _synth_args(p)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("train", help="train a model from a CSV of inliers")
    _common(p)
    _csv_args(p)
    p.add_argument("data", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("detect", help="flag anomalies in a CSV with a trained model")
    _common(p)
    _csv_args(p)
    p.add_argument("model", type=Path)
    p.add_argument("data", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None, help="default: stdout")
    p.add_argument("--standardize-from", type=Path, default=None,
                   help="training CSV whose inlier statistics standardize the input")

    p = sub.add_parser("bench", help="lambda grid search with repeated splits")
    _common(p)
    _csv_args(p)
    _synth_args(p)
    p.add_argument("--data", type=Path, default=None, help="labeled CSV; synthetic if omitted")
    p.add_argument("--name", default=None)
    p.add_argument("--no-timing", action="store_true", help="report train_seconds as 0")
    return parser


def _regularizer(args):
    if args.reg == "trunc" and args.eps is None:
        raise UsageError("--reg trunc requires --eps")
    return Regularizer(args.reg, args.eps if args.reg == "trunc" else 0.0)


def _config(args, m, lam):
    s = args.sparsity if args.sparsity is not None else sparsity_for_dim(m)
    return TrainConfig(lam=lam, sweeps=args.sweeps, sparsity=s,
                       regularizer=_regularizer(args), seed=args.seed)


def _synth_config(args):
    ov = args.overlap
    if isinstance(ov, float):
        ov = int(round(ov * min(args.n_inlier, args.n_outlier)))
    return SynthConfig(m=args.m, n_inlier=args.n_inlier, n_outlier=args.n_outlier,
                       overlap=ov, s_gen=args.s_gen, n_train=args.n_train,
                       n_test_inliers=args.n_test_inliers,
                       outlier_fraction=args.outlier_fraction, seed=args.seed)


def _load(args, path):
    return load_csv(path, has_header=args.header, label_column=args.label_column,
                    name=Path(path).stem)


def cmd_synth(args, out, err):
    train_set, test_set = gen_synthetic(_synth_config(args))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(train_set, args.out_dir / "train.csv")
    write_csv(test_set, args.out_dir / "test.csv")
    print(f"wrote {train_set.N} training and {test_set.N} test signals to {args.out_dir}",
          file=out)


def cmd_train(args, out, err):
    if args.lam is None:
        raise UsageError("train requires --lambda")
    data = _load(args, args.data)
    if data.labels is not None and data.labels.any():
        raise DataError(f"training data holds {int(data.labels.sum())} labeled outliers")
    if args.standardize:
        data = Standardizer.fit(data).apply(data)
    cfg = _config(args, data.m, args.lam)
    model, _ = train(data.signals, init_dictionary(data.m, args.atoms, args.seed), cfg)
    save_model(model, args.output)
    for k, f in enumerate(model.objective_trace):
        print(f"sweep {k:3d}  objective {f:.12g}", file=out)
    print(f"support size |I| = {len(model.support_set)} of {model.n} atoms", file=out)


def cmd_detect(args, out, err):
    model = load_model(args.model)
    data = _load(args, args.data)
    if args.standardize_from is not None:
        ref = _load(args, args.standardize_from)
        data = Standardizer.fit(ref).apply(data)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = detect(data.signals, model)
    for w in report.warnings:
        print(f"warning: {w}", file=err)
    lines = ["index,flag,score"]
    lines += [f"{i},{int(f)},{s}" for i, (f, s) in enumerate(zip(report.flags, report.scores))]
    text = "\n".join(lines) + "\n"
    if args.output is None:
        out.write(text)
    else:
        args.output.write_text(text)
    summary = f"{report.n_anomalies} of {data.N} signals flagged"
    if report.empty_support.size:
        summary += f"; {report.empty_support.size} with empty support"
    print(summary, file=err)
    if data.labels is not None and 0 < data.labels.sum() < data.N:
        print(f"balanced accuracy {balanced_accuracy(data.labels, report.flags):.6f}", file=out)


def cmd_bench(args, out, err):
    if args.data is not None:
        data = _load(args, args.data)
        if data.labels is None:
            raise DataError("bench needs a labeled CSV (--label-column)")
    else:
        data = synthetic_pool(_synth_config(args))
    if args.name:
        data = Dataset(data.signals, data.labels, args.name)
    if args.lambda_grid is not None:
        grid = args.lambda_grid
    elif args.lam is not None:
        grid = [args.lam]
    else:
        ref = Standardizer.fit(data).apply(data) if args.standardize else data
        grid = default_lambda_grid(ref.signals)
    cfg = _config(args, data.m, 0.0)
    res = grid_search(data, grid, args.repeats, cfg, n_atoms=args.atoms,
                      train_frac=args.train_frac, standardize=args.standardize)
    if args.no_timing:
        res = BenchResult(**{**res.to_dict(), "train_seconds": 0.0})
    out.write(json.dumps(res.to_dict(), sort_keys=False) + "\n")
    print(f"{'dataset':<24}{'reg':<7}{'lambda':>12}{'BA mean':>9}{'BA max':>9}"
          f"{'std':>8}{'train s':>9}", file=err)
    print(f"{res.dataset_name:<24}{res.regularizer:<7}{res.lambda_best:>12.5g}"
          f"{res.ba_mean:>9.4f}{res.ba_max:>9.4f}{res.ba_std:>8.4f}"
          f"{res.train_seconds:>9.3f}", file=err)


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "detect": cmd_detect, "bench": cmd_bench}


def run_cli(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except (DataError, ModelFileError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DATA
    except DegenerateTrainingError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run_cli())
