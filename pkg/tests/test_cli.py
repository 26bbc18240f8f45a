import io
import json

import pytest

from udlad.cli import run_cli


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    code, _, _ = call("synth", "--out-dir", d, "--seed", 1, "--n-train", 300)
    assert code == 0
    return d


def test_train_and_detect(synth_dir, tmp_path):
    model = tmp_path / "m.udl"
    code, out, _ = call("train", synth_dir / "train.csv", "--header", "--label-column", "label",
                        "--lambda", 3.0, "--reg", "l20", "--sweeps", 5, "-o", model)
    assert code == 0
    assert "sweep   5" in out and "|I| =" in out
    flags = tmp_path / "flags.csv"
    code, out, err = call("detect", model, synth_dir / "test.csv", "--header",
                          "--label-column", "label", "-o", flags)
    assert code == 0
    assert "balanced accuracy" in out
    rows = flags.read_text().splitlines()
    assert rows[0] == "index,flag,score" and len(rows) == 112


def test_train_rejects_outliers(synth_dir, tmp_path):
    code, _, err = call("train", synth_dir / "test.csv", "--header", "--label-column", "label",
                        "--lambda", 1.0, "-o", tmp_path / "m.udl")
    assert code == 2 and "outliers" in err


def test_annihilation_exit_code(synth_dir, tmp_path):
    code, _, err = call("train", synth_dir / "train.csv", "--header", "--label-column", "label",
                        "--lambda", 1e9, "-o", tmp_path / "m.udl")
    assert code == 3
    assert "all rows annihilated; reduce λ" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["train"], ["bench", "--nope"], []])
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 1 and "error" in err


def test_trunc_needs_eps(synth_dir, tmp_path):
    code, _, err = call("train", synth_dir / "train.csv", "--header", "--lambda", 1.0,
                        "--reg", "trunc", "-o", tmp_path / "m.udl")
    assert code == 1 and "--eps" in err


def test_missing_and_corrupt_files(tmp_path):
    bad = tmp_path / "bad.udl"
    bad.write_bytes(b"garbage")
    csv = tmp_path / "x.csv"
    csv.write_text("1,2\n")
    code, _, err = call("detect", bad, csv)
    assert code == 2 and "unrecognized model file" in err
    code, _, _ = call("detect", tmp_path / "nope.udl", csv)
    assert code == 2


def test_bench_json_schema(tmp_path):
    code, out, err = call("bench", "--n-train", 150, "--n-test-inliers", 30, "--repeats", 2,
                          "--lambda-grid", "1,3", "--sweeps", 3, "--reg", "l20")
    assert code == 0
    rec = json.loads(out)
    assert list(rec) == ["dataset_name", "regularizer", "lambda_best", "ba_mean", "ba_max",
                         "ba_std", "train_seconds", "repeats"]
    assert rec["regularizer"] == "l20" and rec["repeats"] == 2
    assert "BA mean" in err


def test_bench_on_csv(synth_dir):
    code, out, _ = call("bench", "--data", synth_dir / "test.csv", "--header", "--label-column",
                        "label", "--repeats", 1, "--lambda", 2.0, "--sweeps", 2, "--atoms", 32,
                        "--train-frac", 0.5, "--standardize", "--name", "t")
    assert code == 0
    assert json.loads(out)["dataset_name"] == "t"
