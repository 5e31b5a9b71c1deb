import csv
import json
import os

import numpy as np
import pytest

from artifact.cli import main


def _simulate(tmp_path, model="a", T=64, seed=0, name="series.csv"):
    out = tmp_path / name
    rc = main(["simulate", "--model", model, "--T", str(T),
               "--seed", str(seed), "--output", str(out)])
    assert rc == 0
    return out


def test_simulate_writes_coefficient_csv(tmp_path):
    out = _simulate(tmp_path)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0].startswith("c")
    assert len(rows) == 65 and len(rows[0]) == 15


def test_simulate_rejects_bad_model(tmp_path, capsys):
    rc = main(["simulate", "--model", "z", "--T", "64",
               "--output", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_test_json_output(tmp_path):
    series = _simulate(tmp_path, seed=3)
    out = tmp_path / "result.json"
    rc = main(["test", str(series), "--output", str(out)])
    assert rc == 0
    with open(out) as fh:
        res = json.load(fh)
    for key in ("variant", "T", "M", "lags", "L", "aTVE", "Q", "df", "p",
                "reject_05", "reject_01", "betas", "sigma2", "diagnostics"):
        assert key in res
    assert res["T"] == 64 and res["df"] == 2


def test_test_stdout_and_options(tmp_path, capsys):
    series = _simulate(tmp_path, seed=4)
    rc = main(["test", str(series), "--variant", "fixed", "--no-fourth"])
    assert rc == 0
    res = json.loads(capsys.readouterr().out)
    assert res["variant"] == "fixed"
    assert all(x == 0.0 for x in res["diagnostics"]["fourth_order"])


def test_test_missing_file(tmp_path, capsys):
    rc = main(["test", str(tmp_path / "nope.csv")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_test_bad_config(tmp_path, capsys):
    series = _simulate(tmp_path, seed=5)
    rc = main(["test", str(series), "--lags", "5", "3"])
    assert rc == 2


def test_test_numerical_failure(tmp_path, capsys):
    # constant curves: the spectral estimate is rank deficient and the
    # standardization breaks down inside the pipeline
    path = tmp_path / "const.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"c{i}" for i in range(1, 16)])
        for _ in range(32):
            w.writerow([1.0] * 15)
    rc = main(["test", str(path), "--no-demean"])
    assert rc == 3
    assert "error" in capsys.readouterr().err


def test_mc_smoke(tmp_path, capsys):
    rc = main(["mc", "--models", "a", "--sizes", "64", "--reps", "10",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "a T=64 eigen M=1" in out
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "experiment.json").exists()


def test_mc_requires_models_or_preset(capsys):
    rc = main(["mc", "--reps", "5"])
    assert rc == 2
    assert "required" in capsys.readouterr().err


def test_mc_env_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ARTIFACT_OUT_DIR", str(tmp_path / "envdir"))
    rc = main(["mc", "--models", "a", "--sizes", "64", "--reps", "10"])
    assert rc == 0
    assert (tmp_path / "envdir" / "summary.csv").exists()


def test_contour_smoke(tmp_path):
    out = tmp_path / "contour.csv"
    rc = main(["contour", "--model", "a", "--T", "64", "--reps", "10",
               "--grid", "8", "--output", str(out)])
    assert rc == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows.shape == (64, 3)


def test_contour_too_few_reps(tmp_path, capsys):
    rc = main(["contour", "--model", "a", "--T", "64", "--reps", "2",
               "--output", str(tmp_path / "c.csv")])
    assert rc == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
