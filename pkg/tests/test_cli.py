import csv
import json
import os

import numpy as np
import pytest

from lowrank_glm import InputError
from lowrank_glm.cli import main, parse_value, read_config_file, resolve_config

import oracles


def read_metrics(path):
    with open(path) as fh:
        return {row["metric"]: row["value"] for row in csv.DictReader(fh)}


def read_dir(path):
    return {name: open(os.path.join(path, name), "rb").read() for name in sorted(os.listdir(path))}


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    code = main(["simulate", "--n", "30", "--r", "2", "--alpha", "-1", "--c", "0.5", "--seed", "4", "--out", str(out)])
    assert code == 0
    return out


def data_args(d):
    return ["--edges", str(d / "network.tsv"), "--n", "30", "--covariates", str(d / "X1.csv"), str(d / "X2.csv")]


def test_simulate_outputs(simulated):
    names = set(os.listdir(simulated))
    assert {"network.tsv", "X1.csv", "X2.csv", "P.csv", "run_meta.json", "truth_beta.csv"} <= names
    meta = json.load(open(simulated / "run_meta.json"))
    assert meta["seed"] == 4 and meta["design"]["alpha"] == -1.0
    assert len(meta["config_hash"]) == 64


def test_simulate_byte_identical(tmp_path):
    args = ["simulate", "--n", "20", "--alpha", "-1", "--c", "0.3", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert read_dir(tmp_path / "a") == read_dir(tmp_path / "b")


def test_fit_baseline_matches_irls(simulated, tmp_path):
    code = main(["fit", *data_args(simulated), "--R", "0", "--tol", "1e-14", "--max-iter", "20000", "--out", str(tmp_path)])
    assert code == 0
    beta = np.loadtxt(tmp_path / "params_beta.csv", delimiter=",", comments="#")
    A = np.zeros((30, 30))
    for i, j, w in np.loadtxt(simulated / "network.tsv", ndmin=2):
        A[int(i), int(j)] = w
    X = [np.loadtxt(simulated / f"X{k}.csv", delimiter=",") for k in (1, 2)]
    np.testing.assert_allclose(beta, oracles.irls(A, X, "bernoulli"), atol=1e-4)
    metrics = read_metrics(tmp_path / "metrics.csv")
    assert metrics["rank"] == "0"
    assert os.path.exists(tmp_path / "trace.csv")


def test_fit_then_evaluate(simulated, tmp_path):
    fit_dir, eval_dir = tmp_path / "fit", tmp_path / "eval"
    assert main(["fit", *data_args(simulated), "--R", "40", "--s", "2", "--out", str(fit_dir)]) == 0
    code = main(["evaluate", *data_args(simulated), "--params", str(fit_dir), "--truth", str(simulated / "P.csv"),
                 "--out", str(eval_dir)])
    assert code == 0
    metrics = read_metrics(eval_dir / "metrics.csv")
    assert 0.5 < float(metrics["auc"]) <= 1.0
    assert 0.0 < float(metrics["rmse"]) < 1.0


def test_grid_search_outputs(simulated, tmp_path):
    code = main(["grid-search", *data_args(simulated), "--ranks", "1,2", "--budgets", "10,40", "--seed", "1",
                 "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "grid.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    metrics = read_metrics(tmp_path / "metrics.csv")
    best_auc = max(float(r["auc"]) for r in rows)
    assert float(metrics["best_auc"]) == pytest.approx(best_auc)
    meta = json.load(open(tmp_path / "run_meta.json"))
    assert meta["best"]["s"] == int(metrics["best_s"])


def test_convert_attrs(tmp_path):
    attrs = tmp_path / "attrs.tsv"
    attrs.write_text("0\ta\n1\ta\n2\tb\n")
    out = tmp_path / "x.csv"
    assert main(["convert-attrs", "--attrs", str(attrs), "--n", "3", "--output", str(out)]) == 0
    X = np.loadtxt(out, delimiter=",")
    assert X[0, 1] == 1.0 and X[0, 2] == 0.0


def test_missing_file_exit_2(tmp_path, capsys):
    code = main(["fit", "--edges", str(tmp_path / "nope.tsv"), "--n", "3", "--R", "1", "--out", str(tmp_path)])
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["exit_code"] == 2 and record["error"] == "InputError"


def test_malformed_edge_list_reports_line(tmp_path, capsys):
    edges = tmp_path / "e.tsv"
    edges.write_text("0\t1\n0\t9\n")
    assert main(["fit", "--edges", str(edges), "--n", "3", "--R", "1", "--out", str(tmp_path)]) == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["line"] == 2


def test_numerical_failure_exit_3(tmp_path):
    edges = tmp_path / "e.tsv"
    edges.write_text("0\t1\t2\n1\t0\t2\n0\t0\t2\n1\t1\t2\n")
    code = main(["fit", "--edges", str(edges), "--n", "2", "--family", "poisson", "--R", "1e6",
                 "--step", "fixed", "--gamma", "1000", "--out", str(tmp_path)])
    assert code == 3


def test_auc_undefined_exit_4(tmp_path):
    edges = tmp_path / "e.tsv"
    edges.write_text("")
    params = tmp_path / "p"
    assert main(["fit", "--edges", str(edges), "--n", "3", "--R", "1", "--out", str(params)]) == 0
    code = main(["evaluate", "--edges", str(edges), "--n", "3", "--params", str(params), "--out", str(tmp_path)])
    assert code == 4


def test_config_file_with_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# experiment\nn = 25\nalpha = -1.5\nc = 0.2\nseed = 3\nbudgets = 10, 20\n")
    cfg, _ = resolve_config(["simulate", "--config", str(cfg_file), "--seed", "8"])
    assert cfg.n == 25 and cfg.alpha == -1.5 and cfg.seed == 8
    assert cfg.budgets == [10.0, 20.0]


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n = 3\nwhat = 1\n")
    with pytest.raises(InputError, match="line 2"):
        read_config_file(str(bad))
    bad.write_text("just words\n")
    with pytest.raises(InputError, match="line 1"):
        read_config_file(str(bad))


def test_parse_value():
    assert parse_value("true") is True
    assert parse_value("none") is None
    assert parse_value("3") == 3
    assert parse_value("0.5") == 0.5
    assert parse_value("1, 2,none") == [1, 2, None]
    assert parse_value("poisson") == "poisson"


def test_config_hash_ignores_output_location():
    a, _ = resolve_config(["simulate", "--n", "10", "--out", "x"])
    b, _ = resolve_config(["simulate", "--n", "10", "--out", "y"])
    c, _ = resolve_config(["simulate", "--n", "11", "--out", "x"])
    assert a.digest() == b.digest() != c.digest()


def test_run_meta_reexecutes(simulated, tmp_path):
    # the manifest recorded in run_meta.json is enough to reproduce the run
    meta = json.load(open(simulated / "run_meta.json"))
    cfg = meta["config"]
    args = ["simulate", "--n", str(cfg["n"]), "--r", str(cfg["r"]), "--alpha", str(cfg["alpha"]),
            "--c", str(cfg["c"]), "--seed", str(cfg["seed"]), "--family", cfg["family"], "--out", str(tmp_path)]
    assert main(args) == 0
    assert read_dir(tmp_path) == read_dir(simulated)
