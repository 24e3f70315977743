import csv
import json
import os

import numpy as np
import pytest

from spatconf.cli import main
from spatconf.harness import (
    ConfigError,
    ExperimentReport,
    ReplicationFailure,
    emit_report,
    load_config,
    read_rows,
    run_experiment,
    summarize_rows,
)

FAST_FIXED = {"scenario": "fixed_confounder", "n": 300, "smoother_rank": 40, "replications": 2,
              "estimators": ["ols", "gam_fx", "spatial_plus"], "seed": 3}


def _write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_unknown_key_is_error():
    with pytest.raises(ConfigError):
        load_config({"scenario": "eigen", "bogus": 1})


@pytest.mark.parametrize("bad", [
    {"scenario": "mars"},
    {"scenario": "eigen", "estimators": ["lasso"]},
    {"scenario": "eigen", "replications": 0},
    {"scenario": "eigen", "ci_method": "jackknife"},
    {"n": 10},
    {"scenario": "fixed_confounder", "n": 5000, "estimators": ["gls_known"]},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        load_config(bad)


def test_dense_cap_lifted_by_vecchia():
    cfg = load_config({"scenario": "fixed_confounder", "n": 5000, "estimators": ["gls_profile"],
                       "gls_likelihood": "vecchia"})
    assert cfg.gls_likelihood == "vecchia"


def test_interval_defaults():
    cfg = load_config({"scenario": "clustered"})
    assert cfg.interval_method("grouped_re") == "subsample"
    assert cfg.interval_method("gls_profile") == "parametric_bootstrap"
    assert cfg.interval_method("ols") == "analytic"
    cfg = load_config({"scenario": "clustered", "ci_method": {"ols": "subsample"}})
    assert cfg.interval_method("ols") == "subsample"


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    emit_report(run_experiment(load_config(FAST_FIXED)), a, ["csv"])
    emit_report(run_experiment(load_config(FAST_FIXED)), b, ["csv"])
    for name in ("reps.csv", "summary.csv", "diagnostics.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_threads_do_not_change_results(tmp_path):
    r1 = run_experiment(load_config(FAST_FIXED), threads=1)
    r2 = run_experiment(load_config(FAST_FIXED), threads=2)
    assert r1.rows == r2.rows


def test_rows_traceable_and_coverage_definitional(tmp_path):
    rep = run_experiment(load_config(FAST_FIXED))
    assert {(r["scenario"], r["rep"], r["estimator"]) for r in rep.rows} == {
        ("fixed_confounder", i, e) for i in (1, 2) for e in FAST_FIXED["estimators"]}
    emit_report(rep, tmp_path, ["csv"])
    rows = read_rows(tmp_path / "reps.csv")
    summary = {r["estimator"]: r for r in _read(tmp_path / "summary.csv")}
    for est in FAST_FIXED["estimators"]:
        cov = np.mean([r["covered"] for r in rows if r["estimator"] == est])
        assert float(summary[est]["coverage"]) == cov
        for r in rows:
            if r["estimator"] == est:
                assert r["covered"] == (r["ci_lo"] <= 1.0 <= r["ci_hi"])


def test_hand_checked_coverage():
    rows = [
        {"estimator": "x", "bias": 0.1, "covered": True},
        {"estimator": "x", "bias": -0.1, "covered": False},
        {"estimator": "x", "bias": 0.3, "covered": True},
        {"estimator": "x", "bias": 0.0, "covered": True},
    ]
    s = summarize_rows(rows)[0]
    assert s["coverage"] == 0.75 and s["mean_bias"] == pytest.approx(0.075)


def test_empty_report_header_only(tmp_path):
    emit_report(ExperimentReport({}), tmp_path, ["csv"])
    assert (tmp_path / "reps.csv").read_text() == "scenario,rep,estimator,beta_hat,bias,ci_lo,ci_hi,covered\n"
    assert (tmp_path / "summary.csv").read_text() == "estimator,mean_bias,sd_bias,coverage\n"


def test_floats_written_with_17_digits(tmp_path):
    rep = run_experiment(load_config(FAST_FIXED))
    emit_report(rep, tmp_path, ["csv"])
    row = _read(tmp_path / "reps.csv")[0]
    assert float(row["beta_hat"]) == rep.rows[0]["beta_hat"]


def test_eigen_report_has_bias_columns_and_scatter(tmp_path):
    cfg = load_config({"scenario": "eigen", "n": 400, "replications": 3})
    rep = run_experiment(cfg)
    emit_report(rep, tmp_path, ["csv", "json", "svg"])
    eig = _read(tmp_path / "eigen.csv")
    assert len(eig) == 3 and {"exact_bias", "predicted_bias"} <= set(eig[0])
    svg = (tmp_path / "eigen_scatter.svg").read_text()
    assert svg.count("<circle") == 3
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["provenance"]["seed"] == 0 and "wall_time_s" in doc["provenance"]
    assert len(doc["eigen"]) == 3


def test_bias_histogram_svg(tmp_path):
    emit_report(run_experiment(load_config(FAST_FIXED)), tmp_path, ["svg"])
    svg = (tmp_path / "bias_hist.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<g ") == 3


def test_failures_recorded_per_row():
    # a single location gives a single group: the grouped fit fails in every replication
    cfg = load_config({"scenario": "clustered", "m": 1, "k": 40, "replications": 3,
                       "estimators": ["ols", "grouped_re"]})
    with pytest.raises(ReplicationFailure) as info:
        run_experiment(cfg)
    rep = info.value.report
    assert len(rep.errors) == 3 and {e["estimator"] for e in rep.errors} == {"grouped_re"}
    assert len(rep.rows) == 3


def test_n_sweep_emits_per_size(tmp_path):
    cfg = load_config({"scenario": "eigen", "n_sweep": [200, 400], "replications": 2})
    rep = run_experiment(cfg)
    assert sorted({r["n"] for r in rep.rows}) == [200, 400]
    emit_report(rep, tmp_path, ["csv"])
    assert (tmp_path / "n200" / "reps.csv").exists() and (tmp_path / "sweep.csv").exists()


# CLI

def test_cli_simulate_and_report(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, FAST_FIXED)
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--formats", "csv,json"]) == 0
    before = (out / "summary.csv").read_bytes()
    (out / "summary.csv").write_text("stale\n")
    assert main(["report", "--in", str(out), "--summary"]) == 0
    assert (out / "summary.csv").read_bytes() == before
    assert "estimator,mean_bias" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, {"scenario": "eigen", "nonsense": True})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_cli_failure_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, {"scenario": "clustered", "m": 1, "k": 40, "replications": 2,
                                "estimators": ["ols", "grouped_re"]})
    out = tmp_path / "o"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 3
    assert (out / "errors.csv").exists()


def test_cli_eigen_bias(tmp_path):
    cfg = _write_cfg(tmp_path, {"scenario": "eigen", "n": 300, "replications": 2})
    assert main(["eigen-bias", "--config", cfg, "--out", str(tmp_path / "e")]) == 0
    assert (tmp_path / "e" / "eigen_scatter.svg").exists()
    wrong = _write_cfg(tmp_path, FAST_FIXED, "w.json")
    assert main(["eigen-bias", "--config", wrong, "--out", str(tmp_path / "w")]) == 2


@pytest.mark.parametrize("lemma", ["cross", "quadform"])
def test_cli_diagnose(tmp_path, lemma, capsys):
    out = tmp_path / lemma
    assert main(["diagnose", "--lemma", lemma, "--n-sweep", "100,200", "--reps", "5", "--out", str(out)]) == 0
    rows = _read(out / "diagnostics.csv")
    assert set(rows[0]) == {"rep", "n", "statistic", "value"}
    assert {int(r["n"]) for r in rows} == {100, 200}
    assert "statistic" in capsys.readouterr().out
