import csv
import json

import numpy as np
import pytest

from ecocneat.binarization import count_valid_subsets
from ecocneat.cli import main
from ecocneat.experiments import (
    ConfigError,
    ExperimentConfig,
    RunRecord,
    report,
    run,
    study_quality,
    study_robustness,
    sweep_degradation,
    write_atomic,
)
from ecocneat.metrics import repetition_stats

FAST = {"pop_size": 20}


def config(path, out, **kw):
    base = dict(dataset=str(path), format="csv", generations=24, repetitions=2, seed=3,
                neat=FAST, out=str(out), curve_points=4)
    base.update(kw)
    return ExperimentConfig(**base)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_run_writes_consistent_record(blobs_csv, tmp_path, capsys):
    rec = run(config(blobs_csv, tmp_path / "o", strategy="ecoc", bits="minimal"))
    out = capsys.readouterr().out
    assert "Minimal ECOC-NEAT" in out
    assert len(rec.repetitions) == 2
    assert [r.seed for r in rec.repetitions] == [3, 4]
    data = json.loads((tmp_path / "o/results.json").read_text())
    again = RunRecord.from_json((tmp_path / "o/results.json").read_text())
    agg = again.aggregate()
    m, v = repetition_stats([r["test_accuracy"] for r in data["repetitions"]])
    assert agg["test_accuracy"]["mean"] == data["aggregate"]["test_accuracy"]["mean"] == m
    assert agg["test_accuracy"]["variance"] == v
    assert data["aggregate"]["classifiers"] == 2
    assert data["aggregate"]["per_classifier_generations"] == 12
    for r in data["repetitions"]:
        for a in r["archives"]:
            assert (tmp_path / "o" / a / "manifest.json").exists()
    rows = read_csv(tmp_path / "o/results.csv")
    assert [r["row"] for r in rows] == ["0", "1", "mean", "variance"]
    curve = read_csv(tmp_path / "o/curve.csv")
    assert {int(r["generation"]) % 2 for r in curve} == {0}
    assert "wall_time" not in (tmp_path / "o/results.json").read_text()


def test_run_is_reproducible_and_independent_of_jobs(blobs_csv, tmp_path):
    a = run(config(blobs_csv, tmp_path / "a", strategy="ovo", repetitions=1), quiet=True)
    b = run(config(blobs_csv, tmp_path / "b", strategy="ovo", repetitions=1, jobs=3), quiet=True)
    assert (tmp_path / "a/results.json").read_text() == (tmp_path / "b/results.json").read_text()
    assert a.to_json() == b.to_json()


def test_kfold_run_averages_folds(blobs_csv, tmp_path):
    rec = run(config(blobs_csv, tmp_path / "k", strategy="ova", repetitions=1, split_kind="kfold",
                     fold_count=3, generations=12), quiet=True)
    assert len(rec.repetitions[0].archives) == 3
    assert sum(rec.repetitions[0].scores["support"]) == 120


def test_bound_violation_stops_before_training(blobs_csv, tmp_path):
    with pytest.raises(ConfigError, match="outside"):
        run(config(blobs_csv, tmp_path / "x", strategy="ecoc", bits=1))
    assert not (tmp_path / "x").exists()
    with pytest.raises(ConfigError):
        run(config(blobs_csv, tmp_path / "x", strategy="ovo", bits=3))
    with pytest.raises(ConfigError):
        run(config(blobs_csv, tmp_path / "x", neat={"popsize": 3}))


def test_config_json_roundtrip(tmp_path):
    cfg = ExperimentConfig(strategy="ovo", generations=10, neat={"pop_size": 50})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.snapshot()))
    assert ExperimentConfig.from_json(path).snapshot() == cfg.snapshot()
    path.write_text('{"generatons": 3}')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(path)


def test_sweep(blobs_csv, tmp_path, capsys):
    recs = sweep_degradation(config(blobs_csv, tmp_path / "s", strategy="ecoc", bits="exhaustive",
                                    repetitions=1, generations=14), [2, 4])
    assert [r.repetitions[0].classifiers for r in recs] == [1, 7]
    rows = read_csv(tmp_path / "s/degradation.csv")
    assert [r["classes"] for r in rows] == ["2", "4"]
    assert rows[1]["generations"] == "14(2)"
    with pytest.raises(ConfigError):
        sweep_degradation(config(blobs_csv, tmp_path / "s2"), [2, 9])


def test_quality_study(blobs_csv, tmp_path, capsys):
    rep = study_quality(config(blobs_csv, tmp_path / "q", strategy="ecoc", repetitions=1, generations=14))
    # k=4: only pairs of balanced columns separate all four rows, 3 of the 21
    assert rep["enumerated"] and rep["pool_size"] == count_valid_subsets(4, 2) == 3
    assert rep["tiers"] == {"high": 1, "middle": 2, "low": 0}
    table = read_csv(tmp_path / "q/quality_table.csv")
    assert {r["tier"] for r in table} == {"middle", "high"}
    assert len(read_csv(tmp_path / "q/quality_pool.csv")) == 3
    assert len(read_csv(tmp_path / "q/quality_scatter.csv")) == 2


def test_robustness_study(blobs_csv, tmp_path, capsys):
    summary = study_robustness(config(blobs_csv, tmp_path / "r", repetitions=1, generations=12), [1, 3, 6], draws=4)
    got = {(r["strategy"], r["keep"]) for r in summary}
    assert got == {(s, k) for s in ("ovo", "ecoc") for k in (1, 3, 6)}
    full = [r for r in summary if r["keep"] == 6]
    # keeping all classifiers leaves the ensemble unchanged, so every draw agrees
    assert all(r["ci_low"] == r["ci_high"] for r in full)
    rejection = read_csv(tmp_path / "r/rejection.csv")
    assert {r["strategy"] for r in rejection} == {"ovo", "ecoc"}


def test_report(blobs_csv, tmp_path, capsys):
    run(config(blobs_csv, tmp_path / "o", strategy="ovo", repetitions=2, generations=12), quiet=True)
    summary = report(tmp_path / "o")
    rows = read_csv(tmp_path / "o/scores.csv")
    assert [r["class"] for r in rows][-3:] == ["micro", "weighted", "macro"]
    acc = summary["aggregate"]["test_accuracy"]["mean"]
    assert summary["scores"]["recall"]["micro"] == pytest.approx(acc)
    assert np.sum(summary["confusion"]) == 2 * 12


def test_write_atomic_leaves_no_temp_files(tmp_path):
    write_atomic(tmp_path / "a/b.txt", "hello")
    assert (tmp_path / "a/b.txt").read_text() == "hello"
    assert [p.name for p in (tmp_path / "a").iterdir()] == ["b.txt"]


# command line -----------------------------------------------------------------


def test_cli_run_and_precedence(blobs_csv, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dataset": str(blobs_csv), "format": "csv", "strategy": "ova",
                               "generations": 50, "repetitions": 1, "neat": FAST}))
    code = main(["run", "--config", str(cfg), "--generations", "12", "--out", str(tmp_path / "o"),
                 "--neat", "pop_size=16"])
    assert code == 0
    snap = json.loads((tmp_path / "o/results.json").read_text())["config"]
    assert snap["generations"] == 12
    assert snap["strategy"] == "ova"
    assert snap["neat"] == {"pop_size": 16}
    assert main(["report", str(tmp_path / "o")]) == 0
    assert "micro" in capsys.readouterr().out


def test_cli_exit_codes(blobs_csv, tmp_path, capsys):
    assert main(["run", "--dataset", str(blobs_csv), "--format", "csv", "--strategy", "ecoc",
                 "--bits", "1", "--out", str(tmp_path / "x")]) == 2
    assert main(["run", "--dataset", str(tmp_path / "missing.csv"), "--format", "csv",
                 "--out", str(tmp_path / "x")]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,a\n3,x,b\n")
    assert main(["run", "--dataset", str(bad), "--format", "csv", "--out", str(tmp_path / "x")]) == 3
    assert "line" not in capsys.readouterr().out


def test_cli_ecoc_tools(tmp_path, capsys):
    assert main(["ecoc", "count", "--classes", "6", "--bits", "3"]) == 0
    assert capsys.readouterr().out.strip() == "420"
    path = tmp_path / "m.txt"
    assert main(["ecoc", "gen", "--classes", "10", "--bits", "minimal", "--seed", "2", "--out", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "10 4"
    assert main(["ecoc", "validate", str(path)]) == 0
    assert capsys.readouterr().out.strip().endswith("ok")
    path.write_text("4 7\n1111111\n0000111\n0011000\n0101010\n")
    assert main(["ecoc", "validate", str(path)]) == 3
    assert "columns 4 and 6 are identical" in capsys.readouterr().out
    assert main(["ecoc", "gen", "--classes", "10", "--bits", "2"]) == 2
    assert main(["ecoc", "gen", "--classes", "4", "--bits", "exhaustive"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "1111111"
