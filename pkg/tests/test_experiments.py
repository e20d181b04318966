import json

import numpy as np
import pytest

from persistblock import experiments
from persistblock.experiments import (EXPERIMENTS, ExperimentConfig,
                                      _child_seed, _ltm_corpus, _shape_corpus,
                                      run_experiment)

TINY = {"clouds_per_shape": 3, "shape_points": 40,
        "orbits_per_r": 4, "orbit_length": 60,
        "cpd_steps_per_regime": 6, "cpd_orbit_length": 60,
        "bench_sizes": (50, 100), "bench_diagrams": 3}


@pytest.fixture
def tiny_scale(monkeypatch):
    monkeypatch.setitem(experiments.SCALES, "desk", TINY)


def read_bytes(path):
    return path.read_bytes()


# --- config ---------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("no-such-experiment")
    with pytest.raises(ValueError):
        ExperimentConfig("six-shapes", scale="huge")
    with pytest.raises(ValueError):
        ExperimentConfig("six-shapes", method="wavelets")
    with pytest.raises(ValueError):
        ExperimentConfig("six-shapes", dim=2)
    with pytest.raises(ValueError):
        ExperimentConfig("six-shapes", grid_size=0)


def test_child_seeds_stable_and_distinct():
    seeds = [_child_seed(7, i) for i in range(100)]
    assert seeds == [_child_seed(7, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert _child_seed(7, 0) != _child_seed(8, 0)


def test_corpora_deterministic(tiny_scale):
    cfg = ExperimentConfig("six-shapes", seed=3)
    clouds_a, labels_a = _shape_corpus(cfg)
    clouds_b, labels_b = _shape_corpus(cfg)
    assert labels_a == labels_b
    for a, b in zip(clouds_a, clouds_b):
        np.testing.assert_array_equal(a, b)
    orbits_a, rlab = _ltm_corpus(cfg, 2, 30)
    orbits_b, _ = _ltm_corpus(cfg, 2, 30)
    assert len(orbits_a) == 10 and len(set(rlab)) == 5
    for a, b in zip(orbits_a, orbits_b):
        np.testing.assert_array_equal(a, b)


# --- artifacts ------------------------------------------------------------------


def test_six_shapes_artifacts(tiny_scale, tmp_path):
    cfg = ExperimentConfig("six-shapes", seed=0, out_dir=str(tmp_path))
    summary = run_experiment(cfg)
    assert 0.0 <= summary["vpb"]["accuracy"] <= 1.0
    assert summary["vpb"]["tau"] in cfg.tau_grid
    assert (tmp_path / "results.csv").exists()
    assert (tmp_path / "tau_table.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["deterministic"] is True
    assert manifest["config"]["experiment"] == "six-shapes"


def test_retrieval_artifacts(tiny_scale, tmp_path):
    cfg = ExperimentConfig("retrieval", seed=0, out_dir=str(tmp_path),
                           method="both")
    summary = run_experiment(cfg)
    assert set(summary) == {"vpb", "pi"}
    for stats in summary.values():
        assert set(stats) == {"NN", "FT", "ST", "E", "DCG"}
    lines = (tmp_path / "retrieval.csv").read_text().splitlines()
    assert lines[0] == "method,NN,FT,ST,E,DCG"
    assert len(lines) == 3


def test_ltm_classify_artifacts(tiny_scale, tmp_path):
    cfg = ExperimentConfig("ltm-classify", seed=0, out_dir=str(tmp_path))
    summary = run_experiment(cfg)
    assert summary["n_train"] + summary["n_test"] == 20
    assert 0.0 <= summary["accuracy"] <= 1.0
    assert (tmp_path / "classify.csv").exists()


def test_ltm_cpd_artifacts(tiny_scale, tmp_path):
    cfg = ExperimentConfig("ltm-cpd", seed=0, out_dir=str(tmp_path))
    summary = run_experiment(cfg)
    assert summary["truth"] == [7, 13, 19, 25]
    assert len(summary["errors"]) == 4
    doc = json.loads((tmp_path / "cpd.json").read_text())
    assert doc["change_points"] == summary["change_points"]
    assert (tmp_path / "errors.csv").exists()


def test_cost_bench_artifacts(tiny_scale, tmp_path):
    cfg = ExperimentConfig("cost-bench", seed=0, out_dir=str(tmp_path))
    summary = run_experiment(cfg)
    assert [r["size"] for r in summary["rows"]] == [50, 100]
    lines = (tmp_path / "cost.csv").read_text().splitlines()
    assert lines[0] == "n,method,seconds"
    assert len(lines) == 5
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["deterministic"] is False


def test_sensitivity_artifacts(tiny_scale, tmp_path):
    cfg = ExperimentConfig("sensitivity", seed=0, out_dir=str(tmp_path),
                           tau_grid=(0.3, 0.7))
    summary = run_experiment(cfg)
    params = [(r[0], r[1]) for r in summary["rows"]]
    assert params == [("tau", 0.3), ("tau", 0.7),
                      ("grid_size", 5.0), ("grid_size", 10.0),
                      ("grid_size", 20.0), ("grid_size", 40.0)]
    assert (tmp_path / "sensitivity.csv").exists()


# --- determinism ----------------------------------------------------------------


@pytest.mark.parametrize("experiment", ["six-shapes", "retrieval", "ltm-cpd"])
def test_rerun_is_byte_identical(tiny_scale, tmp_path, experiment):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        run_experiment(ExperimentConfig(experiment, seed=4, out_dir=str(d)))
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir())
    for name in names:
        if name == "manifest.json":
            continue  # records out_dir, which differs by construction
        assert read_bytes(dirs[0] / name) == read_bytes(dirs[1] / name), name


def test_manifest_reconstructs_config(tiny_scale, tmp_path):
    first = tmp_path / "first"
    again = tmp_path / "again"
    run_experiment(ExperimentConfig("six-shapes", seed=9, out_dir=str(first)))
    doc = json.loads((first / "manifest.json").read_text())["config"]
    doc["tau_grid"] = tuple(doc["tau_grid"])
    doc["out_dir"] = str(again)
    run_experiment(ExperimentConfig(**doc))
    assert read_bytes(first / "results.csv") == read_bytes(again / "results.csv")


def test_all_experiments_covered():
    assert set(EXPERIMENTS) == {"six-shapes", "retrieval", "ltm-classify",
                                "ltm-cpd", "cost-bench", "sensitivity"}
