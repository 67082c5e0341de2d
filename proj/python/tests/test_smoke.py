"""Smoke tests for the python bindings.

Runs against the installed `scnet` package when available, otherwise against
the extension module built by the main CMake tree (build/bindings).
"""

import json
import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

try:
    import scnet as m
except ImportError:
    sys.path.insert(0, os.environ.get("SCNET_MODULE_DIR", os.path.join(ROOT, "build", "bindings")))
    _scnet = pytest.importorskip("_scnet", reason="build the CMake tree (or pip install) first")
    m = _scnet


@pytest.fixture(scope="module")
def tiny_run():
    graphs = m.generate("grid", seed=3, count=60)
    result = m.train(graphs, "grid", model="scn", seed=11, epochs=4)
    return graphs, result


def test_generate_shapes():
    graphs = m.generate("stars", seed=5, count=30)
    assert len(graphs) == 30
    labels = {g["label"] for g in graphs}
    assert labels == {0, 1, 2}
    g = graphs[0]
    assert len(g["adjacency"]) == g["n"] * g["n"]
    assert len(g["features"]) == g["n"] * g["feature_width"]


def test_generate_deterministic():
    a = m.generate("grid", seed=9, count=10)
    b = m.generate("grid", seed=9, count=10)
    assert a == b


def test_dataset_roundtrip(tmp_path):
    graphs = m.generate("house_colour", seed=2, count=8)
    path = str(tmp_path / "ds.jsonl")
    m.save_dataset(graphs, path)
    back = m.load_dataset(path)
    assert back == graphs


def test_train_returns_checkpoint_and_log(tiny_run):
    _, result = tiny_run
    assert len(result["log"]) == 4
    assert not result["numeric_failure"]
    ckpt = json.loads(result["checkpoint"])
    assert ckpt["variant"] == "scn"
    row = result["log"][0]
    for key in ("total", "cross_entropy", "entropy", "connectivity", "utilisation", "consistency"):
        assert key in row


def test_predict_shapes(tiny_run):
    graphs, result = tiny_run
    logits = m.predict(graphs, result["checkpoint"])
    assert len(logits) == len(graphs)
    assert len(logits[0]) == 2


def test_evaluate_metrics(tiny_run):
    graphs, result = tiny_run
    ev = m.evaluate(graphs, result["checkpoint"], seed=11)
    assert 0.0 <= ev["accuracy_test"] <= 100.0
    assert 0.0 <= ev["cluster_utilization_test"] <= 1.0
    assert -1.0 <= ev["motif_separation"] <= 1.0


def test_explain_writes_artifacts(tiny_run, tmp_path):
    graphs, result = tiny_run
    out = str(tmp_path / "explanations")
    count = m.explain(graphs, result["checkpoint"], out, "grid", seed=11, hops=1, reps=2)
    assert count > 0
    files = os.listdir(out)
    assert "explanations.json" in files
    assert any(f.endswith(".dot") for f in files)
    with open(os.path.join(out, "explanations.json")) as fh:
        records = json.load(fh)
    assert len(records) == count


def test_cgn_baseline_trains():
    graphs = m.generate("grid", seed=4, count=40)
    result = m.train(graphs, "grid", model="cgn_mean", seed=1, epochs=2)
    logits = m.predict(graphs, result["checkpoint"])
    assert len(logits) == len(graphs)


def test_bad_model_name_raises():
    graphs = m.generate("grid", seed=4, count=10)
    with pytest.raises(ValueError):
        m.train(graphs, "grid", model="nope", epochs=1)
