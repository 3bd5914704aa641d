import math

import numpy as np
import pytest

import vibgsl

QUICK = {"epochs": 3, "hidden": 8, "bottleneck": 4, "folds": 3, "lr": 0.01}


@pytest.fixture(scope="module")
def small():
    return vibgsl.synth(graphs=12, nodes=6, features=4, seed=1)


def test_graph_round_trip():
    x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 1.0
    g = vibgsl.Graph(x, a, 1)
    assert g.num_nodes == 3
    assert g.num_edges == 1
    assert np.array_equal(g.features, x)
    assert g.edge_list() == [(0, 1)]


def test_invalid_graph_raises():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        vibgsl.Graph(np.ones((2, 1)), a, 0)


def test_dataset_save_load(tmp_path, small):
    path = tmp_path / "d.jsonl"
    small.save(str(path))
    back = vibgsl.Dataset.load(str(path))
    assert len(back) == len(small)
    assert back.num_classes == 2
    assert np.array_equal(back[3].adjacency, small[3].adjacency)


def test_perturb_triangle():
    a = np.ones((3, 3)) - np.eye(3)
    g = vibgsl.Graph(np.zeros((3, 1)), a, 0)
    assert vibgsl.perturb(g, 1.0 / 3.0).num_edges == 2


def test_closed_forms():
    assert vibgsl.gaussian_kl([1.0], [1.0]) == pytest.approx(0.5)
    assert vibgsl.entropy([0.25, 0.75]) == pytest.approx(0.5623, abs=1e-4)


def test_config_defaults():
    c = vibgsl.default_config()
    assert c["beta"] == pytest.approx(1e-3)
    assert c["bottleneck"] == 16
    with pytest.raises(ValueError):
        vibgsl.cross_validate(vibgsl.synth(graphs=4, nodes=4), {"bogus": 1})


def test_cross_validate_is_deterministic(small):
    a = vibgsl.cross_validate(small, QUICK)
    b = vibgsl.cross_validate(small, QUICK)
    assert a == b
    accs = [f["accuracy"] for f in a["folds"]]
    assert math.isclose(sum(accs) / len(accs), a["mean_accuracy"], abs_tol=1e-12)


def test_single_beta_sweep_matches_cv(small):
    cv = vibgsl.cross_validate(small, QUICK)
    sweep = vibgsl.beta_sweep(small, [1e-3], QUICK)
    assert sweep[0]["mean_accuracy"] == cv["mean_accuracy"]


def test_ib_graph_ignores_input_adjacency(small):
    _, model = vibgsl.train(small, QUICK)
    g = small[0]
    rewired = vibgsl.perturb(g, 0.5, "remove", seed=3)
    assert np.array_equal(model.ib_graph(g, 7).adjacency, model.ib_graph(rewired, 7).adjacency)
    assert model.predict(g) in (0, 1)


def test_oracles():
    bounds = vibgsl.verify_bounds(100, 2)
    assert bounds["failures"] == 0
    grads = vibgsl.gradcheck(0)
    assert max(grads.values()) < 1e-3
