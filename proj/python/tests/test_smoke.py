import numpy as np
import pytest

import omnipred


def test_net_vertices_and_size():
    pts = omnipred.build_net(2, 0.5)
    assert pts.shape == (5, 2)
    np.testing.assert_allclose(pts.sum(axis=1), 1.0)
    assert [0.0, 1.0] in pts.tolist() and [1.0, 0.0] in pts.tolist()


def test_generate_fixed_marginal():
    x, y = omnipred.generate("fixed-marginal", k=3, d=2, T=50, q=[1, 0, 0])
    assert x.shape == (50, 2)
    assert set(y) == {0}


def test_binary_online_report():
    x, y = omnipred.generate("logistic-binary", k=2, d=3, T=3000, seed=1)
    out = omnipred.run_binary_online(x, y, {"eps": 0.2, "T": 3000, "seed": 1})
    rep = out["report"]
    assert rep["T"] == 3000
    assert rep["thresh_cal"] <= 0.2
    assert rep["config"]["command"] == "run-binary-online"
    assert len(out["preds"]) == 3000
    for g in rep["gaps"].values():
        assert g["gap"] <= g["recipe_multiaccuracy"] + g["recipe_w_calibration"] + 1e-9


def test_multiclass_online_is_reproducible():
    x, y = omnipred.generate("softmax-linear", k=3, d=3, T=500, seed=2)
    cfg = {"k": 3, "eps": 0.5, "T": 500, "seed": 4}
    a = omnipred.run_multiclass_online(x, y, cfg)
    b = omnipred.run_multiclass_online(x, y, cfg)
    assert a == b
    assert "linf_cal" in a["report"]


def test_union_reports_each_family():
    x, y = omnipred.generate("softmax-linear", k=3, d=2, T=300, seed=3)
    out = omnipred.run_union(
        x, y, {"k": 3, "eps": 0.5, "T": 300, "families": ["identity", "square"]}
    )
    assert set(out["report"]["multiaccuracy"]) == {"identity", "square"}


def test_statistical_pipelines():
    x, y = omnipred.generate("logistic-binary", k=2, d=2, T=1500, seed=5)
    out = omnipred.run_binary_stat(
        x[:1000], y[:1000], x[1000:], y[1000:], {"eps": 0.25, "T": 1000}
    )
    assert out["rounds"] == 1000
    x, y = omnipred.generate("softmax-linear", k=3, d=2, T=800, seed=6)
    out = omnipred.run_multiclass_stat(
        x[:400], y[:400], x[400:], y[400:], {"k": 3, "eps": 0.5, "T": 400}
    )
    assert 0.0 <= out["report"]["linf_cal"] <= 2.0


def test_oracles_and_solver():
    mix = omnipred.binary_cmloo(1.0, 0.0, [1.0] + [0.0] * 20, 0.0, 0.1)
    assert abs(sum(w for _, w in mix) - 1.0) < 1e-12
    sol = omnipred.solve_matrix_game(np.array([[0.0, 1.0], [1.0, 0.0]]), 1e-3)
    assert abs(sol["value"] - 0.5) < 1e-3
    assert all(s["failures"] == 0 for s in omnipred.oracle_suites(0))


def test_counterexamples():
    iso = omnipred.verify_isotonic()
    assert iso["pass"] and iso["candidate_beats"]
    assert abs(iso["squared_t"] - 3 / 7) < 1e-6
    demo = omnipred.impossibility_demo(200, seed=1)
    assert abs(demo["sum"] - 1.0) < 1e-12
    assert demo["max"] >= 0.5


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        omnipred.build_net(3, 2.0)
    with pytest.raises(ValueError):
        omnipred.run_binary_online(np.zeros((3, 2)), [0, 1], {"eps": 0.1, "T": 3})
    with pytest.raises(ValueError):
        omnipred.run_binary_online(np.zeros((3, 2)), [0, 1, 0], {"bogus": 1})
