import json
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from stereo360.errors import IncompleteFeaturesError, InvalidInputError, ProvenanceError
from stereo360.regression import (MinMaxScaler, SvrModel, assemble_features, feature_length, grid_search,
                                  predict, train)
from stereo360.smo import rbf_kernel, solve_epsilon_svr


def _vp(i):
    return SimpleNamespace(q_left=0.5 + i / 100, q_right=0.6 + i / 100, q_fused=0.55 + i / 100,
                           depth={"entropy": float(i), "mean": 1.0, "stddev": 2.0})


def test_assembly_lengths():
    vps = [_vp(i) for i in range(20)]
    assert assemble_features(vps, "quality", "WQA", n_expected=20).shape == (20,)
    assert assemble_features(vps, "quality+depth", "WQA").shape == (40,)
    assert assemble_features(vps, "quality+depth", "QC").shape == (60,)
    for layout in ("quality", "quality+depth"):
        for assembly in ("WQA", "QA", "QC"):
            assert assemble_features(vps, layout, assembly).shape == (feature_length(20, layout, assembly),)


def test_assembly_values():
    vps = [_vp(i) for i in range(3)]
    np.testing.assert_allclose(assemble_features(vps, "quality", "QA"), [0.55, 0.56, 0.57])
    np.testing.assert_allclose(assemble_features(vps, "quality", "QC"), [0.5, 0.6, 0.51, 0.61, 0.52, 0.62])
    np.testing.assert_allclose(assemble_features(vps, "quality+depth", "WQA")[3:], [0, 1, 2])


def test_assembly_incomplete():
    vps = [_vp(i) for i in range(19)]
    with pytest.raises(IncompleteFeaturesError):
        assemble_features(vps, n_expected=20)
    with pytest.raises(IncompleteFeaturesError):
        assemble_features(vps + [None])
    with pytest.raises(IncompleteFeaturesError):
        assemble_features(vps, "quality+depth", depth_kind="median")


def test_constant_target_fits_bias():
    X = np.random.default_rng(0).uniform(0, 1, (15, 4))
    m = train(X, np.full(15, 3.2))
    assert np.all(np.abs(predict(m, X) - 3.2) <= m.epsilon + 1e-9)


def test_five_point_line_matches_qp():
    x = np.array([0, 0.25, 0.5, 0.75, 1.0])[:, None]
    y = 2 * x.ravel()
    C, eps, gamma = 1000.0, 0.01, 1.0
    m = train(x, y, C=C, gamma=gamma, epsilon=eps)
    pred = predict(m, x)
    assert np.all(np.abs(pred - y) <= eps + 1e-2)
    K = rbf_kernel(x, x, gamma)
    coef, bias, _ = oracles.svr_dual_qp(K, y, C, eps)
    np.testing.assert_allclose(pred, K @ coef + bias, atol=1e-2)


@settings(max_examples=15)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.5, 1.0, 10.0]))
def test_dual_feasible_and_near_qp_optimum(seed, C):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (12, 3))
    y = np.sin(3 * X[:, 0]) + 0.3 * X[:, 1] + rng.normal(0, 0.05, 12)
    K = rbf_kernel(X, X, 0.5)
    res = solve_epsilon_svr(K, y, C, 0.05)
    assert res.converged
    assert abs(res.coef.sum()) < 1e-10
    assert np.all(res.alpha >= 0) and np.all(res.alpha <= C)
    _, _, qp_obj = oracles.svr_dual_qp(K, y, C, 0.05)
    assert res.objective <= qp_obj + 1e-3 * max(1.0, abs(qp_obj))


def test_trained_model_coefficients_bounded():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 5, (30, 6))
    m = train(X, X.sum(axis=1) / 6 + rng.normal(0, 0.2, 30), C=2.0)
    assert np.all(np.abs(m.coefficients) <= 2.0)
    assert abs(m.coefficients.sum()) < 1e-10
    Xs = m.scaler.transform(X)
    assert Xs.min() >= 0 and Xs.max() <= 1


def _hand_model():
    return SvrModel(np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([0.5, -0.25]), 1.5, 0.5, 1.0, 0.1,
                    MinMaxScaler(np.zeros(2), np.ones(2)))


def test_zero_support_vectors_return_bias():
    m = SvrModel(np.zeros((0, 2)), np.zeros(0), 2.5, 0.5, 1.0, 0.1, MinMaxScaler(np.zeros(2), np.ones(2)))
    assert predict(m, np.array([0.3, 0.7])) == 2.5


def test_hand_set_model_arithmetic():
    x = np.array([0.5, 0.0])
    expected = 0.5 * np.exp(-0.5 * 0.25) - 0.25 * np.exp(-0.5 * (0.25 + 1.0)) + 1.5
    assert predict(_hand_model(), x) == pytest.approx(expected, abs=1e-15)


@given(st.integers(0, 2 ** 32 - 1))
def test_support_vector_order_invariance(seed):
    rng = np.random.default_rng(seed)
    m = _hand_model()
    m.support_vectors = rng.uniform(0, 1, (6, 2))
    m.coefficients = rng.normal(0, 1, 6)
    perm = rng.permutation(6)
    p = SvrModel(m.support_vectors[perm], m.coefficients[perm], m.bias, m.gamma, m.C, m.epsilon, m.scaler)
    X = rng.uniform(0, 1, (5, 2))
    np.testing.assert_allclose(predict(p, X), predict(m, X), rtol=0, atol=1e-12)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    X = rng.uniform(0, 1, (25, 5))
    m = train(X, X @ np.arange(5.0), provenance={"n0": 8, "layout": "quality"})
    path = tmp_path / "m.json"
    m.save(path)
    back = SvrModel.load(path)
    np.testing.assert_allclose(predict(back, X), predict(m, X), rtol=0, atol=1e-12)
    assert back.dumps() == path.read_text()
    assert set(json.loads(path.read_text())) == {"version", "provenance", "scaling", "svr"}


def test_version_and_provenance_checks(tmp_path):
    m = _hand_model()
    m.provenance = {"n0": 8, "layout": "quality"}
    d = m.to_dict()
    d["version"] = 99
    with pytest.raises(ProvenanceError):
        SvrModel.from_dict(d)
    with pytest.raises(ProvenanceError):
        predict(m, np.zeros(2), provenance={"n0": 6})
    with pytest.raises(ProvenanceError):
        predict(m, np.zeros(3))
    assert np.isfinite(predict(m, np.zeros(2), provenance={"n0": 8}))


def test_training_is_deterministic():
    rng = np.random.default_rng(3)
    X = rng.uniform(0, 1, (20, 3))
    y = rng.uniform(1, 5, 20)
    assert train(X, y).dumps() == train(X, y).dumps()


def test_input_validation():
    with pytest.raises(InvalidInputError):
        train(np.zeros((1, 2)), [1.0])
    with pytest.raises(InvalidInputError):
        train([[0.0, np.nan], [1.0, 1.0]], [1.0, 2.0])
    with pytest.raises(InvalidInputError):
        train(np.zeros((3, 2)), [1.0, 2.0])
    with pytest.warns(RuntimeWarning, match="constant feature"):
        m = train(np.c_[np.arange(4.0), np.ones(4)], [1.0, 2.0, 3.0, 4.0])
    assert np.all(m.scaler.transform(np.array([[9.0, 5.0]]))[:, 1] == 0.0)


def test_grid_search_picks_from_grid():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 1, (30, 2))
    y = np.sin(4 * X[:, 0]) + X[:, 1]
    C, gamma, mse = grid_search(X, y, epsilon=0.05, C_grid=(0.125, 8.0), gamma_grid=(2.0 ** -9, 1.0))
    assert (C, gamma) == (8.0, 1.0)
    assert mse < np.var(y)
