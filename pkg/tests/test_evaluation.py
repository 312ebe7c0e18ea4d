import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import curve_fit

import oracles
from stereo360.errors import InvalidInputError, ProtocolError, UndefinedCorrelationError
from stereo360.evaluation import (content_split, cross_validate, evaluate_predictions, fit_logistic5,
                                  logistic5, pearson, plcc_rmse, srocc, subset_mask)


def test_srocc_examples():
    mos = np.array([1.2, 3.4, 2.2, 4.9, 4.1])
    assert srocc(mos, mos) == pytest.approx(1.0, abs=1e-15)
    assert srocc(-mos, mos) == pytest.approx(-1.0, abs=1e-15)
    tie = srocc([1, 2, 2, 4], [1, 2, 3, 4])
    assert tie == pytest.approx(oracles.spearman_exact([1, 2, 2, 4], [1, 2, 3, 4]), abs=1e-15)
    assert tie == pytest.approx(0.9486832980505138, abs=1e-15)


def test_correlation_errors():
    with pytest.raises(UndefinedCorrelationError):
        srocc([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedCorrelationError):
        plcc_rmse([2, 2, 2, 2], [1, 2, 3, 4])
    with pytest.raises(InvalidInputError):
        srocc([1, 2], [1, 2])
    with pytest.raises(InvalidInputError):
        srocc([1, 2, 3], [1, 2, 3, 4])


# integer-valued inputs keep the transforms strictly monotone after rounding
@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=30, unique=True), st.integers(0, 1000))
def test_srocc_monotone_invariance(xs, seed):
    x = np.asarray(xs, dtype=float)
    y = np.random.default_rng(seed).normal(size=x.size)
    base = srocc(x, y)
    assert srocc(np.arctan(x / 50) * 7 + 3, y) == pytest.approx(base, abs=1e-12)
    assert srocc(x, np.exp(y)) == pytest.approx(base, abs=1e-12)
    assert srocc(x, y) == pytest.approx(oracles.spearman_exact(x.tolist(), y.tolist()), abs=1e-12)


def test_plcc_rmse_examples():
    mos = np.array([1.0, 2.5, 3.0, 4.5, 5.0])
    assert plcc_rmse(mos, mos) == (pytest.approx(1.0, abs=1e-15), 0.0)
    p, e = plcc_rmse(mos + 0.5, mos)
    assert p == pytest.approx(1.0, abs=1e-15) and e == pytest.approx(0.5, abs=1e-15)
    assert pearson([1, 2, 3, 4, 5], [2, 4, 5, 4, 5]) == pytest.approx(0.7745966692414834, abs=1e-15)


def test_logistic_recovers_generating_curve():
    beta = [2, 1, 0, 0.1, 3]
    x = np.linspace(-4, 4, 50)
    mos = logistic5(x, beta)
    fit = fit_logistic5(x, mos)
    assert np.sqrt(np.mean((fit(x) - mos) ** 2)) <= 1e-6


def test_logistic_linear_data():
    x = np.random.default_rng(0).uniform(0, 1, 40)
    mos = 1.5 + 3.0 * x
    fit = fit_logistic5(x, mos)
    assert np.sqrt(np.mean((fit(x) - mos) ** 2)) <= 1e-8
    assert fit.converged


def test_logistic_improves_cubic():
    x = np.linspace(-1, 1, 30)
    mos = x ** 3
    fit = fit_logistic5(x, mos)
    assert pearson(fit(x), mos) > pearson(x, mos)


def test_mapping_never_loses_correlation():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 40))
        x = rng.uniform(0, 1, n)
        mos = np.clip(1 + 4 * x ** rng.uniform(0.3, 3) + rng.normal(0, rng.uniform(0, 1), n), 1, 5)
        fit = fit_logistic5(x, mos)
        assert pearson(fit(x), mos) >= abs(pearson(x, mos)) - 1e-9


def test_fit_is_as_good_as_curve_fit():
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 1, 60)
    mos = 1 + 4 / (1 + np.exp(-8 * (x - 0.5))) + rng.normal(0, 0.2, 60)
    fit = fit_logistic5(x, mos)
    p0 = [np.ptp(mos), 1 / np.std(x), np.mean(x), 0.0, np.mean(mos)]
    ref, _ = curve_fit(lambda t, *b: logistic5(t, b), x, mos, p0=p0, maxfev=20000)
    ref_sse = np.sum((logistic5(x, ref) - mos) ** 2)
    assert fit.sse <= ref_sse * (1 + 1e-6)


def test_evaluate_report_fields():
    rng = np.random.default_rng(1)
    mos = rng.uniform(1, 5, 20)
    rep = evaluate_predictions(mos + rng.normal(0, 0.3, 20), mos, "symmetric", {"seed": 3})
    assert -1 <= rep.plcc <= 1 and -1 <= rep.srocc <= 1 and rep.rmse >= 0
    assert len(rep.beta) == 5 and rep.n == 20 and rep.split == {"seed": 3}


def test_content_split_sizes():
    rng = np.random.default_rng(0)
    train, test = content_split(list("abcdefabc"), 0.67, rng)
    assert len(train) == 4 and len(test) == 2 and not set(train) & set(test)
    train, test = content_split(list("abc"), 0.99, rng)
    assert len(train) == 2 and len(test) == 1


def test_subset_mask():
    sym = ["symmetric", "asymmetric", "symmetric"]
    assert subset_mask(sym, "symmetric", 3).tolist() == [True, False, True]
    assert subset_mask(None, "all", 2).tolist() == [True, True]
    with pytest.raises(InvalidInputError):
        subset_mask(None, "asymmetric", 3)
    with pytest.raises(InvalidInputError):
        subset_mask(sym, "mixed", 3)


def _synthetic(n_contents=6, per=12, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (n_contents * per, 3))
    y = 1 + 4 * (0.5 * X[:, 0] + 0.3 * X[:, 1] + 0.2 * X[:, 2])
    contents = [f"c{i // per}" for i in range(n_contents * per)]
    symmetry = ["symmetric" if i % 3 == 0 else "asymmetric" for i in range(len(y))]
    return X, y, contents, symmetry


def test_cross_validation_exact_function():
    X, y, contents, symmetry = _synthetic()
    rep = cross_validate(X, y, contents, symmetry, subsets=("all", "symmetric", "asymmetric"), n_iter=20,
                         svr_params={"C": 10.0, "epsilon": 0.01})
    assert rep.median["all"]["srocc"] > 0.99
    assert rep.failures == {"all": 0, "symmetric": 0, "asymmetric": 0}
    for it in rep.iterations["symmetric"]:
        assert it["n"] == sum(1 for c, s in zip(contents, symmetry) if c in it["split"]["test"] and s == "symmetric")


def test_cross_validation_deterministic_and_parallel_safe():
    X, y, contents, _ = _synthetic(seed=1)
    a = cross_validate(X, y, contents, n_iter=6, seed=5)
    b = cross_validate(X, y, contents, n_iter=6, seed=5, workers=3)
    assert a.as_dict() == b.as_dict()
    one = cross_validate(X, y, contents, n_iter=1, seed=9)
    assert one.as_dict() == cross_validate(X, y, contents, n_iter=1, seed=9).as_dict()


@pytest.fixture(scope="module")
def small_cv():
    X, y, contents, _ = _synthetic(seed=2)
    return cross_validate(X, y, contents, n_iter=8, seed=1)


@settings(max_examples=10)
@given(order=st.permutations(range(8)))
def test_median_is_order_invariant(small_cv, order):
    rep = small_cv
    vals = [rep.iterations["all"][i]["srocc"] for i in order]
    assert np.median(vals) == rep.median["all"]["srocc"]


def test_cross_validation_needs_three_contents():
    X, y, contents, _ = _synthetic(n_contents=2)
    with pytest.raises(ProtocolError):
        cross_validate(X, y, contents, n_iter=1)
