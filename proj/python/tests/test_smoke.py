import numpy as np
import pytest

import amf


def test_lasso_matches_soft_threshold_on_orthonormal_design():
    rng = np.random.default_rng(0)
    n, p = 80, 5
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    X = q * np.sqrt(n)
    y = X @ np.array([1.0, -0.5, 0.0, 0.2, 0.0]) + 0.1 * rng.standard_normal(n)
    lam = 0.3
    fit = amf.lasso_fit(X, y, lam, standardize=False, fit_intercept=False)
    z = X.T @ y / n
    expected = [amf.soft_threshold(v, lam) for v in z]
    np.testing.assert_allclose(fit.beta, expected, atol=1e-8)
    assert amf.lambda_max(X, y, standardize=False, fit_intercept=False) == pytest.approx(np.abs(z).max())


def test_bh_worked_example():
    q = amf.adjust_pvalues(np.array([0.01, 0.04, 0.03, 0.5]), "bh")
    np.testing.assert_allclose(q, [0.04, 0.16 / 3, 0.16 / 3, 0.5])
    assert np.all(amf.adjust_pvalues(np.array([0.01, 0.04, 0.03, 0.5]), "bhy") >= q)


def test_minimax_three_points():
    d = np.array([[0.0, 1.0, 4.0], [1.0, 0.0, 3.0], [4.0, 3.0, 0.0]])
    merges = amf.minimax_cluster(d)
    assert merges[0][:3] == (0, 1, 1.0)
    assert merges[1][2] == 3.0
    assert merges[1][3] == 1


def test_ols_and_intercept_test():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((200, 2))
    y = 0.5 + X @ np.array([1.0, 2.0]) + 0.1 * rng.standard_normal(200)
    fit = amf.ols(X, y)
    assert fit.coefficients[0] == pytest.approx(0.5, abs=0.05)
    alpha, p = amf.intercept_test(y, X)
    assert alpha == pytest.approx(fit.coefficients[0])
    assert p < 1e-10


def test_errors_carry_codes():
    with pytest.raises(amf.AmfError) as info:
        amf.ols(np.ones((5, 2)), np.arange(5.0))
    assert info.value.code == "RankDeficient"
    with pytest.raises(amf.AmfError):
        amf.cumulative_capital(np.array([0.1, -1.0]))


def test_capital_and_welch():
    np.testing.assert_allclose(amf.cumulative_capital(np.array([0.1, -0.1])), [1.0, 1.1, 0.99])
    a = np.linspace(0.0, 1.0, 20)
    assert amf.welch_test(a, a)[2] == pytest.approx(0.5)


def test_gibs_recovers_supports():
    results = amf.gibs_synthetic(n_securities=3, noise_sd=0.005, seed=7)
    assert len(results) == 3
    for r in results:
        assert set(r.true_support) <= set(r.selected)
        assert len(r.selected) <= 20
        assert r.adj_r2 > 0.8
