import numpy as np
import pytest
from scipy.optimize import minimize

from weblearn.errors import TrainingError
from weblearn.learners import (
    FitConfig,
    LinearModel,
    decision_score,
    fit_weighted,
    normalize_rows,
    per_sample_loss,
    weighted_objective_grad,
)


def _random_instance(seed, n=60, m=4, flip=0.2):
    rng = np.random.default_rng(seed)
    w_true = rng.normal(size=m)
    X = rng.normal(size=(n, m))
    y = np.sign(X @ w_true + 0.1 * rng.normal(size=n))
    y[y == 0] = 1.0
    flips = rng.random(n) < flip  # keep it non-separable
    y = np.where(flips, -y, y)
    v = rng.random(n) + 0.05
    return X, y, v


def _oracle(X, y, v, loss, l2, seed_count=4):
    def f(params):
        w, b = params[:-1], params[-1]
        obj, gw, gb = weighted_objective_grad(w, b, X, y, v, loss, l2)
        return obj, np.concatenate([gw, [gb]])

    best = None
    for s in range(seed_count):
        x0 = np.random.default_rng(s).normal(size=X.shape[1] + 1) * (0.5 if s else 0.0)
        res = minimize(f, x0, jac=True, method="L-BFGS-B", options={"maxiter": 5000})
        if best is None or res.fun < best.fun:
            best = res
    return best


class TestFitWeighted:
    def test_separable_pair(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0]])
        y = np.array([1.0, -1.0])
        model = fit_weighted(X, y, np.ones(2), FitConfig(epochs=50))
        scores = decision_score(model, X)
        assert scores[0] > 0 > scores[1]

    def test_zero_weight_sample_has_no_influence(self):
        X = np.array([[1.0, 0.5], [1.0, 0.5]])
        y = np.array([1.0, -1.0])  # conflicting labels, second has weight 0
        v = np.array([1.0, 0.0])
        cfg = FitConfig(epochs=20)
        m1 = fit_weighted(X, y, v, cfg)
        X2 = X.copy()
        X2[1] = [-37.0, 4.2]
        y2 = y.copy()
        y2[1] = 1.0
        m2 = fit_weighted(X2, y2, v, cfg)
        np.testing.assert_array_equal(m1.weights, m2.weights)
        assert m1.bias == m2.bias

    @pytest.mark.parametrize("loss", ["squared_hinge", "logistic"])
    def test_convex_solve_matches_independent_solver(self, loss):
        X, y, v = _random_instance(1)
        Xn = normalize_rows(X)
        cfg = FitConfig(loss=loss, l2=0.1, epochs=10, grad_tol=1e-8)
        model = fit_weighted(X, y, v, cfg)
        mine, _, _ = weighted_objective_grad(model.weights, model.bias, Xn, y, v, loss, 0.1)
        oracle = _oracle(Xn, y, v, loss, 0.1)
        assert mine <= oracle.fun + 1e-6
        assert abs(mine - oracle.fun) <= 1e-6

    def test_weight_scaling_equivalence(self):
        X, y, v = _random_instance(2)
        c = 3.7
        cfg1 = FitConfig(loss="squared_hinge", l2=0.05, epochs=10, grad_tol=1e-9)
        cfg2 = FitConfig(loss="squared_hinge", l2=0.05 * c, epochs=10, grad_tol=1e-9)
        m1 = fit_weighted(X, y, v, cfg1)
        m2 = fit_weighted(X, y, c * v, cfg2)
        np.testing.assert_allclose(m1.weights, m2.weights, atol=1e-6)
        assert m1.bias == pytest.approx(m2.bias, abs=1e-6)

    def test_determinism(self):
        X, y, v = _random_instance(3)
        cfg = FitConfig(epochs=15, rng_seed=42)
        m1 = fit_weighted(X, y, v, cfg)
        m2 = fit_weighted(X, y, v, cfg)
        np.testing.assert_array_equal(m1.weights, m2.weights)
        assert m1.bias == m2.bias

    def test_all_zero_weights_rejected(self):
        X, y, _ = _random_instance(4)
        with pytest.raises(TrainingError, match="zero"):
            fit_weighted(X, y, np.zeros(len(y)), FitConfig())

    def test_single_class_warns_and_fits_bias(self):
        X = np.random.default_rng(0).normal(size=(10, 3))
        y = np.ones(10)
        with pytest.warns(UserWarning, match="single-class"):
            model = fit_weighted(X, y, np.ones(10), FitConfig())
        assert np.all(model.weights == 0.0)
        assert model.bias == 1.0

    def test_non_finite_weights_rejected(self):
        X, y, v = _random_instance(5)
        v[0] = np.nan
        with pytest.raises(TrainingError):
            fit_weighted(X, y, v, FitConfig())


class TestPerSampleLoss:
    def test_hinge_margin_met(self):
        model = LinearModel(weights=np.array([1.0]), bias=0.0, loss_kind="hinge", normalized=False)
        assert per_sample_loss(model, np.array([[1.0]]), np.array([1.0]))[0] == 0.0

    def test_hinge_and_logistic_at_zero_score(self):
        m_h = LinearModel(weights=np.array([0.0]), bias=0.0, loss_kind="hinge", normalized=False)
        m_l = LinearModel(weights=np.array([0.0]), bias=0.0, loss_kind="logistic", normalized=False)
        X, y = np.array([[1.0]]), np.array([1.0])
        assert per_sample_loss(m_h, X, y)[0] == pytest.approx(1.0)
        assert per_sample_loss(m_l, X, y)[0] == pytest.approx(np.log(2.0))

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(20, 3))
        y = np.where(rng.random(20) < 0.5, 1.0, -1.0)
        for kind in ["hinge", "squared_hinge", "logistic"]:
            model = LinearModel(
                weights=rng.normal(size=3), bias=0.3, loss_kind=kind, normalized=False
            )
            losses = per_sample_loss(model, X, y)
            s = X @ model.weights + model.bias
            margins = y * s
            if kind == "hinge":
                ref = np.maximum(0, 1 - margins)
            elif kind == "squared_hinge":
                ref = np.maximum(0, 1 - margins) ** 2
            else:
                ref = np.log1p(np.exp(-margins))
            np.testing.assert_allclose(losses, ref, rtol=1e-12)
            assert np.all(losses >= 0)


class TestDecisionScore:
    def test_zero_model(self):
        model = LinearModel(weights=np.zeros(3), bias=0.0)
        assert decision_score(model, np.array([5.0, -2.0, 1.0])) == 0.0

    def test_basis_vector(self):
        model = LinearModel(weights=np.array([1.0, 0.0]), bias=0.0, normalized=False)
        assert decision_score(model, np.array([2.0, 9.0])) == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        model = LinearModel(weights=np.zeros(3), bias=0.0)
        with pytest.raises(TrainingError):
            decision_score(model, np.zeros(4))


class TestGradients:
    @pytest.mark.parametrize("loss", ["hinge", "squared_hinge", "logistic"])
    def test_matches_central_finite_differences(self, loss):
        rng = np.random.default_rng(11)
        checked = 0
        eps = 1e-6
        while checked < 100:
            n, m = 12, 3
            X = rng.normal(size=(n, m))
            y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
            v = rng.random(n) + 0.1
            w = rng.normal(size=m)
            b = float(rng.normal())
            if loss == "hinge":
                margins = y * (X @ w + b)
                if np.any(np.abs(margins - 1.0) < 1e-3):
                    continue  # subgradient check only away from kinks
            _, gw, gb = weighted_objective_grad(w, b, X, y, v, loss, l2=0.05)
            g = np.concatenate([gw, [gb]])
            fd = np.zeros(m + 1)
            for j in range(m + 1):
                dw, db = np.zeros(m), 0.0
                if j < m:
                    dw[j] = eps
                else:
                    db = eps
                op, _, _ = weighted_objective_grad(w + dw, b + db, X, y, v, loss, l2=0.05)
                om, _, _ = weighted_objective_grad(w - dw, b - db, X, y, v, loss, l2=0.05)
                fd[j] = (op - om) / (2 * eps)
            denom = max(np.linalg.norm(g), 1e-8)
            assert np.linalg.norm(g - fd) / denom <= 1e-5
            checked += 1
