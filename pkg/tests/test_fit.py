import numpy as np
import pytest

from lowrank_glm import (
    AdjacencyMatrix,
    DivergenceError,
    FitConfig,
    InputError,
    ModelParams,
    fit,
    fit_glm_baseline,
    predictive_auc,
)
from lowrank_glm.simulate import SimDesign, generate_truth, sample_network
from lowrank_glm.spectral import matrix_rank, nuclear_norm

import oracles


def _bernoulli_instance(seed, n=20, m=2, symmetric=False):
    rng = np.random.default_rng(seed)
    X = [rng.standard_normal((n, n)) for _ in range(m)]
    if symmetric:
        X = [(Xk + Xk.T) / 2 for Xk in X]
    u = rng.standard_normal(n)
    eta = np.outer(u, u) - 1.0 + sum(0.5 * Xk for Xk in X)
    A = (rng.random((n, n)) < 1 / (1 + np.exp(-eta))).astype(float)
    if symmetric:
        A = np.triu(A) + np.triu(A, 1).T
    return A, X


def test_config_validation():
    with pytest.raises(InputError):
        FitConfig(R=-1.0)
    with pytest.raises(InputError):
        FitConfig(R=1.0, s=0)
    with pytest.raises(InputError):
        FitConfig(R=1.0, step="fixed")
    with pytest.raises(InputError):
        FitConfig(R=1.0, max_iter=0)
    with pytest.raises(InputError):
        FitConfig(R=1.0, tol=0.0)
    with pytest.raises(InputError):
        FitConfig(R=1.0, step="newton")


def test_rank_cap_larger_than_n():
    with pytest.raises(InputError):
        fit(np.zeros((3, 3)), None, "bernoulli", FitConfig(R=1.0, s=4))


@pytest.mark.parametrize("seed", range(3))
def test_baseline_matches_irls(seed):
    A, X = _bernoulli_instance(seed, n=25)
    result = fit(A, X, "bernoulli", FitConfig(R=0.0, tol=1e-14, max_iter=20000))
    assert np.all(result.theta == 0)
    np.testing.assert_allclose(result.beta, oracles.irls(A, X, "bernoulli"), atol=1e-4)


def test_baseline_poisson_matches_irls(rng):
    n = 20
    X = [rng.standard_normal((n, n)) * 0.3 for _ in range(2)]
    A = rng.poisson(np.exp(0.5 + 0.4 * X[0] - 0.2 * X[1])).astype(float)
    # intercept as an explicit all-ones covariate
    X.append(np.ones((n, n)))
    result = fit_glm_baseline(A, X, "poisson", tol=1e-15, max_iter=20000)
    np.testing.assert_allclose(result.beta, oracles.irls(A, X, "poisson"), atol=1e-4)


def test_baseline_without_covariates():
    A = np.eye(4)
    result = fit_glm_baseline(A, None, "bernoulli")
    assert result.beta.shape == (0,)
    np.testing.assert_array_equal(result.mean, np.full((4, 4), 0.5))


def test_baseline_separable_does_not_converge():
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    X = [2 * A - 1]
    result = fit_glm_baseline(A, X, "bernoulli", max_iter=50)
    assert not result.converged
    assert result.iterations == 50
    assert result.beta[0] > 1.0
    assert np.all(np.diff(result.objective_trace) > 0)


@pytest.mark.parametrize("seed", range(5))
def test_auto_step_is_monotone(seed):
    A, X = _bernoulli_instance(seed, n=30)
    result = fit(A, X, "bernoulli", FitConfig(R=40.0, s=3, max_iter=200, tol=1e-12))
    assert np.all(np.diff(result.objective_trace) >= -1e-10)


def test_feasibility(rng):
    A, X = _bernoulli_instance(1, n=30)
    for s in (None, 2):
        result = fit(A, X, "bernoulli", FitConfig(R=15.0, s=s, max_iter=100))
        assert result.nuclear_norm() <= 15.0 + 1e-6
        if s is not None:
            assert result.rank() <= s


def test_symmetric_inputs_give_symmetric_theta():
    A, X = _bernoulli_instance(3, n=25, symmetric=True)
    result = fit(A, X, "bernoulli", FitConfig(R=30.0, max_iter=300))
    np.testing.assert_allclose(result.theta, result.theta.T, atol=1e-10)
    result = fit(A, X, "bernoulli", FitConfig(R=30.0, s=4, max_iter=300))
    np.testing.assert_allclose(result.theta, result.theta.T, atol=1e-10)


def test_deterministic():
    A, X = _bernoulli_instance(4, n=20)
    cfg = FitConfig(R=20.0, s=2, max_iter=50)
    a, b = fit(A, X, "bernoulli", cfg), fit(A, X, "bernoulli", cfg)
    assert a.theta.tobytes() == b.theta.tobytes()
    assert a.objective_trace.tobytes() == b.objective_trace.tobytes()


@pytest.mark.parametrize("step, gamma", [("fixed", 0.05), ("auto", None)])
def test_warm_start_continues_trace(step, gamma):
    A, X = _bernoulli_instance(5, n=20)
    base = FitConfig(R=20.0, s=3, step=step, gamma=gamma, tol=1e-300)
    full = fit(A, X, "bernoulli", base.replace(max_iter=30))
    first = fit(A, X, "bernoulli", base.replace(max_iter=12))
    second = fit(A, X, "bernoulli", base.replace(max_iter=18, init=first.params))
    np.testing.assert_allclose(np.r_[first.objective_trace, second.objective_trace], full.objective_trace, rtol=1e-13)
    np.testing.assert_allclose(second.theta, full.theta, atol=1e-12)


def test_covariate_permutation():
    A, X = _bernoulli_instance(6, n=20, m=3)
    cfg = FitConfig(R=20.0, s=2, max_iter=200)
    a = fit(A, X, "bernoulli", cfg)
    perm = [2, 0, 1]
    b = fit(A, [X[k] for k in perm], "bernoulli", cfg)
    np.testing.assert_allclose(b.beta, a.beta[perm], atol=1e-10)
    np.testing.assert_allclose(b.theta, a.theta, atol=1e-10)
    np.testing.assert_allclose(b.mean, a.mean, atol=1e-10)


def test_poisson_backtracking_ascends(rng):
    design = SimDesign(n=40, r=2, alpha=0.5, c=0.5, family="poisson", seed=2)
    _, X, P = generate_truth(design)
    A = sample_network(P, "poisson", 3)
    result = fit(A, X, "poisson", FitConfig(R=80.0, s=2))
    assert result.converged
    assert np.all(np.diff(result.objective_trace) >= 0)
    assert result.nuclear_norm() <= 80.0 + 1e-6


def test_poisson_clamp_events_counted():
    A = np.full((3, 3), 2.0)
    theta = np.full((3, 3), 40.0)
    cfg = FitConfig(R=1000.0, step="backtracking", max_iter=3, init=ModelParams(theta))
    result = fit(A, None, "poisson", cfg)
    assert result.clamp_events > 0


def test_fixed_step_divergence_raises():
    # curvature of the Poisson cumulant at log 2 is 2, so a step of 1.1 makes
    # the iterates overshoot with growing amplitude and the objective falls every time
    A = np.full((6, 6), 2.0)
    init = ModelParams(np.full((6, 6), np.log(2.0) + 0.01))
    cfg = FitConfig(R=100.0, step="fixed", gamma=1.1, max_iter=200, init=init)
    with pytest.raises(DivergenceError) as info:
        fit(A, None, "poisson", cfg)
    assert len(info.value.trace) == 10
    assert np.all(np.diff(info.value.trace) < 0)


def test_fixed_step_oscillation_is_not_divergence():
    A, X = _bernoulli_instance(7, n=15)
    result = fit(A, X, "bernoulli", FitConfig(R=0.0, step="fixed", gamma=50.0, max_iter=40))
    assert not result.converged


def test_masked_entries_ignored():
    A, X = _bernoulli_instance(8, n=15)
    mask = ~np.eye(15, dtype=bool)
    A2 = A.copy()
    np.fill_diagonal(A2, 1.0 - np.diag(A))
    cfg = FitConfig(R=10.0, s=2, max_iter=100)
    a = fit(AdjacencyMatrix(A, mask), X, "bernoulli", cfg)
    b = fit(AdjacencyMatrix(A2, mask), X, "bernoulli", cfg)
    np.testing.assert_array_equal(a.theta, b.theta)


def test_recovers_rank_two_truth():
    design = SimDesign(n=100, r=2, alpha=-1.0, c=0.5, family="bernoulli", seed=11)
    params, X, P = generate_truth(design)
    A = sample_network(P, "bernoulli", 12)
    result = fit(A, X, "bernoulli", FitConfig(R=250.0, s=3))
    test = sample_network(P, "bernoulli", 13)
    auc_fit = predictive_auc(test, result.mean)
    auc_oracle = predictive_auc(test, P)
    assert auc_oracle - auc_fit < 0.05
    assert matrix_rank(result.theta) <= 3


def test_result_accessors():
    A, X = _bernoulli_instance(9, n=10)
    result = fit(A, X, "bernoulli", FitConfig(R=5.0, max_iter=20))
    assert result.objective == result.objective_trace[-1]
    assert result.iterations == len(result.objective_trace)
    assert nuclear_norm(result.theta) == pytest.approx(result.nuclear_norm())
