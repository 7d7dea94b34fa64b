import doctest

import numpy as np
import pytest

import lowrank_glm
from lowrank_glm import evaluate, spectral
from lowrank_glm.experiment import (
    decaying_spectrum,
    default_grid,
    misspecification_study,
    run_study,
    spectrum_effects,
    spectrum_truth,
    summarize,
)


@pytest.mark.parametrize("module", [spectral, evaluate])
def test_docstring_examples(module):
    failures, _ = doctest.testmod(module)
    assert failures == 0


def test_decaying_spectrum():
    np.testing.assert_allclose(decaying_spectrum(7, 2.0), [20, 10, 2, 1, 0.2, 0.1, 0.05])


def test_spectrum_effects_singular_values():
    spectrum = [9.0, 4.0, 1.0]
    theta = spectrum_effects(20, spectrum, seed=1)
    sigma = np.linalg.svd(theta, compute_uv=False)
    np.testing.assert_allclose(sigma[:3], spectrum, atol=1e-10)
    assert np.all(sigma[3:] < 1e-10)
    # the leading direction is a negative constant
    assert theta.mean() == pytest.approx(-9.0 / 20, abs=1e-12)


def test_spectrum_effects_share_prefix():
    full = spectrum_effects(15, [6.0, 3.0, 1.0, 0.5], seed=2)
    head = spectrum_effects(15, [6.0, 3.0], seed=2)
    U, s, Vt = np.linalg.svd(full)
    np.testing.assert_allclose((U[:, :2] * s[:2]) @ Vt[:2], head, atol=1e-10)


def test_spectrum_truth_deterministic():
    a = spectrum_truth(12, [3.0, 1.0], 0.2, "bernoulli", 5)
    b = spectrum_truth(12, [3.0, 1.0], 0.2, "bernoulli", 5)
    assert a[2].tobytes() == b[2].tobytes()


def test_default_grid():
    grid = default_grid(100, alpha=-2.0)
    assert grid.budgets == (150.0, 300.0, 450.0)
    assert grid.ranks == (1, 2, 3)


def test_run_study_small():
    grid = lowrank_glm.TuningGrid(ranks=(2,), budgets=(40.0,))
    results = run_study(30, 2, -1.0, 0.3, "bernoulli", 2, seed=0, grid=grid, n_test=2)
    assert len(results) == 2
    assert results[0].seed != results[1].seed
    summary = summarize(results)
    assert 0 < summary["density"] < 1
    assert summary["auc_oracle"] > 0.5
    again = run_study(30, 2, -1.0, 0.3, "bernoulli", 2, seed=0, grid=grid, n_test=2)
    assert [r.to_dict() for r in again] == [r.to_dict() for r in results]


def test_misspecification_study_small():
    out = misspecification_study(30, -1.0, 0.2, "bernoulli", 1, n_test=1)
    assert set(out) == {"exact", "approximate"}
    assert len(out["exact"]) == len(out["approximate"]) == 1
    assert out["exact"][0].best_s == 2
