"""Replication harness for simulation studies.

One replication draws a truth and a training network, tunes ``(s, R)`` by
subsampling validation, refits on the full network, fits the ``R = 0`` GLM
baseline, and scores every fit on freshly sampled test networks from the
same truth. The "oracle" AUC scores the true mean matrix on those same test
networks.
"""

from dataclasses import asdict, dataclass
import logging

import numpy as np

from .evaluate import TuningGrid, grid_search, predictive_auc, rmse
from .families import get_family
from .fit import fit_glm_baseline
from .glm import CovariateTensor, ModelParams
from .simulate import (
    SimDesign,
    _rng,
    _seq,
    generate_truth,
    orthonormal_covariate,
    replication_seeds,
    sample_network,
)

logger = logging.getLogger(__name__)

#: singular values of the approximately low-rank effects, before scaling
DECAYING_SPECTRUM = (10.0, 5.0, 1.0, 0.5, 0.1)


@dataclass(frozen=True)
class ReplicationResult:
    seed: int
    n: int
    density: float
    best_s: int | None
    best_R: float
    auc_lowrank: float
    auc_glm: float
    auc_oracle: float
    rmse_lowrank: float
    rmse_glm: float

    def to_dict(self):
        return asdict(self)


def default_grid(n, alpha=-2.0, ranks=(1, 2, 3)):
    """Budgets scaled to the nuclear norm of ``Z Z^T + alpha 11^T`` (about ``n (1 + |alpha|)``)."""
    scale = n * (1.0 + abs(alpha))
    return TuningGrid(ranks=ranks, budgets=(0.5 * scale, 1.0 * scale, 1.5 * scale))


def _derive(seed, tag):
    return int(np.random.SeedSequence([int(seed), tag]).generate_state(1, np.uint64)[0])


def evaluate_truth(params, X, P, family, grid, seed, base_config=None, n_test=10, workers=1):
    """Run one replication for a given truth; see the module docstring."""
    family = get_family(family)
    train_seq, search_seq, test_seq = _seq(seed).spawn(3)
    A = sample_network(P, family, train_seq)
    search = grid_search(
        A, X, family, grid, base_config=base_config,
        seed=int(search_seq.generate_state(1, np.uint64)[0]), workers=workers,
    )
    base = fit_glm_baseline(A, X, family, base_config)
    tests = [sample_network(P, family, child) for child in test_seq.spawn(n_test)]

    def mean_auc(scores):
        return float(np.mean([predictive_auc(T, scores) for T in tests]))

    return ReplicationResult(
        seed=int(seed),
        n=A.n,
        density=float(np.mean(A.values > 0)),
        best_s=search.best[0],
        best_R=search.best[1],
        auc_lowrank=mean_auc(search.final.mean),
        auc_glm=mean_auc(base.mean),
        auc_oracle=mean_auc(P),
        rmse_lowrank=rmse(search.final.mean, P),
        rmse_glm=rmse(base.mean, P),
    )


def run_replication(design, grid, base_config=None, n_test=10, workers=1):
    """One replication of the standard design; the truth is drawn from ``design.seed``."""
    params, X, P = generate_truth(design)
    return evaluate_truth(params, X, P, design.family, grid, _derive(design.seed, 1), base_config, n_test, workers)


def run_study(n, r, alpha, c, family, replications, seed=0, grid=None, base_config=None, n_test=10, workers=1):
    """``replications`` independent replications of one design."""
    grid = grid if grid is not None else default_grid(n, alpha)
    results = []
    for rep_seed in replication_seeds(seed, replications):
        design = SimDesign(n=n, r=r, alpha=alpha, c=c, family=str(family), seed=rep_seed)
        results.append(run_replication(design, grid, base_config, n_test, workers))
        logger.info("replication done: %s", results[-1])
    return results


def _orthonormal_complement(n, k, rng):
    """``k`` orthonormal columns orthogonal to the all-ones vector."""
    G = rng.standard_normal((k, n)).T
    G = G - G.mean(axis=0)
    Q, _ = np.linalg.qr(G)
    return Q


def spectrum_effects(n, spectrum, seed):
    """Effects matrix whose singular values are exactly ``spectrum``.

    The leading direction is the constant one with a negative sign, so the
    first singular value acts as an intercept ``-spectrum[0] / n``; the
    remaining directions are random and orthogonal to the constant vector.
    Spectra that share a prefix and a seed share the corresponding directions.
    """
    spectrum = np.asarray(spectrum, dtype=float)
    k = spectrum.size
    u_seq, v_seq = _seq(seed).spawn(2)
    ones = np.ones((n, 1)) / np.sqrt(n)
    U = np.hstack([ones, _orthonormal_complement(n, k - 1, _rng(u_seq))])
    V = np.hstack([-ones, _orthonormal_complement(n, k - 1, _rng(v_seq))])
    return (U * spectrum) @ V.T


def decaying_spectrum(n, scale, ratio=0.5):
    """``scale * (10, 5, 1, 0.5, 0.1, 0.05, 0.025, ...)`` of length ``n``."""
    head = list(DECAYING_SPECTRUM)
    while len(head) < n:
        head.append(head[-1] * ratio)
    return scale * np.array(head[:n])


def spectrum_truth(n, spectrum, c, family, seed):
    """Truth with prescribed effect spectrum and the standard two orthonormal covariates."""
    theta_seq, x1_seq, x2_seq = _seq(seed).spawn(3)
    theta = spectrum_effects(n, spectrum, theta_seq)
    X = CovariateTensor([orthonormal_covariate(n, x1_seq), orthonormal_covariate(n, x2_seq)])
    params = ModelParams(theta, np.array([c, -c]))
    P = get_family(family).mean(theta + X.contract(params.beta))
    return params, X, P


def misspecification_study(n, alpha, c, family, replications, s=2, seed=0, budgets=None, n_test=2):
    """RMSE of rank-``s`` fits on exactly rank-2 versus slowly decaying effect spectra.

    Both truths share the leading two singular values (and hence roughly the
    density); the approximate one adds a geometric tail. Returns
    ``{"exact": [...], "approximate": [...]}`` lists of ReplicationResult.
    """
    scale = abs(alpha) * n / DECAYING_SPECTRUM[0]
    approx = decaying_spectrum(n, scale)
    exact = approx[:2]
    if budgets is None:
        norm = float(exact.sum())
        budgets = (0.75 * norm, 1.0 * norm, 1.25 * norm)
    grid = TuningGrid(ranks=(s,), budgets=budgets)
    out = {"exact": [], "approximate": []}
    for rep_seed in replication_seeds(seed, replications):
        for label, spectrum in (("exact", exact), ("approximate", approx)):
            params, X, P = spectrum_truth(n, spectrum, c, family, rep_seed)
            out[label].append(evaluate_truth(params, X, P, family, grid, _derive(rep_seed, 2), n_test=n_test))
    return out


def summarize(results):
    """Column means of a list of ReplicationResult."""
    keys = ("density", "auc_lowrank", "auc_glm", "auc_oracle", "rmse_lowrank", "rmse_glm")
    return {k: float(np.mean([getattr(r, k) for r in results])) for k in keys}
