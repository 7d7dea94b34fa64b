"""Projected gradient ascent for the nuclear-norm constrained MLE.

Each iteration takes a plain gradient step in ``beta`` (unconstrained), then
a gradient step in ``Theta`` evaluated at the fresh ``beta``, then projects
``Theta`` back onto ``{||Theta||_* <= R}`` or, when a rank cap ``s`` is set,
onto ``{||Theta||_* <= R, rank(Theta) <= s}``.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .errors import DivergenceError, InputError, NumericalError
from .families import get_family
from .glm import (
    ModelParams,
    _check_dims,
    _eta,
    _loglik,
    _residual,
    as_adjacency,
    as_covariates,
)
from .spectral import matrix_rank, nuclear_norm, project_nuclear, project_nuclear_rank

logger = logging.getLogger(__name__)

STEP_POLICIES = ("auto", "fixed", "backtracking")
#: objective drop treated as a failed iteration by the divergence check
DIVERGENCE_DROP = 1e-6
DIVERGENCE_PATIENCE = 10


@dataclass(frozen=True)
class FitConfig:
    """Solver settings.

    Parameters
    ----------
    R : float
        Nuclear-norm budget for ``Theta``. ``R = 0`` gives the plain GLM.
    s : int, optional
        Rank cap. Without it the pure nuclear-norm problem is solved.
    step : {"auto", "fixed", "backtracking"}, optional
        ``auto`` uses ``1/K`` with ``K`` the current Lipschitz bound; the
        ``beta`` block additionally divides by the largest eigenvalue of the
        covariate Gram matrix. ``fixed`` uses ``gamma`` for both blocks.
        ``backtracking`` starts from the ``auto`` steps, halves them until the
        objective does not decrease and grows them by ``growth`` after each
        accepted iteration. Default: ``auto`` for Bernoulli, ``backtracking``
        for Poisson.
    gamma : float, optional
        Step size for ``step="fixed"``.
    max_iter : int
    tol : float
        Stop once ``|l_t - l_{t-1}| / (1 + |l_{t-1}|) < tol``.
    init : ModelParams, optional
        Warm start; zeros otherwise.
    """

    R: float
    s: int | None = None
    step: str | None = None
    gamma: float | None = None
    max_iter: int = 500
    tol: float = 1e-6
    init: ModelParams | None = None
    shrink: float = 0.5
    growth: float = 1.1
    max_backtracks: int = 30

    def __post_init__(self):
        if not np.isfinite(self.R) or self.R < 0:
            raise InputError(f"R must be a finite non-negative number, got {self.R}")
        if self.s is not None and int(self.s) < 1:
            raise InputError(f"rank cap s must be >= 1, got {self.s}")
        if self.step is not None and self.step not in STEP_POLICIES:
            raise InputError(f"step must be one of {STEP_POLICIES}, got {self.step!r}")
        if self.step == "fixed" and (self.gamma is None or not self.gamma > 0):
            raise InputError("step='fixed' requires gamma > 0")
        if self.gamma is not None and not self.gamma > 0:
            raise InputError(f"gamma must be positive, got {self.gamma}")
        if int(self.max_iter) < 1:
            raise InputError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if not 0 < self.shrink < 1 or not self.growth >= 1:
            raise InputError("backtracking needs 0 < shrink < 1 and growth >= 1")

    def step_policy(self, family):
        if self.step is not None:
            return self.step
        return "auto" if get_family(family).name == "bernoulli" else "backtracking"

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class FitResult:
    params: ModelParams
    mean: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    clamp_events: int = 0
    config: FitConfig | None = field(default=None, repr=False)

    @property
    def theta(self):
        return self.params.theta

    @property
    def beta(self):
        return self.params.beta

    @property
    def objective(self):
        return float(self.objective_trace[-1]) if len(self.objective_trace) else float("nan")

    def rank(self, rtol=1e-8):
        return matrix_rank(self.params.theta, rtol)

    def nuclear_norm(self):
        return nuclear_norm(self.params.theta)


def _project(M, R, s):
    if R == 0:
        return np.zeros_like(M)
    if s is None:
        return project_nuclear(M, R)
    return project_nuclear_rank(M, R, s)


def fit(A, X, family, config):
    """Fit the low-rank effects GLM by projected gradient ascent.

    Parameters
    ----------
    A : AdjacencyMatrix or array_like
    X : CovariateTensor, sequence of (n, n) arrays, or None
    family : Family or str
    config : FitConfig

    Returns
    -------
    FitResult

    Raises
    ------
    DivergenceError
        When the objective drops by more than ``1e-6`` on 10 consecutive
        iterations that could not be rescued by backtracking.
    NumericalError
        When the objective becomes non-finite.
    """
    family = get_family(family)
    A = as_adjacency(A)
    X = as_covariates(X, A.n)
    A.validate(family)
    n, m = A.n, X.m
    s = None if config.s is None else int(config.s)
    if s is not None and s > n:
        raise InputError(f"rank cap s={s} exceeds n={n}")

    init = config.init if config.init is not None else ModelParams.zeros(n, m)
    _check_dims(init, X, A)
    theta = np.array(init.theta)
    beta = np.array(init.beta)

    policy = config.step_policy(family)
    values, mask = A.values, A.mask
    gram_max = float(np.linalg.eigvalsh(X.gram(mask))[-1]) if m else 0.0

    def step_sizes(theta, beta):
        if policy == "fixed":
            return config.gamma, config.gamma
        K = family.lipschitz(
            float(np.max(np.abs(theta))),
            float(np.max(X.contract(beta))) if m else 0.0,
        )
        if not np.isfinite(K):
            raise NumericalError("Lipschitz bound overflowed", trace=np.array(trace))
        return 1.0 / K, (1.0 / (K * gram_max) if gram_max > 0 else 0.0)

    clamp_events = 0

    def iterate(theta, beta, eta, g_theta, g_beta):
        nonlocal clamp_events
        clamp_events += family.n_clamped(eta)
        resid = _residual(values, mask, eta, family)
        beta_new = beta.copy()
        for k in range(m):
            beta_new[k] += g_beta * np.sum(X.matrices[k] * resid)
        eta_half = _eta(theta, beta_new, X)
        clamp_events += family.n_clamped(eta_half)
        grad = _residual(values, mask, eta_half, family)
        theta_new = _project(theta + g_theta * grad, config.R, s)
        eta_new = _eta(theta_new, beta_new, X)
        ll = _loglik(values, mask, eta_new, family)
        if not np.isfinite(ll):
            raise NumericalError("objective is not finite")
        return theta_new, beta_new, eta_new, ll

    trace = []
    eta = _eta(theta, beta, X)
    ll_prev = _loglik(values, mask, eta, family)
    if not np.isfinite(ll_prev):
        raise NumericalError("objective at the initial point is not finite", trace=np.array(trace))

    scale = 1.0
    bad_streak = 0
    converged = False
    for t in range(int(config.max_iter)):
        g_theta, g_beta = step_sizes(theta, beta)
        exhausted = policy != "backtracking"
        for attempt in range(config.max_backtracks + 1):
            try:
                new = iterate(theta, beta, eta, scale * g_theta, scale * g_beta)
            except NumericalError:
                if policy != "backtracking" or attempt == config.max_backtracks:
                    raise NumericalError("objective is not finite", trace=np.array(trace)) from None
                scale *= config.shrink
                continue
            if policy != "backtracking" or new[3] >= ll_prev:
                break
            if attempt == config.max_backtracks:
                exhausted = True
                break
            scale *= config.shrink
        theta, beta, eta, ll = new
        trace.append(ll)

        if ll < ll_prev - DIVERGENCE_DROP and exhausted:
            bad_streak += 1
            if bad_streak >= DIVERGENCE_PATIENCE:
                raise DivergenceError(
                    f"objective decreased on {bad_streak} consecutive iterations", trace=np.array(trace)
                )
        else:
            bad_streak = 0
        if policy == "backtracking" and not exhausted:
            scale *= config.growth

        if abs(ll - ll_prev) / (1.0 + abs(ll_prev)) < config.tol:
            converged = True
            ll_prev = ll
            break
        ll_prev = ll

    logger.debug("fit finished after %d iterations, converged=%s", len(trace), converged)
    params = ModelParams(theta, beta)
    return FitResult(
        params=params,
        mean=family.mean(eta),
        objective_trace=np.array(trace),
        iterations=len(trace),
        converged=converged,
        clamp_events=clamp_events,
        config=config,
    )


def fit_glm_baseline(A, X, family, config=None, **overrides):
    """Classical GLM: :func:`fit` with ``R = 0`` and no rank cap, so ``Theta = 0``."""
    if config is None:
        config = FitConfig(R=0.0, **overrides)
    else:
        config = config.replace(R=0.0, s=None, **overrides)
    return fit(A, X, family, config)
