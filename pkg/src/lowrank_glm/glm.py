"""GLM machinery for networks with a pairwise effects matrix.

The model for an n x n adjacency matrix ``A`` is

    L(P) = Theta + sum_k beta_k X_k

with ``L`` the canonical link of an exponential family. The log-likelihood
drops the parameter-free term ``sum log c(A_ij)``, so objective values are
only comparable between fits of the same data.

Identifiability of ``(Theta, beta)`` separately needs the covariate
contraction to have rank above the rank of ``Theta`` for every non-zero
``beta`` and the vectorised ``X_k`` to be linearly independent. Neither is
checked here; the mean matrix is identifiable regardless.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError
from .families import get_family


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Observed n x n edge values with a mask of entries in the likelihood.

    Parameters
    ----------
    values : array_like, shape (n, n)
    mask : array_like of bool, shape (n, n), optional
        ``True`` where the entry participates in the likelihood. Defaults to
        all entries, diagonal included.
    """

    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InputError(f"adjacency matrix must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("adjacency matrix has non-finite entries")
        if self.mask is None:
            mask = np.ones(values.shape, dtype=bool)
        else:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != values.shape:
                raise InputError(f"mask shape {mask.shape} does not match adjacency shape {values.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def n(self):
        return self.values.shape[0]

    @classmethod
    def without_diagonal(cls, values):
        values = np.asarray(values, dtype=float)
        mask = ~np.eye(values.shape[0], dtype=bool)
        return cls(values, mask)

    def with_values(self, values):
        return AdjacencyMatrix(values, self.mask)

    def validate(self, family):
        get_family(family).validate(self.values[self.mask])


@dataclass(frozen=True)
class CovariateTensor:
    """m dense n x n edge-covariate matrices, stored as an (m, n, n) array."""

    matrices: np.ndarray

    def __post_init__(self):
        mats = list(self.matrices) if not isinstance(self.matrices, np.ndarray) else self.matrices
        arr = np.array(mats, dtype=float)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise InputError(f"covariates must be a stack of square matrices, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("covariate matrices have non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "matrices", arr)

    @classmethod
    def empty(cls, n):
        return cls(np.zeros((0, n, n)))

    @property
    def m(self):
        return self.matrices.shape[0]

    @property
    def n(self):
        return self.matrices.shape[1]

    def __len__(self):
        return self.m

    def __getitem__(self, k):
        return self.matrices[k]

    def contract(self, beta):
        """sum_k beta_k X_k, accumulated in order k = 1..m."""
        out = np.zeros((self.n, self.n))
        for k in range(self.m):
            out += beta[k] * self.matrices[k]
        return out

    def gram(self, mask=None):
        """Matrix of inner products <X_k, X_l> over unmasked entries."""
        flat = self.matrices.reshape(self.m, -1)
        if mask is not None:
            flat = flat[:, np.asarray(mask).ravel()]
        return flat @ flat.T


@dataclass(frozen=True)
class ModelParams:
    """Effects matrix ``theta`` (n x n) and coefficient vector ``beta`` (m,)."""

    theta: np.ndarray
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        theta = _readonly(self.theta)
        beta = _readonly(np.atleast_1d(np.asarray(self.beta, dtype=float)))
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise InputError(f"theta must be square, got shape {theta.shape}")
        if beta.ndim != 1:
            raise InputError(f"beta must be a vector, got shape {beta.shape}")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(beta))):
            raise InputError("parameters have non-finite entries")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def zeros(cls, n, m=0):
        return cls(np.zeros((n, n)), np.zeros(m))

    @property
    def n(self):
        return self.theta.shape[0]

    @property
    def m(self):
        return self.beta.shape[0]


def as_adjacency(A):
    if isinstance(A, AdjacencyMatrix):
        return A
    return AdjacencyMatrix(A)


def as_covariates(X, n):
    if X is None:
        return CovariateTensor.empty(n)
    if isinstance(X, CovariateTensor):
        return X
    X = list(X) if not isinstance(X, np.ndarray) else X
    if len(X) == 0:
        return CovariateTensor.empty(n)
    return CovariateTensor(X)


def _check_dims(params, X, A=None):
    if X.m and X.n != params.n:
        raise InputError(
            f"dimension mismatch on node axis: theta is {params.n}x{params.n} "
            f"but covariates are {X.n}x{X.n}"
        )
    if X.m != params.m:
        raise InputError(
            f"dimension mismatch on covariate axis: beta has length {params.m} "
            f"but {X.m} covariate matrices were given"
        )
    if A is not None and A.n != params.n:
        raise InputError(
            f"dimension mismatch on node axis: adjacency is {A.n}x{A.n} "
            f"but theta is {params.n}x{params.n}"
        )


def _eta(theta, beta, X):
    eta = np.array(theta, dtype=float, copy=True)
    for k in range(X.m):
        eta += beta[k] * X.matrices[k]
    return eta


def linear_predictor(params, X=None):
    """Return ``H = Theta + sum_k beta_k X_k``.

    Raises
    ------
    InputError
        If the node or covariate axes of ``params`` and ``X`` disagree.
    """
    X = as_covariates(X, params.n)
    _check_dims(params, X)
    return _eta(params.theta, params.beta, X)


def mean_matrix(params, X, family):
    """Entrywise inverse link of the linear predictor, the fitted mean P."""
    family = get_family(family)
    return family.mean(linear_predictor(params, X))


def _loglik(A_values, mask, eta, family):
    if not np.all(np.isfinite(eta[mask])):
        raise NumericalError("linear predictor has non-finite entries")
    # an overflowing cumulant gives -inf, which the caller reports as non-finite
    with np.errstate(over="ignore"):
        terms = eta * A_values - family.cumulant(eta)
    return float(np.sum(terms[mask]))


def log_likelihood(A, X, params, family):
    """Sum over unmasked entries of ``eta_ij A_ij - b(eta_ij)``.

    The constant ``sum log c(A_ij)`` is omitted.
    """
    family = get_family(family)
    A = as_adjacency(A)
    X = as_covariates(X, A.n)
    _check_dims(params, X, A)
    A.validate(family)
    eta = _eta(params.theta, params.beta, X)
    return _loglik(A.values, A.mask, eta, family)


def _residual(A_values, mask, eta, family):
    if not np.all(np.isfinite(eta)):
        raise NumericalError("linear predictor has non-finite entries")
    R = A_values - family.mean(eta)
    R[~mask] = 0.0
    return R


def grad_theta(A, X, params, family):
    """Gradient of :func:`log_likelihood` in Theta: ``A - P`` with masked entries zeroed."""
    family = get_family(family)
    A = as_adjacency(A)
    X = as_covariates(X, A.n)
    _check_dims(params, X, A)
    eta = _eta(params.theta, params.beta, X)
    return _residual(A.values, A.mask, eta, family)


def grad_beta(A, X, params, family):
    """Gradient in beta: component k is ``tr(X_k^T (A - P))`` over unmasked entries."""
    family = get_family(family)
    A = as_adjacency(A)
    X = as_covariates(X, A.n)
    _check_dims(params, X, A)
    eta = _eta(params.theta, params.beta, X)
    R = _residual(A.values, A.mask, eta, family)
    return np.array([np.sum(X.matrices[k] * R) for k in range(X.m)])


def lipschitz_bound(params, X, family):
    """Lipschitz constant K of the gradient: 1 for logit, ``exp(max|Theta| + max X*beta)`` for log."""
    family = get_family(family)
    X = as_covariates(X, params.n)
    _check_dims(params, X)
    theta_max = float(np.max(np.abs(params.theta))) if params.theta.size else 0.0
    xbeta_max = float(np.max(X.contract(params.beta))) if X.m else 0.0
    return family.lipschitz(theta_max, xbeta_max)
