"""Synthetic networks from ``L(P) = Z Z^T + alpha 11^T + beta_1 X_1 + beta_2 X_2``.

Random numbers come from numpy's PCG64 bit generator. Every seed is expanded
with :class:`numpy.random.SeedSequence`; independent pieces of a draw (the
latent positions, each covariate, each 64-row block of edges) get their own
spawned child stream, so results do not depend on evaluation order.
Gaussian variates use numpy's ziggurat sampler.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError
from .families import get_family
from .glm import AdjacencyMatrix, CovariateTensor, ModelParams

#: rows per independently seeded block in :func:`sample_network`
ROW_BLOCK = 64
RNG_NAME = "numpy.PCG64/SeedSequence.spawn"
GAUSSIAN_METHOD = "ziggurat (numpy Generator.standard_normal)"


def _seq(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(_seq(seed)))


@dataclass(frozen=True)
class SimDesign:
    """Parameters of the generative model.

    ``r`` is the rank of ``Z Z^T + alpha 11^T`` (Z has ``r - 1`` columns)
    and the covariate coefficients are ``beta = (c, -c)``.
    """

    n: int
    r: int = 2
    alpha: float = 0.0
    c: float = 0.0
    family: str = "bernoulli"
    seed: int = 0

    def __post_init__(self):
        if int(self.n) < 2:
            raise InputError(f"n must be >= 2, got {self.n}")
        if int(self.r) < 1:
            raise InputError(f"r must be >= 1, got {self.r}")
        if not (np.isfinite(self.alpha) and np.isfinite(self.c)):
            raise InputError("alpha and c must be finite")
        get_family(self.family)

    @property
    def beta(self):
        return np.array([self.c, -self.c])

    def to_dict(self):
        return asdict(self)


def orthonormal_covariate(n, seed):
    """``U V^T`` from the SVD of an n x n standard Gaussian matrix.

    All singular values of the result equal one.
    """
    if n < 2:
        raise InputError(f"n must be >= 2, got {n}")
    G = _rng(seed).standard_normal((n, n))
    U, _, Vt = np.linalg.svd(G)
    return U @ Vt


def generate_truth(design):
    """Draw ``(params, covariates, P)`` for a design.

    Returns
    -------
    params : ModelParams
        ``theta = Z Z^T + alpha 11^T`` and ``beta = (c, -c)``.
    X : CovariateTensor
        Two orthonormal covariate matrices.
    P : ndarray
        True edge-mean matrix.
    """
    n, r = int(design.n), int(design.r)
    z_seq, x1_seq, x2_seq = _seq(design.seed).spawn(3)
    Z = _rng(z_seq).standard_normal((n, r - 1))
    theta = Z @ Z.T + design.alpha * np.ones((n, n))
    X = CovariateTensor([orthonormal_covariate(n, x1_seq), orthonormal_covariate(n, x2_seq)])
    params = ModelParams(theta, design.beta)
    family = get_family(design.family)
    P = family.mean(theta + X.contract(params.beta))
    return params, X, P


def sample_network(P, family, seed):
    """Independent edge draws ``A_ij ~ F(P_ij)`` for every ordered pair.

    A symmetric ``P`` still produces a directed (asymmetric) ``A``.
    """
    family = get_family(family)
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InputError(f"P must be square, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise InputError("P has non-finite entries")
    if family.name == "bernoulli":
        if np.any((P < 0) | (P > 1)):
            raise InputError("bernoulli means must lie in [0, 1]")
    elif np.any(P < 0):
        raise InputError("poisson means must be non-negative")

    n = P.shape[0]
    A = np.empty_like(P)
    n_blocks = -(-n // ROW_BLOCK)
    for b, child in enumerate(_seq(seed).spawn(n_blocks)):
        rows = slice(b * ROW_BLOCK, min(n, (b + 1) * ROW_BLOCK))
        rng = _rng(child)
        if family.name == "bernoulli":
            A[rows] = rng.random(P[rows].shape) < P[rows]
        else:
            A[rows] = rng.poisson(P[rows])
    return AdjacencyMatrix(A)


def replication_seeds(seed, count):
    """Independent integer seeds for ``count`` replications of an experiment."""
    return [int(s.generate_state(1, np.uint64)[0]) for s in _seq(seed).spawn(count)]
