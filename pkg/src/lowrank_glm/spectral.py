"""SVD and projections onto nuclear-norm balls.

``project_nuclear`` is the Euclidean projection onto ``{M : ||M||_* <= R}``:
shrink every singular value by the water-filling level ``c`` and clip at
zero. ``project_nuclear_rank`` keeps only the leading ``s`` singular triplets
and computes ``c`` from those ``s`` values, so the budget ``R`` applies to
the retained spectrum. (Computing ``c`` from the full spectrum and then
truncating is the other possible reading; it can only shrink more.)

When ``sigma_s == sigma_{s+1}`` the truncated projection is not unique. The
first ``s`` triplets in the order returned by the decomposition are kept.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, svds

from .errors import InputError, NumericalError

#: n above which a rank-capped projection switches to a truncated solver
TRUNCATED_MIN_N = 500
#: extra triplets computed by the truncated solver beyond the rank cap
TRUNCATED_OVERSAMPLE = 5
#: relative gap below which sigma_s and sigma_{s+1} count as tied
TIE_GAP = 1e-6
ARPACK_MAXITER = 5000


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


def svd(M):
    """Full SVD with singular values in non-increasing order.

    Falls back from the divide-and-conquer LAPACK driver to the QR-iteration
    driver when the former fails to converge.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise InputError("cannot decompose a matrix with non-finite entries")
    try:
        U, s, Vt = np.linalg.svd(M)
    except np.linalg.LinAlgError:
        try:
            U, s, Vt = scipy.linalg.svd(M, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed to converge with both gesdd and gesvd drivers: {exc}") from exc
    return SvdFactors(U, s, Vt.T)


def _truncated_svd(M, k):
    """Leading ``k`` singular triplets via ARPACK, or ``None`` if it fails."""
    v0 = np.random.default_rng(0).standard_normal(min(M.shape))
    try:
        U, s, Vt = svds(M, k=k, v0=v0, maxiter=ARPACK_MAXITER)
    except ArpackNoConvergence:
        return None
    order = np.argsort(s)[::-1]
    return SvdFactors(U[:, order], s[order], Vt[order].T)


def soft_threshold_level(sigma, R):
    """Smallest ``c >= 0`` with ``sum((sigma - c)_+) <= R``.

    Solved exactly on the piecewise-linear function: with ``k`` the number of
    singular values left positive, ``c = (sigma_1 + ... + sigma_k - R) / k``.

    Examples
    --------
    >>> soft_threshold_level([3.0, 2.0, 1.0], 3.0)
    1.0
    >>> soft_threshold_level([5.0], 2.0)
    3.0
    """
    sigma = np.asarray(sigma, dtype=float)
    if R < 0:
        raise InputError(f"nuclear-norm budget must be non-negative, got {R}")
    if sigma.size == 0:
        return 0.0
    if np.any(np.diff(sigma) > 0):
        raise InputError("singular values must be sorted in non-increasing order")
    if np.any(sigma < 0):
        raise InputError("singular values must be non-negative")
    if sigma.sum() <= R:
        return 0.0
    if R == 0:
        return float(sigma[0])
    k = np.arange(1, sigma.size + 1)
    csum = np.cumsum(sigma)
    # sigma_k > (csum_k - R) / k, rearranged so that k = 1 always qualifies
    active = np.nonzero(k * sigma - csum + R > 0)[0]
    last = active[-1]
    return float((csum[last] - R) / (last + 1))


def _numerical_rank(sigma, shape):
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    tol = max(shape) * np.finfo(float).eps * sigma[0]
    return int(np.count_nonzero(sigma > tol))


def project_nuclear(M, R):
    """Project ``M`` onto the nuclear-norm ball of radius ``R``.

    A matrix already inside the ball is returned unchanged (as a copy).
    """
    if R < 0:
        raise InputError(f"nuclear-norm budget must be non-negative, got {R}")
    M = np.asarray(M, dtype=float)
    f = svd(M)
    if f.sigma.sum() <= R:
        return M.copy()
    c = soft_threshold_level(f.sigma, R)
    return (f.U * np.maximum(f.sigma - c, 0.0)) @ f.V.T


def project_nuclear_rank(M, R, s):
    """Keep the top ``s`` singular triplets of ``M`` and soft-threshold them to total ``R``.

    The result has rank at most ``s`` and nuclear norm at most ``R``. For
    ``n > 500`` a truncated ARPACK solve of ``s + 5`` triplets is used; it
    reverts to the full SVD when the solve fails or ``sigma_s`` and
    ``sigma_{s+1}`` are within ``1e-6`` of each other.
    """
    M = np.asarray(M, dtype=float)
    n = min(M.shape)
    if R < 0:
        raise InputError(f"nuclear-norm budget must be non-negative, got {R}")
    if not 1 <= s <= n:
        raise InputError(f"rank cap must satisfy 1 <= s <= {n}, got {s}")

    f = None
    if n > TRUNCATED_MIN_N and s + TRUNCATED_OVERSAMPLE < n:
        f = _truncated_svd(M, s + TRUNCATED_OVERSAMPLE)
        if f is not None and f.sigma[s - 1] - f.sigma[s] < TIE_GAP * max(1.0, f.sigma[0]):
            f = None
    if f is None:
        f = svd(M)

    if _numerical_rank(f.sigma, M.shape) <= s and f.sigma[:s].sum() <= R:
        return M.copy()
    top = f.sigma[:s]
    c = soft_threshold_level(top, R)
    return (f.U[:, :s] * np.maximum(top - c, 0.0)) @ f.V[:, :s].T


def nuclear_norm(M):
    return float(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False).sum())


def matrix_rank(M, rtol=1e-8):
    """Count of singular values above ``rtol * sigma_1``."""
    sigma = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > rtol * sigma[0]))
