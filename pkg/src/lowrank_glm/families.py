"""Canonical exponential families used for edge values.

Only the two families with fully specified canonical forms are provided:
Bernoulli with the logit link (binary networks) and Poisson with the log
link (integer-weighted networks).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .errors import InputError

#: natural-parameter bound applied inside the Poisson mean to avoid overflow
POISSON_ETA_CLAMP = 30.0


@dataclass(frozen=True)
class Family:
    """Exponential family in canonical form ``c(a) exp(eta * a - b(eta))``.

    Attributes
    ----------
    name : str
        ``"bernoulli"`` or ``"poisson"``.
    clamp : float or None
        If set, ``|eta|`` is clipped to this value before evaluating the mean.
    """

    name: str
    clamp: float | None = None

    def cumulant(self, eta):
        """b(eta), the log-partition function."""
        if self.name == "bernoulli":
            return np.logaddexp(0.0, eta)
        return np.exp(eta)

    def mean(self, eta):
        """Inverse link L^{-1} = b'."""
        if self.name == "bernoulli":
            return expit(eta)
        return np.exp(np.clip(eta, -self.clamp, self.clamp))

    def variance(self, eta):
        """b''(eta); used by IRLS-style checks."""
        mu = self.mean(eta)
        if self.name == "bernoulli":
            return mu * (1.0 - mu)
        return mu

    def link(self, mu):
        if self.name == "bernoulli":
            return logit(mu)
        return np.log(mu)

    def n_clamped(self, eta):
        """Number of entries of ``eta`` the mean evaluation would clip."""
        if self.clamp is None:
            return 0
        return int(np.count_nonzero(np.abs(eta) > self.clamp))

    def lipschitz(self, theta_max, xbeta_max):
        """Lipschitz constant K of the log-likelihood gradient.

        ``theta_max`` is the largest absolute entry of the effects matrix and
        ``xbeta_max`` the largest entry of the covariate contraction.
        """
        if self.name == "bernoulli":
            return 1.0
        return float(np.exp(theta_max + xbeta_max))

    def validate(self, values):
        """Raise :class:`InputError` unless ``values`` lie in the family's support."""
        values = np.asarray(values)
        if not np.all(np.isfinite(values)):
            raise InputError("adjacency values must be finite")
        if self.name == "bernoulli":
            if not np.all((values == 0) | (values == 1)):
                raise InputError("bernoulli family requires entries in {0, 1}")
        else:
            if np.any(values < 0) or np.any(values != np.round(values)):
                raise InputError("poisson family requires non-negative integer entries")

    def __str__(self):
        return self.name


BERNOULLI = Family("bernoulli")
POISSON = Family("poisson", clamp=POISSON_ETA_CLAMP)

_FAMILIES = {
    "bernoulli": BERNOULLI,
    "logit": BERNOULLI,
    "binary": BERNOULLI,
    "poisson": POISSON,
    "log": POISSON,
}


def get_family(family):
    """Look up a family by name; :class:`Family` instances pass through."""
    if isinstance(family, Family):
        return family
    try:
        return _FAMILIES[str(family).lower()]
    except KeyError:
        raise InputError(f"unknown family {family!r}; expected 'bernoulli' or 'poisson'") from None
