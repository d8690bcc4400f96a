"""Base abstraction for sub-psi families. A family bounds the cumulant generating
function of every distribution with mean mu by psi_mu(lambda) and gives access to
the convex conjugate psi*_mu, whose Bregman divergence drives every statistic in
the toolkit.

All methods are numpy-vectorised over their arguments
"""
import abc
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from sglr_toolkit.app.exceptions import DomainError
from sglr_toolkit.app.utils import log


class FamilyKind(str, Enum):
    """Structural class of a family
    """

    ADDITIVE = "additive"
    EF_LIKE = "ef_like"
    CUSTOM = "custom"


class Side(str, Enum):
    """Side of mu0 on which a divergence equation is solved
    """

    UPPER = "upper"
    LOWER = "lower"

    @property
    def opposite(self) -> "Side":
        """Returns the other side
        """

        return Side.LOWER if self is Side.UPPER else Side.UPPER


@dataclass(frozen=True)
class PsiFamily(abc.ABC):
    """A sub-psi_M family of distributions. Subclasses supply psi, its
    derivative, the conjugate and its derivative, and the variance bound
    """

    @property
    @abc.abstractmethod
    def mean_domain(self) -> Tuple[float, float]:
        """Open interval M of admissible means
        """

    @property
    @abc.abstractmethod
    def lambda_domain(self) -> Tuple[float, float]:
        """Interval of natural parameters on which psi is finite
        """

    @property
    @abc.abstractmethod
    def kind(self) -> FamilyKind:
        """Structural class of the family
        """

    @abc.abstractmethod
    def psi(self, lam, mu):
        """CGF bound psi_mu(lambda)
        """

    @abc.abstractmethod
    def psi_grad(self, lam, mu):
        """Derivative of psi_mu in lambda
        """

    @abc.abstractmethod
    def psi_star(self, z, mu):
        """Convex conjugate psi*_mu(z)
        """

    @abc.abstractmethod
    def psi_star_grad(self, z, mu):
        """Derivative of psi*_mu in z
        """

    @abc.abstractmethod
    def variance_bound(self, mu):
        """Upper bound on the variance of distributions with mean mu
        """

    @property
    def name(self) -> str:
        """Short name used in logs and result files
        """

        return type(self).__name__.lower()

    @property
    def support(self) -> Tuple[float, float]:
        """Closure of the set observations may take. Defaults to the closure of M
        """

        return self.mean_domain

    @property
    def interval_cs(self) -> bool:
        """Whether the membership sets of the confidence sequences built on this
        family are intervals, so lower endpoints can be found by binary search
        """

        return self.kind is FamilyKind.ADDITIVE

    def divergence(self, z, mu0):
        """Bregman divergence D(z, mu0) of psi*_mu0, which equals psi*_mu0(z)
        """

        return self.psi_star(z, mu0)

    def divergence_grad(self, z, mu0):
        """Derivative of z -> D(z, mu0)
        """

        return self.psi_star_grad(z, mu0)

    def divergence_inverse(self, mu0, d, side: Side) -> Optional[np.ndarray]:
        """Closed-form solution z of D(z, mu0) = d on the given side, or None when
        the family has none and the caller has to fall back to bisection
        """

        # pylint: disable=unused-argument
        return None

    def sup_divergence(self, mu0, side: Side = Side.UPPER):
        """Limit of D(z, mu0) as z approaches the endpoint of M on the given side.
        Finite endpoints are evaluated directly, infinite ones by walking z outwards
        until the divergence stops growing
        """

        lower, upper = self.mean_domain
        mu0 = np.asarray(mu0, dtype=float)
        endpoint = upper if side is Side.UPPER else lower
        if np.isfinite(endpoint):
            return self.divergence(np.full_like(mu0, endpoint), mu0)

        direction = 1.0 if side is Side.UPPER else -1.0
        previous = np.zeros_like(mu0)
        for power in range(64):
            current = self.divergence(mu0 + direction * 2.0 ** power, mu0)
            if np.all(current > 1e12):
                return np.full_like(mu0, np.inf)
            if np.all(np.abs(current - previous) <= 1e-12 * np.maximum(1.0, current)):
                return current
            previous = current
        log.debug(f"divergence limit for {self.name} did not settle, using last value")
        return previous

    def check_mean(self, mu, label: str = "mu"):
        """Raises DomainError if any value of mu is outside the open mean domain
        """

        lower, upper = self.mean_domain
        mu = np.asarray(mu, dtype=float)
        if np.any(~(mu > lower) | ~(mu < upper)):
            log.error(f"{label}={mu} outside mean domain ({lower}, {upper}) of {self.name}")
            raise DomainError(f"{label}={mu} outside mean domain ({lower}, {upper}) of {self.name}")

    def check_closure(self, z, label: str = "z"):
        """Raises DomainError if any value of z is outside the closure of M
        """

        lower, upper = self.mean_domain
        z = np.asarray(z, dtype=float)
        if np.any(~(z >= lower) | ~(z <= upper)):
            log.error(f"{label}={z} outside closure of ({lower}, {upper}) for {self.name}")
            raise DomainError(f"{label}={z} outside closure of ({lower}, {upper}) for {self.name}")

    def contains_observation(self, x) -> bool:
        """Whether x lies in the support closure
        """

        lower, upper = self.support
        return bool(lower <= x <= upper)
