"""Built-in sub-psi families
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit, lambertw, logit, xlogy

from sglr_toolkit.app.exceptions import DomainError
from sglr_toolkit.app.families.base import FamilyKind, PsiFamily, Side


@dataclass(frozen=True)
class SubGaussian(PsiFamily):
    """Additive family with psi(lambda) = sigma^2 lambda^2 / 2
    """

    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def mean_domain(self) -> Tuple[float, float]:
        return (-np.inf, np.inf)

    @property
    def lambda_domain(self) -> Tuple[float, float]:
        return (-np.inf, np.inf)

    @property
    def kind(self) -> FamilyKind:
        return FamilyKind.ADDITIVE

    def psi(self, lam, mu):
        lam = np.asarray(lam, dtype=float)
        return lam * mu + 0.5 * self.sigma ** 2 * lam ** 2

    def psi_grad(self, lam, mu):
        return mu + self.sigma ** 2 * np.asarray(lam, dtype=float)

    def psi_star(self, z, mu):
        return (np.asarray(z, dtype=float) - mu) ** 2 / (2 * self.sigma ** 2)

    def psi_star_grad(self, z, mu):
        return (np.asarray(z, dtype=float) - mu) / self.sigma ** 2

    def variance_bound(self, mu):
        return np.full_like(np.asarray(mu, dtype=float), self.sigma ** 2)

    def divergence_inverse(self, mu0, d, side: Side):
        radius = self.sigma * np.sqrt(2 * np.asarray(d, dtype=float))
        return mu0 + radius if side is Side.UPPER else mu0 - radius

    def sup_divergence(self, mu0, side: Side = Side.UPPER):
        return np.full_like(np.asarray(mu0, dtype=float), np.inf)


@dataclass(frozen=True)
class SubExponential(PsiFamily):
    """Additive family built on the centred exponential cumulant
    psi(lambda) = -log(1 - lambda b) - lambda b for lambda < 1/b, whose
    conjugate is psi*(u) = u/b - log(1 + u/b) for u > -b
    """

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    @property
    def mean_domain(self) -> Tuple[float, float]:
        return (-np.inf, np.inf)

    @property
    def lambda_domain(self) -> Tuple[float, float]:
        return (-np.inf, 1.0 / self.scale)

    @property
    def kind(self) -> FamilyKind:
        return FamilyKind.ADDITIVE

    def psi(self, lam, mu):
        lam = np.asarray(lam, dtype=float)
        b = self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            value = lam * mu - np.log1p(-lam * b) - lam * b
        return np.where(lam * b < 1, value, np.inf)

    def psi_grad(self, lam, mu):
        lam = np.asarray(lam, dtype=float)
        b = self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            value = mu + lam * b ** 2 / (1 - lam * b)
        return np.where(lam * b < 1, value, np.inf)

    def psi_star(self, z, mu):
        u = (np.asarray(z, dtype=float) - mu) / self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            value = u - np.log1p(u)
        return np.where(u > -1, value, np.inf)

    def psi_star_grad(self, z, mu):
        u = np.asarray(z, dtype=float) - mu
        b = self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            value = u / (b * (u + b))
        return np.where(u > -b, value, -np.inf)

    def variance_bound(self, mu):
        return np.full_like(np.asarray(mu, dtype=float), self.scale ** 2)

    def divergence_inverse(self, mu0, d, side: Side):
        # s - 1 - log(s) = d with s = 1 + u/b, solved by the two real Lambert W branches
        d = np.asarray(d, dtype=float)
        argument = -np.exp(-1.0 - d)
        branch = -1 if side is Side.UPPER else 0
        s = -np.real(lambertw(argument, k=branch))
        s = np.where(d == 0, 1.0, s)
        return mu0 + self.scale * (s - 1.0)

    def sup_divergence(self, mu0, side: Side = Side.UPPER):
        return np.full_like(np.asarray(mu0, dtype=float), np.inf)


@dataclass(frozen=True)
class Bernoulli(PsiFamily):
    """Bernoulli distributions, an exponential family so D is the Bernoulli KL
    """

    @property
    def mean_domain(self) -> Tuple[float, float]:
        return (0.0, 1.0)

    @property
    def lambda_domain(self) -> Tuple[float, float]:
        return (-np.inf, np.inf)

    @property
    def kind(self) -> FamilyKind:
        return FamilyKind.EF_LIKE

    @property
    def interval_cs(self) -> bool:
        return False

    def psi(self, lam, mu):
        lam = np.asarray(lam, dtype=float)
        mu = np.asarray(mu, dtype=float)
        return np.logaddexp(np.log1p(-mu), np.log(mu) + lam)

    def psi_grad(self, lam, mu):
        return expit(np.asarray(lam, dtype=float) + logit(mu))

    def psi_star(self, z, mu):
        z = np.asarray(z, dtype=float)
        mu = np.asarray(mu, dtype=float)
        return (xlogy(z, z) - xlogy(z, mu)
            + xlogy(1 - z, 1 - z) - xlogy(1 - z, 1 - mu))

    def psi_star_grad(self, z, mu):
        with np.errstate(divide="ignore"):
            return logit(np.asarray(z, dtype=float)) - logit(mu)

    def variance_bound(self, mu):
        mu = np.asarray(mu, dtype=float)
        return mu * (1 - mu)

    def sup_divergence(self, mu0, side: Side = Side.UPPER):
        mu0 = np.asarray(mu0, dtype=float)
        return -np.log(mu0) if side is Side.UPPER else -np.log1p(-mu0)


@dataclass(frozen=True)
class Poisson(PsiFamily):
    """Poisson distributions, psi_mu(lambda) = mu (e^lambda - 1)
    """

    @property
    def mean_domain(self) -> Tuple[float, float]:
        return (0.0, np.inf)

    @property
    def lambda_domain(self) -> Tuple[float, float]:
        return (-np.inf, np.inf)

    @property
    def kind(self) -> FamilyKind:
        return FamilyKind.EF_LIKE

    @property
    def interval_cs(self) -> bool:
        # gradient of the log-partition function is exp, which is convex
        return True

    def psi(self, lam, mu):
        return mu * np.expm1(np.asarray(lam, dtype=float))

    def psi_grad(self, lam, mu):
        return mu * np.exp(np.asarray(lam, dtype=float))

    def psi_star(self, z, mu):
        z = np.asarray(z, dtype=float)
        return xlogy(z, z) - xlogy(z, mu) - z + mu

    def psi_star_grad(self, z, mu):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(z, dtype=float)) - np.log(mu)

    def variance_bound(self, mu):
        return np.asarray(mu, dtype=float)

    def sup_divergence(self, mu0, side: Side = Side.UPPER):
        mu0 = np.asarray(mu0, dtype=float)
        return np.full_like(mu0, np.inf) if side is Side.UPPER else mu0
