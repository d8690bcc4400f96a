"""User-supplied and derived families
"""
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from sglr_toolkit.app.families.base import FamilyKind, PsiFamily, Side


@dataclass(frozen=True)
class CustomFamily(PsiFamily):
    """Family assembled from user callables. Every function must be supplied and
    vectorised; nothing is differentiated automatically and the psi bound itself
    is taken on trust
    """

    psi_fn: Callable
    psi_grad_fn: Callable
    psi_star_fn: Callable
    psi_star_grad_fn: Callable
    variance_bound_fn: Callable
    means: Tuple[float, float] = (-np.inf, np.inf)
    lambdas: Tuple[float, float] = (-np.inf, np.inf)
    family_kind: FamilyKind = FamilyKind.CUSTOM
    binary_search_ok: bool = False
    label: str = "custom"

    def __post_init__(self):
        for field_name in ("psi_fn", "psi_grad_fn", "psi_star_fn", "psi_star_grad_fn",
                "variance_bound_fn"):
            if not callable(getattr(self, field_name)):
                raise TypeError(f"{field_name} must be callable")

    @property
    def name(self) -> str:
        return self.label

    @property
    def mean_domain(self) -> Tuple[float, float]:
        return self.means

    @property
    def lambda_domain(self) -> Tuple[float, float]:
        return self.lambdas

    @property
    def kind(self) -> FamilyKind:
        return self.family_kind

    @property
    def interval_cs(self) -> bool:
        return self.binary_search_ok or self.family_kind is FamilyKind.ADDITIVE

    def psi(self, lam, mu):
        return self.psi_fn(lam, mu)

    def psi_grad(self, lam, mu):
        return self.psi_grad_fn(lam, mu)

    def psi_star(self, z, mu):
        return self.psi_star_fn(z, mu)

    def psi_star_grad(self, z, mu):
        return self.psi_star_grad_fn(z, mu)

    def variance_bound(self, mu):
        return self.variance_bound_fn(mu)


@dataclass(frozen=True)
class MirroredFamily(PsiFamily):
    """Family of -X when X belongs to base. Lower confidence bounds of the
    mirrored family are negated upper bounds of the base family
    """

    base: PsiFamily

    @property
    def name(self) -> str:
        return f"mirrored_{self.base.name}"

    @property
    def mean_domain(self) -> Tuple[float, float]:
        lower, upper = self.base.mean_domain
        return (-upper, -lower)

    @property
    def lambda_domain(self) -> Tuple[float, float]:
        lower, upper = self.base.lambda_domain
        return (-upper, -lower)

    @property
    def support(self) -> Tuple[float, float]:
        lower, upper = self.base.support
        return (-upper, -lower)

    @property
    def kind(self) -> FamilyKind:
        return self.base.kind

    def psi(self, lam, mu):
        return self.base.psi(-np.asarray(lam, dtype=float), -np.asarray(mu, dtype=float))

    def psi_grad(self, lam, mu):
        return -self.base.psi_grad(-np.asarray(lam, dtype=float), -np.asarray(mu, dtype=float))

    def psi_star(self, z, mu):
        return self.base.psi_star(-np.asarray(z, dtype=float), -np.asarray(mu, dtype=float))

    def psi_star_grad(self, z, mu):
        return -self.base.psi_star_grad(-np.asarray(z, dtype=float),
            -np.asarray(mu, dtype=float))

    def variance_bound(self, mu):
        return self.base.variance_bound(-np.asarray(mu, dtype=float))

    def divergence_inverse(self, mu0, d, side: Side):
        inverse = self.base.divergence_inverse(-np.asarray(mu0, dtype=float), d, side.opposite)
        return None if inverse is None else -inverse

    def sup_divergence(self, mu0, side: Side = Side.UPPER):
        return self.base.sup_divergence(-np.asarray(mu0, dtype=float), side.opposite)
