"""Bregman divergences of sub-psi families and the LR-like and GLR-like
statistics built from them. Every function accepts numpy arrays and broadcasts
"""
from typing import NamedTuple

import numpy as np

from sglr_toolkit.app.exceptions import DomainError, InvalidHypothesesError, NoSolutionError
from sglr_toolkit.app.families import FamilyKind, PsiFamily, Side, SubGaussian
from sglr_toolkit.app.utils import log
from sglr_toolkit.app.utils.numerics import bisect_root, expand_bracket


class LrLikeForms(NamedTuple):
    """The log LR-like statistic written three ways. divergence_form only equals
    the other two for families where divergence_difference_exact holds
    """

    lambda_form: np.ndarray
    tangent_form: np.ndarray
    divergence_form: np.ndarray


def _scalar_or_array(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def bregman(family: PsiFamily, z, mu0):
    """Bregman divergence D(z, mu0) of psi*_mu0, evaluated at closure endpoints
    through the family's analytic limits

    :param family: family the divergence belongs to
    :type family: PsiFamily
    :param z: point(s) in the closure of M
    :param mu0: reference mean(s) in M
    :return: nonnegative divergence, zero iff z == mu0
    """

    family.check_mean(mu0, "mu0")
    family.check_closure(z, "z")
    return _scalar_or_array(np.maximum(family.divergence(z, mu0), 0.0))


def divergence_tangent(family: PsiFamily, point, mu0):
    """Value and slope of z -> D(z, mu0) at point

    :return: tuple (D(point, mu0), d/dz D(point, mu0))
    """

    return family.divergence(point, mu0), family.divergence_grad(point, mu0)


def inv_bregman(family: PsiFamily, mu0, d, side: Side = Side.UPPER):
    """Solves D(z, mu0) = d for z on the chosen side of mu0

    :param family: family the divergence belongs to
    :type family: PsiFamily
    :param mu0: reference mean(s) in M
    :param d: target divergence(s), nonnegative
    :param side: Side.UPPER returns z > mu0, Side.LOWER returns z < mu0
    :type side: Side
    :return: solution(s) z
    """

    family.check_mean(mu0, "mu0")
    mu0, d = np.broadcast_arrays(np.asarray(mu0, dtype=float), np.asarray(d, dtype=float))
    if np.any(d < 0):
        raise DomainError(f"divergence target must be nonnegative, got {d}")

    limit = family.sup_divergence(mu0, side)
    if np.any((d > 0) & (d >= limit)):
        log.error(f"divergence target {d} not below limit {limit} for {family.name}")
        raise NoSolutionError(
            f"no {side.value} solution of D(z, {mu0}) = {d}, limit is {limit}"
        )

    closed_form = family.divergence_inverse(mu0, d, side)
    if closed_form is not None:
        return _scalar_or_array(np.where(d == 0, mu0, closed_form))

    def excess(z):
        return family.divergence(z, mu0) - d

    lower, upper = family.mean_domain
    if side is Side.UPPER:
        far = np.full_like(mu0, upper) if np.isfinite(upper) else expand_bracket(excess, mu0, 1.0)
    else:
        far = np.full_like(mu0, lower) if np.isfinite(lower) else expand_bracket(excess, mu0, -1.0)

    root = bisect_root(excess, mu0, far)
    return _scalar_or_array(np.where(d == 0, mu0, root))


def log_lr_like(family: PsiFamily, n, xbar, mu1, mu0):
    """Log LR-like statistic n [lambda1 xbar - psi_mu0(lambda1)] with
    lambda1 = grad psi*_mu0(mu1)

    :param n: sample count(s), >= 1
    :param xbar: sample mean(s) in the closure of M
    :param mu1: alternative mean in M
    :param mu0: null mean in M
    :return: real-valued statistic
    """

    family.check_mean(mu0, "mu0")
    family.check_mean(mu1, "mu1")
    lam1 = family.psi_star_grad(mu1, mu0)
    xbar = np.asarray(xbar, dtype=float)
    return _scalar_or_array(np.asarray(n, dtype=float) * (lam1 * xbar - family.psi(lam1, mu0)))


def divergence_difference_exact(family: PsiFamily) -> bool:
    """Whether n [D(xbar, mu0) - D(xbar, mu1)] is the log LR-like statistic, true
    for exponential families (Gaussian, Bernoulli, Poisson)
    """

    return family.kind is FamilyKind.EF_LIKE or isinstance(family, SubGaussian)


def lr_like_forms(family: PsiFamily, n, xbar, mu1, mu0) -> LrLikeForms:
    """Evaluates the log LR-like statistic in its natural parameter form, as the
    tangent line of D(., mu0) at mu1, and as the difference n [D(xbar, mu0) - D(xbar, mu1)]
    """

    n = np.asarray(n, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    lambda_form = np.asarray(log_lr_like(family, n, xbar, mu1, mu0))

    value, slope = divergence_tangent(family, mu1, mu0)
    tangent_form = n * (value + slope * (xbar - mu1))

    divergence_form = n * (family.divergence(xbar, mu0) - family.divergence(xbar, mu1))

    return LrLikeForms(lambda_form, tangent_form, divergence_form)


def glr_like_rate(family: PsiFamily, xbar, mu1, mu0):
    """Normalised log GLR-like statistic f(xbar; mu1, mu0): the divergence above
    mu1 and its tangent at mu1, clipped at zero, below. No domain checks, used on
    hot paths once the caller has validated its inputs
    """

    xbar = np.asarray(xbar, dtype=float)
    value, slope = divergence_tangent(family, mu1, mu0)
    tangent = np.maximum(value + slope * (xbar - mu1), 0.0)
    above = np.where(xbar > mu1, family.divergence(np.maximum(xbar, mu1), mu0), 0.0)
    return np.where(xbar > mu1, above, tangent)


def log_glr_like(family: PsiFamily, n, xbar, mu1, mu0):
    """Log GLR-like statistic n f(xbar; mu1, mu0) for H0: mu <= mu0 against
    H1: mu >= mu1

    :return: nonnegative statistic
    """

    family.check_mean(mu0, "mu0")
    family.check_mean(mu1, "mu1")
    if np.any(np.asarray(mu1) < np.asarray(mu0)):
        log.error(f"mu1={mu1} below mu0={mu0}")
        raise InvalidHypothesesError(f"mu1={mu1} must not be below mu0={mu0}")
    family.check_closure(xbar, "xbar")
    return _scalar_or_array(np.asarray(n, dtype=float) * glr_like_rate(family, xbar, mu1, mu0))


def dstar(family: PsiFamily, mu, mu0) -> float:
    """Balance-point divergence D*(mu, mu0): the common value of D(z, mu0) and
    D(z, mu) at the unique z in (mu0, mu) where they meet. Symmetric in its
    arguments, so the order of mu and mu0 doesn't matter
    """

    family.check_mean(mu, "mu")
    family.check_mean(mu0, "mu0")
    low, high = sorted((float(mu0), float(mu)))
    if low == high:
        return 0.0

    def balance(z):
        return family.divergence(z, low) - family.divergence(z, high)

    crossing = float(bisect_root(balance, low, high))
    return float(family.divergence(crossing, low))


def dstar_point(family: PsiFamily, mu, mu0) -> float:
    """Point between mu0 and mu where the two divergences balance. Like dstar,
    the arguments may come in either order
    """

    family.check_mean(mu, "mu")
    family.check_mean(mu0, "mu0")
    low, high = sorted((float(mu0), float(mu)))
    if low == high:
        return low
    return float(bisect_root(
        lambda z: family.divergence(z, low) - family.divergence(z, high), low, high
    ))
