"""Stopping rules for one-sided tests of H0: mu <= mu0 and the engine that
drives them one observation at a time.

A rule is an immutable descriptor exposing a log statistic and a threshold,
both vectorised over (n, xbar). The engine keeps the count and the running sum
of a single stream, so each update costs the same whatever n is. first_crossing
evaluates a rule on a whole block of paths at once and agrees with the engine
step by step
"""
import abc
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from sglr_toolkit.app.exceptions import (
    DomainError, InvalidHypothesesError, ObservationOutOfSupportError, UnsupportedFamilyError
)
from sglr_toolkit.app.families import Bernoulli, PsiFamily, Side, SubGaussian
from sglr_toolkit.app.schemas.boundary import Boundary, ConstantBoundary
from sglr_toolkit.app.schemas.cs import MixtureGrid
from sglr_toolkit.app.services.boundaries import (
    check_alpha, loglog_boundary, solve_g_alpha_constant
)
from sglr_toolkit.app.services.confidence_sequences import (
    glr_cs_log_statistic, mixture_grid, mixture_log_m0, mixture_log_statistic,
    solve_g_alpha_interval
)
from sglr_toolkit.app.services.divergences import glr_like_rate, inv_bregman
from sglr_toolkit.app.services.power_design import binomial_critical_value, z_quantile
from sglr_toolkit.app.utils import log
from sglr_toolkit.app.utils.numerics import K_CAP


class Decision(str, Enum):
    """Status of a sequential test. RUNNING moves to REJECTED once and stays there
    """

    RUNNING = "running"
    REJECTED = "rejected"


@dataclass(frozen=True)
class StoppingRule(abc.ABC):
    """Rejects H0 at the first n with log_statistic(n, xbar) >= threshold(n)
    """

    family: PsiFamily
    mu0: float

    @abc.abstractmethod
    def log_statistic(self, n, xbar):
        """Log statistic at sample size(s) n and sample mean(s) xbar
        """

    @abc.abstractmethod
    def threshold(self, n):
        """Rejection threshold at sample size(s) n
        """

    def rejects(self, n, xbar):
        """Elementwise rejection indicator
        """

        return np.asarray(self.log_statistic(n, xbar)) >= np.asarray(self.threshold(n))

    @property
    def name(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class SglrConstRule(StoppingRule):
    """SGLR-like test for separated hypotheses, n f(xbar; mu1, mu0) >= g
    """

    mu1: float
    g: float

    def __post_init__(self):
        self.family.check_mean(self.mu0, "mu0")
        self.family.check_mean(self.mu1, "mu1")
        if not self.mu1 > self.mu0:
            raise InvalidHypothesesError(f"mu1={self.mu1} must exceed mu0={self.mu0}")

    @classmethod
    def from_alpha(cls, family: PsiFamily, mu0: float, mu1: float, alpha: float) -> "SglrConstRule":
        """Builds the rule with g solved so the crossing bound equals alpha
        """

        d1 = float(family.divergence(mu1, mu0))
        g = solve_g_alpha_constant(d1, alpha)
        log.debug(f"sglr const rule mu0={mu0} mu1={mu1} alpha={alpha}: g={g}")
        return cls(family=family, mu0=mu0, mu1=mu1, g=g)

    def log_statistic(self, n, xbar):
        return np.asarray(n, dtype=float) * glr_like_rate(self.family, xbar, self.mu1, self.mu0)

    def threshold(self, n):
        return np.full_like(np.asarray(n, dtype=float), self.g)


@dataclass(frozen=True)
class SglrNoSepRule(StoppingRule):
    """SGLR-like test without separation: mean above mu0 and n D(xbar, mu0)
    at or above the log-log boundary
    """

    c: float
    alpha: float

    def __post_init__(self):
        self.family.check_mean(self.mu0, "mu0")
        if not self.c > 1:
            raise DomainError(f"c must be greater than 1, got {self.c}")
        check_alpha(self.alpha)

    def log_statistic(self, n, xbar):
        xbar = np.asarray(xbar, dtype=float)
        above = self.family.divergence(np.maximum(xbar, self.mu0), self.mu0)
        return np.asarray(n, dtype=float) * np.where(xbar >= self.mu0, above, 0.0)

    def threshold(self, n):
        return loglog_boundary(self.c, self.alpha, np.asarray(n, dtype=float))


@dataclass(frozen=True)
class SprtRule(StoppingRule):
    """Oracle SPRT of mu0 against the true mean, log L_n(mu_alt, mu0) >= A
    """

    mu_alt: float
    log_threshold: float

    @classmethod
    def from_alpha(cls, family: PsiFamily, mu0: float, mu_alt: float, alpha: float) -> "SprtRule":
        check_alpha(alpha)
        return cls(family=family, mu0=mu0, mu_alt=mu_alt, log_threshold=math.log(1 / alpha))

    def log_statistic(self, n, xbar):
        lam = self.family.psi_star_grad(self.mu_alt, self.mu0)
        xbar = np.asarray(xbar, dtype=float)
        return np.asarray(n, dtype=float) * (lam * xbar - self.family.psi(lam, self.mu0))

    def threshold(self, n):
        return np.full_like(np.asarray(n, dtype=float), self.log_threshold)


def first_reachable_n(family: PsiFamily, mu0: float, boundary: Boundary, n_cap: int = K_CAP) -> int:
    """Smallest n with sup_z D(z, mu0) >= g(n) / n, the first time any
    statistic built on the divergence can reach the boundary
    """

    limit = float(family.sup_divergence(mu0, Side.UPPER))
    if math.isinf(limit):
        return 1

    def reachable(n: int) -> bool:
        return limit >= float(boundary(n)) / n

    upper = 1
    while not reachable(upper):
        upper *= 2
        if upper > n_cap:
            raise DomainError(f"divergence limit {limit} never reaches the boundary for mu0={mu0}")
    lower = upper // 2
    while upper - lower > 1:
        middle = (lower + upper) // 2
        if reachable(middle):
            upper = middle
        else:
            lower = middle
    return upper


def stitched_lines(family: PsiFamily, mu0: float, mu1: float, boundary: Boundary,
        eta: float = 2.0, k_cap: int = K_CAP) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Tangent lines whose crossings cover the GLR-like curve crossing of
    boundary. The k-th line touches D(., mu0) at z_k with
    D(z_k, mu0) = g(n eta^k) / (n eta^k), n being the first reachable time, and
    carries level h_k = exp(-g(n eta^k) / eta); the last line sits at mu1.
    When D(mu1, mu0) already reaches g(n) / n a single line at mu1 with level
    exp(-g(n)) is returned

    :return: tuple (z values, log levels)
    """

    if not eta > 1:
        raise DomainError(f"eta must be greater than 1, got {eta}")
    if not mu1 > mu0:
        raise InvalidHypothesesError(f"mu1={mu1} must exceed mu0={mu0}")
    n_start = first_reachable_n(family, mu0, boundary)
    d1 = float(family.divergence(mu1, mu0))
    if d1 >= float(boundary(n_start)) / n_start:
        return (float(mu1),), (-float(boundary(n_start)),)

    zs, log_h = [], []
    for k in range(1, k_cap + 1):
        epoch = n_start * eta ** k
        g_k = float(boundary(epoch))
        if d1 >= g_k / epoch:
            zs.append(float(mu1))
            log_h.append(-g_k / eta)
            return tuple(zs), tuple(log_h)
        zs.append(float(inv_bregman(family, mu0, g_k / epoch, Side.UPPER)))
        log_h.append(-g_k / eta)
    raise DomainError(f"more than {k_cap} stitched lines for mu0={mu0}, mu1={mu1}")


@dataclass(frozen=True)
class _LinesRule(StoppingRule):
    zs: Tuple[float, ...]
    log_h: Tuple[float, ...]

    @classmethod
    def build(cls, family: PsiFamily, mu0: float, mu1: float, g: float, eta: float = 2.0):
        """Lines covering the constant boundary g, see stitched_lines
        """

        zs, log_h = stitched_lines(family, mu0, mu1, ConstantBoundary(g=g), eta)
        return cls(family=family, mu0=mu0, zs=zs, log_h=log_h)

    def _line_terms(self, n, xbar):
        n = np.asarray(n, dtype=float)
        xbar = np.asarray(xbar, dtype=float)
        ndim = np.broadcast(n, xbar).ndim
        shape = (-1,) + (1,) * ndim
        zs = np.asarray(self.zs).reshape(shape)
        log_h = np.asarray(self.log_h).reshape(shape)
        lines = self.family.divergence(zs, self.mu0) + self.family.divergence_grad(zs, self.mu0) * (xbar[None] - zs)
        return log_h + n[None] * lines

    def threshold(self, n):
        return np.zeros_like(np.asarray(n, dtype=float))


@dataclass(frozen=True)
class MaxLinesRule(_LinesRule):
    """Stops at the first crossing of any stitched line, max_k h_k L_n(z_k, mu0) >= 1
    """

    def log_statistic(self, n, xbar):
        return np.max(self._line_terms(n, xbar), axis=0)


@dataclass(frozen=True)
class DiscreteMixtureRule(_LinesRule):
    """Stops once the weighted sum of line statistics reaches 1
    """

    def log_statistic(self, n, xbar):
        return logsumexp(self._line_terms(n, xbar), axis=0)


@dataclass(frozen=True)
class GlrCsRule(StoppingRule):
    """Test obtained by checking whether mu0 has left the GLR-like confidence
    sequence tuned to [n_min, n_max]
    """

    g: float
    n_min: int
    n_max: int

    @classmethod
    def from_alpha(cls, family: PsiFamily, mu0: float, alpha: float, n_min: int, n_max: int,
            head: Optional[bool] = None) -> "GlrCsRule":
        head = n_min > 1 if head is None else head
        g = solve_g_alpha_interval(alpha, n_min, n_max, head)
        return cls(family=family, mu0=mu0, g=g, n_min=n_min, n_max=n_max)

    def log_statistic(self, n, xbar):
        return glr_cs_log_statistic(self.family, self.mu0, n, xbar, self.g, self.n_min, self.n_max)

    def threshold(self, n):
        return np.full_like(np.asarray(n, dtype=float), self.g)


@dataclass(frozen=True)
class MixtureCsRule(StoppingRule):
    """Test from the discrete mixture confidence sequence, M_n(mu0) / M_0(mu0) >= 1 / alpha
    """

    grid: MixtureGrid
    alpha: float

    @classmethod
    def from_alpha(cls, family: PsiFamily, mu0: float, alpha: float, n_min: int, n_max: int,
            head: Optional[bool] = None) -> "MixtureCsRule":
        head = n_min > 1 if head is None else head
        return cls(family=family, mu0=mu0, grid=mixture_grid(alpha, n_min, n_max, head), alpha=alpha)

    def log_statistic(self, n, xbar):
        log_m = mixture_log_statistic(self.grid, self.family, self.mu0, n, xbar)
        return log_m - mixture_log_m0(self.grid, self.family, self.mu0)

    def threshold(self, n):
        return np.full_like(np.asarray(n, dtype=float), math.log(1 / self.alpha))


@dataclass(frozen=True)
class RepeatedFixedRule(StoppingRule):
    """Fixed-sample level-alpha test applied at every n: the Z-test for
    sub-Gaussian data and the exact binomial test for Bernoulli data. Its type-1
    error is not controlled, which is what it is kept for
    """

    alpha: float

    def __post_init__(self):
        if not isinstance(self.family, (SubGaussian, Bernoulli)):
            raise UnsupportedFamilyError(f"no fixed-sample test for family {self.family.name}")
        check_alpha(self.alpha)

    def log_statistic(self, n, xbar):
        n = np.asarray(n, dtype=float)
        xbar = np.asarray(xbar, dtype=float)
        if isinstance(self.family, Bernoulli):
            return np.rint(n * xbar)
        return (xbar - self.mu0) * np.sqrt(n) / self.family.sigma

    def threshold(self, n):
        n = np.asarray(n, dtype=float)
        if isinstance(self.family, Bernoulli):
            return binomial_critical_value(n, self.alpha, self.mu0)
        return np.full_like(n, z_quantile(self.alpha))


@dataclass(frozen=True)
class FixedSampleRule(RepeatedFixedRule):
    """The fixed-sample test, only looked at once n reaches n_star
    """

    n_star: int

    def threshold(self, n):
        n = np.asarray(n, dtype=float)
        return np.where(n == self.n_star, super().threshold(n), np.inf)


class SequentialTest:
    """Drives a stopping rule over one stream. Keeps the count and sum of the
    observations, so the mean is exactly sum / count

    :param rule: stopping rule to apply
    :type rule: StoppingRule
    """

    def __init__(self, rule: StoppingRule):
        self.rule = rule
        self.count = 0
        self.total = 0.0
        self.decision = Decision.RUNNING
        self.rejected_at: Optional[int] = None
        self.evaluations = 0

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise DomainError("no observations yet")
        return self.total / self.count

    def step(self, x: float) -> Decision:
        """Feeds one observation and returns the decision after it

        :raises ObservationOutOfSupportError: when x is outside the family's support
        """

        if not self.rule.family.contains_observation(x):
            log.error(f"observation {x} outside support {self.rule.family.support} of {self.rule.family.name}")
            raise ObservationOutOfSupportError(
                f"observation {x} outside support {self.rule.family.support}"
            )
        self.count += 1
        self.total += x
        if self.decision is Decision.REJECTED:
            return self.decision

        self.evaluations += 1
        if bool(self.rule.rejects(self.count, self.mean)):
            self.decision = Decision.REJECTED
            self.rejected_at = self.count
            log.debug(f"{self.rule.name} rejected mu0={self.rule.mu0} at n={self.count}")
        return self.decision

    def run(self, stream: Iterable[float], stop_on_reject: bool = True) -> Decision:
        """Feeds a stream, by default stopping at the first rejection
        """

        for x in stream:
            if self.step(x) is Decision.REJECTED and stop_on_reject:
                break
        return self.decision


def _checked_step(state: SequentialTest, x: float, rule_type) -> Decision:
    if not isinstance(state.rule, rule_type):
        raise TypeError(f"expected a {rule_type.__name__} state, got {state.rule.name}")
    return state.step(x)


def sglr_const_step(state: SequentialTest, x: float) -> Decision:
    """One step of the SGLR-like test with constant boundary
    """

    return _checked_step(state, x, SglrConstRule)


def sglr_noseq_step(state: SequentialTest, x: float) -> Decision:
    """One step of the SGLR-like test with the log-log boundary
    """

    return _checked_step(state, x, SglrNoSepRule)


def sprt_oracle_step(state: SequentialTest, x: float) -> Decision:
    """One step of the oracle SPRT
    """

    return _checked_step(state, x, SprtRule)


def first_crossing(rule: StoppingRule, paths) -> np.ndarray:
    """Stopping times of rule on every path of a block

    :param paths: observations, shape (..., horizon)
    :type paths: array-like
    :return: np.ndarray of stopping times, np.inf where the rule never rejects
    """

    paths = np.asarray(paths, dtype=float)
    ns = np.arange(1, paths.shape[-1] + 1, dtype=float)
    xbar = np.cumsum(paths, axis=-1) / ns
    hits = np.asarray(rule.rejects(ns, xbar))
    return np.where(hits.any(axis=-1), hits.argmax(axis=-1) + 1.0, np.inf)
