"""Fixed-sample sizes of the one-sided Z-test and exact binomial test and
the target interval heuristic derived from them
"""
import math
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.stats import binom, norm

from sglr_toolkit.app.exceptions import DomainError, NoFiniteSizeError, UnsupportedFamilyError
from sglr_toolkit.app.families import Bernoulli, PsiFamily, SubGaussian
from sglr_toolkit.app.utils import log


_N_CHUNK = 4096


class SizeStrategy(str, Enum):
    """How to pick n* when the power of the exact test is not monotone in n.
    FIRST is the smallest n meeting the power target, STABLE the smallest n from
    which every size up to twice as large also meets it
    """

    FIRST = "first"
    STABLE = "stable"


def z_quantile(level: float) -> float:
    """Upper level-quantile of the standard normal, z with P(Z >= z) = level
    """

    return float(norm.isf(level))


def _check_levels(alpha: float, beta: float, mu0: float, mu1: float):
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise DomainError(f"alpha and beta must be in (0, 1), got {alpha}, {beta}")
    if not mu1 > mu0:
        raise NoFiniteSizeError(f"mu1={mu1} must exceed mu0={mu0} for finite sample size")


def fixed_sample_size_gaussian(alpha: float, beta: float, mu0: float, mu1: float,
        sigma: float = 1.0) -> int:
    """Smallest n with P_mu1(xbar_n >= mu0 + z_alpha sigma / sqrt(n)) >= 1 - beta

    :return: int
    """

    _check_levels(alpha, beta, mu0, mu1)
    z_alpha = z_quantile(alpha)
    gap = (mu1 - mu0) / sigma

    def powerful(n: int) -> bool:
        return norm.sf(z_alpha - gap * math.sqrt(n)) >= 1 - beta

    n = max(1, math.ceil(((z_alpha + z_quantile(beta)) / gap) ** 2))
    while n > 1 and powerful(n - 1):
        n -= 1
    while not powerful(n):
        n += 1
    return n


def binomial_critical_value(n, alpha: float, mu0: float):
    """Smallest k with P_mu0(S_n >= k) <= alpha, S_n ~ Binomial(n, mu0).
    Tail probabilities are compared in log space
    """

    n = np.asarray(n, dtype=float)
    log_alpha = math.log(alpha)
    k = binom.isf(alpha, n, mu0) + 1
    k = np.where(binom.logsf(k - 1, n, mu0) > log_alpha, k + 1, k)
    k = np.where((k > 0) & (binom.logsf(k - 2, n, mu0) <= log_alpha), k - 1, k)
    return k


def _powerful_sizes(alpha: float, beta: float, mu0: float, mu1: float, start: int, stop: int):
    ns = np.arange(start, stop, dtype=float)
    k = binomial_critical_value(ns, alpha, mu0)
    return ns, binom.logsf(k - 1, ns, mu1) >= math.log(1 - beta)


def fixed_sample_size_binomial(alpha: float, beta: float, mu0: float, mu1: float,
        strategy: SizeStrategy = SizeStrategy.FIRST, max_n: int = 10 ** 7) -> int:
    """Smallest n for which the exact level-alpha binomial test of mu0 has power
    at least 1 - beta at mu1

    :param strategy: SizeStrategy.FIRST or SizeStrategy.STABLE
    :type strategy: SizeStrategy
    :raises NoFiniteSizeError: when mu1 <= mu0 or no n up to max_n works
    :return: int
    """

    _check_levels(alpha, beta, mu0, mu1)
    flags = []
    for start in range(1, max_n + 1, _N_CHUNK):
        _, powerful = _powerful_sizes(alpha, beta, mu0, mu1, start, min(start + _N_CHUNK, max_n + 1))
        flags.append(powerful)
        ok = np.concatenate(flags)
        if strategy is SizeStrategy.FIRST:
            if np.any(ok):
                return int(np.argmax(ok)) + 1
            continue

        # next failing size at or after each n, sentinel past the scanned range
        failing = np.flatnonzero(~ok)
        positions = np.arange(len(ok))
        next_fail = np.append(failing, len(ok) + max_n)[np.searchsorted(failing, positions)]
        ns = positions + 1
        stable = ok & (next_fail + 1 > 2 * ns) & (2 * ns <= len(ok))
        if np.any(stable):
            return int(np.argmax(stable)) + 1

    log.error(f"no binomial sample size up to {max_n} for mu0={mu0}, mu1={mu1}")
    raise NoFiniteSizeError(f"no sample size up to {max_n} reaches power {1 - beta}")


def design_test_from_power(family: PsiFamily, alpha: float, beta: float, mu0: float,
        mu1: float, strategy: SizeStrategy = SizeStrategy.FIRST) -> Tuple[int, int, int]:
    """Fixed-sample size n* of the matching fixed test and the target interval
    [ceil(n*/10), 2 n*] for the sequential tests

    :return: tuple (n_star, n_min, n_max)
    """

    if isinstance(family, SubGaussian):
        n_star = fixed_sample_size_gaussian(alpha, beta, mu0, mu1, family.sigma)
    elif isinstance(family, Bernoulli):
        n_star = fixed_sample_size_binomial(alpha, beta, mu0, mu1, strategy)
    else:
        raise UnsupportedFamilyError(f"no fixed-sample test for family {family.name}")
    return n_star, math.ceil(n_star / 10), 2 * n_star
