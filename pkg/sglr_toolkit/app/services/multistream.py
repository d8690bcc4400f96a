"""Combined test over K independent streams. The per-stream boundaries are
written as f^a(n) + h^a(alpha) and the sum of GLR-like statistics is compared
with sum_a f^a(N_a) + epsilon, where epsilon is calibrated so that
P(sum_a h^a(U_a) >= epsilon) <= alpha for independent uniforms U_a
"""
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaincc

from sglr_toolkit.app.config import CONFIG
from sglr_toolkit.app.exceptions import (
    CalibrationError, DomainError, GridExhaustedError, ObservationOutOfSupportError
)
from sglr_toolkit.app.families import PsiFamily
from sglr_toolkit.app.schemas.multistream import LogInverse, MultiStreamCal
from sglr_toolkit.app.services.boundaries import check_alpha
from sglr_toolkit.app.utils import log


EPS_STEP = CONFIG["multistream"].getfloat("eps_step")


def log_inverse_tail_bound(K: int, eps) -> np.ndarray:
    """(eps/K)^K exp(K - eps), an upper bound on P(sum_a log(1/U_a) >= eps)
    that is informative for eps > K
    """

    eps = np.asarray(eps, dtype=float)
    with np.errstate(divide="ignore"):
        log_bound = K * np.log(eps / K) + K - eps
    return np.minimum(1.0, np.exp(np.where(eps > 0, log_bound, 0.0)))


def exact_log_inverse_tail(K: int, eps) -> np.ndarray:
    """P(sum_a log(1/U_a) >= eps): the sum is Gamma(K, 1) distributed
    """

    eps = np.asarray(eps, dtype=float)
    return np.where(eps > 0, gammaincc(K, np.maximum(eps, 0.0)), 1.0)


def closed_form_epsilon(K: int, alpha: float) -> float:
    """Solves (eps/K)^K exp(K - eps) = alpha for eps >= K
    """

    if K < 1:
        raise DomainError(f"K must be at least 1, got {K}")
    check_alpha(alpha)
    if alpha == 1:
        return float(K)
    log_alpha = math.log(alpha)

    def excess(eps: float) -> float:
        return K * math.log(eps / K) + K - eps - log_alpha

    upper = 2.0 * K + 1.0
    while excess(upper) > 0:
        upper *= 2
    return float(brentq(excess, K, upper, xtol=1e-12))


def sample_h_sums(cal: MultiStreamCal) -> np.ndarray:
    """Monte Carlo draws of sum_a h^a(U_a), sorted ascending
    """

    rng = np.random.Generator(np.random.Philox(key=cal.seed))
    # uniforms on (0, 1] so log(1/u) stays finite
    uniforms = 1.0 - rng.random((cal.mc_reps, cal.K))
    sums = np.zeros(cal.mc_reps)
    for index, h in enumerate(cal.h_funcs):
        sums += np.asarray(h(uniforms[:, index]), dtype=float)
    return np.sort(sums)


def mc_tail(sorted_sums: np.ndarray, eps) -> Tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of P(sum >= eps) and its standard error
    """

    reps = len(sorted_sums)
    tail = (reps - np.searchsorted(sorted_sums, np.asarray(eps, dtype=float), side="left")) / reps
    return tail, np.sqrt(tail * (1 - tail) / reps)


def _uniform_log_inverse_scale(cal: MultiStreamCal):
    scales = {h.scale for h in cal.h_funcs if isinstance(h, LogInverse)}
    if len(scales) == 1 and all(isinstance(h, LogInverse) for h in cal.h_funcs):
        return scales.pop()
    return None


def calibrate_multistream(cal: MultiStreamCal, target_alpha: float) -> float:
    """Smallest epsilon on the grid whose Monte Carlo tail probability is at most
    target_alpha. The default grid runs from 0 in steps of eps_step past the
    largest draw. When every h is the same multiple of log(1/u) the estimate is
    checked against the closed-form bound

    :param cal: calibration inputs
    :type cal: MultiStreamCal
    :param target_alpha: level of the combined test
    :type target_alpha: float
    :raises GridExhaustedError: when no grid value meets target_alpha
    :raises CalibrationError: when the estimate exceeds the closed-form bound by
        more than 3 standard errors
    :return: float
    """

    check_alpha(target_alpha)
    sums = sample_h_sums(cal)
    if cal.eps_grid is None:
        grid = np.arange(0.0, sums[-1] + 2 * EPS_STEP, EPS_STEP)
    else:
        grid = np.asarray(cal.eps_grid, dtype=float)

    tail, _ = mc_tail(sums, grid)
    meets = tail <= target_alpha
    if not np.any(meets):
        log.error(f"no epsilon on grid [{grid[0]}, {grid[-1]}] reaches alpha={target_alpha}")
        raise GridExhaustedError(f"no epsilon on the grid reaches alpha={target_alpha}")
    eps = float(grid[np.argmax(meets)])

    scale = _uniform_log_inverse_scale(cal)
    if scale is not None:
        estimate, se = mc_tail(sums, eps)
        bound = float(log_inverse_tail_bound(cal.K, eps / scale))
        if float(estimate) > bound + 3 * float(se):
            log.error(f"tail estimate {estimate} above closed-form bound {bound} at eps={eps}")
            raise CalibrationError(
                f"Monte Carlo tail {float(estimate)} exceeds closed-form bound {bound} by more than 3 SE"
            )
    log.info(f"calibrated multistream epsilon={eps} for K={cal.K}, alpha={target_alpha}")
    return eps


class MultiStreamTest:
    """Combined one-sided test over K streams without separation. Stream a
    contributes N_a D(xbar_a, mu0_a) 1(xbar_a >= mu0_a) and the log-log boundary
    c [log(1/alpha) + 2 log(log_c(c n))] is split as f(n) = 2 c log(log_c(c n))
    plus h(alpha) = c log(1/alpha). Rejects once every stream has an observation
    and the summed statistics reach sum_a f(N_a) + epsilon

    :param families: one family per stream
    :type families: Sequence[PsiFamily]
    :param mu0s: null means
    :type mu0s: Sequence[float]
    :param c: log-log boundary constant, > 1
    :type c: float
    :param epsilon: calibrated threshold
    :type epsilon: float
    """

    def __init__(self, families: Sequence[PsiFamily], mu0s: Sequence[float], c: float,
            epsilon: float):
        if len(families) != len(mu0s) or not families:
            raise DomainError("need one null mean per stream and at least one stream")
        if not c > 1:
            raise DomainError(f"c must be greater than 1, got {c}")
        for family, mu0 in zip(families, mu0s):
            family.check_mean(mu0, "mu0")
        self.families: List[PsiFamily] = list(families)
        self.mu0s = np.asarray(mu0s, dtype=float)
        self.c = c
        self.epsilon = epsilon
        self.counts = np.zeros(len(families), dtype=int)
        self.totals = np.zeros(len(families))
        self.rejected_at = None

    @property
    def K(self) -> int:
        # pylint: disable=invalid-name
        return len(self.families)

    def h_funcs(self) -> List[LogInverse]:
        return [LogInverse(self.c) for _ in self.families]

    def f(self, n):
        """Alpha-free part of the log-log boundary
        """

        n = np.asarray(n, dtype=float)
        return 2 * self.c * np.log1p(np.log(n) / math.log(self.c))

    def stream_statistics(self, counts, means) -> np.ndarray:
        """Per-stream log GLR-like statistics, streams on axis 0
        """

        counts = np.asarray(counts, dtype=float)
        means = np.asarray(means, dtype=float)
        stats = []
        for index, family in enumerate(self.families):
            mu0 = self.mu0s[index]
            above = family.divergence(np.maximum(means[index], mu0), mu0)
            stats.append(counts[index] * np.where(means[index] >= mu0, above, 0.0))
        return np.stack(stats)

    def margin(self, counts, means):
        """Summed statistics minus sum_a f(N_a) + epsilon, streams on axis 0
        """

        counts = np.asarray(counts, dtype=float)
        return (self.stream_statistics(counts, means).sum(axis=0)
            - self.f(counts).sum(axis=0) - self.epsilon)

    def step(self, stream: int, x: float) -> bool:
        """Feeds x to one stream and returns whether the combined test has rejected
        """

        family = self.families[stream]
        if not family.contains_observation(x):
            raise ObservationOutOfSupportError(f"observation {x} outside support {family.support}")
        self.counts[stream] += 1
        self.totals[stream] += x
        if self.rejected_at is None and np.all(self.counts > 0):
            if float(self.margin(self.counts, self.totals / self.counts)) >= 0:
                self.rejected_at = int(self.counts.sum())
        return self.rejected_at is not None

    def first_crossing(self, paths) -> np.ndarray:
        """Round-robin crossing times on a block of paths, one observation per
        stream per round

        :param paths: observations, shape (reps, K, horizon)
        :return: np.ndarray of the first round t with a crossing, np.inf if none
        """

        paths = np.asarray(paths, dtype=float)
        ts = np.arange(1, paths.shape[-1] + 1, dtype=float)
        means = np.moveaxis(np.cumsum(paths, axis=-1) / ts, 1, 0)
        counts = np.broadcast_to(ts, means.shape)
        hits = self.margin(counts, means) >= 0
        return np.where(hits.any(axis=-1), hits.argmax(axis=-1) + 1.0, np.inf)
