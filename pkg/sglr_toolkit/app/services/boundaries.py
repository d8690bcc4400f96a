"""Boundary-crossing probability bounds for the GLR-like process, solvers
for the boundary value that makes a bound equal to alpha, and sample size
bounds for the resulting tests
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import zeta

from sglr_toolkit.app.config import CONFIG
from sglr_toolkit.app.exceptions import (
    DegenerateBoundError, DomainError, InvalidBoundaryError, NonSummableError
)
from sglr_toolkit.app.families import PsiFamily
from sglr_toolkit.app.schemas.boundary import (
    Boundary, ConstantBoundary, LogLogBoundary, PiecewiseConstantBoundary, StitchParams
)
from sglr_toolkit.app.services.divergences import bregman, dstar
from sglr_toolkit.app.utils import log
from sglr_toolkit.app.utils.numerics import K_CAP, integer_stitch_min


G_XTOL = CONFIG["numerics"].getfloat("g_xtol")
SERIES_FLOOR = CONFIG["numerics"].getfloat("series_floor")

_K_CHUNK = 4096


def check_alpha(alpha: float):
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")


def default_stitch_params() -> StitchParams:
    """StitchParams populated from the [stitching] config section
    """

    section = CONFIG["stitching"]
    return StitchParams(
        k_max=section.getint("k_max"),
        eta_grid_points=section.getint("eta_grid_points"),
        log_eta_min=section.getfloat("log_eta_min"),
        log_eta_max=section.getfloat("log_eta_max"),
    )


def k_eta(boundary: Boundary, d1: float, eta: float, k_cap: int = K_CAP) -> float:
    """Number of stitched epochs K_eta: the smallest k >= 0 with
    d1 >= g(eta^k) / eta^k

    :param boundary: boundary function
    :type boundary: Boundary
    :param d1: divergence D(mu1, mu0) between the hypotheses
    :type d1: float
    :param eta: epoch ratio, > 1
    :type eta: float
    :return: K_eta as a float, math.inf when d1 is zero
    """

    if not eta > 1:
        raise DomainError(f"eta must be greater than 1, got {eta}")
    if d1 < 0:
        raise DomainError(f"d1 must be nonnegative, got {d1}")
    if d1 == 0:
        return math.inf
    if d1 >= float(boundary(1)):
        return 0

    log_eta = math.log(eta)
    for start in range(1, k_cap + 1, _K_CHUNK):
        ks = np.arange(start, min(start + _K_CHUNK, k_cap + 1), dtype=float)
        log_n = ks * log_eta
        reached = d1 >= boundary.evaluate_log(log_n) * np.exp(-log_n)
        if np.any(reached):
            return int(ks[int(np.argmax(reached))])
    return math.inf


def validate_boundary(boundary: Boundary, n_grid: Optional[np.ndarray] = None):
    """Checks numerically that g is nonnegative, that Constant and LogLog
    boundaries are nondecreasing, and that g(n)/n is nonincreasing towards zero

    :raises InvalidBoundaryError: when a condition fails on the grid
    """

    if n_grid is None:
        n_grid = np.unique(np.round(np.geomspace(1, 1e12, 400)))
    values = np.asarray(boundary(n_grid), dtype=float)
    problems = []
    if np.any(values < 0):
        problems.append("negative values")
    if isinstance(boundary, (ConstantBoundary, LogLogBoundary)) and np.any(np.diff(values) < -1e-12):
        problems.append("decreasing values")
    ratio = values / n_grid
    if np.any(np.diff(ratio) > 1e-12 * np.maximum(1.0, ratio[:-1])):
        problems.append("g(n)/n increasing")
    if not ratio[-1] < ratio[0] or ratio[-1] > 1e-3 * max(ratio[0], 1e-300):
        problems.append("g(n)/n not vanishing")
    if problems:
        log.error(f"invalid boundary {boundary}: {', '.join(problems)}")
        raise InvalidBoundaryError(f"invalid boundary {boundary}: {', '.join(problems)}")


def crossing_bound_constant(d1: float, g: float, full_scan: bool = False) -> float:
    """Bound on the probability that the GLR-like process ever crosses the
    constant boundary g under the null, in its integer form

    :param d1: divergence D(mu1, mu0)
    :type d1: float
    :param g: boundary value, positive
    :type g: float
    :param full_scan: scan every k up to k_cap instead of stopping early
    :type full_scan: bool
    :return: float in (0, 1]
    """

    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    if d1 < 0:
        raise DomainError(f"d1 must be nonnegative, got {d1}")
    if d1 == 0:
        raise DegenerateBoundError("constant boundary bound is vacuous when mu1 == mu0, "
            "use a log-log boundary")
    if d1 >= g:
        return math.exp(-g)
    value, _ = integer_stitch_min(g, d1 / g, full_scan=full_scan)
    return min(1.0, value)


def lorden_bound(d1: float, g: float) -> float:
    """Lorden's crossing bound: e^-g when d1 >= g, (1 + g/d1) e^-g otherwise
    """

    if d1 >= g:
        return math.exp(-g)
    return min(1.0, (1 + g / d1) * math.exp(-g))


def g_upper_bound_constant(d1: float, alpha: float) -> float:
    """Closed-form upper bound on the boundary value solving
    crossing_bound_constant(d1, g) = alpha, minimised over an eta grid
    """

    check_alpha(alpha)
    if not d1 > 0:
        raise DomainError(f"d1 must be positive, got {d1}")
    etas = 1 + np.geomspace(1e-3, 50, 400)
    log_etas = np.log(etas)
    inner = np.maximum(etas * np.sqrt(etas) / (alpha * d1 * log_etas), 1.0)
    values = etas * np.log((1 + 2 * np.log(inner) / log_etas) / alpha)
    return float(np.min(values))


def solve_decreasing_bound(bound, alpha: float, lower: float, upper: float) -> float:
    """Smallest g in [lower, upper] with bound(g) <= alpha for a bound that
    decreases in g and exceeds alpha at lower
    """

    while bound(upper) > alpha:
        upper *= 2
    g = brentq(lambda value: bound(value) - alpha, lower, upper, xtol=G_XTOL)
    while bound(g) > alpha:
        g += G_XTOL
    return g


def solve_g_alpha_constant(d1: float, alpha: float) -> float:
    """Boundary value g_alpha with crossing_bound_constant(d1, g_alpha) = alpha

    :param d1: divergence D(mu1, mu0), positive
    :type d1: float
    :param alpha: level in (0, 1]
    :type alpha: float
    :return: float
    """

    check_alpha(alpha)
    lower = math.log(1 / alpha)
    if d1 >= lower:
        return lower
    upper = max(g_upper_bound_constant(d1, alpha), lower + 1.0)
    g = solve_decreasing_bound(lambda value: crossing_bound_constant(d1, value), alpha, lower, upper)
    log.debug(f"solved constant boundary g={g} for d1={d1}, alpha={alpha}")
    return g


def solve_g_alpha_lorden(d1: float, alpha: float) -> float:
    """Smallest g with Lorden's bound at most alpha
    """

    check_alpha(alpha)
    if not d1 > 0:
        raise DomainError(f"d1 must be positive, got {d1}")
    lower = math.log(1 / alpha)
    if d1 >= lower:
        return lower
    # (1 + g/d1) e^-g decreases once g > 1 - d1
    start = max(lower, 1.0 - d1, d1)
    if lorden_bound(d1, start) <= alpha:
        return start
    return solve_decreasing_bound(lambda value: lorden_bound(d1, value), alpha, start, 2 * start + 10)


def loglog_boundary(c: float, alpha: float, n):
    """g(n) = c [log(1/alpha) + 2 log(log_c(c n))]
    """

    value = LogLogBoundary(c=c, alpha=alpha)(n)
    return float(value) if np.ndim(value) == 0 else value


def _loglog_sum(boundary: LogLogBoundary, eta: float, k_stop: float) -> float:
    """Sum over k = 1..k_stop of exp(-g(eta^k)/eta) for the log-log boundary,
    written with the Hurwitz zeta function
    """

    a = math.log(eta) / math.log(boundary.c)
    power = 2 * boundary.c / eta
    scale = boundary.alpha ** (boundary.c / eta) * a ** (-power)
    if power <= 1:
        if math.isinf(k_stop):
            return math.inf
        ks = np.arange(1, int(k_stop) + 1, dtype=float)
        return float(boundary.alpha ** (boundary.c / eta) * np.sum((1 + ks * a) ** (-power)))
    total = zeta(power, 1 + 1 / a)
    if not math.isinf(k_stop):
        total -= zeta(power, k_stop + 1 + 1 / a)
    return float(scale * total)


def loglog_stitched_sum(c: float, alpha: float, eta: float, d1: float = 0.0) -> float:
    """Stitched series for the log-log boundary at a fixed eta. With d1 = 0 and
    eta = c it equals alpha (pi^2/6 - 1)
    """

    boundary = LogLogBoundary(c=c, alpha=alpha)
    return _loglog_sum(boundary, eta, k_eta(boundary, d1, eta))


def stitched_sum(boundary: Boundary, d1: float, eta: float, k_max: int = 100000) -> float:
    """Sum over k = 1..K_eta of exp(-g(eta^k)/eta). Infinite sums are truncated
    once terms fall below the series floor while decreasing

    :raises NonSummableError: when terms haven't started to decay by k_max
    """

    k_stop = k_eta(boundary, d1, eta)
    if k_stop == 0:
        return 0.0
    if isinstance(boundary, LogLogBoundary):
        return _loglog_sum(boundary, eta, k_stop)

    log_eta = math.log(eta)
    total = 0.0
    previous = math.inf
    last = k_stop if not math.isinf(k_stop) else k_max
    for start in range(1, int(min(last, k_max)) + 1, _K_CHUNK):
        ks = np.arange(start, min(start + _K_CHUNK, int(min(last, k_max)) + 1), dtype=float)
        terms = np.exp(-boundary.evaluate_log(ks * log_eta) / eta)
        total += float(np.sum(terms))
        if ks[-1] >= last:
            return total
        decreasing = np.all(np.diff(np.concatenate(([previous], terms))) <= 0)
        if terms[-1] < SERIES_FLOOR and decreasing:
            return total
        previous = terms[-1]

    log.error(f"stitched series for {boundary} not summable by k_max={k_max}")
    raise NonSummableError(f"stitched series for {boundary} not decaying by k_max={k_max}")


def crossing_bound_general(boundary: Boundary, d1: float,
        stitch: Optional[StitchParams] = None) -> float:
    """Bound on the probability that the GLR-like process ever crosses
    boundary under the null. Constant boundaries use the integer form, other
    boundaries take the infimum over eta of the stitched series

    :param boundary: boundary function satisfying the nondecreasing and
        vanishing-ratio conditions
    :type boundary: Boundary
    :param d1: divergence D(mu1, mu0)
    :type d1: float
    :param stitch: eta search settings, defaults from config
    :type stitch: StitchParams
    :return: float in (0, 1]
    """

    stitch = stitch or default_stitch_params()
    g_one = float(boundary(1))
    if d1 >= g_one:
        return math.exp(-g_one)
    if isinstance(boundary, ConstantBoundary):
        return crossing_bound_constant(d1, boundary.g)

    validate_boundary(boundary)

    def objective(log_eta: float) -> float:
        try:
            return stitched_sum(boundary, d1, math.exp(log_eta), stitch.k_max)
        except NonSummableError:
            return math.inf

    if stitch.eta is not None:
        value = objective(math.log(stitch.eta))
        if math.isinf(value):
            raise NonSummableError(f"stitched series diverges at eta={stitch.eta}")
        return min(1.0, value)

    grid = np.geomspace(stitch.log_eta_min, stitch.log_eta_max, stitch.eta_grid_points)
    values = np.array([objective(log_eta) for log_eta in grid])
    if np.all(np.isinf(values)):
        log.error(f"no summable eta for {boundary} and d1={d1}")
        raise NonSummableError(f"no summable eta for {boundary} and d1={d1}")

    best = int(np.argmin(values))
    low = grid[max(best - 1, 0)]
    high = grid[min(best + 1, len(grid) - 1)]
    refined = minimize_scalar(objective, bounds=(low, high), method="bounded",
        options={"xatol": 1e-8})
    value = min(float(values[best]), float(refined.fun))
    log.debug(f"stitched bound {value} near log eta={grid[best]} for {boundary}")
    return min(1.0, value)


def stitched_boundary(intervals: Sequence[Tuple[int, int]],
        g_values: Sequence[float]) -> PiecewiseConstantBoundary:
    """Piecewise constant boundary g_c(n) for contiguous target intervals:
    g^(k) inside the k-th interval and the smaller neighbouring value at the
    shared endpoints

    :param intervals: (n_min, n_max) pairs with each n_max equal to the next n_min
    :param g_values: boundary value per interval
    :return: PiecewiseConstantBoundary
    """

    if len(intervals) != len(g_values) or not intervals:
        raise DomainError("need one g value per interval and at least one interval")
    padded = [g_values[0]] + list(g_values) + [g_values[-1]]
    starts = {}
    for k, (n_min, n_max) in enumerate(intervals, start=1):
        starts[n_min] = min(padded[k - 1], padded[k])
        starts[n_min + 1] = padded[k]
        starts[n_max] = min(padded[k], padded[k + 1])
        starts[n_max + 1] = padded[k + 1]

    breaks: List[float] = sorted(starts)
    return PiecewiseConstantBoundary(
        breaks=breaks, values=[padded[1]] + [starts[b] for b in breaks]
    )


def t_high(family: PsiFamily, mu: float, mu0: float, c: float, delta: float) -> int:
    """Smallest integer t >= 1 with c [log(1/delta) + 2 log(log_c(c t))] / D* <= t,
    a time by which the log-log test stops with probability at least 1 - delta

    :return: int
    """

    if not mu > mu0:
        raise DomainError(f"mu={mu} must exceed mu0={mu0}")
    d_star = dstar(family, mu, mu0)
    boundary = LogLogBoundary(c=c, alpha=delta)

    def meets(t: int) -> bool:
        return float(boundary(t)) / d_star <= t

    if meets(1):
        return 1
    low, high = 1, 2
    while not meets(high):
        low, high = high, high * 2
    while high - low > 1:
        mid = (low + high) // 2
        if meets(mid):
            high = mid
        else:
            low = mid
    return high


def t_high_bound(family: PsiFamily, mu: float, mu0: float, c: float, delta: float) -> float:
    """Closed-form upper bound max(1, A) on t_high
    """

    d_star = dstar(family, mu, mu0)
    log_c = math.log(c)
    a_value = (2 * c / d_star) * math.log(1 / delta) + (2 * c / d_star) * math.log(
        2 * math.log(2 * c ** 2 / log_c) / log_c + 2 * max(0.0, math.log(1 / d_star) / log_c)
    )
    return max(1.0, a_value)


def expected_n_bound_const(family: PsiFamily, mu: float, mu0: float, mu1: float,
        alpha: float) -> float:
    """Upper bound on the expected stopping time of the constant-boundary test
    under a mean mu >= mu1 > mu0
    """

    if not mu >= mu1 > mu0:
        raise DomainError(f"need mu >= mu1 > mu0, got {mu}, {mu1}, {mu0}")
    g_alpha = solve_g_alpha_constant(bregman(family, mu1, mu0), alpha)
    d_mu = bregman(family, mu, mu0)
    sigma = math.sqrt(float(family.variance_bound(mu)))
    slope = float(family.divergence_grad(mu, mu0))
    return g_alpha / d_mu + (sigma * slope / d_mu) ** 2 + 1


def expected_n_bound_noseq(family: PsiFamily, mu: float, mu0: float, c: float,
        alpha: float) -> float:
    """Upper bound on the expected stopping time of the log-log boundary test.
    Uses 2 c^2.5 / log c inside the logarithm while the matching high-probability
    bound uses 2 c^2 / log c
    """

    d_star = dstar(family, mu, mu0)
    log_c = math.log(c)
    return 1 + (2 * c / d_star) * math.log(1 / alpha) + (2 * c / d_star) * math.log(
        2 * math.log(2 * c ** 2.5 / log_c) / log_c
        + 2 * max(0.0, math.log(1 / d_star) / log_c)
    )
