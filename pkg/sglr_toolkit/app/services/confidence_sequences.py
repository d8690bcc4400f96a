"""Lower confidence sequences for the mean of a sub-psi family, tuned to
be close to the pointwise Chernoff bound on target time intervals, their
discrete mixture refinements, and the stitching and normal mixture baselines.

Upper confidence sequences are obtained by mirroring the family and the data
"""
import math
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from sglr_toolkit.app.config import CONFIG
from sglr_toolkit.app.exceptions import (
    BudgetExceededError, DomainError, GridSearchRequired, OverlapError
)
from sglr_toolkit.app.families import FamilyKind, MirroredFamily, PsiFamily, Side, SubGaussian
from sglr_toolkit.app.schemas.cs import CsConfig, CsMode, MixtureGrid
from sglr_toolkit.app.services.boundaries import solve_decreasing_bound
from sglr_toolkit.app.services.divergences import inv_bregman
from sglr_toolkit.app.utils import log
from sglr_toolkit.app.utils.numerics import MEAN_XTOL, bisect_root, expand_bracket, integer_stitch_min


GRID_RESOLUTION = CONFIG["numerics"].getfloat("grid_resolution")


class BaselineKind(str, Enum):
    """Closed-form sub-Gaussian confidence sequences used for comparison
    """

    STITCHING = "stitching"
    NORMAL_MIXTURE = "normal_mixture"


def n0(family: PsiFamily, mu0, g: float):
    """Smallest n with sup_{z > mu0} D(z, mu0) >= g / n, i.e. the first time
    the GLR-like statistic can reach g

    :return: int, or an int array when mu0 is an array
    """

    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    limit = np.asarray(family.sup_divergence(mu0, Side.UPPER), dtype=float)
    with np.errstate(divide="ignore"):
        value = np.where(np.isinf(limit), 1.0, np.maximum(1.0, np.ceil(g / limit)))
    value = value.astype(int)
    return int(value) if value.ndim == 0 else value


def interval_bound(g: float, n_min: int, n_max: int, head: bool) -> Tuple[float, int]:
    """Crossing bound for a single target interval in integer form,
    head e^-g + min_k k exp(-g (n_min/n_max)^(1/k))

    :return: tuple of (bound, minimising k)
    """

    value, k_best = integer_stitch_min(g, n_min / n_max)
    return (math.exp(-g) if head else 0.0) + value, k_best


def _check_interval(n_min: int, n_max: int):
    if not 1 <= n_min <= n_max:
        raise DomainError(f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")


def solve_g_alpha_interval(alpha: float, n_min: int, n_max: int, head: bool) -> float:
    """Boundary value making the single-interval crossing bound equal to alpha
    """

    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    _check_interval(n_min, n_max)
    lower = math.log(1 / alpha)

    def bound(g: float) -> float:
        return interval_bound(g, n_min, n_max, head)[0]

    if bound(lower) <= alpha:
        return lower
    return solve_decreasing_bound(bound, alpha, lower, lower + 1.0)


def mixture_grid(alpha: float, n_min: int, n_max: int, head: bool) -> MixtureGrid:
    """Solves g_alpha for the interval and derives K_alpha and eta_alpha from
    the minimising k of the integer form, ties going to the smaller k
    """

    g_alpha = solve_g_alpha_interval(alpha, n_min, n_max, head)
    _, k_alpha = interval_bound(g_alpha, n_min, n_max, head)
    return MixtureGrid(
        g_alpha=g_alpha,
        eta_alpha=(n_max / n_min) ** (1 / k_alpha),
        k_alpha=k_alpha,
        n_min=n_min,
        n_max=n_max,
        head=head,
    )


def mu1_mu2(family: PsiFamily, mu0: float, g: float, n_min: int, n_max: int) -> Tuple[float, float]:
    """Points above mu0 with D(mu1, mu0) = g / n_max and D(mu2, mu0) = g / n_min

    :raises NoSolutionError: when g / n_min is beyond the divergence limit
    """

    _check_interval(n_min, n_max)
    mu1 = inv_bregman(family, mu0, g / n_max, Side.UPPER)
    mu2 = inv_bregman(family, mu0, g / n_min, Side.UPPER)
    return float(mu1), float(mu2)


def _upper_roots(family: PsiFamily, mu0, d):
    """inv_bregman on the upper side, nan wherever d reaches the divergence limit
    """

    mu0, d = np.broadcast_arrays(np.asarray(mu0, dtype=float), np.asarray(d, dtype=float))
    feasible = d < np.asarray(family.sup_divergence(mu0, Side.UPPER))
    roots = np.asarray(inv_bregman(family, mu0, np.where(feasible, d, 0.0), Side.UPPER))
    return np.where(feasible, roots, np.nan)


def glr_cs_log_statistic(family: PsiFamily, mu0, n, xbar, g: float, n_min: int, n_max: int):
    """Statistic whose crossing of g removes mu0 from the GLR-like confidence set
    at time n: the tangent at mu2 before the interval, the divergence on it and
    the tangent at mu1 after it. The interval start is raised to n0(mu0) when
    the divergence can't reach g / n_min. Broadcasts over mu0, n and xbar
    """

    mu0 = np.asarray(mu0, dtype=float)
    n = np.asarray(n, dtype=float)
    xbar = np.asarray(xbar, dtype=float)

    start = np.minimum(np.maximum(n_min, n0(family, mu0, g)), n_max)
    mu1 = _upper_roots(family, mu0, g / n_max)
    mu2 = _upper_roots(family, mu0, g / start)

    with np.errstate(invalid="ignore"):
        above = n * (family.divergence(mu1, mu0) + family.divergence_grad(mu1, mu0) * (xbar - mu1))
        below = n * (family.divergence(mu2, mu0) + family.divergence_grad(mu2, mu0) * (xbar - mu2))
        middle = n * np.where(xbar >= mu0, family.divergence(np.maximum(xbar, mu0), mu0), 0.0)
        statistic = np.select([n < start, n <= n_max], [below, middle], above)
    return np.maximum(np.nan_to_num(statistic, nan=0.0), 0.0)


def _lift(per_component: np.ndarray, ndim: int) -> np.ndarray:
    """Reshapes (K+1, *mu0.shape) so the component axis broadcasts in front of
    arrays with ndim dimensions
    """

    extra = ndim - (per_component.ndim - 1)
    return per_component.reshape(
        (per_component.shape[0],) + (1,) * extra + per_component.shape[1:]
    )


def mixture_log_statistic(grid: MixtureGrid, family: PsiFamily, mu0, n, xbar):
    """log M_n(mu0): log-sum-exp over components of the log weight plus the
    log LR-like statistic against z_k. Components whose divergence target is
    beyond the divergence limit of mu0 are left out
    """

    mu0 = np.asarray(mu0, dtype=float)
    n = np.asarray(n, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    ndim = np.broadcast(mu0, n, xbar).ndim

    targets = grid.component_divergences.reshape((-1,) + (1,) * mu0.ndim)
    zs = _upper_roots(family, mu0[None], targets)
    head = grid.head & (grid.n_min > n0(family, mu0, grid.g_alpha))

    log_weights = np.broadcast_to(
        grid.log_weights.reshape((-1,) + (1,) * mu0.ndim), zs.shape
    ).copy()
    log_weights[0] = np.where(head, log_weights[0], -np.inf)
    log_weights = np.where(np.isnan(zs), -np.inf, log_weights)
    zs = np.where(np.isnan(zs), mu0[None], zs)

    zs = _lift(zs, ndim)
    log_weights = _lift(log_weights, ndim)
    mu0_lifted = mu0[None] if mu0.ndim == 0 else _lift(mu0[None], ndim)
    log_lr = n[None] * (family.divergence(zs, mu0_lifted)
        + family.divergence_grad(zs, mu0_lifted) * (xbar[None] - zs))
    with np.errstate(invalid="ignore"):
        terms = np.where(np.isinf(log_weights), -np.inf, log_weights + log_lr)
    return logsumexp(terms, axis=0)


def mixture_log_m0(grid: MixtureGrid, family: PsiFamily, mu0):
    """log M_0(mu0) with the head indicator evaluated at mu0
    """

    head = grid.head & (grid.n_min > n0(family, mu0, grid.g_alpha))
    return grid.log_m0(head)


def mixture_statistic(grid: MixtureGrid, family: PsiFamily, mu0, n, xbar):
    """M_n(mu0), +inf when it overflows
    """

    with np.errstate(over="ignore"):
        value = np.exp(mixture_log_statistic(grid, family, mu0, n, xbar))
    return float(value) if np.ndim(value) == 0 else value


def baseline_radius(kind: BaselineKind, alpha: float, n, sigma: float = 1.0, rho: float = 1260.0):
    """Radius of the stitching or normal mixture sub-Gaussian confidence sequence
    """

    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise DomainError(f"n must be at least 1, got {n}")
    if kind is BaselineKind.STITCHING:
        radius = (1.7 / np.sqrt(n)) * np.sqrt(np.log(np.log(2 * n)) + 0.72 * np.log(5.2 / alpha))
    else:
        radius = np.sqrt(2 * (1 / n + rho / n ** 2)
            * np.log((1 / (2 * alpha)) * np.sqrt((n + rho) / rho + 1)))
    return sigma * radius


def baseline_cis(kind: BaselineKind, alpha: float, n, xbar, sigma: float = 1.0,
        rho: float = 1260.0):
    """Lower endpoint of the stitching or normal mixture confidence sequence
    """

    value = np.asarray(xbar, dtype=float) - baseline_radius(kind, alpha, n, sigma, rho)
    return float(value) if np.ndim(value) == 0 else value


def glr_cs_config(family: PsiFamily, alpha: float, n_min: int, n_max: int,
        head: Optional[bool] = None) -> CsConfig:
    """GLR-like confidence sequence tuned to [n_min, n_max]. head defaults to
    n_min > 1, which covers every mu0 whose n0 is below n_min
    """

    head = n_min > 1 if head is None else head
    g_alpha = solve_g_alpha_interval(alpha, n_min, n_max, head)
    log.debug(f"glr cs on [{n_min}, {n_max}] alpha={alpha}: g={g_alpha}")
    return CsConfig(family=family, alpha=alpha, mode=CsMode.GLR_LIKE,
        intervals=[(n_min, n_max)], g_values=[g_alpha], head_flags=[head])


def mixture_cs_config(family: PsiFamily, alpha: float, n_min: int, n_max: int,
        head: Optional[bool] = None) -> CsConfig:
    """Discrete mixture confidence sequence sharing g_alpha with the GLR-like one
    """

    head = n_min > 1 if head is None else head
    grid = mixture_grid(alpha, n_min, n_max, head)
    return CsConfig(family=family, alpha=alpha, mode=CsMode.DISCRETE_MIXTURE,
        intervals=[(n_min, n_max)], g_values=[grid.g_alpha], head_flags=[head], mixture=grid)


def baseline_cs_config(kind: BaselineKind, alpha: float, sigma: float = 1.0,
        rho: float = 1260.0) -> CsConfig:
    """Config wrapper for the sub-Gaussian baselines
    """

    mode = (CsMode.STITCHING_BASELINE if kind is BaselineKind.STITCHING
        else CsMode.NORMAL_MIXTURE_BASELINE)
    return CsConfig(family=SubGaussian(sigma=sigma), alpha=alpha, mode=mode, sigma=sigma,
        rho=rho if kind is BaselineKind.NORMAL_MIXTURE else None)


def _interval_heads(intervals: Sequence[Tuple[int, int]]) -> List[bool]:
    heads = []
    previous_max = 1
    for index, (n_min, n_max) in enumerate(intervals):
        _check_interval(n_min, n_max)
        if n_min < previous_max and index > 0:
            raise OverlapError(f"interval {index} [{n_min}, {n_max}] overlaps the previous one")
        heads.append(n_min > previous_max)
        previous_max = n_max
    return heads


def multi_interval_bound(intervals: Sequence[Tuple[int, int]], g_values: Sequence[float]) -> float:
    """Sum over intervals of the single-interval bounds, the head term
    counted only when an interval starts after the previous one ends
    """

    if len(intervals) != len(g_values):
        raise DomainError("need one g value per interval")
    heads = _interval_heads(intervals)
    return sum(interval_bound(g, n_min, n_max, head)[0]
        for (n_min, n_max), g, head in zip(intervals, g_values, heads))


def multi_interval_cs(alpha: float, intervals: Sequence[Tuple[int, int]],
        g_values: Optional[Sequence[float]] = None,
        family: Optional[PsiFamily] = None) -> CsConfig:
    """Confidence sequence close to the Chernoff bound on each of several
    ordered intervals. Without g_values the level is split evenly

    :raises OverlapError: when intervals overlap
    :raises BudgetExceededError: when the bounds add up to more than alpha
    """

    family = family or SubGaussian()
    intervals = [tuple(interval) for interval in intervals]
    heads = _interval_heads(intervals)
    if g_values is None:
        share = alpha / len(intervals)
        g_values = [solve_g_alpha_interval(share, n_min, n_max, head)
            for (n_min, n_max), head in zip(intervals, heads)]

    total = multi_interval_bound(intervals, g_values)
    if total > alpha * (1 + 1e-9):
        log.error(f"multi-interval bound {total} exceeds alpha={alpha}")
        raise BudgetExceededError(f"multi-interval bound {total} exceeds alpha={alpha}")

    return CsConfig(family=family, alpha=alpha, mode=CsMode.GLR_LIKE,
        intervals=intervals, g_values=list(g_values), head_flags=heads)


def cs_rejects(config: CsConfig, mu0, n, xbar):
    """Whether mu0 lies outside the confidence set at time n given the sample
    mean xbar. Broadcasts over its array arguments
    """

    mu0 = np.asarray(mu0, dtype=float)
    if config.mode is CsMode.GLR_LIKE:
        rejected = np.zeros(np.broadcast(mu0, np.asarray(n), np.asarray(xbar)).shape, dtype=bool)
        for (n_min, n_max), g in zip(config.intervals, config.g_values):
            statistic = glr_cs_log_statistic(config.family, mu0, n, xbar, g, n_min, n_max)
            rejected |= statistic >= g
        return rejected

    if config.mode is CsMode.DISCRETE_MIXTURE:
        log_ratio = (mixture_log_statistic(config.mixture, config.family, mu0, n, xbar)
            - mixture_log_m0(config.mixture, config.family, mu0))
        return log_ratio >= math.log(1 / config.alpha)

    kind = (BaselineKind.STITCHING if config.mode is CsMode.STITCHING_BASELINE
        else BaselineKind.NORMAL_MIXTURE)
    return mu0 <= baseline_cis(kind, config.alpha, n, xbar, config.sigma, config.rho or 1260.0)


def _lower_endpoint(family: PsiFamily, rejects: Callable, xbar: float, binary_ok: bool) -> float:
    """Infimum of the non-rejected mu0 below xbar. Everything at or above xbar
    is always kept

    :raises GridSearchRequired: when the rejected set isn't known to be a ray and
        binary_ok is False
    """

    lower_m, upper_m = family.mean_domain
    high = min(float(xbar), float(np.nextafter(upper_m, lower_m)))
    if high <= lower_m:
        return lower_m

    if math.isfinite(lower_m):
        low = float(np.nextafter(lower_m, upper_m))
        if not bool(rejects(np.asarray(low))):
            return lower_m
    else:
        low = float(expand_bracket(lambda mu0: np.where(rejects(mu0), 1.0, -1.0), high, -1.0))

    if not binary_ok:
        raise GridSearchRequired(f"membership set of {family.name} needs a grid scan")

    return float(bisect_root(lambda mu0: np.where(rejects(mu0), -1.0, 1.0), low, high))


def _grid_lower(family: PsiFamily, rejects: Callable, xbar: float) -> float:
    """Grid scan for the infimum of the membership set at resolution
    GRID_RESOLUTION of the mean range, returning the last rejected grid point
    before the first kept one
    """

    lower_m, upper_m = family.mean_domain
    high = min(float(xbar), float(np.nextafter(upper_m, lower_m)))
    if math.isfinite(lower_m):
        low = float(np.nextafter(lower_m, upper_m))
    else:
        low = float(expand_bracket(lambda mu0: np.where(rejects(mu0), 1.0, -1.0), high, -1.0))
    span = (upper_m - lower_m) if math.isfinite(upper_m - lower_m) else (high - low)
    grid = np.append(np.arange(low, high, GRID_RESOLUTION * span), high)
    kept = ~np.asarray(rejects(grid), dtype=bool)
    if not np.any(kept):
        return high
    first = int(np.argmax(kept))
    if first == 0:
        return lower_m if math.isfinite(lower_m) else float(grid[0])
    return float(grid[first - 1])


def _search_lower(family: PsiFamily, rejects: Callable, xbar: float, binary_ok: bool) -> float:
    try:
        value = _lower_endpoint(family, rejects, xbar, binary_ok)
    except GridSearchRequired:
        log.debug(f"grid scan for {family.name} at xbar={xbar}")
        value = _grid_lower(family, rejects, xbar)
    # endpoints within solver tolerance of a finite domain edge are the edge
    lower_m = family.mean_domain[0]
    if math.isfinite(lower_m) and value - lower_m <= MEAN_XTOL:
        return lower_m
    return value


def _additive_lower(config: CsConfig, n: int, xbar: float) -> Optional[float]:
    """Closed-form lower endpoint for additive families with one interval
    """

    family = config.family
    (n_min, n_max), g = config.intervals[0], config.g_values[0]
    inverse = family.divergence_inverse(0.0, g / n, Side.UPPER)
    if inverse is None:
        return None
    if n_min <= n <= n_max:
        return xbar - float(inverse)

    anchor = n_min if n < n_min else n_max
    delta = float(family.divergence_inverse(0.0, g / anchor, Side.UPPER))
    slope = float(family.divergence_grad(delta, 0.0))
    return xbar - delta - (g / n - g / anchor) / slope


def ci_lower(config: CsConfig, n: int, xbar: float) -> float:
    """Lower endpoint of the one-sided confidence interval (lower, inf) at time n

    :param config: confidence sequence built by one of the *_config helpers
    :type config: CsConfig
    :param n: sample count, >= 1
    :type n: int
    :param xbar: sample mean after n observations
    :type xbar: float
    :return: float, never above xbar
    """

    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    family = config.family
    if config.mode in (CsMode.STITCHING_BASELINE, CsMode.NORMAL_MIXTURE_BASELINE):
        kind = (BaselineKind.STITCHING if config.mode is CsMode.STITCHING_BASELINE
            else BaselineKind.NORMAL_MIXTURE)
        return baseline_cis(kind, config.alpha, n, xbar, config.sigma, config.rho or 1260.0)

    if config.mode is CsMode.DISCRETE_MIXTURE:
        return mixture_ci_lower(config.mixture, family, config.alpha, n, xbar)

    if len(config.intervals) == 1 and family.kind is FamilyKind.ADDITIVE:
        closed_form = _additive_lower(config, n, xbar)
        if closed_form is not None:
            return min(closed_form, xbar)

    on_window = any(n_min <= n <= n_max for n_min, n_max in config.intervals)
    binary_ok = family.interval_cs or (len(config.intervals) == 1 and on_window)
    return _search_lower(family, lambda mu0: cs_rejects(config, mu0, n, xbar), xbar, binary_ok)


def mixture_ci_lower(grid: MixtureGrid, family: PsiFamily, alpha: float, n: int,
        xbar: float) -> float:
    """Infimum of {mu0 : M_n(mu0) / M_0(mu0) < 1/alpha}
    """

    threshold = math.log(1 / alpha)

    def rejects(mu0):
        return (mixture_log_statistic(grid, family, mu0, n, xbar)
            - mixture_log_m0(grid, family, mu0)) >= threshold

    return _search_lower(family, rejects, xbar, family.interval_cs)


def ci_upper(config: CsConfig, n: int, xbar: float) -> float:
    """Upper endpoint of the one-sided interval (-inf, upper), obtained as the
    negated lower endpoint for the mirrored family and data
    """

    if config.mode in (CsMode.STITCHING_BASELINE, CsMode.NORMAL_MIXTURE_BASELINE):
        return 2 * xbar - ci_lower(config, n, xbar)
    mirrored = config.copy(update={"family": MirroredFamily(config.family)})
    return -ci_lower(mirrored, n, -xbar)
