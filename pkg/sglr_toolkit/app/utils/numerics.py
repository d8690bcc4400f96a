"""Numerical helpers shared by the divergence, boundary and confidence
sequence services
"""
from typing import Callable, Tuple

import numpy as np

from sglr_toolkit.app.config import CONFIG


MEAN_XTOL = CONFIG["numerics"].getfloat("mean_xtol")
MAX_ITERATIONS = CONFIG["numerics"].getint("max_iterations")
K_CAP = CONFIG["numerics"].getint("k_cap")
EARLY_EXIT_RUN = CONFIG["numerics"].getint("early_exit_run")

_K_CHUNK = 1024


def bisect_root(func: Callable[[np.ndarray], np.ndarray], lower, upper,
        xtol: float = MEAN_XTOL, max_iterations: int = MAX_ITERATIONS) -> np.ndarray:
    """Elementwise bracketed bisection. func must change sign between lower and
    upper for every element; the sign at lower is taken as the reference so both
    increasing and decreasing objectives are handled

    :param func: vectorised function of the unknown
    :type func: Callable
    :param lower: lower ends of the brackets
    :type lower: array-like
    :param upper: upper ends of the brackets
    :type upper: array-like
    :param xtol: absolute tolerance on the unknown
    :type xtol: float
    :param max_iterations: hard cap on halvings
    :type max_iterations: int
    :return: np.ndarray of roots, shaped like the broadcast brackets
    """

    lower, upper = np.broadcast_arrays(np.asarray(lower, dtype=float),
        np.asarray(upper, dtype=float))
    lower = lower.copy()
    upper = upper.copy()
    reference = np.sign(func(lower))

    for _ in range(max_iterations):
        if np.all(np.abs(upper - lower) <= xtol):
            break
        mid = 0.5 * (lower + upper)
        same_side = np.sign(func(mid)) == reference
        lower = np.where(same_side, mid, lower)
        upper = np.where(same_side, upper, mid)

    return 0.5 * (lower + upper)


def expand_bracket(func: Callable[[np.ndarray], np.ndarray], start, direction: float,
        max_doublings: int = 1100) -> np.ndarray:
    """Walks away from start in the given direction, doubling the step, until func
    becomes nonnegative for every element. Returns the reached points

    :param func: vectorised function, negative at start
    :type func: Callable
    :param start: starting points
    :type start: array-like
    :param direction: +1.0 to walk up, -1.0 to walk down
    :type direction: float
    :return: np.ndarray
    """

    start = np.asarray(start, dtype=float)
    step = np.maximum(1.0, np.abs(start))
    point = start + direction * step
    for _ in range(max_doublings):
        pending = func(point) < 0
        if not np.any(pending):
            break
        step = np.where(pending, 2.0 * step, step)
        point = np.where(pending, start + direction * step, point)
    return point


def integer_stitch_min(g: float, ratio: float, k_cap: int = K_CAP,
        full_scan: bool = False, early_exit_run: int = EARLY_EXIT_RUN) -> Tuple[float, int]:
    """Minimises k * exp(-g * ratio**(1/k)) over integers k in [1, k_cap].
    The scan is done in log space and, unless full_scan is set, stops once the
    objective has increased for early_exit_run consecutive k past the best value.
    Ties go to the smaller k

    :param g: boundary value, positive
    :type g: float
    :param ratio: value in (0, 1]
    :type ratio: float
    :return: tuple of (minimum value, minimising k)
    """

    best_log = np.inf
    best_k = 1
    rising = 0
    previous = np.inf
    log_ratio = np.log(ratio)

    for start in range(1, k_cap + 1, _K_CHUNK):
        ks = np.arange(start, min(start + _K_CHUNK, k_cap + 1), dtype=float)
        values = np.log(ks) - g * np.exp(log_ratio / ks)
        index = int(np.argmin(values))
        if values[index] < best_log:
            best_log = float(values[index])
            best_k = int(ks[index])

        if full_scan:
            continue

        steps = np.diff(np.concatenate(([previous], values))) > 0
        for is_rising, k in zip(steps, ks):
            rising = rising + 1 if is_rising and k > best_k else 0
        previous = values[-1]
        if rising >= early_exit_run:
            break

    return float(np.exp(best_log)), best_k
