"""Calibration inputs for the combined test over K independent streams
"""

# pylint: disable=no-name-in-module
import math
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, validator

from sglr_toolkit.app.config import CONFIG


MIN_MC_REPS = 10000
VALIDATION_POINTS = CONFIG["multistream"].getint("validation_points")


class LogInverse:
    """h(u) = scale log(1/u), the alpha-dependent part of boundaries written as
    f(n) + scale log(1/alpha)

    :param scale: multiplier, positive
    :type scale: float
    """

    def __init__(self, scale: float = 1.0):
        if not scale > 0:
            raise ValueError(f"scale must be positive, got {scale}")
        self.scale = scale

    def __call__(self, u):
        return -self.scale * np.log(np.asarray(u, dtype=float))

    def __repr__(self):
        return f"LogInverse(scale={self.scale})"


def log_inverse_h(scale: float = 1.0) -> LogInverse:
    return LogInverse(scale)


class MultiStreamCal(BaseModel):
    """Per-stream h functions, Monte Carlo size and seed for calibrating the
    threshold epsilon. Each h must be nonnegative, nonincreasing on (0, 1] and
    grow without bound as u goes to 0; this is checked on a log grid
    """

    K: int
    h_funcs: List[Callable]
    mc_reps: int = MIN_MC_REPS
    seed: int = 0
    eps_grid: Optional[List[float]] = None

    class Config:
        """Immutable
        """

        allow_mutation = False

    @validator("K")
    def _k_positive(cls, value):
        # pylint: disable=no-self-argument
        if value < 1:
            raise ValueError("K must be at least 1")
        return value

    @validator("h_funcs")
    def _valid_h(cls, value, values):
        # pylint: disable=no-self-argument
        if "K" in values and len(value) != values["K"]:
            raise ValueError(f"expected {values['K']} h functions, got {len(value)}")
        grid = np.geomspace(1e-300, 1.0, VALIDATION_POINTS)
        for h in value:
            h_values = np.asarray(h(grid), dtype=float)
            if np.any(h_values < 0) or np.any(np.diff(h_values) > 0):
                raise ValueError(f"{h!r} must be nonnegative and nonincreasing on (0, 1]")
            if not h_values[0] > h_values[VALIDATION_POINTS // 2] > h_values[-1] or not math.isfinite(h_values[-1]):
                raise ValueError(f"{h!r} must grow without bound as u goes to 0")
        return value

    @validator("mc_reps")
    def _enough_reps(cls, value):
        # pylint: disable=no-self-argument
        if value < MIN_MC_REPS:
            raise ValueError(f"mc_reps must be at least {MIN_MC_REPS}")
        return value

    @validator("eps_grid")
    def _sorted_grid(cls, value):
        # pylint: disable=no-self-argument
        if value is not None and (not value or any(b <= a for a, b in zip(value, value[1:]))):
            raise ValueError("eps_grid must be nonempty and strictly increasing")
        return value
