"""Boundary functions g(n) and the stitching parameters used to bound
their crossing probabilities
"""

# pylint: disable=no-name-in-module
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, validator


class Boundary(BaseModel):
    """Boundary g(n) evaluated on n >= 1. Subclasses implement evaluate_log so
    that huge epoch times eta**k can be handled without overflow
    """

    class Config:
        """Boundaries are immutable once built
        """

        allow_mutation = False

    def evaluate_log(self, log_n):
        """Evaluates g at n = exp(log_n)
        """

        raise NotImplementedError

    def __call__(self, n):
        return self.evaluate_log(np.log(np.asarray(n, dtype=float)))


class ConstantBoundary(Boundary):
    """g(n) = g for every n
    """

    g: float

    @validator("g")
    def _nonnegative(cls, value):
        # pylint: disable=no-self-argument
        if value < 0:
            raise ValueError("g must be nonnegative")
        return value

    def evaluate_log(self, log_n):
        return np.full_like(np.asarray(log_n, dtype=float), self.g)


class LogLogBoundary(Boundary):
    """g(n) = c [log(1/alpha) + 2 log(log_c(c n))]
    """

    c: float
    alpha: float

    @validator("c")
    def _c_above_one(cls, value):
        # pylint: disable=no-self-argument
        if not value > 1:
            raise ValueError("c must be greater than 1")
        return value

    @validator("alpha")
    def _alpha_in_unit(cls, value):
        # pylint: disable=no-self-argument
        if not 0 < value <= 1:
            raise ValueError("alpha must be in (0, 1]")
        return value

    def evaluate_log(self, log_n):
        log_n = np.asarray(log_n, dtype=float)
        return self.c * (np.log(1 / self.alpha) + 2 * np.log1p(log_n / np.log(self.c)))


class PiecewiseConstantBoundary(Boundary):
    """g(n) = values[j] for breaks[j-1] <= n < breaks[j], with values[0] used
    below the first break and values[-1] from the last break on
    """

    breaks: List[float]
    values: List[float]

    @validator("values")
    def _shape(cls, value, values):
        # pylint: disable=no-self-argument
        breaks = values.get("breaks", [])
        if len(value) != len(breaks) + 1:
            raise ValueError("values must have exactly one more entry than breaks")
        if any(entry < 0 for entry in value):
            raise ValueError("values must be nonnegative")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValueError("breaks must be strictly increasing")
        return value

    def evaluate_log(self, log_n):
        log_n = np.asarray(log_n, dtype=float)
        # a small slack so that exp(log(b)) lands on the break b itself
        index = np.searchsorted(np.log(self.breaks), log_n + 1e-12, side="right")
        return np.asarray(self.values, dtype=float)[index]


class StitchParams(BaseModel):
    """Parameters for the stitching bound of a general boundary. eta pins a
    single epoch ratio, otherwise the infimum over eta is searched on
    a geometric grid of log eta values and refined
    """

    eta: Optional[float] = None
    k_max: int = 100000
    eta_grid_points: int = 64
    log_eta_min: float = 0.01
    log_eta_max: float = 5.0

    class Config:
        """Immutable
        """

        allow_mutation = False

    @validator("eta")
    def _eta_above_one(cls, value):
        # pylint: disable=no-self-argument
        if value is not None and not value > 1:
            raise ValueError("eta must be greater than 1")
        return value

    @validator("k_max")
    def _k_max_positive(cls, value):
        # pylint: disable=no-self-argument
        if value < 1:
            raise ValueError("k_max must be at least 1")
        return value
