"""Experiment descriptions and the rows written to result CSVs
"""

# pylint: disable=no-name-in-module
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, root_validator, validator


SCHEMA_VERSION = 1


class Scenario(str, Enum):
    """Experiments the harness can run
    """

    FIG3_BOUNDARY = "fig3-boundary"
    FIG5_WIDTHRATIO = "fig5-widthratio"
    APPD_GAUSSIAN = "appd-gaussian"
    APPD_BERNOULLI = "appd-bernoulli"
    MULTISTREAM = "multistream"
    COVERAGE = "coverage"


class ExperimentSpec(BaseModel):
    """Fully resolved scenario settings, after config file and CLI overrides
    """

    scenario: Scenario
    family: str = "gaussian"
    sigma: float = 1.0
    alpha: float = 0.1
    beta: float = 0.1
    mu0: float = 0.0
    mu1: float = 0.1
    mu_grid: List[float] = [0.0]
    reps: int = 2000
    horizon: Optional[int] = None
    seed: int = 0
    out: Optional[str] = None
    workers: int = 1
    n_star: Optional[int] = None
    extra: Dict[str, Any] = {}

    class Config:
        """Immutable
        """

        allow_mutation = False

    @validator("reps", "horizon", "workers")
    def _at_least_one(cls, value, field):
        # pylint: disable=no-self-argument
        if value is not None and value < 1:
            raise ValueError(f"{field.name} must be at least 1")
        return value

    @validator("mu_grid")
    def _nonempty(cls, value):
        # pylint: disable=no-self-argument
        if not value:
            raise ValueError("mu_grid must not be empty")
        return value

    @validator("alpha", "beta")
    def _level(cls, value, field):
        # pylint: disable=no-self-argument
        if not 0 < value < 1:
            raise ValueError(f"{field.name} must be in (0, 1)")
        return value

    @validator("seed")
    def _seed_64bit(cls, value):
        # pylint: disable=no-self-argument
        if not 0 <= value < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return value


class ResultRow(BaseModel):
    """One (mu, method) row of a Monte Carlo table. rejection_rate and
    early_stop_rate are frequencies, mean_sample_size lies in [1, horizon]
    """

    scenario: Scenario
    method: str
    mu: float
    rejection_rate: float
    mean_sample_size: float
    early_stop_rate: Optional[float] = None
    reps: int
    horizon: int
    n_star: Optional[int] = None

    class Config:
        """Immutable
        """

        allow_mutation = False

    @validator("rejection_rate", "early_stop_rate")
    def _rate(cls, value, field):
        # pylint: disable=no-self-argument
        if value is not None and not 0 <= value <= 1:
            raise ValueError(f"{field.name} must be in [0, 1], got {value}")
        return value

    @root_validator(skip_on_failure=True)
    def _size_within_horizon(cls, values):
        # pylint: disable=no-self-argument
        size = values["mean_sample_size"]
        if not 1 <= size <= values["horizon"]:
            raise ValueError(f"mean_sample_size {size} outside [1, {values['horizon']}]")
        return values


class PropertyResult(BaseModel):
    """Outcome of one property check of the property suite
    """

    name: str
    passed: bool
    sample_size: int
    tolerance: float
    detail: str = ""

    class Config:
        """Immutable
        """

        allow_mutation = False
