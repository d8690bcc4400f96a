"""Confidence sequence configurations
"""

# pylint: disable=no-name-in-module
import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, validator

from sglr_toolkit.app.families import PsiFamily


class CsMode(str, Enum):
    """How the confidence sequence is built
    """

    GLR_LIKE = "glr_like"
    DISCRETE_MIXTURE = "discrete_mixture"
    STITCHING_BASELINE = "stitching"
    NORMAL_MIXTURE_BASELINE = "normal_mixture"


class MixtureGrid(BaseModel):
    """Discrete mixture over the alternatives z_k solving D(z_k, mu0) = g / (n_min eta^k),
    k = 0..K. The k = 0 head component only enters when n_min exceeds n0(mu0)
    """

    g_alpha: float
    eta_alpha: float
    k_alpha: int
    n_min: int
    n_max: int
    head: bool

    class Config:
        """Immutable
        """

        allow_mutation = False

    @property
    def component_divergences(self) -> np.ndarray:
        """Divergence targets g / (n_min eta^k) for k = 0..K
        """

        ks = np.arange(self.k_alpha + 1, dtype=float)
        return self.g_alpha / (self.n_min * self.eta_alpha ** ks)

    @property
    def log_weights(self) -> np.ndarray:
        """Log mixture weights: -g for the head, -g/eta for the others
        """

        weights = np.full(self.k_alpha + 1, -self.g_alpha / self.eta_alpha)
        weights[0] = -self.g_alpha
        return weights

    def log_m0(self, head=None):
        """Log of the initial value M_0 = e^-g 1(head) + K e^-g/eta. head may be an
        array of per-mu0 indicators
        """

        head = self.head if head is None else head
        base = math.log(self.k_alpha) - self.g_alpha / self.eta_alpha
        return np.logaddexp(base, np.where(head, -self.g_alpha, -np.inf))


class CsConfig(BaseModel):
    """Everything needed to evaluate a one-sided lower confidence sequence
    """

    family: PsiFamily
    alpha: float
    mode: CsMode
    intervals: List[Tuple[int, int]] = []
    g_values: List[float] = []
    head_flags: List[bool] = []
    mixture: Optional[MixtureGrid] = None
    sigma: float = 1.0
    rho: Optional[float] = None

    class Config:
        """Families aren't pydantic models
        """

        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("alpha")
    def _alpha_in_unit(cls, value):
        # pylint: disable=no-self-argument
        if not 0 < value <= 1:
            raise ValueError("alpha must be in (0, 1]")
        return value
