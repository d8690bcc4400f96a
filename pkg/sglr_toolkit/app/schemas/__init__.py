from .boundary import (
    Boundary, ConstantBoundary, LogLogBoundary, PiecewiseConstantBoundary, StitchParams
    )
from .cs import CsConfig, CsMode, MixtureGrid
from .experiment import ExperimentSpec, PropertyResult, ResultRow, Scenario
from .multistream import LogInverse, MultiStreamCal
