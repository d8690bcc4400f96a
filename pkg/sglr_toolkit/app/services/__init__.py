from .divergences import bregman, inv_bregman, log_glr_like, log_lr_like, dstar
from .boundaries import (
    crossing_bound_constant, crossing_bound_general, solve_g_alpha_constant,
    solve_g_alpha_lorden
    )
from .confidence_sequences import ci_lower, ci_upper, glr_cs_config, mixture_cs_config
from .power_design import design_test_from_power
from .sequential_tests import SequentialTest, first_crossing
from .multistream import MultiStreamTest, calibrate_multistream
from .config_parser import parse_config_file
from .experiments import run_scenario
from .property_suite import run_property_suite
