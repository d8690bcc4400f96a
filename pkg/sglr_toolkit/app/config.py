"""Returns a config object containing default settings
"""

import os
import configparser

CONFIG_FILE = "/etc/sglr_toolkit/config.ini"

if "SGLR_TOOLKIT_CONFIG_PATH" in os.environ:
    CONFIG_FILE = os.environ["SGLR_TOOLKIT_CONFIG_PATH"]

DEFAULTS = {
    "numerics": {
        "mean_xtol": "1e-10",
        "max_iterations": "200",
        "g_xtol": "1e-8",
        "k_cap": "1000000",
        "early_exit_run": "50",
        "grid_resolution": "1e-5",
        "series_floor": "1e-16",
    },
    "stitching": {
        "eta_grid_points": "64",
        "log_eta_min": "0.01",
        "log_eta_max": "5.0",
        "k_max": "100000",
    },
    "multistream": {
        "eps_step": "0.001",
        "validation_points": "64",
    },
    "simulation": {
        "workers": "4",
        "block_size": "250",
    },
    "logging": {
        "level": "INFO",
    },
}

CONFIG = configparser.ConfigParser()
CONFIG.read_dict(DEFAULTS)
CONFIG.read(CONFIG_FILE)
