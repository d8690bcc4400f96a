"""Used for parsing scenario config files. A scenario config is flat
key=value text; every scenario has its own cerberus schema and keys that are
not in it are rejected
"""

import configparser
import os
from typing import Dict, Optional

from cerberus import Validator

from sglr_toolkit.app.exceptions import ExperimentConfigError
from sglr_toolkit.app.schemas.experiment import ExperimentSpec, Scenario
from sglr_toolkit.app.utils import log


def _to_int(value):
    return value if value is None else int(value)


def _to_float(value):
    return value if value is None else float(value)


def _float_list(value):
    if isinstance(value, str):
        return [float(item) for item in value.split(",") if item.strip()]
    return value


def _level(default: float) -> dict:
    return {"type": "float", "coerce": _to_float, "min": 1e-12, "max": 0.999999, "default": default}


def _count(default: Optional[int] = None, minimum: int = 1) -> dict:
    rule = {"type": "integer", "coerce": _to_int, "min": minimum}
    if default is None:
        rule["nullable"] = True
        rule["default"] = None
    else:
        rule["default"] = default
    return rule


COMMON_SCHEMA = {
    "seed": {"type": "integer", "coerce": _to_int, "min": 0, "max": 2 ** 64 - 1, "default": 0},
    "reps": _count(2000),
    "workers": _count(1),
    "out": {"type": "string", "nullable": True, "default": None},
}

SCENARIO_SCHEMAS = {
    Scenario.FIG3_BOUNDARY: {
        "alpha": _level(0.05),
        "sigma": {"type": "float", "coerce": _to_float, "min": 1e-12, "default": 1.0},
        "inv_gap_min_exp": _count(1),
        "inv_gap_max_exp": _count(10),
        "points_per_decade": _count(4),
    },
    Scenario.FIG5_WIDTHRATIO: {
        "alpha": _level(0.025),
        "sigma": {"type": "float", "coerce": _to_float, "min": 1e-12, "default": 1.0},
        "rho": {"type": "float", "coerce": _to_float, "min": 1e-12, "default": 1260.0},
        "n_max": _count(1000000),
        "points_per_decade": _count(20),
        "window1_min": _count(1),
        "window1_max": _count(100000),
        "window2_min": _count(5000),
        "window2_max": _count(400000),
    },
    Scenario.APPD_GAUSSIAN: {
        "alpha": _level(0.1),
        "beta": _level(0.1),
        "sigma": {"type": "float", "coerce": _to_float, "min": 1e-12, "default": 1.0},
        "mu0": {"type": "float", "coerce": _to_float, "default": 0.0},
        "mu1": {"type": "float", "coerce": _to_float, "default": 0.1},
        "mu_grid": {"type": "list", "coerce": _float_list, "minlength": 1,
            "schema": {"type": "float"}, "default": [-0.05, 0.0, 0.05, 0.1, 0.15, 0.2]},
        "horizon": _count(),
        "n_star": _count(),
    },
    Scenario.APPD_BERNOULLI: {
        "alpha": _level(0.1),
        "beta": _level(0.1),
        "mu0": {"type": "float", "coerce": _to_float, "min": 1e-9, "max": 1 - 1e-9, "default": 0.1},
        "mu1": {"type": "float", "coerce": _to_float, "min": 1e-9, "max": 1 - 1e-9, "default": 0.12},
        "mu_grid": {"type": "list", "coerce": _float_list, "minlength": 1,
            "schema": {"type": "float", "min": 0.0, "max": 1.0},
            "default": [0.09, 0.1, 0.11, 0.12, 0.13, 0.14]},
        "horizon": _count(),
        "n_star": _count(),
        "strategy": {"type": "string", "allowed": ["first", "stable"], "default": "first"},
    },
    Scenario.MULTISTREAM: {
        "alpha": _level(0.05),
        "streams": _count(2),
        "c": {"type": "float", "coerce": _to_float, "min": 1.000001, "default": 2.0},
        "mu0": {"type": "float", "coerce": _to_float, "default": 0.0},
        "mc_reps": _count(100000, minimum=10000),
        "horizon": _count(1000),
    },
    Scenario.COVERAGE: {
        "alpha": _level(0.05),
        "family": {"type": "string", "allowed": ["gaussian", "bernoulli"], "default": "gaussian"},
        "mu": {"type": "float", "coerce": _to_float, "default": 0.0},
        "sigma": {"type": "float", "coerce": _to_float, "min": 1e-12, "default": 1.0},
        "n_min": _count(10),
        "n_max": _count(1000),
        "horizon": _count(10000),
        "drift_amplitude": {"type": "float", "coerce": _to_float, "min": 0.0, "default": 0.5},
    },
}


def validate_schema(scenario: Scenario, config: dict) -> dict:
    """Validates and normalises the scenario config dict, filling defaults.
    ExperimentConfigError is raised if the config is not valid
    """

    schema = {**COMMON_SCHEMA, **SCENARIO_SCHEMAS[scenario]}
    validator = Validator(schema)
    if not validator.validate(config):
        log.error(f"{scenario.value} config failed validation")
        log.error(validator.errors)
        raise ExperimentConfigError(validator.errors)

    document = validator.document
    config_errors = []
    if scenario is Scenario.COVERAGE and document["n_min"] > document["n_max"]:
        config_errors.append(f"n_min {document['n_min']} above n_max {document['n_max']}")
    if scenario is Scenario.COVERAGE and document["family"] == "bernoulli" and not 0 < document["mu"] < 1:
        config_errors.append(f"bernoulli mean {document['mu']} must be in (0, 1)")
    if scenario in (Scenario.APPD_GAUSSIAN, Scenario.APPD_BERNOULLI) and not document["mu1"] > document["mu0"]:
        config_errors.append(f"mu1 {document['mu1']} must exceed mu0 {document['mu0']}")
    if scenario is Scenario.FIG3_BOUNDARY and document["inv_gap_min_exp"] >= document["inv_gap_max_exp"]:
        config_errors.append("inv_gap_min_exp must be below inv_gap_max_exp")
    if scenario is Scenario.FIG5_WIDTHRATIO:
        for window in ("window1", "window2"):
            if document[f"{window}_min"] > document[f"{window}_max"]:
                config_errors.append(f"{window}_min above {window}_max")

    if len(config_errors) > 0:
        message = f"{scenario.value} config errors: {', '.join(config_errors)}"
        log.error(message)
        raise ExperimentConfigError(message)
    return document


def load_config_text(config_path: str) -> str:
    """Loads the raw config text from the given filepath
    """

    if not os.path.isfile(config_path):
        log.error(f"{config_path} is not a file")
        raise ExperimentConfigError(f"{config_path} is not a file")

    with open(config_path, "r", encoding="utf-8") as config_file:
        return config_file.read()


def parse_config_text(text: str) -> Dict[str, str]:
    """Parses flat key=value text into a dict of strings
    """

    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exception:
        log.error(f"could not parse scenario config: {exception}")
        raise ExperimentConfigError(f"could not parse scenario config: {exception}") from exception
    return dict(parser["experiment"])


def parse_config_file(scenario: Scenario, config_path: Optional[str] = None,
        overrides: Optional[dict] = None) -> ExperimentSpec:
    """Parses the config file, applies CLI overrides and returns the resolved
    ExperimentSpec. With no file the scenario defaults are used

    :param scenario: scenario the config belongs to
    :type scenario: Scenario
    :param config_path: path to a flat key=value file
    :type config_path: str
    :param overrides: values given on the command line, None entries are ignored
    :type overrides: dict
    :return: ExperimentSpec
    """

    config = parse_config_text(load_config_text(config_path)) if config_path else {}
    config.update({key: value for key, value in (overrides or {}).items() if value is not None})
    document = validate_schema(scenario, config)
    return build_spec(scenario, document)


def build_spec(scenario: Scenario, document: dict) -> ExperimentSpec:
    """Maps a validated document onto ExperimentSpec, keeping scenario-specific
    keys in extra
    """

    known = set(ExperimentSpec.__fields__) - {"scenario", "extra", "family"}
    fields = {key: value for key, value in document.items() if key in known and value is not None}
    extra = {key: value for key, value in document.items()
        if key not in known and key != "family" and value is not None}
    family = document.get("family") or (
        "bernoulli" if scenario is Scenario.APPD_BERNOULLI else "gaussian"
    )
    try:
        return ExperimentSpec(scenario=scenario, family=family, extra=extra, **fields)
    except ValueError as exception:
        log.error(f"invalid {scenario.value} settings: {exception}")
        raise ExperimentConfigError(str(exception)) from exception
