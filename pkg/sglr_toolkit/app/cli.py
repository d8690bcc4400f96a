"""Command line entrypoint for running the harness scenarios and the property
suite. Exit codes: 0 success, 1 failed checks, 2 invalid configuration
"""
import sys
from typing import Callable, List, Optional

import click

from sglr_toolkit.app.context import run_context
from sglr_toolkit.app.exceptions import ExperimentConfigError, SglrToolkitError
from sglr_toolkit.app.schemas.experiment import ExperimentSpec, PropertyResult, Scenario
from sglr_toolkit.app.services.config_parser import parse_config_file
from sglr_toolkit.app.services.experiments import (
    SCENARIO_RUNNERS, appd_checks, fig3_checks, fig5_checks, write_csv
)
from sglr_toolkit.app.services.property_suite import run_property_suite
from sglr_toolkit.app.utils import log


EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

PROPERTY_COLUMNS = ["schema_version", "name", "passed", "sample_size", "tolerance", "detail"]


def common_options(func: Callable) -> Callable:
    """Options shared by every scenario subcommand
    """

    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
            help="flat key=value scenario config"),
        click.option("--seed", type=int, default=None, help="base seed, overrides the config"),
        click.option("--reps", type=int, default=None, help="Monte Carlo replications"),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
            help="CSV output path, stdout when not given"),
        click.option("--workers", type=int, default=None, help="replication worker threads"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def report_checks(results: List[PropertyResult]) -> bool:
    """Prints one line per check to stderr and returns whether all passed
    """

    for result in results:
        status = "PASS" if result.passed else "FAIL"
        click.echo(f"{status} {result.name} (n={result.sample_size}, tol={result.tolerance:g}): "
            f"{result.detail}", err=True)
    return all(result.passed for result in results)


def run_cli_scenario(scenario: Scenario, config_path: Optional[str], seed: Optional[int],
        reps: Optional[int], out: Optional[str], workers: Optional[int],
        checks: Optional[Callable[[List[dict], ExperimentSpec], List[PropertyResult]]] = None):
    """Parses the scenario config, runs it and writes the CSV, exiting with the
    harness exit codes
    """

    with run_context() as run_id:
        log.info(f"starting {scenario.value} run {run_id}")
        try:
            spec = parse_config_file(scenario, config_path,
                {"seed": seed, "reps": reps, "out": out, "workers": workers})
        except ExperimentConfigError as exception:
            click.echo(f"invalid {scenario.value} config: {exception}", err=True)
            sys.exit(EXIT_CONFIG_ERROR)

        runner, columns = SCENARIO_RUNNERS[scenario]
        try:
            rows = runner(spec)
        except SglrToolkitError as exception:
            log.exception(f"{scenario.value} run failed")
            click.echo(f"{scenario.value} failed: {exception}", err=True)
            sys.exit(EXIT_CHECK_FAILED)

        text = write_csv(rows, columns, spec.out)
        if not spec.out:
            click.echo(text, nl=False)
        if checks is not None and not report_checks(checks(rows, spec)):
            sys.exit(EXIT_CHECK_FAILED)


@click.group()
def cli():
    """Sequential GLR-like tests and confidence sequences: experiment harness
    """


@cli.command("fig3")
@common_options
def fig3(config_path, seed, reps, out, workers):
    """Constant boundary values against Lorden's over a grid of gaps
    """

    run_cli_scenario(Scenario.FIG3_BOUNDARY, config_path, seed, reps, out, workers,
        lambda rows, spec: fig3_checks(rows, spec.alpha))


@cli.command("fig5")
@common_options
def fig5(config_path, seed, reps, out, workers):
    """Confidence sequence widths relative to the CLT interval
    """

    run_cli_scenario(Scenario.FIG5_WIDTHRATIO, config_path, seed, reps, out, workers, fig5_checks)


@cli.command("appd-gaussian")
@common_options
def appd_gaussian(config_path, seed, reps, out, workers):
    """Rejection rates and sample sizes for Gaussian data
    """

    run_cli_scenario(Scenario.APPD_GAUSSIAN, config_path, seed, reps, out, workers, appd_checks)


@cli.command("appd-bernoulli")
@common_options
def appd_bernoulli(config_path, seed, reps, out, workers):
    """Rejection rates and sample sizes for Bernoulli data
    """

    run_cli_scenario(Scenario.APPD_BERNOULLI, config_path, seed, reps, out, workers, appd_checks)


@cli.command("multistream")
@common_options
def multistream(config_path, seed, reps, out, workers):
    """Calibration and null crossing rate of the combined multi-stream test
    """

    run_cli_scenario(Scenario.MULTISTREAM, config_path, seed, reps, out, workers)


@cli.command("coverage")
@common_options
def coverage(config_path, seed, reps, out, workers):
    """Uniform coverage of the confidence sequences
    """

    run_cli_scenario(Scenario.COVERAGE, config_path, seed, reps, out, workers)


@cli.command("properties")
@click.option("--seed", type=int, default=0, help="base seed")
@click.option("--reps", type=int, default=500, help="paths per Monte Carlo check")
@click.option("--coverage-reps", type=int, default=2000, help="paths per coverage check")
@click.option("--coverage-horizon", type=int, default=10000, help="horizon of the coverage checks")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV report path")
def properties(seed, reps, coverage_reps, coverage_horizon, out):
    """Runs the property suite, exit code 1 when any check fails
    """

    if min(reps, coverage_reps, coverage_horizon) < 1 or seed < 0:
        click.echo("seed must be nonnegative and counts at least 1", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    with run_context() as run_id:
        log.info(f"starting property suite run {run_id}")
        results = run_property_suite(seed, reps, coverage_reps, coverage_horizon)
        if out:
            write_csv([result.dict() for result in results], PROPERTY_COLUMNS, out)
        if not report_checks(results):
            sys.exit(EXIT_CHECK_FAILED)


if __name__ == "__main__":
    cli()
