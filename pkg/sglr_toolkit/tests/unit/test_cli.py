"""Tests for the command line entrypoint
"""
from click.testing import CliRunner
from mock import Mock, patch

from sglr_toolkit.app.cli import EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, cli
from sglr_toolkit.app.exceptions import GridExhaustedError
from sglr_toolkit.app.schemas.experiment import PropertyResult, Scenario
from sglr_toolkit.app.services.experiments import APPD_COLUMNS, MULTISTREAM_COLUMNS


APPD_CONFIG = "n_star = 20\nmu_grid = 0.0\nreps = 10\n"


def passed(name: str, ok: bool = True) -> PropertyResult:
    """PropertyResult with the given outcome
    """

    return PropertyResult(name=name, passed=ok, sample_size=10, tolerance=0.01)


class TestScenarioCommands:
    """Tests for the scenario subcommands
    """

    def test_csv_to_stdout(self, scenario_config):
        """CSV goes to stdout when no --out is given
        """

        result = CliRunner().invoke(cli, ["appd-gaussian", "--config", scenario_config(APPD_CONFIG),
            "--seed", "3"])
        assert result.exit_code == 0, result.output
        assert ",".join(APPD_COLUMNS) in result.output
        assert "1,appd-gaussian,sglr," in result.output

    def test_csv_to_file(self, scenario_config, tmp_path):
        """--out writes the file and keeps stdout free of CSV
        """

        out = tmp_path / "appd.csv"
        result = CliRunner().invoke(cli, ["appd-gaussian", "--config", scenario_config(APPD_CONFIG),
            "--out", str(out), "--workers", "2"])
        assert result.exit_code == 0, result.output
        assert out.read_text(encoding="utf-8").startswith(",".join(APPD_COLUMNS) + "\n")
        assert ",".join(APPD_COLUMNS) not in result.output

    def test_invalid_config(self, scenario_config):
        """Unknown keys exit with the config error code
        """

        result = CliRunner().invoke(cli, ["coverage", "--config", scenario_config("colour = blue\n")])
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert "invalid coverage config" in result.output

    def test_invalid_override(self):
        """Command line values go through the same validation
        """

        result = CliRunner().invoke(cli, ["fig5", "--reps", "0"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_missing_config(self, tmp_path):
        """A config path that doesn't exist is a config error
        """

        result = CliRunner().invoke(cli, ["multistream", "--config", str(tmp_path / "none.conf")])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_run_failure(self):
        """Errors raised while running exit with the failure code
        """

        failing = {Scenario.MULTISTREAM: (Mock(side_effect=GridExhaustedError("no eps")),
            MULTISTREAM_COLUMNS)}
        with patch.dict("sglr_toolkit.app.cli.SCENARIO_RUNNERS", failing):
            result = CliRunner().invoke(cli, ["multistream"])
        assert result.exit_code == EXIT_CHECK_FAILED
        assert "multistream failed: no eps" in result.output

    def test_failed_checks(self, scenario_config):
        """A failed scenario check exits with the failure code after writing the CSV
        """

        config_path = scenario_config("inv_gap_min_exp = 1\ninv_gap_max_exp = 2\npoints_per_decade = 1\n")
        with patch("sglr_toolkit.app.cli.fig3_checks", return_value=[passed("fig3_round_trip", False)]):
            result = CliRunner().invoke(cli, ["fig3", "--config", config_path])
        assert result.exit_code == EXIT_CHECK_FAILED
        assert "FAIL fig3_round_trip" in result.output
        assert "schema_version,inv_gap" in result.output


    def test_appd_table_miss(self, scenario_config):
        """A cell outside the published tolerance fails the appd run
        """

        with patch("sglr_toolkit.app.cli.appd_checks",
                return_value=[passed("appd_gaussian_rejection_rate_sglr", False)]) as checks:
            result = CliRunner().invoke(cli, ["appd-gaussian", "--config", scenario_config(APPD_CONFIG)])
        assert result.exit_code == EXIT_CHECK_FAILED
        assert "FAIL appd_gaussian_rejection_rate_sglr" in result.output
        checks.assert_called_once()


class TestProperties:
    """Tests for the properties subcommand
    """

    def test_all_pass(self, tmp_path):
        """Exit 0 and a CSV report when every property holds
        """

        out = tmp_path / "properties.csv"
        with patch("sglr_toolkit.app.cli.run_property_suite",
                return_value=[passed("a"), passed("b")]) as suite:
            result = CliRunner().invoke(cli, ["properties", "--seed", "5", "--reps", "20",
                "--out", str(out)])
        assert result.exit_code == 0, result.output
        suite.assert_called_once_with(5, 20, 2000, 10000)
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "schema_version,name,passed,sample_size,tolerance,detail"
        assert lines[1] == "1,a,true,10,0.010000,"

    def test_failure(self):
        """Exit 1 when any property fails
        """

        with patch("sglr_toolkit.app.cli.run_property_suite",
                return_value=[passed("a"), passed("b", False)]):
            result = CliRunner().invoke(cli, ["properties"])
        assert result.exit_code == EXIT_CHECK_FAILED
        assert "FAIL b" in result.output

    def test_invalid_counts(self):
        """Counts below 1 are a config error
        """

        result = CliRunner().invoke(cli, ["properties", "--reps", "0"])
        assert result.exit_code == EXIT_CONFIG_ERROR
