"""
Tests for the command-line interface.
"""

import json
import math
import unittest
from pathlib import Path

import pytest
from click.testing import CliRunner

from ..cli.main import cli, compute_sweep
from ..core.accountant import composed_plds, dominant_direction
from ..core.types import AccountantConfig, Poisson
from ..utils.logging import setup_logging

SMALL = ["--poisson-q", "0.1", "-T", "10", "--grid-spacing", "1e-3"]
CONFIG = AccountantConfig(sigma=1.0, rounds=10, k=1, scheme=Poisson(0.1), grid_spacing=1e-3)


class CliTestCase(unittest.TestCase):
    """Shared runner; logging is reset after each command."""

    def setUp(self):
        self.runner = CliRunner()

    def tearDown(self):
        setup_logging()

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args))


class TestEpsilonCommand(CliTestCase):
    """Test cases for ``grouppld epsilon``."""

    def test_empty_group(self):
        """k = 0 reports epsilon 0 with the remove direction on the tie."""
        result = self.invoke("epsilon", *SMALL, "--sigma", "1", "--k", "0", "--delta", "1e-5")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertEqual(payload["epsilon"], 0.0)
        self.assertEqual(payload["direction_dominant"], "remove")
        self.assertEqual(payload["k"], 0)

    def test_delta_query(self):
        """A delta query returns a finite epsilon with the run parameters."""
        result = self.invoke("epsilon", *SMALL, "--sigma", "1", "--k", "2", "--delta", "1e-5")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertEqual(set(payload), {"epsilon", "delta", "k", "direction_dominant", "params"})
        self.assertGreater(payload["epsilon"], 0.0)
        self.assertEqual(payload["delta"], 1e-5)
        self.assertIn(payload["direction_dominant"], ("add", "remove"))
        self.assertEqual(payload["params"]["method"], "mog")
        self.assertEqual(payload["params"]["rounds"], 10)

    def test_epsilon_query(self):
        """An epsilon query returns delta in (0, 1)."""
        result = self.invoke("epsilon", *SMALL, "--sigma", "1", "--k", "2", "--epsilon", "1.0")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertEqual(payload["epsilon"], 1.0)
        self.assertGreater(payload["delta"], 0.0)
        self.assertLess(payload["delta"], 1.0)

    def test_unreachable_conversion(self):
        """The conversion prints the inf literal when delta is out of reach."""
        result = self.invoke(
            "epsilon", *SMALL, "--sigma", "1", "--k", "2", "--delta", "1e-14", "--method", "vadhan"
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(json.loads(result.stdout)["epsilon"], "inf")


    def test_conversion_direction_at_certified_delta(self):
        """The conversion reports the k = 1 direction at delta * e^(-epsilon) / k."""
        result = self.invoke("epsilon", *SMALL, "--sigma", "1", "--k", "2", "--delta", "1e-3", "--method", "vadhan")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertTrue(math.isfinite(payload["epsilon"]))
        example = CONFIG.with_k(1)
        expected = dominant_direction(example, delta=1e-3 * math.exp(-payload["epsilon"]) / 2)
        self.assertEqual(payload["direction_dominant"], expected.value)

    def test_csv_output(self):
        """CSV output is a header and one record."""
        result = self.invoke(
            "epsilon", *SMALL, "--sigma", "1", "--k", "1", "--delta", "1e-5", "-o", "csv"
        )
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.stdout.splitlines()
        self.assertEqual(lines[0], "epsilon,delta,k,direction_dominant")
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[1].split(",")[1:3], ["1e-05", "1"])

    def test_usage_errors(self):
        """Missing or conflicting options exit with status 2."""
        cases = [
            ["epsilon", "-T", "10", "--sigma", "1", "--k", "1", "--delta", "1e-5"],
            ["epsilon", *SMALL, "--batch-size", "5", "--dataset-size", "100",
             "--sigma", "1", "--k", "1", "--delta", "1e-5"],
            ["epsilon", *SMALL, "--sigma", "1", "--k", "1"],
            ["epsilon", *SMALL, "--sigma", "1", "--k", "1", "--epsilon", "1", "--method", "lower"],
        ]
        for args in cases:
            result = self.invoke(*args)
            self.assertEqual(result.exit_code, 2, args)

    def test_domain_error(self):
        """Out-of-range parameters exit with status 1 and a message on stderr."""
        result = self.invoke(
            "epsilon", "--poisson-q", "1.5", "-T", "10", "--sigma", "1", "--k", "1", "--delta", "1e-5"
        )
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(result.stdout, "")
        self.assertIn("Error:", result.stderr)


class TestSweepCommand(CliTestCase):
    """Test cases for ``grouppld sweep``."""

    def test_csv(self):
        """The CSV sweep has the fixed header, one row per k and a nondecreasing accountant column."""
        result = self.invoke("sweep", *SMALL, "--sigma", "1", "--delta", "1e-5", "--k-max", "3")
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.stdout.splitlines()
        self.assertEqual(lines[0], "k,epsilon_mog,epsilon_vadhan,epsilon_lower_lb")
        rows = [line.split(",") for line in lines[1:]]
        self.assertEqual([row[0] for row in rows], ["1", "2", "3"])
        mog = [float(row[1]) for row in rows]
        self.assertEqual(mog, sorted(mog))
        self.assertEqual(rows[0][1], rows[0][3])
        for row in rows:
            self.assertTrue(row[2] == "inf" or float(row[2]) >= float(row[1]) - 1e-8)

    def test_multiple_sigmas(self):
        """Several sigmas add a leading sigma column, sorted by sigma then k."""
        result = self.invoke(
            "sweep", *SMALL, "--sigma", "2", "--sigma", "1", "--delta", "1e-5", "--k-max", "2"
        )
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.stdout.splitlines()
        self.assertEqual(lines[0].split(",")[0], "sigma")
        self.assertEqual([line.split(",")[:2] for line in lines[1:]],
                         [["1.0", "1"], ["1.0", "2"], ["2.0", "1"], ["2.0", "2"]])

    def test_json(self):
        """JSON output carries rows and parameters."""
        result = self.invoke(
            "sweep", *SMALL, "--sigma", "1", "--delta", "1e-5", "--k-max", "2", "-o", "json"
        )
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertEqual([row["k"] for row in payload["rows"]], [1, 2])
        self.assertEqual(payload["params"]["sigmas"], [1.0])
        self.assertEqual(payload["params"]["delta"], 1e-5)

    def test_text_and_table(self):
        """Text and Rich table renderings name the accountant column."""
        text = self.invoke("sweep", *SMALL, "--sigma", "1", "--delta", "1e-5", "--k-max", "2", "-o", "text")
        self.assertEqual(text.exit_code, 0, text.output)
        self.assertIn("epsilon (MoG)", text.stdout)
        table = self.invoke("sweep", *SMALL, "--sigma", "1", "--delta", "1e-5", "--k-max", "2", "-o", "table")
        self.assertEqual(table.exit_code, 0, table.output)
        self.assertIn("Group-level epsilon", table.stdout)


    def test_curves_composed_once(self):
        """Each (sigma, k) pair is composed once, even with more rows than a small cache holds."""
        composed_plds.cache_clear()
        rows = compute_sweep(CONFIG, [1.0, 1.5, 2.0, 3.0], 6, 1e-5, workers=4)
        self.assertEqual(len(rows), 24)
        self.assertEqual(composed_plds.cache_info().misses, 24)
        for row in rows:
            if row.k == 1:
                self.assertEqual(row.epsilon_lower_lb, row.epsilon_mog)

    def test_workers(self):
        """The thread count does not change the output."""
        args = ["sweep", *SMALL, "--sigma", "1", "--delta", "1e-5", "--k-max", "3"]
        self.assertEqual(self.invoke(*args, "--workers", "1").stdout, self.invoke(*args, "--workers", "3").stdout)


class TestValidateCommand(CliTestCase):
    """Test cases for ``grouppld validate``."""

    def test_coarse_grid_fails(self):
        """A coarse grid fails some checks and exits with status 1."""
        result = self.invoke("validate", "--grid-spacing", "0.5", "--samples", "20000")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("FAIL", result.stdout)
        self.assertIn("validation checks failed", result.stdout)

    def test_deterministic_report(self):
        """The same seed prints the same report."""
        args = ["validate", "--grid-spacing", "0.5", "--samples", "20000", "--seed", "7"]
        self.assertEqual(self.invoke(*args).stdout, self.invoke(*args).stdout)


class TestLogging(CliTestCase):
    """Test cases for the global logging options."""

    def test_log_file(self):
        """--log-file writes debug records to the given path."""
        with self.runner.isolated_filesystem():
            result = self.invoke(
                "-v", "--log-file", "logs/run.log",
                "epsilon", *SMALL, "--sigma", "1", "--k", "1", "--delta", "1e-5",
            )
            self.assertEqual(result.exit_code, 0, result.output)
            setup_logging()
            log = Path("logs/run.log").read_text(encoding="utf-8")
        self.assertIn("Query answered", log)


@pytest.mark.slow
class TestLongRunExample(CliTestCase):
    """T = 2000, q = 1/100, sigma = 1, delta = 1e-6."""

    def test_conversion_breaks_down_at_nine(self):
        """For k = 9 the conversion is infinite while the accountant is finite."""
        base = ["epsilon", "--poisson-q", "0.01", "-T", "2000", "--sigma", "1", "--k", "9", "--delta", "1e-6"]
        vadhan = self.invoke(*base, "--method", "vadhan")
        self.assertEqual(vadhan.exit_code, 0, vadhan.output)
        self.assertEqual(json.loads(vadhan.stdout)["epsilon"], "inf")
        mog = self.invoke(*base)
        self.assertEqual(mog.exit_code, 0, mog.output)
        self.assertTrue(math.isfinite(json.loads(mog.stdout)["epsilon"]))

    def test_default_validation(self):
        """The default validation run passes."""
        result = self.invoke("validate")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("All validation checks passed.", result.stdout)


if __name__ == "__main__":
    unittest.main()
