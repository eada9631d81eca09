"""
Unit Tests for the command-line interface
Every subcommand end to end through main_async, with exit codes.
"""

import asyncio
import io
import json
import os
import shlex
import shutil
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from gram_lab import CheckResult, twenty_eight_lines
from main import main_async, setup_cli

CLEAN_ENVIRON = {key: value for key, value in os.environ.items() if not key.startswith('EQUIBOUND_')}


class AsyncTestCase(unittest.TestCase):
    """
    Base class for async test cases.
    """

    def setUp(self):
        """Set up async test environment."""
        self.loop = asyncio.new_event_loop()
        asyncio.set_event_loop(self.loop)
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up async test environment."""
        self.loop.close()
        asyncio.set_event_loop(None)
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def run_async(self, coro):
        """Helper to run async functions in tests."""
        return self.loop.run_until_complete(coro)


@patch.dict(os.environ, CLEAN_ENVIRON, clear=True)
@patch('main.configure_logging')
class TestMain(AsyncTestCase):
    """main_async: output, exit codes and error reporting."""

    def run_cli(self, *argv):
        """Run one command; returns (exit code, stdout, stderr)."""
        stdout, stderr = io.StringIO(), io.StringIO()
        with patch('sys.stdout', stdout), patch('sys.stderr', stderr):
            code = self.run_async(main_async(list(argv)))
        return code, stdout.getvalue(), stderr.getvalue()

    def path(self, name):
        return str(Path(self.test_dir) / name)

    def test_bound_for_dimension(self, mock_logging):
        code, out, _ = self.run_cli("bound", "--dim", "44", "--format", "csv")

        self.assertEqual(code, 0)
        self.assertIn("44,422,1/7,relative", out)

    def test_bound_for_angle(self, mock_logging):
        code, out, _ = self.run_cli("bound", "--dim", "236", "--angle", "1/7")

        self.assertEqual(code, 0)
        self.assertTrue(out.endswith("15673 (K=7)\n"))
        self.assertIn("| K ", out)

    def test_missing_data_exit_code(self, mock_logging):
        code, _, err = self.run_cli("bound", "--dim", "236", "--angle", "1/7", "--backends", "relative")

        self.assertEqual(code, 3)
        self.assertIn("needs s(236, 1/13, -3/13)", err)
        self.assertIn("needs s(236, 1/7, -1/7)", err)

    def test_configuration_errors(self, mock_logging):
        self.assertEqual(self.run_cli("bound", "--dim", "10")[0], 2)
        self.assertEqual(self.run_cli("bound", "--dim", "44", "--backends", "external")[0], 2)
        self.assertEqual(self.run_cli("bound", "--dim", "44", "--cache", self.path("absent.txt"))[0], 2)

    def test_argument_errors(self, mock_logging):
        with patch('sys.stderr', io.StringIO()):
            with self.assertRaises(SystemExit):
                self.run_async(main_async(["bound", "--dim", "44", "--angle", "1/4"]))
            with self.assertRaises(SystemExit):
                self.run_async(main_async(["bound", "--dim", "44", "--backends", "magic"]))

    def test_output_file_and_config_file(self, mock_logging):
        config = self.path("config.json")
        Path(config).write_text(json.dumps({'output_format': 'json'}), encoding='utf-8')
        target = self.path("out/report.json")

        code, out, _ = self.run_cli("--config", config, "--output", target, "bound", "--dim", "44")

        self.assertEqual(code, 0)
        self.assertEqual(out, "")
        self.assertEqual(json.loads(Path(target).read_text(encoding='utf-8'))['overall']['value'], 422)

    def test_bad_config_file(self, mock_logging):
        config = self.path("config.json")
        Path(config).write_text(json.dumps({'colour': 'blue'}), encoding='utf-8')

        self.assertEqual(self.run_cli("--config", config, "bound", "--dim", "44")[0], 2)

    def test_table(self, mock_logging):
        code, out, _ = self.run_cli("table", "--from", "44", "--to", "46")

        self.assertEqual(code, 0)
        for value in ("422", "540", "736"):
            self.assertIn(value, out)

    def test_figure_data(self, mock_logging):
        code, out, _ = self.run_cli("figure-data", "--from", "61", "--to", "62", "--angle", "1/5")

        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[:3], ["# angle 1/5", "r\tgerzon\tmethod\tmethod provenance\tsdp\tsdp provenance",
                                                "61\t1891\t968\trational-fifth\tNaN\tnone"])
        self.assertEqual(self.run_cli("figure-data", "--from", "61", "--to", "62", "--angle", "1/9")[0], 2)

    def test_verify(self, mock_logging):
        code, out, _ = self.run_cli("verify", "--alpha", "1/5", "--trials", "5")

        self.assertEqual(code, 0)
        self.assertTrue(out.endswith("7/7 checks passed\n"))

    @patch('main.run_identity_checks', return_value=[CheckResult("broken", False, 1.0, "bad")])
    def test_verify_failure_exit_code(self, mock_checks, mock_logging):
        code, out, err = self.run_cli("verify", "--extremal")

        self.assertEqual(code, 4)
        self.assertIn("broken", out)
        self.assertIn("VERIFICATION_FAILED", err)

    def test_verify_vector_set_file(self, mock_logging):
        source = self.path("lines.txt")
        Path(source).write_text(twenty_eight_lines().to_text(), encoding='utf-8')

        code, out, _ = self.run_cli("verify", "--input", source, "--format", "csv")

        self.assertEqual(code, 0)
        self.assertIn("negative-clique,True", out)

    def test_cache_show(self, mock_logging):
        code, out, _ = self.run_cli("cache", "show", "--dim", "236", "--format", "csv")

        self.assertEqual(code, 0)
        self.assertIn("236,1/13,-3/13,1832,published:pipeline-r236", out.splitlines())

    def test_cache_merge(self, mock_logging):
        first, second, merged = self.path("a.txt"), self.path("b.txt"), self.path("merged.txt")
        Path(first).write_text("61 1/13 -5/13 150 a\n", encoding='utf-8')
        Path(second).write_text("61 1/13 -5/13 146 b\n70 1/13 -5/13 177 b\n", encoding='utf-8')

        code, out, _ = self.run_cli("cache", "merge", first, second, "--out", merged)

        self.assertEqual(code, 0)
        self.assertIn("2 entries", out)
        self.assertIn("61 1/13 -5/13 146 b", Path(merged).read_text(encoding='utf-8'))
        self.assertEqual(self.run_cli("cache", "merge", first)[0], 2)

    def test_cache_solve(self, mock_logging):
        script = Path(self.test_dir) / "solver.py"
        script.write_text("import sys\nprint(int(sys.argv[1]) * 2)\n", encoding='utf-8')
        command = f"{shlex.quote(sys.executable)} {shlex.quote(str(script))}"
        target = self.path("solved.txt")

        code, out, _ = self.run_cli("cache", "solve", "--sdp-cmd", command, "--cache", target,
                                    "--from", "61", "--to", "62", "--beta", "1/13", "--gamma=-5/13")

        self.assertEqual(code, 0)
        self.assertIn("s(61, 1/13, -5/13)", out)
        text = Path(target).read_text(encoding='utf-8')
        self.assertIn("61 1/13 -5/13 122 external:", text)
        self.assertIn("62 1/13 -5/13 124 external:", text)

    def test_cache_solve_needs_solver_and_own_file(self, mock_logging):
        self.assertEqual(self.run_cli("cache", "solve", "--from", "61", "--to", "61",
                                      "--beta", "1/13", "--gamma=-5/13")[0], 2)
        self.assertEqual(self.run_cli("cache", "solve", "--sdp-cmd", "solver", "--from", "61", "--to", "61",
                                      "--beta", "1/13", "--gamma=-5/13")[0], 2)


class TestParser(unittest.TestCase):

    def test_defaults_are_unset(self):
        args = setup_cli().parse_args(["bound", "--dim", "44"])

        self.assertIsNone(args.backends)
        self.assertIsNone(args.output_format)
        self.assertIsNone(args.allow_fallback)
        self.assertIsNone(args.angles)

    def test_angle_and_backend_lists(self):
        args = setup_cli().parse_args(["table", "--from", "44", "--to", "50", "--angle", "1/5,1/7",
                                       "--backends", "closed-form,relative"])

        self.assertEqual([str(a) for a in args.angles], ["1/5", "1/7"])
        self.assertEqual(args.backends, ["closed-form", "relative"])


if __name__ == '__main__':
    unittest.main(verbosity=2)
