"""
Unit Tests for the two-distance bounds
Closed-form backends, the SDP cache, the external solver protocol and the oracle.
"""

import asyncio
import shlex
import shutil
import sys
import tempfile
import textwrap
import unittest
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

from exceptions import (
    CacheFormatException, ConfigurationException, PreconditionException, SolverExitException,
    SolverOutputException, SolverTimeoutException
)
from rationals import beta_gamma, ell
from two_distance import (
    BoundResult, ExternalSdpBackend, Provenance, SdpCache, TwoDistanceOracle, TwoDistanceQuery,
    best_bound, build_backends, cache_lookup, closed_form_bound, default_oracle, external_sdp, fallback_cap,
    lemmens_seidel_bound, negative_pair_bound, parse_solver_output, relative_bound
)

F = Fraction


class FixedBackend:
    """Backend stub answering every query with one value and counting calls."""

    def __init__(self, name, value, provenance=Provenance.SDP_CACHE):
        self.name = name
        self.value = value
        self.provenance = provenance
        self.calls = 0

    def query(self, query):
        self.calls += 1
        if self.value is None:
            return BoundResult.none("stub")
        return BoundResult(self.value, self.provenance, "stub")


class TestTwoDistanceQuery(unittest.TestCase):

    def test_orders_inner_products(self):
        query = TwoDistanceQuery(10, F(-5, 13), F(1, 13))

        self.assertEqual(query.beta, F(1, 13))
        self.assertEqual(query.gamma, F(-5, 13))
        self.assertEqual(query.solver_args(), ["10", "1/13", "-5/13"])
        self.assertEqual(str(query), "s(10, 1/13, -5/13)")

    def test_rejects_out_of_range(self):
        with self.assertRaises(PreconditionException):
            TwoDistanceQuery(10, F(1, 3), F(1, 3))
        with self.assertRaises(PreconditionException):
            TwoDistanceQuery(10, F(1), F(0))
        with self.assertRaises(PreconditionException):
            TwoDistanceQuery(0, F(1, 3), F(-1, 3))


class TestClosedForms(unittest.TestCase):
    """Closed form, negative pair, relative bound and the per-pillar rule."""

    def test_closed_form_value(self):
        result = closed_form_bound(TwoDistanceQuery(5, F(1, 13), F(-5, 13)))

        self.assertEqual(result.value, 18)
        self.assertIs(result.provenance, Provenance.CLOSED_FORM)

    def test_closed_form_none_when_denominator_not_positive(self):
        self.assertTrue(closed_form_bound(TwoDistanceQuery(10, F(1, 2), F(-1, 2))).is_none)

    def test_closed_form_applies_to_pillar_queries(self):
        """Queries produced by below-alpha pillars have a positive denominator."""
        for d in (5, 7, 9, 11):
            alpha = F(1, d)
            for K in range(2, d + 1):
                for n in range(1, K // 2 + 1):
                    value = ell(alpha, K, n)
                    if value >= alpha:
                        continue
                    beta, gamma = beta_gamma(alpha, value)
                    with self.subTest(alpha=alpha, K=K, n=n):
                        result = closed_form_bound(TwoDistanceQuery(200, beta, gamma))
                        self.assertFalse(result.is_none)

    def test_closed_form_grows_with_dimension(self):
        """(1-beta)(1-gamma) > 1 for every pillar query, so the closed form never shrinks as r grows."""
        pairs = {beta_gamma(F(1, d), ell(F(1, d), K, n))
                 for d in (5, 7, 9, 11) for K in range(4, d + 1) for n in range(2, K // 2 + 1)
                 if ell(F(1, d), K, n) < F(1, d)}
        self.assertIn((F(1, 13), F(-3, 13)), pairs)
        for beta, gamma in sorted(pairs):
            self.assertGreater((1 - beta) * (1 - gamma), 1)
            values = [closed_form_bound(TwoDistanceQuery(r, beta, gamma)).value for r in range(2, 401)]
            with self.subTest(beta=beta, gamma=gamma):
                self.assertEqual(values, sorted(values))

    def test_negative_pair(self):
        self.assertEqual(negative_pair_bound(TwoDistanceQuery(30, F(-1, 13), F(-5, 13))).value, 31)
        self.assertTrue(negative_pair_bound(TwoDistanceQuery(30, F(1, 13), F(-5, 13))).is_none)

    def test_relative_bound(self):
        result = relative_bound(TwoDistanceQuery(44, F(1, 7), F(-1, 7)))

        self.assertEqual(result.value, 422)
        self.assertIs(result.provenance, Provenance.RELATIVE_BOUND)
        self.assertTrue(relative_bound(TwoDistanceQuery(49, F(1, 7), F(-1, 7))).is_none)
        self.assertTrue(relative_bound(TwoDistanceQuery(44, F(1, 7), F(-2, 7))).is_none)

    def test_lemmens_seidel(self):
        self.assertEqual(lemmens_seidel_bound(23, F(1, 5), 5), 27)
        self.assertEqual(lemmens_seidel_bound(10, F(1, 7), 10), 0)
        with self.assertRaises(PreconditionException):
            lemmens_seidel_bound(3, F(1, 5), 4)

    def test_fallback_cap(self):
        result = fallback_cap(TwoDistanceQuery(10, F(1, 13), F(-5, 13)))
        self.assertEqual(result.value, 65)
        self.assertIs(result.provenance, Provenance.FALLBACK_CAP)


class TestSdpCache(unittest.TestCase):
    """Parsing, duplicate handling, serialization and merging."""

    TEXT = textwrap.dedent("""\
        # r beta gamma bound source
        61 1/13 -5/13 146 solver-run-a

        40 1/7 -1/7 200   # inline comment
        61 1/13 -5/13 150 solver-run-b
        """)

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    @patch('two_distance.logger')
    def test_parse_keeps_smaller_duplicate(self, mock_logger):
        cache = SdpCache.from_text(self.TEXT)

        self.assertEqual(len(cache), 2)
        entry = cache.get(TwoDistanceQuery(61, F(1, 13), F(-5, 13)))
        self.assertEqual(entry.bound, 146)
        self.assertEqual(entry.source, "solver-run-a")
        self.assertEqual(cache.get(TwoDistanceQuery(40, F(1, 7), F(-1, 7))).source, "unknown")
        mock_logger.warning.assert_called_once()

    def test_malformed_lines_raise(self):
        for text in ("61 1/13 -5/13\n", "61 0.07 -5/13 146\n", "61 1/13 -5/13 -3\n", "x 1/13 -5/13 1\n"):
            with self.subTest(text=text):
                with self.assertRaises(CacheFormatException) as ctx:
                    SdpCache.from_text(text)
                self.assertEqual(ctx.exception.details['line_number'], 1)

    def test_to_text_is_sorted_and_reparses(self):
        cache = SdpCache.from_text(self.TEXT)
        text = cache.to_text()

        lines = text.splitlines()
        self.assertEqual(lines[0], "# r beta gamma bound source")
        self.assertTrue(lines[1].startswith("40 1/7 -1/7 200"))
        self.assertEqual(SdpCache.from_text(text).items(), cache.items())

    def test_source_with_comment_marker_survives_reload(self):
        cache = SdpCache()
        query = TwoDistanceQuery(61, F(1, 13), F(-5, 13))
        cache.put(query, 146, "run #3 at 100% ok")

        text = cache.to_text()
        record = text.splitlines()[1]

        self.assertNotIn("#", record)
        self.assertNotIn(" ok", record)
        self.assertEqual(SdpCache.from_text(text).get(query).source, "run #3 at 100% ok")
        self.assertEqual(SdpCache.from_text("61 1/13 -5/13 146 published:pipeline-r236\n").to_text().splitlines()[1],
                         "61 1/13 -5/13 146 published:pipeline-r236")

    def test_put_keeps_minimum_and_marks_dirty(self):
        cache = SdpCache()
        query = TwoDistanceQuery(61, F(1, 13), F(-5, 13))

        self.assertTrue(cache.put(query, 150, "a"))
        self.assertTrue(cache.dirty)
        self.assertFalse(cache.put(query, 151, "b"))
        self.assertTrue(cache.put(query, 146, "c"))
        self.assertEqual(cache.get(query).bound, 146)

    def test_merge_counts_changes(self):
        base = SdpCache.from_text("61 1/13 -5/13 150 a\n")
        other = SdpCache.from_text("61 1/13 -5/13 146 b\n40 1/7 -1/7 200 c\n70 1/13 -5/13 300 d\n")

        self.assertEqual(base.merge(other), 3)
        self.assertEqual(base.merge(other), 0)
        self.assertEqual(len(base), 3)

    def test_load_from_disk(self):
        path = Path(self.test_dir) / "cache.txt"
        path.write_text(self.TEXT, encoding='utf-8')

        cache = SdpCache.load(path)
        self.assertEqual(cache.path, path)
        self.assertIn(TwoDistanceQuery(40, F(1, 7), F(-1, 7)), cache)

    def test_shipped_cache_parses(self):
        cache = SdpCache.shipped()
        self.assertGreater(len(cache), 0)
        for query, entry in cache.items():
            self.assertGreaterEqual(entry.bound, 0)

    def test_cache_lookup(self):
        cache = SdpCache.from_text(self.TEXT)

        hit = cache_lookup(TwoDistanceQuery(61, F(1, 13), F(-5, 13)), cache)
        self.assertEqual(hit.value, 146)
        self.assertIs(hit.provenance, Provenance.SDP_CACHE)
        self.assertTrue(cache_lookup(TwoDistanceQuery(62, F(1, 13), F(-5, 13)), cache).is_none)
        self.assertTrue(cache_lookup(TwoDistanceQuery(62, F(1, 13), F(-5, 13)), None).is_none)


class TestSolverOutput(unittest.TestCase):

    def test_floors_decimal(self):
        self.assertEqual(parse_solver_output("146.9999\n"), 146)
        self.assertEqual(parse_solver_output("  276 "), 276)

    def test_rejects_unusable_output(self):
        for text in ("", "1 2", "abc", "-4", "inf", "nan"):
            with self.subTest(text=text):
                with self.assertRaises(SolverOutputException):
                    parse_solver_output(text)


class TestBestBound(unittest.TestCase):
    """Backend combination and the oracle."""

    def setUp(self):
        self.query = TwoDistanceQuery(61, F(1, 13), F(-5, 13))

    def test_takes_minimum(self):
        backends = [FixedBackend("a", 200), FixedBackend("b", 146), FixedBackend("c", None)]

        self.assertEqual(best_bound(self.query, backends).value, 146)

    @patch('two_distance.logger')
    def test_discards_values_below_dimension(self, mock_logger):
        backends = [FixedBackend("broken", 10), FixedBackend("ok", 146)]

        self.assertEqual(best_bound(self.query, backends).value, 146)
        mock_logger.error.assert_called_once()

    def test_none_and_fallback(self):
        backends = [FixedBackend("silent", None)]

        self.assertTrue(best_bound(self.query, backends).is_none)
        capped = best_bound(self.query, backends, allow_fallback_cap=True)
        self.assertEqual(capped.value, 61 * 64 // 2)
        self.assertIs(capped.provenance, Provenance.FALLBACK_CAP)

    def test_oracle_memoizes(self):
        backend = FixedBackend("cache", 146)
        oracle = TwoDistanceOracle([backend])

        self.assertEqual(oracle.bound(self.query).value, 146)
        self.assertEqual(oracle.bound(self.query).value, 146)
        self.assertEqual(backend.calls, 1)
        self.assertEqual(repr(oracle), "TwoDistanceOracle(cache)")

    def test_sdp_bound_ignores_closed_forms(self):
        oracle = TwoDistanceOracle([FixedBackend("closed-form", 100, Provenance.CLOSED_FORM),
                                    FixedBackend("cache", 146)])

        self.assertEqual(oracle.bound(self.query).value, 100)
        result = oracle.sdp_bound(self.query)
        self.assertEqual(result.value, 146)
        self.assertIs(result.provenance, Provenance.SDP_CACHE)

    def test_build_backends_errors(self):
        with self.assertRaises(ConfigurationException):
            build_backends(["cache"])
        with self.assertRaises(ConfigurationException):
            build_backends(["external"])
        with self.assertRaises(ConfigurationException):
            build_backends(["magic"])
        names = [b.name for b in build_backends(["closed-form", "relative", "cache"], cache=SdpCache())]
        self.assertEqual(names, ["closed-form", "relative", "cache"])

    def test_default_oracle_uses_given_cache(self):
        cache = SdpCache.from_text("61 1/13 -5/13 146 a\n")
        oracle = default_oracle(cache)

        self.assertEqual(oracle.backend_names, ["closed-form", "negative-pair", "relative", "cache"])
        self.assertEqual(oracle.bound(self.query).value, 146)


def write_solver(directory, name, body):
    """Write a small python script acting as an external solver; returns its command line."""
    path = Path(directory) / name
    path.write_text(textwrap.dedent(body), encoding='utf-8')
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(path))}"


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


ECHO_SOLVER = """\
    import sys
    r, beta, gamma = sys.argv[1:4]
    print(f"{int(r) * 2}.75")
"""


class TestExternalSolver(AsyncTestCase):
    """The subprocess protocol: success, timeout, bad output, nonzero exit."""

    def setUp(self):
        super().setUp()
        self.query = TwoDistanceQuery(61, F(1, 13), F(-5, 13))

    def test_success_floors_and_records(self):
        cache = SdpCache()
        solver = ExternalSdpBackend(write_solver(self.test_dir, "echo.py", ECHO_SOLVER), timeout=30, cache=cache)

        value = self.run_async(solver.solve_async(self.query))

        self.assertEqual(value, 122)
        self.assertEqual(cache.get(self.query).bound, 122)
        self.assertTrue(cache.get(self.query).source.startswith("external:"))

    def test_timeout(self):
        command = write_solver(self.test_dir, "slow.py", "import time\ntime.sleep(30)\n")
        solver = ExternalSdpBackend(command, timeout=0.5)

        with self.assertRaises(SolverTimeoutException):
            self.run_async(solver.solve_async(self.query))

    def test_bad_output(self):
        solver = ExternalSdpBackend(write_solver(self.test_dir, "chatty.py", "print('hello world')\n"))

        with self.assertRaises(SolverOutputException):
            self.run_async(solver.solve_async(self.query))

    def test_nonzero_exit(self):
        command = write_solver(self.test_dir, "dies.py", "import sys\nprint('boom', file=sys.stderr)\nsys.exit(2)\n")
        solver = ExternalSdpBackend(command)

        with self.assertRaises(SolverExitException) as ctx:
            self.run_async(solver.solve_async(self.query))
        self.assertEqual(ctx.exception.details['returncode'], 2)

    def test_missing_executable(self):
        solver = ExternalSdpBackend(str(Path(self.test_dir) / "no-such-solver"))

        with self.assertRaises(SolverExitException):
            self.run_async(solver.solve_async(self.query))

    def test_external_sdp_success(self):
        solver = ExternalSdpBackend(write_solver(self.test_dir, "echo.py", ECHO_SOLVER), timeout=30)

        result = self.run_async(external_sdp(self.query, solver))

        self.assertEqual(result.value, 122)
        self.assertIs(result.provenance, Provenance.SDP_EXTERNAL)
        self.assertIn("echo.py", result.detail)

    def test_external_sdp_without_solver(self):
        result = self.run_async(external_sdp(self.query, None))

        self.assertTrue(result.is_none)
        self.assertEqual(result.detail, "no external solver configured")

    @patch('two_distance.logger')
    def test_external_sdp_failure_is_none(self, mock_logger):
        command = write_solver(self.test_dir, "dies.py", "import sys\nsys.exit(3)\n")
        solver = ExternalSdpBackend(command)

        result = self.run_async(external_sdp(self.query, solver))

        self.assertTrue(result.is_none)
        self.assertIn("status 3", result.detail)
        mock_logger.warning.assert_called_once()
        self.assertIn(str(self.query), mock_logger.warning.call_args[0][0])

    def test_solve_many_keeps_failures_as_none(self):
        command = write_solver(self.test_dir, "picky.py", """\
            import sys
            if sys.argv[1] == "70":
                sys.exit(1)
            print(sys.argv[1])
        """)
        solver = ExternalSdpBackend(command, jobs=2)
        other = TwoDistanceQuery(70, F(1, 13), F(-5, 13))

        results = self.run_async(solver.solve_many([self.query, other, self.query]))

        self.assertEqual(list(results), [self.query, other])
        self.assertEqual(results[self.query].value, 61)
        self.assertTrue(results[other].is_none)

    def test_rejects_bad_configuration(self):
        with self.assertRaises(ConfigurationException):
            ExternalSdpBackend("   ")
        with self.assertRaises(ConfigurationException):
            ExternalSdpBackend("solver", timeout=0)


class TestExternalSolverSync(unittest.TestCase):
    """Synchronous queries reuse earlier solver results from the cache."""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.query = TwoDistanceQuery(61, F(1, 13), F(-5, 13))

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_query_then_cached(self):
        cache = SdpCache()
        solver = ExternalSdpBackend(write_solver(self.test_dir, "echo.py", ECHO_SOLVER), timeout=30, cache=cache)

        first = solver.query(self.query)
        self.assertEqual(first.value, 122)
        self.assertIs(first.provenance, Provenance.SDP_EXTERNAL)

        with patch('two_distance.asyncio.run') as mock_run:
            second = solver.query(self.query)
        mock_run.assert_not_called()
        self.assertEqual(second.value, 122)
        self.assertIn("earlier run", second.detail)

    def test_failure_is_none(self):
        solver = ExternalSdpBackend(write_solver(self.test_dir, "dies.py", "raise SystemExit(5)\n"))

        self.assertTrue(solver.query(self.query).is_none)


if __name__ == '__main__':
    unittest.main(verbosity=2)
