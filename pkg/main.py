#!/usr/bin/env python3
"""
equibound - Main Entry Point
Upper bounds on equiangular lines from the command line.

Subcommands: bound, table, figure-data, verify, cache.
Rendered data goes to stdout (or --output); logs go to stderr.
"""

import argparse
import asyncio
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from exceptions import (
    ConfigurationException, EquiboundException, InvalidInputException, MissingBoundDataException,
    VerificationException
)
from gram_lab import inspect_vector_set, run_identity_checks
from pillars import angle_bound, dimension_bound, sweep
from rationals import Angle, parse_rational
from reporting import (
    FORMATS, RunConfig, build_oracle, figure_points, render_angle_bound, render_cache, render_checks,
    render_dimension_report, render_figure_data, render_table
)
from two_distance import BACKEND_NAMES, DEFAULT_CACHE_PATH, ExternalSdpBackend, SdpCache, TwoDistanceQuery
from utils.context import AnalysisRun, analysis_run
from utils.decorators import async_timer
from utils.file_io import (
    load_cache_async, load_json_async, load_vector_set_async, save_cache_async, to_json, write_text_async
)

__version__ = "1.0.0"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
FIGURE_ANGLES = (Angle(5), Angle(7))

logger = logging.getLogger(__name__)


def configure_logging(level: int = logging.INFO, log_file: Optional[str] = None) -> None:
    """stderr always, plus a UTF-8 log file when requested."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def _angle_list(text: str) -> List[Angle]:
    try:
        return [Angle.parse(part) for part in text.split(',') if part.strip()]
    except InvalidInputException as e:
        raise argparse.ArgumentTypeError(e.message)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except InvalidInputException as e:
        raise argparse.ArgumentTypeError(e.message)


def _backend_list(text: str) -> List[str]:
    names = [name.strip() for name in text.split(',') if name.strip()]
    unknown = [name for name in names if name not in BACKEND_NAMES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown backend(s) {', '.join(unknown)}; choose from {BACKEND_NAMES}")
    return names


def setup_cli() -> argparse.ArgumentParser:
    """Argument parser; every RunConfig flag defaults to None so other sources can fill it."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--backends', type=_backend_list, default=None,
                        help=f"comma-separated two-distance backends ({', '.join(BACKEND_NAMES)})")
    common.add_argument('--cache', dest='cache_path', default=None, help='two-distance bound cache file')
    common.add_argument('--sdp-cmd', dest='sdp_cmd', default=None, help='external SDP solver command')
    common.add_argument('--timeout', type=float, default=None, help='solver timeout in seconds (default: 60)')
    common.add_argument('--format', dest='output_format', choices=FORMATS, default=None,
                        help='output format (default: table)')
    common.add_argument('--jobs', type=int, default=None, help='parallel dimensions / solver processes')
    common.add_argument('--allow-fallback', dest='allow_fallback', action='store_true', default=None,
                        help='use the absolute two-distance cap when no backend answers')
    common.add_argument('--tolerance', type=float, default=None, help='numerical tolerance (default: 1e-9)')

    parser = argparse.ArgumentParser(
        prog="equibound",
        description="Upper bounds on the number of equiangular lines via pillar decomposition",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  equibound bound --dim 236 --angle 1/7          # per-K breakdown, 15673 (K=7)
  equibound bound --dim 44                       # 422 @ 1/7
  equibound table --from 44 --to 46 --format csv
  equibound figure-data --from 61 --to 132 --angle 1/5
  equibound verify --alpha 1/5 --extremal
  equibound cache show --dim 236
        """
    )
    parser.add_argument('--config', help='JSON file with RunConfig values')
    parser.add_argument('--log-file', dest='log_file', help='also write logs to this file')
    parser.add_argument('--output', '-o', help='write rendered output to this file instead of stdout')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true', help='debug logging')
    verbosity.add_argument('--quiet', '-q', action='store_true', help='warnings and errors only')
    parser.add_argument('--version', action='version', version=f'equibound {__version__}')

    commands = parser.add_subparsers(dest='command', required=True)

    bound = commands.add_parser('bound', parents=[common], help='bound for one dimension')
    bound.add_argument('--dim', type=int, required=True, help='dimension r')
    bound.add_argument('--angle', dest='angles', type=_angle_list, default=None,
                       help='restrict to these angles, e.g. 1/7 or 1/5,1/7')

    table = commands.add_parser('table', parents=[common], help='bounds over a range of dimensions')
    table.add_argument('--from', dest='r_from', type=int, required=True)
    table.add_argument('--to', dest='r_to', type=int, required=True)
    table.add_argument('--angle', dest='angles', type=_angle_list, default=None)

    figure = commands.add_parser('figure-data', parents=[common], help='plot series for one angle')
    figure.add_argument('--from', dest='r_from', type=int, required=True)
    figure.add_argument('--to', dest='r_to', type=int, required=True)
    figure.add_argument('--angle', dest='angles', type=_angle_list, required=True, help='1/5 or 1/7')

    verify = commands.add_parser('verify', parents=[common], help='numerical identity checks')
    verify.add_argument('--alpha', default='1/5', help='angle for the synthetic checks (default: 1/5)')
    verify.add_argument('--extremal', action='store_true', help='only extremal-base checks')
    verify.add_argument('--trials', type=int, default=100, help='random pillar configurations')
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--input', help='check this vector-set file instead')

    cache = commands.add_parser('cache', parents=[common], help='inspect, merge or fill cache files')
    cache.add_argument('action', choices=['show', 'merge', 'solve'])
    cache.add_argument('files', nargs='*', help='cache files to merge')
    cache.add_argument('--dim', type=int, default=None, help='show: only this dimension')
    cache.add_argument('--out', help='merge: output file')
    cache.add_argument('--from', dest='r_from', type=int, default=None)
    cache.add_argument('--to', dest='r_to', type=int, default=None)
    cache.add_argument('--beta', type=_rational, default=None)
    cache.add_argument('--gamma', type=_rational, default=None)

    return parser


async def _load_cache(config: RunConfig) -> Optional[SdpCache]:
    if not config.needs_cache():
        return None
    try:
        return await load_cache_async(config.cache_path)
    except FileNotFoundError:
        raise ConfigurationException(f"cache file {config.cache_path} does not exist", config_key="cache_path",
                                     config_value=config.cache_path)


async def _persist_solver_results(cache: Optional[SdpCache], config: RunConfig) -> None:
    if cache is None or not cache.dirty:
        return
    if Path(config.cache_path).resolve() == DEFAULT_CACHE_PATH.resolve():
        logger.info("New solver results were not saved; pass --cache FILE to keep them")
        return
    await save_cache_async(cache, config.cache_path)


@async_timer
async def cmd_bound(args, config: RunConfig, run: AnalysisRun) -> str:
    cache = await _load_cache(config)
    oracle = build_oracle(config, cache)
    if config.angles:
        bounds = [await asyncio.to_thread(angle_bound, config.dim, angle, oracle) for angle in config.angles]
        run.attach('bounds', [b.result.value for b in bounds])
        if config.output_format == "json" and len(bounds) > 1:
            output = to_json([b.to_dict() for b in bounds])
        else:
            output = "".join(render_angle_bound(b, config.output_format) for b in bounds)
    else:
        report = await asyncio.to_thread(dimension_bound, config.dim, oracle)
        run.attach('bound', report.overall.value)
        output = render_dimension_report(report, config.output_format)
    await _persist_solver_results(cache, config)
    return output


@async_timer
async def cmd_table(args, config: RunConfig, run: AnalysisRun) -> str:
    cache = await _load_cache(config)
    oracle = build_oracle(config, cache)
    reports = await asyncio.to_thread(sweep, config.dimensions(), oracle, config.jobs, config.angles or None)
    run.attach('rows', len(reports))
    await _persist_solver_results(cache, config)
    return render_table(reports, config.output_format)


@async_timer
async def cmd_figure_data(args, config: RunConfig, run: AnalysisRun) -> str:
    if len(config.angles) != 1 or config.angles[0] not in FIGURE_ANGLES:
        raise InvalidInputException("figure-data takes exactly one angle, 1/5 or 1/7",
                                    input_value=",".join(map(str, config.angles)), expected_format="1/5 or 1/7")
    angle = config.angles[0]
    cache = await _load_cache(config)
    oracle = build_oracle(config, cache)
    points = await asyncio.to_thread(figure_points, config.dimensions(), angle, oracle, config.jobs)
    run.attach('points', len(points))
    await _persist_solver_results(cache, config)
    return render_figure_data(points, angle, config.output_format)


@async_timer
async def cmd_verify(args, config: RunConfig, run: AnalysisRun) -> str:
    if args.input:
        vectors = await load_vector_set_async(args.input, config.tolerance)
        results = await asyncio.to_thread(inspect_vector_set, vectors)
    else:
        alpha = Angle.parse(args.alpha).as_rational()
        results = await asyncio.to_thread(run_identity_checks, alpha, args.extremal, config.tolerance,
                                          args.trials, args.seed)
    run.attach('failed_checks', [r.name for r in results if not r.passed])
    return render_checks(results, config.output_format)


async def _cache_solve(args, config: RunConfig) -> str:
    if not config.sdp_cmd:
        raise ConfigurationException("cache solve needs --sdp-cmd or EQUIBOUND_SDP_CMD", config_key="sdp_cmd")
    if args.beta is None or args.gamma is None:
        raise InvalidInputException("cache solve needs --beta and --gamma", expected_format="p/q")
    if Path(config.cache_path).resolve() == DEFAULT_CACHE_PATH.resolve():
        raise ConfigurationException("cache solve writes its results; pass --cache FILE", config_key="cache_path")
    path = Path(config.cache_path)
    cache = await load_cache_async(path) if path.exists() else SdpCache(path=path)
    solver = ExternalSdpBackend(config.sdp_cmd, config.timeout, cache, config.jobs)
    queries = [TwoDistanceQuery(r, args.beta, args.gamma) for r in config.dimensions()]
    results = await solver.solve_many(queries)
    await save_cache_async(cache, path)
    lines = [f"{query}\t{result}" for query, result in results.items()]
    return "\n".join(lines) + "\n"


@async_timer
async def cmd_cache(args, config: RunConfig, run: AnalysisRun) -> str:
    if args.action == 'show':
        cache = await load_cache_async(config.cache_path)
        return render_cache(cache, config.output_format, args.dim)
    if args.action == 'merge':
        if not args.files or not args.out:
            raise InvalidInputException("cache merge needs input files and --out", expected_format="A B --out C")
        merged = SdpCache(path=Path(args.out))
        for path in args.files:
            merged.merge(await load_cache_async(path))
        await save_cache_async(merged, args.out)
        run.attach('entries', len(merged))
        return f"merged {len(args.files)} files into {args.out}: {len(merged)} entries\n"
    return await _cache_solve(args, config)


COMMANDS = {
    'bound': cmd_bound,
    'table': cmd_table,
    'figure-data': cmd_figure_data,
    'verify': cmd_verify,
    'cache': cmd_cache,
}

CONFIG_KEYS = ('dim', 'r_from', 'r_to', 'angles', 'backends', 'cache_path', 'sdp_cmd', 'timeout',
               'output_format', 'jobs', 'allow_fallback', 'tolerance')


async def main_async(argv: Optional[List[str]] = None) -> int:
    """Run one command and return the process exit status."""
    parser = setup_cli()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    configure_logging(level, args.log_file)

    try:
        file_values = await load_json_async(args.config) if args.config else {}
        if not isinstance(file_values, dict):
            raise ConfigurationException("config file must hold a JSON object", config_key="config")
        cli_values = {key: getattr(args, key, None) for key in CONFIG_KEYS}
        if args.command == 'cache':
            # --dim only filters the listing here
            cli_values['dim'] = None
        config = RunConfig.from_sources(cli_values, os.environ, file_values)

        with analysis_run(args.command) as run:
            run.attach('config', config.to_dict())
            output = await COMMANDS[args.command](args, config, run)

        if args.output:
            await write_text_async(args.output, output)
        else:
            sys.stdout.write(output)

        failed = run.get('failed_checks')
        if failed:
            raise VerificationException(f"{len(failed)} checks failed: {', '.join(failed)}", failed_checks=failed)
        return 0
    except MissingBoundDataException as e:
        print(str(e), file=sys.stderr)
        for query in e.queries:
            print(f"  needs {query}", file=sys.stderr)
        return e.exit_code
    except EquiboundException as e:
        print(str(e), file=sys.stderr)
        return e.exit_code
    except (FileNotFoundError, PermissionError) as e:
        print(f"[CONFIGURATION_ERROR] {e}", file=sys.stderr)
        return ConfigurationException.exit_code


def main() -> None:
    """Console-script entry point."""
    try:
        sys.exit(asyncio.run(main_async()))
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(130)
    except Exception as e:
        logger.critical(f"Critical error: {e}")
        print(f"Critical error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
