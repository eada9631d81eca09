"""
Reporting Module
Run configuration and the renderers behind every CLI command.

Rendering is pure and deterministic: the same reports and configuration
always produce byte-identical text, whatever the format.
"""

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from tabulate import tabulate

from exceptions import ConfigurationException, InvalidInputException
from gram_lab import CheckResult
from pillars import (
    AngleBound, DimensionReport, direct_sdp_bound, gerzon, pipeline_bound
)
from rationals import Angle
from two_distance import (
    BACKEND_NAMES, DEFAULT_CACHE_PATH, BoundResult, ExternalSdpBackend, SdpCache,
    TwoDistanceOracle, build_backends
)
from utils.file_io import to_json

logger = logging.getLogger(__name__)

FORMATS = ("table", "csv", "tsv-plot", "json")
DEFAULT_BACKENDS = ("closed-form", "negative-pair", "relative", "cache")
MIN_DIMENSION = 15
MAX_DIMENSION = 10000
ENV_SDP_CMD = "EQUIBOUND_SDP_CMD"
ENV_CACHE = "EQUIBOUND_CACHE"
GAP = "NaN"
BLOCK_WIDTH = 7


@dataclass
class RunConfig:
    """Everything a command needs besides its subcommand-specific arguments."""

    dim: Optional[int] = None
    r_from: Optional[int] = None
    r_to: Optional[int] = None
    angles: List[Angle] = field(default_factory=list)
    backends: List[str] = field(default_factory=lambda: list(DEFAULT_BACKENDS))
    cache_path: Path = DEFAULT_CACHE_PATH
    sdp_cmd: Optional[str] = None
    timeout: float = 60.0
    output_format: str = "table"
    jobs: int = 1
    allow_fallback: bool = False
    tolerance: float = 1e-9

    @classmethod
    def from_sources(cls, args: Any = None, environ: Optional[Mapping[str, str]] = None,
                     file_values: Optional[Mapping[str, Any]] = None) -> 'RunConfig':
        """
        Merge command-line values (argparse namespace or dict; None means
        "not given"), the environment and a config-file dictionary, in that
        order of precedence, over the defaults.
        """
        values: Dict[str, Any] = {}
        known = {f.name for f in fields(cls)}

        for key, value in dict(file_values or {}).items():
            if key not in known:
                raise ConfigurationException(f"unknown configuration key '{key}'", config_key=key)
            values[key] = value

        environ = os.environ if environ is None else environ
        if environ.get(ENV_SDP_CMD):
            values['sdp_cmd'] = environ[ENV_SDP_CMD]
        if environ.get(ENV_CACHE):
            values['cache_path'] = environ[ENV_CACHE]

        cli = vars(args) if args is not None and not isinstance(args, Mapping) else dict(args or {})
        for key in known:
            if cli.get(key) is not None:
                values[key] = cli[key]

        if 'backends' not in values and values.get('sdp_cmd'):
            values['backends'] = list(DEFAULT_BACKENDS) + ["external"]
        config = cls.from_dict(values)
        config.validate()
        return config

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'RunConfig':
        data = dict(data)
        try:
            if isinstance(data.get('backends'), str):
                data['backends'] = [name.strip() for name in data['backends'].split(',') if name.strip()]
            if 'angles' in data:
                raw = data['angles']
                raw = raw.split(',') if isinstance(raw, str) else raw
                data['angles'] = [a if isinstance(a, Angle) else Angle.parse(a) for a in raw]
            if 'cache_path' in data:
                data['cache_path'] = Path(data['cache_path'])
            for key in ('dim', 'r_from', 'r_to', 'jobs'):
                if data.get(key) is not None:
                    data[key] = int(data[key])
            for key in ('timeout', 'tolerance'):
                if data.get(key) is not None:
                    data[key] = float(data[key])
        except (TypeError, ValueError) as e:
            raise ConfigurationException(f"invalid configuration value: {e}")
        return cls(**data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['angles'] = [str(angle) for angle in self.angles]
        data['cache_path'] = str(self.cache_path)
        return data

    def validate(self) -> None:
        if not self.backends:
            raise ConfigurationException("at least one backend must be enabled", config_key="backends")
        unknown = [name for name in self.backends if name not in BACKEND_NAMES]
        if unknown:
            raise ConfigurationException(f"unknown backends: {', '.join(unknown)}", config_key="backends",
                                         config_value=unknown)
        if "external" in self.backends and not self.sdp_cmd:
            raise ConfigurationException("backend 'external' needs --sdp-cmd or EQUIBOUND_SDP_CMD",
                                         config_key="sdp_cmd")
        for key in ('dim', 'r_from', 'r_to'):
            value = getattr(self, key)
            if value is not None and not MIN_DIMENSION <= value <= MAX_DIMENSION:
                raise ConfigurationException(f"{key}={value} outside [{MIN_DIMENSION}, {MAX_DIMENSION}]",
                                             config_key=key, config_value=value)
        if self.r_from is not None and self.r_to is not None and self.r_from > self.r_to:
            raise ConfigurationException(f"empty range {self.r_from}..{self.r_to}", config_key="r_from")
        if self.timeout <= 0:
            raise ConfigurationException("timeout must be positive", config_key="timeout",
                                         config_value=self.timeout)
        if self.jobs < 1:
            raise ConfigurationException("jobs must be at least 1", config_key="jobs", config_value=self.jobs)
        if self.output_format not in FORMATS:
            raise ConfigurationException(f"unknown format '{self.output_format}'", config_key="output_format",
                                         config_value=self.output_format)

    def dimensions(self) -> List[int]:
        if self.dim is not None:
            return [self.dim]
        if self.r_from is None or self.r_to is None:
            raise InvalidInputException("a range needs both --from and --to", expected_format="--from R --to R")
        return list(range(self.r_from, self.r_to + 1))

    def needs_cache(self) -> bool:
        return "cache" in self.backends or "external" in self.backends


def build_oracle(config: RunConfig, cache: Optional[SdpCache]) -> TwoDistanceOracle:
    """Backends in the configured order; the solver records into ``cache``."""
    solver = None
    if "external" in config.backends:
        solver = ExternalSdpBackend(config.sdp_cmd, config.timeout, cache, config.jobs)
    backends = build_backends(config.backends, cache=cache, solver=solver)
    logger.info(f"Two-distance backends: {', '.join(config.backends)}")
    return TwoDistanceOracle(backends, config.allow_fallback)


def _cell(result: Optional[BoundResult]) -> str:
    if result is None or result.is_none:
        return "NONE"
    return f"{result.value} [{result.provenance.value}]"


def _csv(rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _table(rows: Sequence[Sequence[Any]], headers: Sequence[str], **kwargs) -> str:
    return tabulate(rows, headers=headers, tablefmt="github", disable_numparse=True, **kwargs)


def angle_summary_line(bound: AngleBound) -> str:
    if bound.winning_K is not None:
        return f"{bound.value} (K={bound.winning_K})"
    return f"{bound.value} [{bound.result.provenance.value}]"


def dimension_summary_line(report: DimensionReport) -> str:
    return f"{report.overall.value} @ {report.winner}"


def render_breakdowns(bound: AngleBound) -> str:
    """Per-K, per-n breakdown with a provenance on every cell."""
    rows = []
    for breakdown in bound.breakdowns:
        for row in breakdown.rows:
            rows.append([breakdown.K, row.n, row.class_count, _cell(row.bound),
                         str(row.query) if row.query else ""])
        total = breakdown.total
        rows.append([breakdown.K, "total", "", f"{total} [pillar-pipeline]" if total is not None else "NONE", ""])
        if breakdown.refinement is not None:
            rows.append([breakdown.K, "refined", "", _cell(breakdown.refinement), ""])
    return _table(rows, ["K", "n", "classes", "bound", "query"])


def render_angle_bound(bound: AngleBound, fmt: str) -> str:
    if fmt == "json":
        return to_json(bound.to_dict())
    if fmt in ("csv", "tsv-plot"):
        delimiter = "," if fmt == "csv" else "\t"
        rows = [["r", "angle", "K", "n", "classes", "bound", "provenance"]]
        for breakdown in bound.breakdowns:
            for row in breakdown.rows:
                rows.append([bound.r, str(bound.angle), breakdown.K, row.n, row.class_count,
                             "" if row.bound.is_none else row.bound.value,
                             row.bound.provenance.value if row.bound.provenance else "none"])
        rows.append([bound.r, str(bound.angle), bound.winning_K or "", "", "", bound.value,
                     bound.result.provenance.value])
        return "\n".join(delimiter.join(str(v) for v in row) for row in rows) + "\n"

    parts = [f"Lines at angle {bound.angle} in R^{bound.r}", ""]
    if bound.breakdowns:
        parts += [render_breakdowns(bound), ""]
    candidates = [[name, _cell(result)] for name, result in bound.candidates.items()]
    parts += [_table(candidates, ["candidate", "bound"]), ""]
    if bound.weaker_than_sdp:
        parts.append("note: some pillar queries lacked SDP-grade data; the bound may be weaker than attainable")
    if bound.missing_queries:
        parts.append("missing: " + "; ".join(str(q) for q in bound.missing_queries))
    parts.append(angle_summary_line(bound))
    return "\n".join(parts) + "\n"


def render_dimension_report(report: DimensionReport, fmt: str) -> str:
    if fmt == "json":
        return to_json(report.to_dict())
    if fmt in ("csv", "tsv-plot"):
        return render_table([report], fmt)

    rows = [[str(angle), _cell(bound.result), bound.winning_K if bound.winning_K is not None else "",
             "yes" if bound.weaker_than_sdp else ""]
            for angle, bound in sorted(report.per_angle.items())]
    rows.append(["2r+3", f"{report.baseline_2r3} [baseline-2r+3]", "", ""])
    parts = [f"Equiangular lines in R^{report.r}" + (" (selected angles only)" if report.partial else ""), "",
             _table(rows, ["angle", "bound", "K", "weaker"]), ""]
    for angle, bound in sorted(report.per_angle.items()):
        if bound.breakdowns:
            parts += [f"angle {angle}:", render_breakdowns(bound), ""]
    parts.append(f"Gerzon bound: {report.gerzon}")
    if report.capped_by_gerzon:
        parts.append(f"note: {report.overall.detail}; the absolute bound is reported instead")
    if report.formula is not None:
        parts.append(f"closed formula: {report.formula.value} @ {report.formula.angle} ({report.formula.branch})")
    if report.known is not None:
        parts.append(f"known value: {report.known}")
        if report.soundness_violation:
            parts.append("WARNING: bound is below the known value")
    parts.append(dimension_summary_line(report))
    return "\n".join(parts) + "\n"


def _angle_columns(reports: Sequence[DimensionReport]) -> List[Angle]:
    return sorted({angle for report in reports for angle in report.per_angle})


def _provenance(result: Optional[BoundResult]) -> str:
    if result is None or result.is_none:
        return "none"
    return result.provenance.value


def _flag(value: bool) -> str:
    return "yes" if value else "no"


def render_table(reports: Sequence[DimensionReport], fmt: str) -> str:
    """
    One row per dimension; in table mode, blocks of r / bound / angle rows.
    Every bound is paired with its provenance and the weaker-than-SDP flag.
    """
    if fmt == "json":
        return to_json([report.to_dict() for report in reports])
    if fmt == "tsv-plot":
        lines = ["# r\tbound\tprovenance\tweaker\tformula\tgerzon"]
        for report in reports:
            formula = report.formula.value if report.formula else GAP
            lines.append(f"{report.r}\t{report.overall.value}\t{_provenance(report.overall)}\t"
                         f"{_flag(report.weaker_than_sdp)}\t{formula}\t{report.gerzon}")
        return "\n".join(lines) + "\n"

    columns = _angle_columns(reports)
    if fmt == "csv":
        header = ["r", "bound", "angle", "provenance", "weaker"]
        for angle in columns:
            header += [str(angle), f"{angle} provenance"]
        header += ["formula", "formula_angle", "gerzon"]
        rows = [header]
        for report in reports:
            row = [report.r, report.overall.value, report.winner, _provenance(report.overall),
                   _flag(report.weaker_than_sdp)]
            for angle in columns:
                bound = report.per_angle.get(angle)
                row += [bound.value, _provenance(bound.result)] if bound else ["", ""]
            row += [report.formula.value if report.formula else "",
                    str(report.formula.angle) if report.formula else "", report.gerzon]
            rows.append(row)
        return _csv(rows)

    blocks = []
    for start in range(0, len(reports), BLOCK_WIDTH):
        chunk = reports[start:start + BLOCK_WIDTH]
        rows = [
            ["bound"] + [_cell(report.overall) for report in chunk],
            ["angle"] + [report.winner for report in chunk],
            ["weaker"] + [_flag(report.weaker_than_sdp) for report in chunk],
        ]
        blocks.append(_table(rows, ["r"] + [str(report.r) for report in chunk]))
    return "\n\n".join(blocks) + "\n"


@dataclass(frozen=True)
class FigurePoint:
    r: int
    gerzon: int
    method: BoundResult
    direct: BoundResult

    def to_dict(self) -> dict:
        return {'r': self.r, 'gerzon': self.gerzon, 'method': self.method.to_dict(),
                'direct': self.direct.to_dict()}


def figure_points(r_values: Iterable[int], angle: Angle, oracle: TwoDistanceOracle,
                  jobs: int = 1) -> List[FigurePoint]:
    """Gerzon, the method's bound and the direct SDP bound per dimension; missing points stay NONE."""
    def point(r: int) -> FigurePoint:
        method = pipeline_bound(r, angle, oracle)
        return FigurePoint(r, gerzon(r), method, direct_sdp_bound(r, angle, oracle))

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(point, list(r_values)))


def render_figure_data(points: Sequence[FigurePoint], angle: Angle, fmt: str) -> str:
    if fmt == "json":
        return to_json({'angle': str(angle), 'points': [p.to_dict() for p in points]})

    def value(result: BoundResult):
        return GAP if result.is_none else result.value

    delimiter = "," if fmt == "csv" else "\t"
    header = ["r", "gerzon", "method", "method provenance", "sdp", "sdp provenance"]
    lines = [f"# angle {angle}", delimiter.join(header)]
    for p in points:
        cells = (p.r, p.gerzon, value(p.method), _provenance(p.method), value(p.direct), _provenance(p.direct))
        lines.append(delimiter.join(str(v) for v in cells))
    return "\n".join(lines) + "\n"


def render_checks(results: Sequence[CheckResult], fmt: str) -> str:
    if fmt == "json":
        return to_json([r.to_dict() for r in results])
    if fmt in ("csv", "tsv-plot"):
        rows = [["check", "passed", "residual", "detail"]]
        rows += [[r.name, r.passed, _residual(r.residual), r.detail] for r in results]
        if fmt == "csv":
            return _csv(rows)
        return "\n".join("\t".join(str(v) for v in row) for row in rows) + "\n"

    rows = [[r.name, "pass" if r.passed else "FAIL", _residual(r.residual), r.detail] for r in results]
    failed = sum(1 for r in results if not r.passed)
    summary = f"{len(results) - failed}/{len(results)} checks passed"
    return _table(rows, ["check", "result", "residual", "detail"]) + "\n\n" + summary + "\n"


def _residual(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2e}"


def render_cache(cache: SdpCache, fmt: str, dim: Optional[int] = None) -> str:
    entries = [(q, e) for q, e in cache.items() if dim is None or q.r == dim]
    if fmt == "json":
        return to_json([{**q.to_dict(), 'bound': e.bound, 'source': e.source} for q, e in entries])
    rows = [[q.r, q.beta, q.gamma, e.bound, e.source] for q, e in entries]
    if fmt == "csv":
        return _csv([["r", "beta", "gamma", "bound", "source"]] +
                    [[r, str(b), str(g), v, s] for r, b, g, v, s in rows])
    if fmt == "tsv-plot":
        return SdpCache(dict(entries)).to_text()
    table = _table([[r, str(b), str(g), v, s] for r, b, g, v, s in rows], ["r", "beta", "gamma", "bound", "source"])
    return table + f"\n\n{len(entries)} entries\n"
