"""
Two-Distance Bounds Module
Upper bounds on s(r, beta, gamma), the largest spherical two-distance set in
R^r with inner products beta and gamma, through interchangeable backends:

- closed form ``(r+2) / (1 - (r-1)/(r(1-beta)(1-gamma)))``
- the r+1 rule for two negative inner products
- the relative bound for the equiangular case gamma = -beta
- a cache of externally computed SDP values
- an external SDP solver spoken to over a tiny subprocess protocol

Backends answer with a BoundResult; ``best_bound`` keeps the minimum.
"""

import asyncio
import logging
import shlex
import sys
import threading
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_FLOOR
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple
from urllib.parse import quote, unquote

from exceptions import (
    CacheFormatException, ConfigurationException, EquiboundException, PreconditionException,
    SolverException, SolverExitException, SolverOutputException, SolverTimeoutException
)
from rationals import floor_rational, format_rational, parse_rational

logger = logging.getLogger(__name__)


def _shipped_cache_path() -> Path:
    # source checkout first, then the data_files location of an installed copy
    local = Path(__file__).parent / "data" / "sdp_cache.txt"
    return local if local.exists() else Path(sys.prefix) / "data" / "sdp_cache.txt"


DEFAULT_CACHE_PATH = _shipped_cache_path()


class Provenance(Enum):
    """Where a bound came from. Every number the tool prints carries one."""

    # two-distance backends
    CLOSED_FORM = "closed-form"
    NEGATIVE_PAIR = "negative-pair"
    RELATIVE_BOUND = "relative"
    SDP_CACHE = "sdp-cache"
    SDP_EXTERNAL = "sdp-external"
    FALLBACK_CAP = "fallback-cap"
    # per-pillar rules
    LEMMENS_SEIDEL = "lemmens-seidel"
    DIMENSION_COUNT = "dimension-count"
    SIGN_CONSTRAINT = "sign-constraint"
    # per-angle derivations
    PILLAR_PIPELINE = "pillar-pipeline"
    EXTREMAL_BASE = "extremal-base"
    SIX_LINE = "six-line"
    BASE_FOUR = "base-four"
    BASE_FIVE = "base-five"
    REFINED_FIFTH = "refined-fifth"
    RATIONAL_FIFTH = "rational-fifth"
    ANGLE_THIRD = "angle-third"
    BASELINE = "baseline-2r+3"
    GERZON = "gerzon"


SDP_GRADE = frozenset({Provenance.SDP_CACHE, Provenance.SDP_EXTERNAL})


@dataclass(frozen=True, order=True)
class TwoDistanceQuery:
    """A request for s(r, beta, gamma); beta > gamma is enforced on construction."""

    r: int
    beta: Fraction
    gamma: Fraction

    def __post_init__(self):
        beta, gamma = Fraction(self.beta), Fraction(self.gamma)
        if beta < gamma:
            beta, gamma = gamma, beta
        object.__setattr__(self, 'beta', beta)
        object.__setattr__(self, 'gamma', gamma)
        if not isinstance(self.r, int) or self.r < 1:
            raise PreconditionException(f"dimension must be a positive integer, got {self.r}",
                                        operation="TwoDistanceQuery", parameters={'r': self.r})
        if not -1 < gamma < beta < 1:
            raise PreconditionException(
                f"two-distance query needs -1 < gamma < beta < 1, got beta={beta}, gamma={gamma}",
                operation="TwoDistanceQuery",
                parameters={'beta': beta, 'gamma': gamma}
            )

    def to_dict(self) -> dict:
        return {'r': self.r, 'beta': format_rational(self.beta), 'gamma': format_rational(self.gamma)}

    def solver_args(self) -> List[str]:
        return [str(self.r), format_rational(self.beta), format_rational(self.gamma)]

    def __str__(self) -> str:
        return f"s({self.r}, {self.beta}, {self.gamma})"


@dataclass(frozen=True)
class BoundResult:
    """An integer upper bound, or NONE (value is None), with its provenance."""

    value: Optional[int]
    provenance: Optional[Provenance] = None
    detail: str = ""

    @classmethod
    def none(cls, detail: str = "") -> 'BoundResult':
        return cls(None, None, detail)

    @property
    def is_none(self) -> bool:
        return self.value is None

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'provenance': self.provenance.value if self.provenance else None,
            'detail': self.detail
        }

    def __str__(self) -> str:
        if self.value is None:
            return f"NONE ({self.detail})" if self.detail else "NONE"
        return f"{self.value} [{self.provenance.value}]"


def closed_form_bound(query: TwoDistanceQuery) -> BoundResult:
    """(r+2)/(1 - (r-1)/(r(1-beta)(1-gamma))), floored; NONE when the denominator is not positive."""
    r = query.r
    denominator = 1 - Fraction(r - 1) / (r * (1 - query.beta) * (1 - query.gamma))
    if denominator <= 0:
        return BoundResult.none("closed form inapplicable")
    return BoundResult(floor_rational((r + 2) / denominator), Provenance.CLOSED_FORM,
                       f"closed form for {query}")


def negative_pair_bound(query: TwoDistanceQuery) -> BoundResult:
    """r+1 when both inner products are negative."""
    if query.beta < 0 and query.gamma < 0:
        return BoundResult(query.r + 1, Provenance.NEGATIVE_PAIR, "both inner products negative")
    return BoundResult.none("negative-pair rule inapplicable")


def relative_bound(query: TwoDistanceQuery) -> BoundResult:
    """
    Equiangular case gamma = -beta: floor(r(1-beta^2)/(1-r beta^2)) while r beta^2 < 1.
    """
    beta = query.beta
    if beta <= 0 or query.gamma != -beta:
        return BoundResult.none("relative bound needs gamma = -beta > -1")
    slack = 1 - query.r * beta * beta
    if slack <= 0:
        return BoundResult.none("relative bound needs r*beta^2 < 1")
    return BoundResult(floor_rational(query.r * (1 - beta * beta) / slack), Provenance.RELATIVE_BOUND,
                       f"relative bound at angle {beta}")


def lemmens_seidel_bound(r: int, alpha: Fraction, K: int) -> int:
    """
    r - K + floor(2 alpha (r-K)/(1-alpha)): bounds a pillar whose residual
    vectors are pairwise orthogonal or at the fixed negative inner product.
    """
    if K < 0 or r < K:
        raise PreconditionException(f"need r >= K >= 0, got r={r}, K={K}",
                                    operation="lemmens_seidel_bound", parameters={'r': r, 'K': K})
    alpha = Fraction(alpha)
    room = r - K
    return room + floor_rational(2 * alpha * room / (1 - alpha))


def fallback_cap(query: TwoDistanceQuery) -> BoundResult:
    """r(r+3)/2, the absolute two-distance bound. Only used when explicitly allowed."""
    return BoundResult(query.r * (query.r + 3) // 2, Provenance.FALLBACK_CAP,
                       "absolute two-distance cap (not from the pillar method)")


# everything printable except the comment marker, the escape character and whitespace
_SOURCE_SAFE = "!\"$&'()*+,/:;<=>?@[\\]^`{|}"


def _escape_source(source: str) -> str:
    return quote(source, safe=_SOURCE_SAFE)


@dataclass(frozen=True)
class CacheEntry:
    bound: int
    source: str = "unknown"


class SdpCache:
    """
    Exact-key store of two-distance bounds. Reads are lock-free; writes
    take a lock and always keep the smaller of two bounds for a key.
    """

    def __init__(self, entries: Optional[Dict[TwoDistanceQuery, CacheEntry]] = None,
                 path: Optional[Path] = None):
        self._entries: Dict[TwoDistanceQuery, CacheEntry] = dict(entries or {})
        self._lock = threading.RLock()
        self.path = Path(path) if path else None
        self.dirty = False

    @classmethod
    def from_text(cls, text: str, path: Optional[Path] = None) -> 'SdpCache':
        cache = cls(path=path)
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 4:
                raise CacheFormatException(f"expected 'r beta gamma bound [source]', got '{raw.strip()}'",
                                           path=str(path) if path else None, line_number=line_number)
            try:
                query = TwoDistanceQuery(int(parts[0]), parse_rational(parts[1]), parse_rational(parts[2]))
                bound = int(parts[3])
            except (ValueError, EquiboundException) as e:
                raise CacheFormatException(f"bad cache record '{raw.strip()}': {e}",
                                           path=str(path) if path else None, line_number=line_number)
            if bound < 0:
                raise CacheFormatException(f"negative bound in '{raw.strip()}'",
                                           path=str(path) if path else None, line_number=line_number)
            source = unquote(" ".join(parts[4:])) or "unknown"
            existing = cache._entries.get(query)
            if existing is not None:
                logger.warning(f"Duplicate cache key {query} at line {line_number}; keeping the smaller bound")
                if existing.bound <= bound:
                    continue
            cache._entries[query] = CacheEntry(bound, source)
        logger.debug(f"Parsed {len(cache)} cache entries from {path or 'text'}")
        return cache

    @classmethod
    def load(cls, path: Path) -> 'SdpCache':
        path = Path(path)
        return cls.from_text(path.read_text(encoding='utf-8'), path=path)

    @classmethod
    def shipped(cls) -> 'SdpCache':
        """The cache bundled with the package."""
        return cls.load(DEFAULT_CACHE_PATH)

    def to_text(self) -> str:
        lines = ["# r beta gamma bound source"]
        for query, entry in self.items():
            lines.append(f"{query.r} {format_rational(query.beta)} {format_rational(query.gamma)} "
                         f"{entry.bound} {_escape_source(entry.source)}")
        return "\n".join(lines) + "\n"

    def get(self, query: TwoDistanceQuery) -> Optional[CacheEntry]:
        return self._entries.get(query)

    def put(self, query: TwoDistanceQuery, bound: int, source: str) -> bool:
        """Store a bound; returns True when the cache changed."""
        with self._lock:
            existing = self._entries.get(query)
            if existing is not None and existing.bound <= bound:
                return False
            self._entries[query] = CacheEntry(int(bound), source)
            self.dirty = True
            return True

    def merge(self, other: 'SdpCache') -> int:
        changed = 0
        for query, entry in other.items():
            if self.put(query, entry.bound, entry.source):
                changed += 1
        logger.info(f"Merged cache: {changed} entries added or tightened")
        return changed

    def items(self) -> List[Tuple[TwoDistanceQuery, CacheEntry]]:
        with self._lock:
            return sorted(self._entries.items(), key=lambda item: item[0])

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, query: TwoDistanceQuery) -> bool:
        return query in self._entries

    def __iter__(self) -> Iterator[TwoDistanceQuery]:
        return iter(query for query, _ in self.items())


def cache_lookup(query: TwoDistanceQuery, cache: Optional[SdpCache]) -> BoundResult:
    if cache is None:
        return BoundResult.none("no cache loaded")
    entry = cache.get(query)
    if entry is None:
        return BoundResult.none("cache miss")
    return BoundResult(entry.bound, Provenance.SDP_CACHE, entry.source)


def parse_solver_output(text: str, command: Optional[str] = None, query=None) -> int:
    """Floor the single decimal number a solver printed."""
    tokens = text.split()
    if len(tokens) != 1:
        raise SolverOutputException(f"expected one number on stdout, got {len(tokens)} tokens",
                                    command=command, query=query, output=text)
    try:
        value = Decimal(tokens[0])
    except InvalidOperation:
        raise SolverOutputException(f"cannot parse solver output '{tokens[0]}'",
                                    command=command, query=query, output=text)
    if not value.is_finite() or value < 0:
        raise SolverOutputException(f"solver returned unusable value '{tokens[0]}'",
                                    command=command, query=query, output=text)
    return int(value.to_integral_value(rounding=ROUND_FLOOR))


class ExternalSdpBackend:
    """
    Runs ``<cmd> <r> <beta_num>/<beta_den> <gamma_num>/<gamma_den>`` and reads
    one decimal upper bound from stdout. Results are floored and written to
    the cache.
    """

    name = "external"
    # accepted disagreement with an existing cache entry, after flooring
    SOLVER_VARIATION = 1

    def __init__(self, command: str, timeout: float = 60.0, cache: Optional[SdpCache] = None, jobs: int = 1):
        self.argv = shlex.split(command or "")
        if not self.argv:
            raise ConfigurationException("external solver command is empty", config_key="sdp_cmd",
                                         config_value=command)
        if timeout <= 0:
            raise ConfigurationException("solver timeout must be positive", config_key="timeout",
                                         config_value=timeout)
        self.command = command
        self.timeout = timeout
        self.cache = cache
        self.jobs = max(1, int(jobs))
        self._slots = threading.BoundedSemaphore(self.jobs)

    async def solve_async(self, query: TwoDistanceQuery) -> int:
        argv = self.argv + query.solver_args()
        logger.debug(f"Launching solver: {' '.join(argv)}")
        try:
            process = await asyncio.create_subprocess_exec(
                *argv,
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.PIPE,
            )
        except (FileNotFoundError, PermissionError) as e:
            raise SolverExitException(f"cannot start solver: {e}", command=self.command, query=query,
                                      returncode=127)

        try:
            stdout, stderr = await asyncio.wait_for(process.communicate(), self.timeout)
        except asyncio.TimeoutError:
            process.kill()
            await process.wait()
            raise SolverTimeoutException(f"solver exceeded {self.timeout}s", command=self.command,
                                         query=query, timeout=self.timeout)

        if process.returncode != 0:
            raise SolverExitException(f"solver exited with status {process.returncode}", command=self.command,
                                      query=query, returncode=process.returncode,
                                      stderr=stderr.decode('utf-8', errors='replace'))
        value = parse_solver_output(stdout.decode('utf-8', errors='replace'), self.command, query)
        self._record(query, value)
        return value

    def _record(self, query: TwoDistanceQuery, value: int) -> None:
        if self.cache is None:
            return
        existing = self.cache.get(query)
        if existing is not None and abs(existing.bound - value) > self.SOLVER_VARIATION:
            logger.warning(f"Solver value {value} for {query} disagrees with cached {existing.bound} "
                           f"({existing.source})")
        source = f"external:{Path(self.argv[0]).name}"
        self.cache.put(query, value, source)

    def query(self, query: TwoDistanceQuery) -> BoundResult:
        """Synchronous single query; must not be called from a running event loop."""
        if self.cache is not None:
            entry = self.cache.get(query)
            if entry is not None and entry.source.startswith("external:"):
                return BoundResult(entry.bound, Provenance.SDP_EXTERNAL, f"earlier run of {entry.source}")
        with self._slots:
            return asyncio.run(external_sdp(query, self))

    async def solve_many(self, queries: Iterable[TwoDistanceQuery]) -> Dict[TwoDistanceQuery, BoundResult]:
        """Solve a batch with at most ``jobs`` solver processes alive at once."""
        semaphore = asyncio.Semaphore(self.jobs)
        ordered = list(dict.fromkeys(queries))

        async def solve_one(query: TwoDistanceQuery) -> BoundResult:
            async with semaphore:
                return await external_sdp(query, self)

        results = await asyncio.gather(*(solve_one(query) for query in ordered))
        solved = sum(1 for result in results if not result.is_none)
        logger.info(f"Solver batch finished: {solved}/{len(ordered)} queries answered")
        return dict(zip(ordered, results))


async def external_sdp(query: TwoDistanceQuery, solver: Optional[ExternalSdpBackend]) -> BoundResult:
    """One solver run; any protocol failure becomes a NONE result."""
    if solver is None:
        return BoundResult.none("no external solver configured")
    try:
        value = await solver.solve_async(query)
    except SolverException as e:
        logger.warning(f"External solver failed for {query}: {e}")
        return BoundResult.none(str(e))
    return BoundResult(value, Provenance.SDP_EXTERNAL, f"solver '{solver.command}'")


class ClosedFormBackend:
    name = "closed-form"

    def query(self, query: TwoDistanceQuery) -> BoundResult:
        return closed_form_bound(query)


class NegativePairBackend:
    name = "negative-pair"

    def query(self, query: TwoDistanceQuery) -> BoundResult:
        return negative_pair_bound(query)


class RelativeBoundBackend:
    name = "relative"

    def query(self, query: TwoDistanceQuery) -> BoundResult:
        return relative_bound(query)


class CacheBackend:
    name = "cache"

    def __init__(self, cache: SdpCache):
        self.cache = cache

    def query(self, query: TwoDistanceQuery) -> BoundResult:
        return cache_lookup(query, self.cache)


BACKEND_NAMES = ("closed-form", "negative-pair", "relative", "cache", "external")
SDP_BACKEND_NAMES = frozenset({"cache", "external"})


def build_backends(names: Sequence[str], cache: Optional[SdpCache] = None,
                   solver: Optional[ExternalSdpBackend] = None) -> list:
    backends = []
    for name in names:
        if name == "closed-form":
            backends.append(ClosedFormBackend())
        elif name == "negative-pair":
            backends.append(NegativePairBackend())
        elif name == "relative":
            backends.append(RelativeBoundBackend())
        elif name == "cache":
            if cache is None:
                raise ConfigurationException("cache backend enabled but no cache loaded", config_key="backends")
            backends.append(CacheBackend(cache))
        elif name == "external":
            if solver is None:
                raise ConfigurationException("external backend enabled but no solver command configured",
                                             config_key="sdp_cmd")
            backends.append(solver)
        else:
            raise ConfigurationException(f"unknown backend '{name}'", config_key="backends", config_value=name)
    return backends


def best_bound(query: TwoDistanceQuery, backends: Sequence, allow_fallback_cap: bool = False) -> BoundResult:
    """Minimum over all backend answers; optionally the absolute cap when none answer."""
    best: Optional[BoundResult] = None
    for backend in backends:
        result = backend.query(query)
        if result.is_none:
            continue
        if query.beta >= 0 and result.value < query.r:
            # r vectors with pairwise inner product beta >= 0 always exist
            logger.error(f"Discarding {result} for {query}: below the dimension")
            continue
        if best is None or result.value < best.value:
            best = result
    if best is not None:
        return best
    if allow_fallback_cap:
        logger.warning(f"No backend answered {query}; using the absolute two-distance cap")
        return fallback_cap(query)
    return BoundResult.none(f"no backend answered {query}")


class TwoDistanceOracle:
    """
    Thread-safe memoizing front for ``best_bound`` used by the pillar engine.
    """

    def __init__(self, backends: Sequence, allow_fallback_cap: bool = False):
        self.backends = list(backends)
        self.allow_fallback_cap = allow_fallback_cap
        self._memo: Dict[Tuple[str, TwoDistanceQuery], BoundResult] = {}
        self._lock = threading.Lock()

    @property
    def backend_names(self) -> List[str]:
        return [backend.name for backend in self.backends]

    def __repr__(self) -> str:
        return f"TwoDistanceOracle({','.join(self.backend_names)})"

    def _memoized(self, kind: str, query: TwoDistanceQuery, compute) -> BoundResult:
        key = (kind, query)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        result = compute()
        with self._lock:
            return self._memo.setdefault(key, result)

    def bound(self, query: TwoDistanceQuery) -> BoundResult:
        return self._memoized("best", query,
                              lambda: best_bound(query, self.backends, self.allow_fallback_cap))

    def sdp_bound(self, query: TwoDistanceQuery) -> BoundResult:
        """Best answer among SDP-grade backends only (cache and external solver)."""
        sdp_backends = [backend for backend in self.backends if backend.name in SDP_BACKEND_NAMES]
        return self._memoized("sdp", query, lambda: best_bound(query, sdp_backends, False))


def default_oracle(cache: Optional[SdpCache] = None, allow_fallback_cap: bool = False) -> TwoDistanceOracle:
    """Closed form, negative pair, relative bound and the shipped (or given) cache."""
    cache = cache if cache is not None else SdpCache.shipped()
    names = ("closed-form", "negative-pair", "relative", "cache")
    return TwoDistanceOracle(build_backends(names, cache=cache), allow_fallback_cap)
