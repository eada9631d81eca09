"""
Pillar Engine Module
Upper bounds on the number of equiangular lines via the pillar decomposition.

For a fixed angle alpha = 1/d every possible K-base size is examined: the
lines outside the base split into pillars by sign pattern, each pillar is
bounded by one of a handful of rules (dimension count, sign constraint,
negative pair, the orthogonal/negative-pair bound, or a two-distance query
answered by the oracle), and the per-K totals are maximized. The per-angle
result is the minimum over every valid bound for that angle; the bound on
the dimension is the maximum over all admissible angles and the 2r+3 branch,
never more than the absolute bound r(r+1)/2.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from exceptions import MissingBoundDataException, PreconditionException
from gram_lab import cross_class_capacity
from rationals import (
    Angle, Regime, SignVector, beta_gamma, binomial, ell, ell_regime, floor_rational
)
from reference_data import KnownRange, known_range
from two_distance import (
    BoundResult, Provenance, TwoDistanceOracle, TwoDistanceQuery, lemmens_seidel_bound
)
from utils.context import performance_monitor
from utils.decorators import log_calls, timer

logger = logging.getLogger(__name__)

PIPELINE_MIN_DIMENSION = 15
THIRD = Angle(3)
FIFTH = Angle(5)

# alpha = 1/5 refinements need the six-line theorem, valid from r = 23
FIFTH_REFINEMENT_START = 23
FIFTH_SMALL_LIMIT = 60
SIX_LINE_PLATEAU_END = 185

# residual pair of the double-sign pillars over a 4-base at alpha = 1/5
FIFTH_RESIDUAL_BETA = Fraction(1, 13)
FIFTH_RESIDUAL_GAMMA = Fraction(-5, 13)

EXCEPTIONAL_DIMENSIONS = frozenset({44, 45, 46, 76, 77, 78, 117, 118, 166, 222, 286, 358})
CONJECTURE_MIN_DIMENSION = 44

AngleLike = Union[Angle, Fraction, str]


def _as_angle(alpha: AngleLike) -> Angle:
    if isinstance(alpha, Angle):
        return alpha
    if isinstance(alpha, Fraction):
        return Angle.from_rational(alpha)
    return Angle.parse(alpha)


def _require_pipeline_dimension(r: int, operation: str) -> None:
    if r < PIPELINE_MIN_DIMENSION:
        raise PreconditionException(
            f"{operation}() covers r >= {PIPELINE_MIN_DIMENSION}, got r={r}",
            operation=operation,
            parameters={'r': r}
        )


@dataclass(frozen=True)
class PillarRow:
    """All pillars over one base that share the folded sign count n."""

    n: int
    class_count: int
    bound: BoundResult
    query: Optional[TwoDistanceQuery] = None

    @property
    def contribution(self) -> Optional[int]:
        return None if self.bound.is_none else self.class_count * self.bound.value

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'class_count': self.class_count,
            'bound': self.bound.to_dict(),
            'query': self.query.to_dict() if self.query else None
        }


@dataclass
class PillarBreakdown:
    """
    Bound for one base size K. ``total`` is K plus the pillar contributions;
    ``refinement`` holds a sharper bound specific to this (alpha, K) when one
    applies, and ``value`` is the smaller of the two.
    """

    r: int
    alpha: Angle
    K: int
    rows: List[PillarRow]
    extremal: bool = False
    refinement: Optional[BoundResult] = None

    @property
    def total(self) -> Optional[int]:
        if any(row.bound.is_none for row in self.rows):
            return None
        return self.K + sum(row.contribution for row in self.rows)

    @property
    def value(self) -> Optional[int]:
        values = [self.total]
        if self.refinement is not None and not self.refinement.is_none:
            values.append(self.refinement.value)
        values = [v for v in values if v is not None]
        return min(values) if values else None

    @property
    def provenance(self) -> Provenance:
        total = self.total
        if self.refinement is not None and not self.refinement.is_none:
            if total is None or self.refinement.value < total:
                return self.refinement.provenance
        return Provenance.EXTREMAL_BASE if self.extremal else Provenance.PILLAR_PIPELINE

    @property
    def missing_queries(self) -> List[TwoDistanceQuery]:
        return [row.query for row in self.rows if row.bound.is_none and row.query is not None]

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'alpha': str(self.alpha),
            'K': self.K,
            'extremal': self.extremal,
            'rows': [row.to_dict() for row in self.rows],
            'total': self.total,
            'refinement': self.refinement.to_dict() if self.refinement else None,
            'value': self.value,
            'provenance': self.provenance.value
        }


@dataclass
class AngleBound:
    """Bound on the number of lines at one angle, with everything that went into it."""

    r: int
    angle: Angle
    result: BoundResult
    winning_K: Optional[int] = None
    breakdowns: List[PillarBreakdown] = field(default_factory=list)
    candidates: Dict[str, BoundResult] = field(default_factory=dict)
    missing_queries: List[TwoDistanceQuery] = field(default_factory=list)
    weaker_than_sdp: bool = False

    @property
    def value(self) -> int:
        return self.result.value

    def breakdown(self, K: int) -> Optional[PillarBreakdown]:
        return next((b for b in self.breakdowns if b.K == K), None)

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'angle': str(self.angle),
            'result': self.result.to_dict(),
            'winning_K': self.winning_K,
            'candidates': {name: result.to_dict() for name, result in self.candidates.items()},
            'breakdowns': [b.to_dict() for b in self.breakdowns],
            'missing_queries': [q.to_dict() for q in self.missing_queries],
            'weaker_than_sdp': self.weaker_than_sdp
        }


@dataclass(frozen=True)
class AngleSet:
    r: int
    angles: Tuple[Angle, ...]

    @property
    def denominators(self) -> List[int]:
        return [angle.denom for angle in self.angles]


@dataclass(frozen=True)
class ConjectureValue:
    r: int
    value: int
    angle: Angle
    branch: str

    def to_dict(self) -> dict:
        return {'r': self.r, 'value': self.value, 'angle': str(self.angle), 'branch': self.branch}


@dataclass
class DimensionReport:
    """Bound on the number of equiangular lines in R^r."""

    r: int
    per_angle: Dict[Angle, AngleBound]
    overall: BoundResult
    arg_angles: List[Angle]
    gerzon: int
    baseline_2r3: int
    known: Optional[KnownRange] = None
    formula: Optional[ConjectureValue] = None
    partial: bool = False

    @property
    def soundness_violation(self) -> bool:
        return self.known is not None and self.overall.value < self.known.lower

    @property
    def weaker_than_sdp(self) -> bool:
        return self.capped_by_gerzon or any(bound.weaker_than_sdp for bound in self.per_angle.values())

    @property
    def capped_by_gerzon(self) -> bool:
        return self.overall.provenance is Provenance.GERZON

    @property
    def winner(self) -> str:
        if self.arg_angles:
            return " ".join(str(angle) for angle in self.arg_angles)
        return "gerzon" if self.capped_by_gerzon else "2r+3"

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'overall': self.overall.to_dict(),
            'arg_angles': [str(angle) for angle in self.arg_angles],
            'per_angle': {str(angle): bound.to_dict() for angle, bound in sorted(self.per_angle.items())},
            'gerzon': self.gerzon,
            'baseline_2r3': self.baseline_2r3,
            'known': self.known.to_dict() if self.known else None,
            'formula': self.formula.to_dict() if self.formula else None,
            'partial': self.partial,
            'weaker_than_sdp': self.weaker_than_sdp,
            'capped_by_gerzon': self.capped_by_gerzon,
            'soundness_violation': self.soundness_violation
        }


def gerzon(r: int) -> int:
    """r(r+1)/2, the absolute bound on equiangular lines in R^r."""
    if r < 2:
        raise PreconditionException(f"gerzon() needs r >= 2, got {r}", operation="gerzon", parameters={'r': r})
    return r * (r + 1) // 2


def enumerate_angles(r: int) -> AngleSet:
    """Every alpha = 1/d, d odd and at least 3, with d^2 <= 2r."""
    _require_pipeline_dimension(r, "enumerate_angles")
    angles = []
    d = 3
    while d * d <= 2 * r:
        angles.append(Angle(d))
        d += 2
    return AngleSet(r, tuple(angles))


def bound_alpha_third(r: int) -> int:
    """2(r-1): lines at angle 1/3 in dimension 15 or more."""
    _require_pipeline_dimension(r, "bound_alpha_third")
    return 2 * (r - 1)


def _class_count(K: int, n: int) -> int:
    count = binomial(K, n)
    return count // 2 if 2 * n == K else count


def _pillar_rule(r: int, alpha: Fraction, K: int, n: int,
                 oracle: TwoDistanceOracle) -> Tuple[BoundResult, Optional[TwoDistanceQuery]]:
    regime = ell_regime(alpha, K, n)
    if n == 1 and regime is not Regime.ABOVE_ALPHA:
        return BoundResult(r - K, Provenance.DIMENSION_COUNT, "residuals orthogonal, one per free dimension"), None
    if n == 1:
        projection = ell(alpha, K, 1)
        value = floor_rational((1 - alpha) / (projection - alpha))
        return BoundResult(value, Provenance.SIGN_CONSTRAINT, f"(1-alpha)/(ell-alpha) with ell={projection}"), None
    if regime is Regime.ABOVE_ALPHA:
        return BoundResult(r + 1, Provenance.NEGATIVE_PAIR, "residual inner products both negative"), None
    if regime is Regime.EQUAL_ALPHA:
        return BoundResult(lemmens_seidel_bound(r, alpha, K), Provenance.LEMMENS_SEIDEL,
                           "residuals orthogonal or at a fixed negative product"), None
    beta, gamma = beta_gamma(alpha, ell(alpha, K, n))
    query = TwoDistanceQuery(r, beta, gamma)
    return oracle.bound(query), query


def bound_small_K(r: int, alpha: AngleLike, K: int, oracle: TwoDistanceOracle) -> PillarBreakdown:
    """
    Pillar bound for a non-extremal base of size K. A row whose two-distance
    query went unanswered has a NONE bound and leaves ``total`` empty.
    """
    angle = _as_angle(alpha)
    a = angle.as_rational()
    if not 2 <= K < angle.extremal_base_size:
        raise PreconditionException(f"bound_small_K() needs 2 <= K < {angle.extremal_base_size}, got {K}",
                                    operation="bound_small_K", parameters={'K': K, 'alpha': angle})
    if r <= K:
        raise PreconditionException(f"bound_small_K() needs r > K, got r={r}, K={K}",
                                    operation="bound_small_K", parameters={'r': r, 'K': K})

    rows = []
    for n in range(1, K // 2 + 1):
        bound, query = _pillar_rule(r, a, K, n, oracle)
        rows.append(PillarRow(n, _class_count(K, n), bound, query))
    breakdown = PillarBreakdown(r, angle, K, rows)
    logger.debug(f"s_{angle}({r}) K={K}: total {breakdown.total}")
    return breakdown


def bound_extremal_K(r: int, alpha: AngleLike) -> PillarBreakdown:
    """
    Extremal base K = 1/alpha + 1: only balanced pillars exist, C(K, K/2)/2
    of them, each bounded like a pillar over a (K-1)-dimensional span.
    """
    angle = _as_angle(alpha)
    K = angle.extremal_base_size
    if r <= K:
        raise PreconditionException(f"bound_extremal_K() needs r > {K}, got r={r}",
                                    operation="bound_extremal_K", parameters={'r': r, 'alpha': angle})
    per_class = lemmens_seidel_bound(r, angle.as_rational(), K - 1)
    row = PillarRow(K // 2, binomial(K, K // 2) // 2,
                    BoundResult(per_class, Provenance.EXTREMAL_BASE, "balanced pillar over the extremal base"))
    return PillarBreakdown(r, angle, K, [row], extremal=True)


@lru_cache(maxsize=None)
def base_four_capacities() -> Tuple[int, int]:
    """
    At alpha = 1/5 over a 4-base: how many members of a single-sign pillar
    fit next to one member of another single-sign pillar, and next to one
    member of a double-sign pillar.
    """
    fifth = FIFTH.as_rational()
    single = SignVector((-1, 1, 1, 1))
    same_level = cross_class_capacity(fifth, single, SignVector((1, -1, 1, 1)))
    mixed = cross_class_capacity(fifth, single, SignVector((1, 1, -1, -1)))
    return same_level, mixed


def base_four_refinement(r: int, residual_bound: int) -> BoundResult:
    """
    Bound at alpha = 1/5, K = 4, given a bound on the three double-sign
    pillars (each a two-distance set with products 1/13 and -5/13).
    Either one single-sign pillar takes everything outside the base, or
    several are populated and each is capped by the cross capacities.
    """
    K = 4
    same_level, mixed = base_four_capacities()
    doubles = 3 * residual_bound
    value = max(r, K + 4 * same_level, K + mixed + doubles, K + 4 * same_level + doubles)
    return BoundResult(value, Provenance.BASE_FOUR, f"capacities {same_level}/{mixed}, pillars <= {residual_bound}")


def six_line_bound(r: int) -> BoundResult:
    """Lines at angle 1/5 that contain a 6-base: 276 up to r = 185, then r + 1 + floor((r-5)/2)."""
    if r < FIFTH_REFINEMENT_START:
        raise PreconditionException(f"six_line_bound() needs r >= {FIFTH_REFINEMENT_START}, got {r}",
                                    operation="six_line_bound", parameters={'r': r})
    value = 276 if r <= SIX_LINE_PLATEAU_END else r + 1 + (r - 5) // 2
    return BoundResult(value, Provenance.SIX_LINE, "six-line base at angle 1/5")


def base_five_refinement(r: int) -> BoundResult:
    """
    alpha = 1/5, K = 5: the five single-sign pillars are tiny (sign
    constraint), and the rest of the set, which has no 6-base, is bounded
    by the six-line value minus one.
    """
    fifth = FIFTH.as_rational()
    per_single = floor_rational((1 - fifth) / (ell(fifth, 5, 1) - fifth))
    rest = six_line_bound(r).value - 1
    return BoundResult(5 * per_single + rest, Provenance.BASE_FIVE,
                       f"5 single-sign pillars of <= {per_single} plus {rest}")


def rational_fifth_bound(r: int) -> BoundResult:
    """floor(148 + 648 r(r+2)/(47r+169)): the alpha = 1/5 bound with the closed form plugged in."""
    if r <= FIFTH_SMALL_LIMIT:
        raise PreconditionException(f"rational_fifth_bound() needs r > {FIFTH_SMALL_LIMIT}, got {r}",
                                    operation="rational_fifth_bound", parameters={'r': r})
    value = floor_rational(148 + Fraction(648 * r * (r + 2), 47 * r + 169))
    return BoundResult(value, Provenance.RATIONAL_FIFTH, "closed-form residual bound at angle 1/5")


def _fifth_residual_query(r: int) -> TwoDistanceQuery:
    return TwoDistanceQuery(r, FIFTH_RESIDUAL_BETA, FIFTH_RESIDUAL_GAMMA)


def _fifth_breakdowns(r: int, oracle: TwoDistanceOracle, residual: BoundResult) -> List[PillarBreakdown]:
    breakdowns = [bound_small_K(r, FIFTH, K, oracle) for K in range(2, 6)]
    breakdowns.append(bound_extremal_K(r, FIFTH))
    if r >= FIFTH_REFINEMENT_START:
        by_K = {b.K: b for b in breakdowns}
        if not residual.is_none:
            by_K[4].refinement = base_four_refinement(r, residual.value)
        by_K[5].refinement = base_five_refinement(r)
        by_K[6].refinement = six_line_bound(r)
    return breakdowns


def _select(candidates: Dict[str, BoundResult]) -> Tuple[Optional[str], Optional[BoundResult]]:
    best_name, best = None, None
    for name, result in candidates.items():
        if result.is_none:
            continue
        if best is None or result.value < best.value:
            best_name, best = name, result
    return best_name, best


def _lacks_sdp(breakdowns: Sequence[PillarBreakdown], oracle: TwoDistanceOracle) -> bool:
    queries = {row.query for b in breakdowns for row in b.rows if row.query is not None}
    return any(oracle.sdp_bound(query).is_none for query in sorted(queries))


def _finish_angle(r: int, angle: Angle, breakdowns: List[PillarBreakdown],
                  candidates: Dict[str, BoundResult], oracle: TwoDistanceOracle) -> AngleBound:
    incomplete = [b for b in breakdowns if b.value is None]
    missing = list(dict.fromkeys(q for b in incomplete for q in b.missing_queries))
    winning_K = None
    if not incomplete:
        top = max(breakdowns, key=lambda b: b.value)
        winning_K = top.K
        candidates['pillar-pipeline'] = BoundResult(
            top.value, Provenance.PILLAR_PIPELINE,
            f"maximum over K attained at K={top.K} ({top.provenance.value})"
        )

    a = angle.as_rational()
    direct_query = TwoDistanceQuery(r, a, -a)
    candidates['direct'] = oracle.bound(direct_query)

    name, result = _select(candidates)
    if result is None:
        raise MissingBoundDataException(
            f"no bound for lines at angle {angle} in R^{r}: {len(missing)} pillar queries unanswered",
            queries=missing + [direct_query]
        )
    weaker = bool(missing) or (name == 'pillar-pipeline' and _lacks_sdp(breakdowns, oracle))
    if weaker:
        logger.warning(f"s_{angle}({r}) <= {result.value} relies on non-SDP two-distance data")
    logger.debug(f"s_{angle}({r}) <= {result}")
    return AngleBound(r, angle, result, winning_K if name == 'pillar-pipeline' else None,
                      breakdowns, candidates, missing, weaker)


def bound_alpha_fifth(r: int, oracle: TwoDistanceOracle) -> AngleBound:
    """
    alpha = 1/5 for r > 60: minimum of the refined bound 148 + 3s (SDP-grade
    s only), the rational closed-form bound, the refined per-K maximum and
    the direct two-distance bound.
    """
    if r <= FIFTH_SMALL_LIMIT:
        raise PreconditionException(f"bound_alpha_fifth() needs r > {FIFTH_SMALL_LIMIT}, got {r}",
                                    operation="bound_alpha_fifth", parameters={'r': r})
    residual = oracle.sdp_bound(_fifth_residual_query(r))
    candidates = {}
    if not residual.is_none:
        refined = base_four_refinement(r, residual.value)
        candidates['refined-fifth'] = BoundResult(refined.value, Provenance.REFINED_FIFTH,
                                                  f"148 + 3*{residual.value} ({residual.provenance.value})")
    candidates['rational-fifth'] = rational_fifth_bound(r)
    return _finish_angle(r, FIFTH, _fifth_breakdowns(r, oracle, residual), candidates, oracle)


def bound_alpha_fifth_small(r: int, oracle: TwoDistanceOracle) -> AngleBound:
    """alpha = 1/5 for 15 <= r <= 60: the refined per-K maximum against the direct bound."""
    _require_pipeline_dimension(r, "bound_alpha_fifth_small")
    if r > FIFTH_SMALL_LIMIT:
        raise PreconditionException(f"bound_alpha_fifth_small() covers r <= {FIFTH_SMALL_LIMIT}, got {r}",
                                    operation="bound_alpha_fifth_small", parameters={'r': r})
    residual = oracle.sdp_bound(_fifth_residual_query(r))
    return _finish_angle(r, FIFTH, _fifth_breakdowns(r, oracle, residual), {}, oracle)


def bound_alpha_generic(r: int, alpha: AngleLike, oracle: TwoDistanceOracle) -> AngleBound:
    """Angles 1/7 and smaller: maximum over every base size, then the minimum with the direct bound."""
    angle = _as_angle(alpha)
    if angle.denom < 7:
        raise PreconditionException(f"angle {angle} has a dedicated bound", operation="bound_alpha_generic",
                                    parameters={'alpha': angle})
    if r <= angle.extremal_base_size:
        raise PreconditionException(f"bound_alpha_generic() needs r > {angle.extremal_base_size}, got {r}",
                                    operation="bound_alpha_generic", parameters={'r': r, 'alpha': angle})
    breakdowns = [bound_small_K(r, angle, K, oracle) for K in range(2, angle.extremal_base_size)]
    breakdowns.append(bound_extremal_K(r, angle))
    return _finish_angle(r, angle, breakdowns, {}, oracle)


@log_calls(include_args=True)
def angle_bound(r: int, alpha: AngleLike, oracle: TwoDistanceOracle) -> AngleBound:
    angle = _as_angle(alpha)
    _require_pipeline_dimension(r, "angle_bound")
    if angle == THIRD:
        value = bound_alpha_third(r)
        return AngleBound(r, angle, BoundResult(value, Provenance.ANGLE_THIRD, "2(r-1) at angle 1/3"),
                          candidates={'angle-third': BoundResult(value, Provenance.ANGLE_THIRD)})
    if angle == FIFTH:
        if r > FIFTH_SMALL_LIMIT:
            return bound_alpha_fifth(r, oracle)
        return bound_alpha_fifth_small(r, oracle)
    return bound_alpha_generic(r, angle, oracle)


def pipeline_bound(r: int, alpha: AngleLike, oracle: TwoDistanceOracle) -> BoundResult:
    """
    The method's own value for one angle, without the direct two-distance
    bound: the rational bound at 1/5 (r > 60) and the per-K maximum otherwise.
    """
    angle = _as_angle(alpha)
    if angle == THIRD:
        return BoundResult(bound_alpha_third(r), Provenance.ANGLE_THIRD)
    if angle == FIFTH:
        if r <= FIFTH_SMALL_LIMIT:
            return BoundResult.none(f"no rational bound at angle 1/5 for r={r}")
        return rational_fifth_bound(r)
    breakdowns = [bound_small_K(r, angle, K, oracle) for K in range(2, angle.extremal_base_size)]
    breakdowns.append(bound_extremal_K(r, angle))
    if any(b.total is None for b in breakdowns):
        return BoundResult.none("pillar queries unanswered")
    top = max(breakdowns, key=lambda b: b.total)
    return BoundResult(top.total, Provenance.PILLAR_PIPELINE, f"K={top.K}")


def direct_sdp_bound(r: int, alpha: AngleLike, oracle: TwoDistanceOracle) -> BoundResult:
    """SDP-grade bound on the equiangular set itself, if the cache or solver has one."""
    a = _as_angle(alpha).as_rational()
    return oracle.sdp_bound(TwoDistanceQuery(r, a, -a))


def conjecture_formula(r: int) -> ConjectureValue:
    """
    Closed formula for the final bound: with m the largest integer such that
    (2m+1)^2 <= r+2, the plateau value ((2m+1)^2-2)((2m+1)^2-1)/2 at angle
    1/(2m+1), except at a fixed list of dimensions where the relative bound
    at angle 1/(2m+3) is larger.
    """
    if r < CONJECTURE_MIN_DIMENSION:
        raise PreconditionException(f"conjecture_formula() needs r >= {CONJECTURE_MIN_DIMENSION}, got {r}",
                                    operation="conjecture_formula", parameters={'r': r})
    m = 0
    while (2 * m + 3) ** 2 <= r + 2:
        m += 1
    if r in EXCEPTIONAL_DIMENSIONS:
        value = (4 * r * (m + 1) * (m + 2)) // ((2 * m + 3) ** 2 - r)
        return ConjectureValue(r, value, Angle(2 * m + 3), "exceptional")
    square = (2 * m + 1) ** 2
    return ConjectureValue(r, (square - 2) * (square - 1) // 2, Angle(2 * m + 1), "plateau")


@timer
def dimension_bound(r: int, oracle: TwoDistanceOracle,
                    angles: Optional[Iterable[AngleLike]] = None) -> DimensionReport:
    """
    Bound for R^r: the maximum of 2r+3 and every admissible angle's bound,
    capped at the absolute bound r(r+1)/2.
    With ``angles`` only those angles are evaluated and the report is partial.
    Unanswered queries from all angles are collected into one error.
    """
    _require_pipeline_dimension(r, "dimension_bound")
    admissible = enumerate_angles(r).angles
    if angles is None:
        selected = list(admissible)
    else:
        requested = [_as_angle(angle) for angle in angles]
        selected = [angle for angle in admissible if angle in requested]
        skipped = [str(angle) for angle in requested if angle not in admissible]
        if skipped:
            logger.warning(f"r={r}: angles {', '.join(skipped)} are not admissible and were skipped")

    per_angle: Dict[Angle, AngleBound] = {}
    missing: List[TwoDistanceQuery] = []
    for angle in selected:
        try:
            per_angle[angle] = angle_bound(r, angle, oracle)
        except MissingBoundDataException as e:
            missing.extend(e.queries)
    if missing:
        raise MissingBoundDataException(f"no bound for R^{r}: {len(missing)} two-distance queries unanswered",
                                        queries=list(dict.fromkeys(missing)))

    baseline = 2 * r + 3
    absolute = gerzon(r)
    best = max((bound.value for bound in per_angle.values()), default=None)
    if best is not None and best > absolute:
        arg_angles = []
        worst = min(angle for angle, bound in per_angle.items() if bound.value == best)
        overall = BoundResult(absolute, Provenance.GERZON, f"angle {worst} only reached {best}")
        logger.warning(f"r={r}: angle {worst} gives {best}, weaker than the absolute bound {absolute}")
    elif best is not None and best >= baseline:
        arg_angles = sorted(angle for angle, bound in per_angle.items() if bound.value == best)
        winner = per_angle[arg_angles[0]].result
        overall = BoundResult(best, winner.provenance, f"angle {arg_angles[0]}: {winner.detail}")
    else:
        arg_angles = []
        overall = BoundResult(baseline, Provenance.BASELINE, "2r+3 dominates every angle bound")

    report = DimensionReport(
        r=r,
        per_angle=per_angle,
        overall=overall,
        arg_angles=arg_angles,
        gerzon=absolute,
        baseline_2r3=baseline,
        known=known_range(r),
        formula=conjecture_formula(r) if r >= CONJECTURE_MIN_DIMENSION else None,
        partial=angles is not None
    )
    if report.soundness_violation:
        logger.error(f"r={r}: computed bound {overall.value} is below the known value {report.known}")
    logger.info(f"s({r}) <= {overall.value} at {report.winner}")
    return report


def sweep(r_values: Iterable[int], oracle: TwoDistanceOracle, jobs: int = 1,
          angles: Optional[Sequence[AngleLike]] = None) -> List[DimensionReport]:
    """``dimension_bound`` over many dimensions in parallel; results keep input order."""
    r_values = list(r_values)
    with performance_monitor(f"sweep over {len(r_values)} dimensions") as monitor:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            reports = list(pool.map(lambda r: dimension_bound(r, oracle, angles), r_values))
        monitor.count(len(reports))
    return reports


if __name__ == "__main__":
    from two_distance import default_oracle

    logging.basicConfig(level=logging.INFO)
    oracle = default_oracle()
    example = bound_alpha_generic(236, Angle(7), oracle)
    for b in example.breakdowns:
        print(f"K={b.K}: {b.total}")
    print(f"s_1/7(236) <= {example.result} (K={example.winning_K})")
    print(f"s(44) <= {dimension_bound(44, oracle).overall}")
