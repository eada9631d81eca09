"""
Gram Lab Module
Explicit equiangular vector sets and the linear algebra behind the pillar
decomposition: Gramians, structured eigenvalues, Cholesky constructions,
maximum negative cliques (K-bases), pillar partitions, projections onto a
base span, and PSD checks. ``run_identity_checks`` drives all of it as a
numerical verification suite.

Floating-point work uses numpy; anything compared against a closed form is
taken from ``rationals`` in exact arithmetic.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import PreconditionException, VectorSetException, safe_execute
from rationals import (
    Angle, SignVector, cross_projection, ell, ell_regime, extremal_projection_coefficients,
    floor_rational, format_rational, parse_rational, projection_coefficients, Regime
)
from utils.context import performance_monitor

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
MAX_CLIQUE_VECTORS = 64


@dataclass
class VectorSet:
    """Unit vectors in R^r (rows of ``vectors``), optionally tagged with their angle."""

    r: int
    vectors: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE
    alpha: Optional[Fraction] = None

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if self.vectors.size == 0:
            raise VectorSetException("vector set is empty")
        if self.vectors.shape[1] != self.r:
            raise VectorSetException(f"vectors have length {self.vectors.shape[1]}, expected r={self.r}")
        norms = np.linalg.norm(self.vectors, axis=1)
        bad = [(int(i), float(norm)) for i, norm in enumerate(norms) if abs(norm - 1.0) > self.tolerance]
        if bad:
            raise VectorSetException(f"{len(bad)} vectors are not unit vectors", violations=bad)
        if self.alpha is not None:
            self.alpha = Fraction(self.alpha)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def from_array(cls, vectors, alpha: Optional[Fraction] = None,
                   tolerance: float = DEFAULT_TOLERANCE) -> 'VectorSet':
        array = np.atleast_2d(np.asarray(vectors, dtype=float))
        return cls(array.shape[1], array, tolerance, alpha)

    @classmethod
    def from_text(cls, text: str, tolerance: float = DEFAULT_TOLERANCE) -> 'VectorSet':
        """Parse the ``r s alpha_num alpha_den`` header followed by one vector per row."""
        rows = [line.split('#', 1)[0].split() for line in text.splitlines()]
        rows = [row for row in rows if row]
        if not rows or len(rows[0]) != 4:
            raise VectorSetException("missing header line 'r s alpha_num alpha_den'")
        try:
            r, s, alpha_num, alpha_den = (int(token) for token in rows[0])
            alpha = parse_rational(f"{alpha_num}/{alpha_den}")
            data = np.array([[float(token) for token in row] for row in rows[1:]], dtype=float)
        except (ValueError, ZeroDivisionError) as e:
            raise VectorSetException(f"cannot parse vector set: {e}")
        if data.shape != (s, r):
            raise VectorSetException(f"header announces {s}x{r} vectors, file holds {data.shape}")
        return cls(r, data, tolerance, alpha)

    def to_text(self) -> str:
        alpha = self.alpha if self.alpha is not None else Fraction(0)
        lines = [f"{self.r} {len(self)} {alpha.numerator} {alpha.denominator}"]
        lines.extend(" ".join(repr(float(value)) for value in row) for row in self.vectors)
        return "\n".join(lines) + "\n"


@dataclass
class GramianMatrix:
    """
    Exact symmetric inner-product matrix. For an equiangular set every
    off-diagonal entry is +alpha or -alpha and ``violations`` is empty.
    """

    entries: Tuple[Tuple[Fraction, ...], ...]
    alpha: Optional[Fraction] = None
    unit_diagonal: bool = True
    violations: List[Tuple[int, int, float]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def is_equiangular(self) -> bool:
        return self.alpha is not None and not self.violations

    def to_array(self) -> np.ndarray:
        return np.array([[float(value) for value in row] for row in self.entries], dtype=float)

    def sign_matrix(self) -> np.ndarray:
        """Entry signs with a zero diagonal."""
        signs = np.sign(self.to_array()).astype(int)
        np.fill_diagonal(signs, 0)
        return signs


def structured_gramian(a: Fraction, b: Fraction, s: int) -> GramianMatrix:
    """(a - b) I + b J of size s."""
    a, b = Fraction(a), Fraction(b)
    entries = tuple(tuple(a if i == j else b for j in range(s)) for i in range(s))
    return GramianMatrix(entries, alpha=abs(b), unit_diagonal=(a == 1))


def negative_clique_gramian(alpha: Fraction, k: int) -> GramianMatrix:
    """(1 + alpha) I - alpha J: the Gramian of a negative clique of size k."""
    return structured_gramian(Fraction(1), -Fraction(alpha), k)


def structured_eigenvalues(a: Fraction, b: Fraction, s: int) -> Tuple[Tuple[Fraction, int], Tuple[Fraction, int]]:
    """Eigenvalues of (a - b) I + b J: a + (s-1) b once and a - b with multiplicity s - 1."""
    if s < 1:
        raise PreconditionException("structured_eigenvalues() needs s >= 1", operation="structured_eigenvalues",
                                    parameters={'s': s})
    a, b = Fraction(a), Fraction(b)
    return (a + (s - 1) * b, 1), (a - b, s - 1)


def _resolve_alpha(raw: np.ndarray, alpha: Optional[Fraction]) -> Optional[Fraction]:
    if alpha is not None:
        return Fraction(alpha)
    if raw.shape[0] < 2:
        return None
    return Fraction(abs(float(raw[0, 1]))).limit_denominator(1000)


def gramian(vs: VectorSet, alpha: Optional[Fraction] = None) -> GramianMatrix:
    """
    Gramian of a vector set with entries snapped to 1 and +/-alpha. Entries
    further than the tolerance from every admissible value are reported in
    ``violations`` and kept as a close rational approximation.
    """
    raw = vs.vectors @ vs.vectors.T
    target = _resolve_alpha(raw, alpha if alpha is not None else vs.alpha)
    s = raw.shape[0]
    rows = []
    violations = []
    for i in range(s):
        row = []
        for j in range(s):
            value = float(raw[i, j])
            if i == j:
                candidates = [Fraction(1)]
            elif target is None:
                candidates = []
            else:
                candidates = [target, -target]
            snapped = next((c for c in candidates if abs(value - float(c)) <= vs.tolerance), None)
            if snapped is None:
                if i < j:
                    violations.append((i, j, value))
                snapped = Fraction(value).limit_denominator(10 ** 6)
            row.append(snapped)
        rows.append(tuple(row))
    if violations:
        logger.info(f"Gramian of {s} vectors is not equiangular at alpha={target}: "
                    f"{len(violations)} violating pairs")
    return GramianMatrix(tuple(rows), alpha=target, unit_diagonal=True, violations=violations)


def equal_angle_set(r: int, alpha: Fraction) -> VectorSet:
    """r unit vectors in R^r with all pairwise inner products alpha, from the Cholesky factor of (1-alpha)I + alpha J."""
    alpha = Fraction(alpha)
    if r < 1 or not 0 <= alpha < 1:
        raise PreconditionException("equal_angle_set() needs r >= 1 and 0 <= alpha < 1",
                                    operation="equal_angle_set", parameters={'r': r, 'alpha': alpha})
    a = float(alpha)
    target = (1 - a) * np.eye(r) + a * np.ones((r, r))
    lower = np.linalg.cholesky(target)
    return VectorSet(r, lower, alpha=alpha)


def simplex_base(alpha: Fraction) -> VectorSet:
    """The extremal K-base, K = 1/alpha + 1 unit vectors in R^K summing to zero."""
    angle = Angle.from_rational(Fraction(alpha))
    K = angle.extremal_base_size
    centered = np.eye(K) - np.ones((K, K)) / K
    vectors = centered / math.sqrt(1 - 1 / K)
    return VectorSet(K, vectors, alpha=angle.as_rational())


def twenty_eight_lines() -> VectorSet:
    """
    28 equiangular lines with alpha = 1/3: (3,3,-1,...,-1)/sqrt(24) over all
    placements of the two 3s among eight coordinates.
    """
    rows = []
    for pair in itertools.combinations(range(8), 2):
        row = -np.ones(8)
        row[list(pair)] = 3.0
        rows.append(row / math.sqrt(24))
    return VectorSet(8, np.array(rows), alpha=Fraction(1, 3))


@dataclass(frozen=True)
class NegativeClique:
    """A K-base: member indices and the sign flips that make every pair -alpha."""

    K: int
    base: Tuple[int, ...]
    signs: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {'K': self.K, 'base': list(self.base), 'signs': list(self.signs)}


def _require_equiangular(g: GramianMatrix, alpha: Optional[Fraction], operation: str) -> Fraction:
    if not g.is_equiangular:
        raise VectorSetException(f"{operation}() needs an equiangular Gramian", violations=g.violations)
    if alpha is not None and Fraction(alpha) != g.alpha:
        raise VectorSetException(f"{operation}(): Gramian angle {g.alpha} differs from requested {alpha}")
    return g.alpha


def _greedy_clique_size(candidates: List[int], adjacency: Dict[int, int]) -> int:
    size = 0
    remaining = list(candidates)
    while remaining:
        mask = sum(1 << u for u in remaining)
        pick = max(remaining, key=lambda u: (bin(adjacency[u] & mask).count("1"), -u))
        size += 1
        remaining = [u for u in remaining if adjacency[pick] >> u & 1]
    return size


def max_negative_clique(g: GramianMatrix, alpha: Optional[Fraction] = None) -> NegativeClique:
    """
    Largest subset that becomes a negative clique after switching signs.

    Each candidate is anchored at its smallest index v; flipping every other
    member u by -sign(g[v][u]) makes the anchor row -alpha, and two members
    u, w are then compatible iff the triangle (v, u, w) has sign product -1.
    A greedy clique seeds the bound, an include-first branch and bound finds
    the exact maximum, and the lexicographically smallest maximum set wins.
    """
    _require_equiangular(g, alpha, "max_negative_clique")
    s = g.size
    if s > MAX_CLIQUE_VECTORS:
        raise PreconditionException(f"clique search limited to {MAX_CLIQUE_VECTORS} vectors, got {s}",
                                    operation="max_negative_clique", parameters={'s': s})
    if s == 1:
        return NegativeClique(1, (0,), (1,))

    signs = g.sign_matrix()

    def anchored(anchor: int) -> Tuple[List[int], Dict[int, int]]:
        others = list(range(anchor + 1, s))
        adjacency = {
            u: sum(1 << w for w in others
                   if w != u and signs[anchor, u] * signs[anchor, w] * signs[u, w] == -1)
            for u in others
        }
        return others, adjacency

    best: List[int] = []
    # the greedy clique has 1 + greedy members; only strictly larger sets are recorded
    best_size = _greedy_clique_size(*anchored(0))

    for anchor in range(s):
        if s - anchor <= best_size:
            break
        others, adjacency = anchored(anchor)

        def expand(current: List[int], candidates: List[int]) -> None:
            nonlocal best, best_size
            for index, u in enumerate(candidates):
                if len(current) + len(candidates) - index <= best_size:
                    return
                chosen = current + [u]
                if len(chosen) > best_size:
                    best, best_size = chosen, len(chosen)
                expand(chosen, [w for w in candidates[index + 1:] if adjacency[u] >> w & 1])

        expand([anchor], others)

    anchor = best[0]
    flips = tuple(1 if u == anchor else -int(signs[anchor, u]) for u in best)
    clique = NegativeClique(len(best), tuple(best), flips)
    logger.debug(f"Maximum negative clique: K={clique.K}, base={clique.base}")
    return clique


def _witness_signs(g: GramianMatrix, base: Sequence[int]) -> Tuple[int, ...]:
    signs = g.sign_matrix()
    anchor = base[0]
    flips = tuple(1 if u == anchor else -int(signs[anchor, u]) for u in base)
    for (i, u), (j, w) in itertools.combinations(enumerate(base), 2):
        if flips[i] * flips[j] * signs[u, w] != -1:
            raise VectorSetException(f"indices {u} and {w} cannot both sit in a negative clique with {anchor}",
                                     violations=[(u, w)])
    return flips


@dataclass
class PillarPartition:
    """Non-base members grouped by sign pattern (up to global negation) over a K-base."""

    base: Tuple[int, ...]
    signs: Tuple[int, ...]
    classes: Dict[SignVector, List[int]]

    @property
    def K(self) -> int:
        return len(self.base)

    def by_n(self) -> Dict[int, List[SignVector]]:
        grouped: Dict[int, List[SignVector]] = {}
        for key in sorted(self.classes, key=lambda v: v.entries):
            grouped.setdefault(key.folded_count(), []).append(key)
        return grouped

    def members(self) -> List[int]:
        return sorted(i for indices in self.classes.values() for i in indices)

    def to_dict(self) -> dict:
        return {
            'base': list(self.base),
            'signs': list(self.signs),
            'classes': {str(key): indices for key, indices in self.classes.items()}
        }


def pillar_partition(g: GramianMatrix, alpha: Optional[Fraction], base,
                     signs: Optional[Sequence[int]] = None) -> PillarPartition:
    """
    Assign every non-base index to the pillar of its sign pattern eps, where
    eps_i = sign(<x, sigma_i p_i>). A constant pattern means the base was not
    maximal and is rejected.
    """
    _require_equiangular(g, alpha, "pillar_partition")
    if isinstance(base, NegativeClique):
        signs = base.signs if signs is None else signs
        base = base.base
    base = tuple(base)
    flips = tuple(signs) if signs is not None else _witness_signs(g, base)

    sign_matrix = g.sign_matrix()
    classes: Dict[SignVector, List[int]] = {}
    base_set = set(base)
    for x in range(g.size):
        if x in base_set:
            continue
        eps = SignVector(tuple(flip * int(sign_matrix[x, b]) for flip, b in zip(flips, base)))
        if eps.is_constant():
            raise VectorSetException(
                f"vector {x} has constant sign pattern {eps}; the base {base} is not a maximum negative clique",
                violations=[x]
            )
        classes.setdefault(eps.canonical(), []).append(x)
    return PillarPartition(base, flips, classes)


@dataclass
class ProjectionResult:
    """x = h + c with h in the base span and c orthogonal to it."""

    h: np.ndarray
    c: np.ndarray
    n: int
    eps: SignVector
    expected_norm: Fraction
    reconstruction_residual: float
    orthogonality_residual: float
    norm_residual: float

    def max_residual(self) -> float:
        return max(self.reconstruction_residual, self.orthogonality_residual, self.norm_residual)


def project_decompose(vs: VectorSet, base: Sequence[int], x: int,
                      signs: Optional[Sequence[int]] = None,
                      alpha: Optional[Fraction] = None) -> ProjectionResult:
    """
    Split member x into its projection h onto the span of the (switched)
    base and the orthogonal residual c. Below the extremal size h uses the
    exact projection coefficients; at the extremal size h = (1/K) sum eps_i p_i.
    """
    alpha = Fraction(alpha if alpha is not None else vs.alpha)
    base = list(base)
    if x in base:
        raise PreconditionException("x must not belong to the base", operation="project_decompose",
                                    parameters={'x': x})
    K = len(base)
    flips = np.array(signs if signs is not None else [1] * K, dtype=float)
    P = vs.vectors[base] * flips[:, None]
    vector = vs.vectors[x]

    inner = P @ vector
    off = [(int(b), float(v)) for b, v in zip(base, inner) if abs(abs(v) - float(alpha)) > vs.tolerance]
    if off:
        raise VectorSetException(f"member {x} is not at angle {alpha} to the base", violations=off)
    eps = SignVector(tuple(1 if v > 0 else -1 for v in inner))
    n = eps.positive_count()

    extremal = alpha.numerator == 1 and K == alpha.denominator + 1
    if extremal:
        coefficients = extremal_projection_coefficients(eps)
        expected = alpha
    else:
        if np.linalg.matrix_rank(P, tol=1e-8) < K:
            raise PreconditionException("base vectors are linearly dependent below the extremal size",
                                        operation="project_decompose", parameters={'K': K})
        coefficients = projection_coefficients(alpha, eps)
        expected = ell(alpha, K, n)

    h = np.array([float(a) for a in coefficients]) @ P
    c = vector - h
    return ProjectionResult(
        h=h,
        c=c,
        n=n,
        eps=eps,
        expected_norm=expected,
        reconstruction_residual=float(np.linalg.norm(vector - h - c)),
        orthogonality_residual=float(np.max(np.abs(P @ c))),
        norm_residual=abs(float(h @ h) - float(expected)),
    )


@dataclass(frozen=True)
class PsdCheck:
    is_psd: bool
    min_eigenvalue: float


def psd_check(g: GramianMatrix, tolerance: float = DEFAULT_TOLERANCE) -> PsdCheck:
    eigenvalues = np.linalg.eigvalsh(g.to_array())
    smallest = float(eigenvalues[0])
    return PsdCheck(smallest >= -tolerance, smallest)


def bordered_psd_bound(a: Fraction, b: Fraction, inner_products: Sequence[Fraction]) -> bool:
    """
    Necessary PSD condition for the bordered matrix [[a I, i], [i^T, b]]:
    sum of i_k^2 <= a b.
    """
    if len(inner_products) <= 2:
        raise PreconditionException("bordered_psd_bound() needs more than two border entries",
                                    operation="bordered_psd_bound", parameters={'s': len(inner_products)})
    total = sum((Fraction(i) ** 2 for i in inner_products), Fraction(0))
    return total <= Fraction(a) * Fraction(b)


def bordered_capacity(a: Fraction, b: Fraction, gap: Fraction) -> int:
    """Largest s for which s border entries of absolute value >= gap can pass ``bordered_psd_bound``."""
    gap = Fraction(gap)
    if gap <= 0:
        raise PreconditionException("gap must be positive", operation="bordered_capacity",
                                    parameters={'gap': gap})
    return floor_rational(Fraction(a) * Fraction(b) / (gap * gap))


def cross_class_capacity(alpha: Fraction, eps_x: SignVector, eps_y: SignVector) -> int:
    """
    Members of pillar x that can coexist with one member of a different
    pillar y. Pillar x must sit in the equal regime so its residuals are
    pairwise orthogonal with squared norm 1 - ell_x.
    """
    alpha = Fraction(alpha)
    K = len(eps_x)
    n_x, n_y = eps_x.positive_count(), eps_y.positive_count()
    if ell_regime(alpha, K, n_x) is not Regime.EQUAL_ALPHA:
        raise PreconditionException("pillar x must have ell equal to alpha", operation="cross_class_capacity",
                                    parameters={'alpha': alpha, 'eps_x': eps_x})
    overlap = abs(cross_projection(alpha, eps_x, eps_y))
    if overlap >= alpha:
        raise PreconditionException("projections overlap too much for a capacity bound",
                                    operation="cross_class_capacity", parameters={'overlap': overlap})
    return bordered_capacity(1 - ell(alpha, K, n_x), 1 - ell(alpha, K, n_y), alpha - overlap)


def pillar_configuration(alpha: Fraction, eps: SignVector,
                         rng: Optional[np.random.Generator] = None) -> Tuple[VectorSet, List[int], int]:
    """
    A randomly rotated K-base plus one member with sign pattern eps in R^(K+1).
    Returns (vector set, base indices, member index).
    """
    alpha = Fraction(alpha)
    rng = rng if rng is not None else np.random.default_rng()
    K = len(eps)
    dimension = K + 1
    extremal = alpha.numerator == 1 and K == alpha.denominator + 1
    if extremal:
        core = simplex_base(alpha).vectors
        coefficients = extremal_projection_coefficients(eps)
    else:
        core = np.linalg.cholesky(negative_clique_gramian(alpha, K).to_array())
        coefficients = projection_coefficients(alpha, eps)
    base = np.zeros((K, dimension))
    base[:, :K] = core
    h = np.array([float(a) for a in coefficients]) @ base
    member = h.copy()
    member[-1] = math.sqrt(1.0 - float(h @ h))

    rotation, _ = np.linalg.qr(rng.standard_normal((dimension, dimension)))
    vectors = np.vstack([base, member]) @ rotation.T
    return VectorSet(dimension, vectors, alpha=alpha), list(range(K)), K


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {'name': self.name, 'passed': self.passed, 'residual': self.residual, 'detail': self.detail}


def _random_pattern(rng: np.random.Generator, K: int, balanced: bool) -> SignVector:
    if balanced:
        entries = [1] * (K // 2) + [-1] * (K // 2)
        rng.shuffle(entries)
        return SignVector(tuple(entries))
    while True:
        entries = tuple(int(v) for v in rng.choice([-1, 1], size=K))
        if len(set(entries)) > 1:
            return SignVector(entries)


def _check_structured_eigenvalues(alpha: Fraction, tolerance: float) -> CheckResult:
    worst = 0.0
    for s in range(1, 41):
        (top, _), (rest, multiplicity) = structured_eigenvalues(Fraction(1), -alpha, s)
        expected = np.sort(np.array([float(top)] + [float(rest)] * multiplicity))
        computed = np.linalg.eigvalsh(structured_gramian(Fraction(1), -alpha, s).to_array())
        worst = max(worst, float(np.max(np.abs(np.sort(computed) - expected))))
    return CheckResult("structured-eigenvalues", worst <= tolerance, worst, "sizes 1..40")


def _check_equal_angle_roundtrip(tolerance: float) -> CheckResult:
    worst = 0.0
    for angle in (Fraction(0), Fraction(1, 13), Fraction(1, 5)):
        for r in range(1, 51):
            vs = equal_angle_set(r, angle)
            raw = vs.vectors @ vs.vectors.T
            off = raw[~np.eye(r, dtype=bool)]
            if off.size:
                worst = max(worst, float(np.max(np.abs(off - float(angle)))))
    return CheckResult("equal-angle-roundtrip", worst <= min(tolerance, 1e-10), worst,
                       "r <= 50, alpha in {0, 1/13, 1/5}")


def _check_clique_psd(alpha: Fraction, tolerance: float) -> CheckResult:
    K = alpha.denominator + 1
    at_limit = psd_check(negative_clique_gramian(alpha, K), tolerance)
    beyond = psd_check(negative_clique_gramian(alpha, K + 1), tolerance)
    passed = at_limit.is_psd and abs(at_limit.min_eigenvalue) <= tolerance and not beyond.is_psd
    return CheckResult("negative-clique-psd", passed, abs(at_limit.min_eigenvalue),
                       f"size {K} min eigenvalue {at_limit.min_eigenvalue:.3e}, "
                       f"size {K + 1} min eigenvalue {beyond.min_eigenvalue:.3e}")


def _check_projections(alpha: Fraction, extremal: bool, trials: int, rng: np.random.Generator,
                       tolerance: float) -> CheckResult:
    worst = 0.0
    clique_ok = True
    limit = alpha.denominator + 1
    for _ in range(trials):
        K = limit if extremal else int(rng.integers(2, limit + 1))
        eps = _random_pattern(rng, K, balanced=(K == limit))
        vs, base, member = pillar_configuration(alpha, eps, rng)
        result = project_decompose(vs, base, member)
        worst = max(worst, result.max_residual())
        clique = max_negative_clique(gramian(vs), alpha)
        clique_ok = clique_ok and 2 <= clique.K <= limit
    return CheckResult("projection-identities", worst <= tolerance and clique_ok, worst,
                       f"{trials} random pillar configurations, K-base within [2, {limit}]: {clique_ok}")


def _check_extremal_base(alpha: Fraction, tolerance: float) -> CheckResult:
    simplex = simplex_base(alpha)
    K = len(simplex)
    raw = simplex.vectors @ simplex.vectors.T
    gram_error = float(np.max(np.abs(raw - negative_clique_gramian(alpha, K).to_array())))
    residual = max(gram_error, float(np.linalg.norm(simplex.vectors.sum(axis=0))))
    return CheckResult("extremal-base", residual <= tolerance, residual,
                       f"simplex of {K} vectors for alpha={format_rational(alpha)}")


def _check_pillar_partition(tolerance: float) -> CheckResult:
    lines = twenty_eight_lines()
    g = gramian(lines)
    clique = max_negative_clique(g)
    partition = pillar_partition(g, g.alpha, clique)
    sizes = sorted(len(members) for members in partition.classes.values())
    balanced = all(key.is_balanced() for key in partition.classes)
    switched = lines.vectors[list(clique.base)] * np.array(clique.signs)[:, None]
    residual = float(np.linalg.norm(switched.sum(axis=0)))
    passed = clique.K == 4 and sizes == [8, 8, 8] and balanced and residual <= tolerance
    return CheckResult("pillar-partition", passed, residual,
                       f"28 lines: K={clique.K}, class sizes {sizes}, all patterns balanced: {balanced}")


def _check_base_four_capacities() -> CheckResult:
    fifth = Fraction(1, 5)
    single = SignVector((-1, 1, 1, 1))
    other_single = SignVector((1, -1, 1, 1))
    double = SignVector((1, 1, -1, -1))
    same_level = cross_class_capacity(fifth, single, other_single)
    mixed = cross_class_capacity(fifth, single, double)
    passed = (same_level, mixed) == (36, 39)
    return CheckResult("base-four-capacities", passed, 0.0, f"capacities {same_level} and {mixed}")


def run_identity_checks(alpha: Fraction = Fraction(1, 5), extremal: bool = False,
                        tolerance: float = DEFAULT_TOLERANCE, trials: int = 100,
                        seed: int = 0) -> List[CheckResult]:
    """Run the verification suite; a check that raises is reported as failed."""
    alpha = Angle.from_rational(Fraction(alpha)).as_rational()
    rng = np.random.default_rng(seed)
    checks = [
        ("negative-clique-psd", lambda: _check_clique_psd(alpha, tolerance)),
        ("projection-identities", lambda: _check_projections(alpha, extremal, trials, rng, tolerance)),
        ("extremal-base", lambda: _check_extremal_base(alpha, tolerance)),
    ]
    if not extremal:
        checks = [
            ("structured-eigenvalues", lambda: _check_structured_eigenvalues(alpha, tolerance)),
            ("equal-angle-roundtrip", lambda: _check_equal_angle_roundtrip(tolerance)),
        ] + checks + [
            ("pillar-partition", lambda: _check_pillar_partition(tolerance)),
            ("base-four-capacities", _check_base_four_capacities),
        ]

    results = []
    for name, check in checks:
        with performance_monitor(f"check {name}", log_results=False) as monitor:
            ok, outcome = safe_execute(check)
        if not ok:
            outcome = CheckResult(name, False, float('inf'), f"raised {outcome}")
        logger.info(f"Check {name}: {'pass' if outcome.passed else 'FAIL'} "
                    f"(residual {outcome.residual:.3e}, {monitor.get_metrics()['duration']:.3f}s)")
        results.append(outcome)
    return results


def inspect_vector_set(vs: VectorSet) -> List[CheckResult]:
    """Checks for a user-supplied set: equiangularity, K-base, pillar partition, projections."""
    g = gramian(vs)
    results = [CheckResult("equiangular", g.is_equiangular, 0.0,
                           f"alpha={format_rational(g.alpha) if g.alpha is not None else '?'}, "
                           f"{len(g.violations)} violating pairs")]
    if not g.is_equiangular or g.alpha == 0:
        return results

    clique = max_negative_clique(g)
    limit = g.alpha.denominator + 1 if g.alpha.numerator == 1 else None
    in_range = clique.K >= min(2, g.size) and (limit is None or clique.K <= limit)
    results.append(CheckResult("negative-clique", in_range, 0.0, f"K={clique.K}, base={list(clique.base)}"))

    ok, partition = safe_execute(pillar_partition, g, g.alpha, clique)
    if not ok:
        results.append(CheckResult("pillar-partition", False, 0.0, str(partition)))
        return results
    results.append(CheckResult("pillar-partition", True, 0.0,
                               f"{len(partition.classes)} pillars over {len(partition.members())} members"))

    worst = 0.0
    for member in partition.members():
        projection = project_decompose(vs, clique.base, member, clique.signs, g.alpha)
        worst = max(worst, projection.max_residual())
    results.append(CheckResult("projections", worst <= vs.tolerance, worst,
                               f"{len(partition.members())} members"))
    return results
