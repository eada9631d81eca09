"""
Rational Core Module
Exact rational arithmetic, combinatorics and the closed-form scalar
functions of the pillar decomposition: the projection norm ell(K, n),
its sign regime, the (beta, gamma) pair a pillar maps to, and the
projection coefficients onto the span of a K-base.

All values are ``fractions.Fraction``; nothing here touches floating point.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Tuple, Union

from exceptions import InvalidInputException, PreconditionException

logger = logging.getLogger(__name__)

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def parse_rational(text: str) -> Fraction:
    """
    Parse ``"p/q"`` or ``"p"`` into an exact Fraction.

    Raises:
        InvalidInputException: for malformed text or a zero denominator
    """
    cleaned = str(text).strip()
    try:
        value = Fraction(cleaned)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidInputException(
            f"Cannot parse rational '{text}': {e}",
            input_value=text,
            expected_format="p/q"
        )
    if '.' in cleaned or 'e' in cleaned.lower():
        raise InvalidInputException(
            f"Rational '{text}' must be written as an exact fraction",
            input_value=text,
            expected_format="p/q"
        )
    return value


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``p/q`` (always with a denominator)."""
    return f"{value.numerator}/{value.denominator}"


def floor_rational(value: Fraction) -> int:
    """Exact floor of a rational (Euclidean semantics for positive denominators)."""
    return value.numerator // value.denominator


@dataclass(frozen=True, order=True)
class Angle:
    """
    An equiangular angle alpha = 1/denom with denom odd and at least 3.

    Angles order by denominator, so sorting lists the largest alpha first.
    """

    denom: int

    def __post_init__(self):
        if not isinstance(self.denom, int) or self.denom < 3 or self.denom % 2 == 0:
            raise InvalidInputException(
                f"Angle denominator must be an odd integer >= 3, got {self.denom}",
                input_value=self.denom,
                expected_format="odd integer >= 3"
            )

    @classmethod
    def parse(cls, text: str) -> 'Angle':
        """Parse ``"1/7"`` (or a bare ``"7"``) into an Angle."""
        cleaned = str(text).strip()
        if '/' not in cleaned:
            try:
                return cls(int(cleaned))
            except ValueError:
                raise InvalidInputException(f"Cannot parse angle '{text}'", input_value=text,
                                            expected_format="1/d")
        return cls.from_rational(parse_rational(cleaned))

    @classmethod
    def from_rational(cls, value: Fraction) -> 'Angle':
        if value.numerator != 1:
            raise InvalidInputException(
                f"Angle must be of the form 1/d, got {format_rational(value)}",
                input_value=value,
                expected_format="1/d"
            )
        return cls(value.denominator)

    def as_rational(self) -> Fraction:
        return Fraction(1, self.denom)

    @property
    def extremal_base_size(self) -> int:
        """The largest possible K-base size, 1/alpha + 1."""
        return self.denom + 1

    def __str__(self) -> str:
        return f"1/{self.denom}"


@dataclass(frozen=True)
class SignVector:
    """A (+1, -1)-vector of length K: the signs of <x, p_i>/alpha over a K-base."""

    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e not in (1, -1) for e in entries):
            raise InvalidInputException(
                f"Sign vector entries must be +1 or -1, got {entries}",
                input_value=entries,
                expected_format="+1/-1 entries"
            )
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def of(cls, values: Iterable[int]) -> 'SignVector':
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def positive_count(self) -> int:
        return sum(1 for e in self.entries if e > 0)

    def folded_count(self) -> int:
        """min(n, K - n): the class index n of the pillar this pattern belongs to."""
        positives = self.positive_count()
        return min(positives, len(self.entries) - positives)

    def negated(self) -> 'SignVector':
        return SignVector(tuple(-e for e in self.entries))

    def canonical(self) -> 'SignVector':
        """Lexicographically smaller of eps and -eps; pillars are keyed by it."""
        return min(self, self.negated(), key=lambda v: v.entries)

    def is_balanced(self) -> bool:
        return sum(self.entries) == 0

    def is_constant(self) -> bool:
        return len(set(self.entries)) <= 1

    def __str__(self) -> str:
        return "(" + ",".join("+" if e > 0 else "-" for e in self.entries) + ")"


class Regime(Enum):
    """Position of ell(K, n) relative to alpha."""

    BELOW_ALPHA = "below"
    EQUAL_ALPHA = "equal"
    ABOVE_ALPHA = "above"


def binomial(n: int, k: int) -> int:
    """C(n, k) in arbitrary precision; 0 when k > n."""
    if n < 0 or k < 0:
        raise PreconditionException(
            "binomial() takes nonnegative arguments",
            operation="binomial",
            parameters={'n': n, 'k': k}
        )
    return math.comb(n, k)


def _check_alpha(alpha: Fraction, operation: str) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise PreconditionException(
            f"alpha must lie in (0, 1), got {alpha}",
            operation=operation,
            parameters={'alpha': alpha}
        )
    return alpha


def _check_base_size(alpha: Fraction, K: int, operation: str) -> None:
    # 1 + alpha - K*alpha > 0  <=>  K < 1/alpha + 1
    if K < 1 or 1 + alpha - K * alpha <= 0:
        raise PreconditionException(
            f"base size K={K} must satisfy 1 <= K < 1/alpha + 1 for alpha={alpha}",
            operation=operation,
            parameters={'alpha': alpha, 'K': K}
        )


@lru_cache(maxsize=None)
def ell(alpha: Fraction, K: int, n: int) -> Fraction:
    """
    Squared norm of the projection of a pillar member onto the span of a
    K-base, for a sign pattern with n positive entries.

    Valid for 2 <= K < 1/alpha + 1 and 1 <= n <= K - 1; the value is
    symmetric under n <-> K - n and strictly decreasing in n up to K/2.
    """
    alpha = _check_alpha(alpha, "ell")
    if K < 2:
        raise PreconditionException(f"ell() needs K >= 2, got {K}", operation="ell",
                                    parameters={'K': K})
    _check_base_size(alpha, K, "ell")
    if not 1 <= n <= K - 1:
        raise PreconditionException(
            f"ell() needs 1 <= n <= K-1, got n={n}, K={K}",
            operation="ell",
            parameters={'K': K, 'n': n}
        )
    numerator = alpha * alpha * (4 * alpha * n * (n - K) + (1 + alpha) * K)
    denominator = (1 + alpha) * (1 + alpha - K * alpha)
    return numerator / denominator


def ell_regime(alpha: Fraction, K: int, n: int) -> Regime:
    """
    Classify ell(K, n) against alpha without evaluating it:
    below iff n > K - (1/alpha + 1)/2, equal iff n equals the threshold.
    n is folded to min(n, K - n) first.
    """
    ell(alpha, K, n)
    alpha = Fraction(alpha)
    folded = min(n, K - n)
    threshold = K - (1 / alpha + 1) / 2
    if folded > threshold:
        return Regime.BELOW_ALPHA
    if folded == threshold:
        return Regime.EQUAL_ALPHA
    return Regime.ABOVE_ALPHA


@lru_cache(maxsize=None)
def beta_gamma(alpha: Fraction, ellval: Fraction) -> Tuple[Fraction, Fraction]:
    """
    The two inner products of the normalized residuals of one pillar:
    ((alpha - ell)/(1 - ell), (-alpha - ell)/(1 - ell)).
    """
    alpha = Fraction(alpha)
    ellval = Fraction(ellval)
    if not 0 < ellval < 1:
        raise PreconditionException(
            f"beta_gamma() needs 0 < ell < 1, got {ellval}",
            operation="beta_gamma",
            parameters={'alpha': alpha, 'ell': ellval}
        )
    return (alpha - ellval) / (1 - ellval), (-alpha - ellval) / (1 - ellval)


def projection_coefficients(alpha: Fraction, eps: Union[SignVector, Sequence[int]]) -> Tuple[Fraction, ...]:
    """
    Coefficients a with h = sum_j a_j p_j, solving ((1+alpha)I - alpha J) a = alpha eps
    through the closed-form inverse ((1+alpha-K alpha)I + alpha J) / ((1+alpha)(1+alpha-K alpha)).
    """
    alpha = _check_alpha(alpha, "projection_coefficients")
    signs = eps if isinstance(eps, SignVector) else SignVector.of(eps)
    K = len(signs)
    _check_base_size(alpha, K, "projection_coefficients")

    shrink = 1 + alpha - K * alpha
    denominator = (1 + alpha) * shrink
    total = sum(signs.entries)
    return tuple(alpha * (shrink * e + alpha * total) / denominator for e in signs.entries)


def extremal_projection_coefficients(eps: Union[SignVector, Sequence[int]]) -> Tuple[Fraction, ...]:
    """h = (1/K) sum_i eps_i p_i at the extremal base size; eps must be balanced."""
    signs = eps if isinstance(eps, SignVector) else SignVector.of(eps)
    if not signs.is_balanced():
        raise PreconditionException(
            f"extremal projection needs a balanced sign vector, got {signs}",
            operation="extremal_projection_coefficients",
            parameters={'eps': signs}
        )
    K = len(signs)
    return tuple(Fraction(e, K) for e in signs.entries)


def negative_clique_apply(alpha: Fraction, coefficients: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """Multiply ((1+alpha)I - alpha J) by a coefficient vector, exactly."""
    alpha = Fraction(alpha)
    total = sum(coefficients, Fraction(0))
    return tuple((1 + alpha) * a - alpha * total for a in coefficients)


def cross_projection(alpha: Fraction, eps_x: SignVector, eps_y: SignVector) -> Fraction:
    """
    <h_x, h_y> for the projections of two pillar members with patterns
    eps_x, eps_y onto the span of the same (non-extremal) K-base.
    """
    if len(eps_x) != len(eps_y):
        raise PreconditionException(
            "sign vectors must have equal length",
            operation="cross_projection",
            parameters={'eps_x': eps_x, 'eps_y': eps_y}
        )
    coefficients = projection_coefficients(alpha, eps_y)
    return Fraction(alpha) * sum((e * a for e, a in zip(eps_x.entries, coefficients)), Fraction(0))


if __name__ == "__main__":
    seventh = Fraction(1, 7)
    print(f"ell(1/7, 4, 2) = {ell(seventh, 4, 2)}")
    print(f"beta_gamma(1/7, 1/14) = {beta_gamma(seventh, Fraction(1, 14))}")
    print(f"projection (1/5, -+++) = {projection_coefficients(Fraction(1, 5), (-1, 1, 1, 1))}")
