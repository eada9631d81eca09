"""
Reference Data Module
Known values (or known ranges) of the maximum number of equiangular lines
in small dimensions. Used for comparison and as a soundness floor: a
computed upper bound below a known lower value is a bug.
"""

from dataclasses import dataclass
from typing import Dict, Optional

# r -> (lower, upper); equal ends mean the value is known exactly
_KNOWN: Dict[int, tuple] = {
    2: (3, 3), 3: (6, 6), 5: (10, 10), 6: (16, 16),
    **{r: (28, 28) for r in range(7, 14)},
    14: (28, 29), 15: (36, 36), 16: (40, 41), 17: (48, 49), 18: (54, 60),
    19: (72, 75), 20: (90, 95), 21: (126, 126), 22: (176, 176),
    **{r: (276, 276) for r in range(23, 42)},
    42: (276, 288), 43: (344, 344),
}


@dataclass(frozen=True)
class KnownRange:
    r: int
    lower: int
    upper: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def __str__(self) -> str:
        return str(self.lower) if self.exact else f"{self.lower}-{self.upper}"

    def to_dict(self) -> dict:
        return {'r': self.r, 'lower': self.lower, 'upper': self.upper}


def known_range(r: int) -> Optional[KnownRange]:
    values = _KNOWN.get(r)
    if values is None:
        return None
    return KnownRange(r, *values)


def known_dimensions() -> list:
    return sorted(_KNOWN)
