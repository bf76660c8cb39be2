"""Ordinals in Cantor normal form up to degree 2, and call-depth measures.

An ordinal is c2*w^2 + c1*w + c0 with natural coefficients; comparison is
lexicographic on (c2, c1, c0), which is well founded by construction. A
depth is either infinity (impure) or a pure ordinal bound; chains of pure
calls must strictly decrease their depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    c2: int = 0
    c1: int = 0
    c0: int = 0

    def __post_init__(self):
        if self.c2 < 0 or self.c1 < 0 or self.c0 < 0:
            raise ValueError("ordinal coefficients must be natural numbers")

    def key(self) -> tuple[int, int, int]:
        return (self.c2, self.c1, self.c0)

    def __lt__(self, other: "Ordinal") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        parts = []
        if self.c2:
            parts.append("w^2" if self.c2 == 1 else f"{self.c2}*w^2")
        if self.c1:
            parts.append("w" if self.c1 == 1 else f"{self.c1}*w")
        if self.c0 or not parts:
            parts.append(str(self.c0))
        return "+".join(parts)

    def to_json(self):
        return [self.c2, self.c1, self.c0]

    @staticmethod
    def from_json(obj) -> "Ordinal":
        return Ordinal(int(obj[0]), int(obj[1]), int(obj[2]))

    @staticmethod
    def parse(text: str) -> "Ordinal":
        """Parse "w^2", "w+3", "2*w", "5", and sums thereof."""
        c2 = c1 = c0 = 0
        for term in text.replace(" ", "").split("+"):
            if not term:
                raise ValueError(f"bad ordinal: {text!r}")
            coeff, _, base = term.rpartition("*")
            k = int(coeff) if coeff else 1
            if base == "w^2":
                c2 += k
            elif base == "w":
                c1 += k
            else:
                c0 += k * int(base)
        return Ordinal(c2, c1, c0)


def nat(n: int) -> Ordinal:
    return Ordinal(0, 0, n)


OMEGA = Ordinal(0, 1, 0)
OMEGA_SQ = Ordinal(1, 0, 0)


@total_ordering
@dataclass(frozen=True)
class Depth:
    """Purity measure of a call: infinity, or a pure ordinal bound."""

    ordinal: Ordinal | None = None  # None = infinity

    @staticmethod
    def infinity() -> "Depth":
        return Depth(None)

    @staticmethod
    def pure(o: Ordinal | int) -> "Depth":
        return Depth(nat(o) if isinstance(o, int) else o)

    @property
    def is_pure(self) -> bool:
        return self.ordinal is not None

    def __lt__(self, other: "Depth") -> bool:
        # d1 < d2 requires d1 pure, and d2 infinite or strictly above.
        if self.ordinal is None:
            return False
        if other.ordinal is None:
            return True
        return self.ordinal < other.ordinal

    def __str__(self) -> str:
        return "inf" if self.ordinal is None else f"<{self.ordinal}>"

    def to_json(self):
        return "inf" if self.ordinal is None else self.ordinal.to_json()

    @staticmethod
    def from_json(obj) -> "Depth":
        if obj == "inf":
            return Depth.infinity()
        if isinstance(obj, str):
            return Depth.pure(Ordinal.parse(obj))
        return Depth.pure(Ordinal.from_json(obj))


INFINITY = Depth.infinity()
