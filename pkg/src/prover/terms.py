"""Residues affine in a parametric even modulus 2N.

A term (q, b) stands for (q·N + b) mod 2N with q ∈ {0, 1}. Offsets are
bounded by B, and N is assumed to be at least N_min = 2B + 4, so distinct
(q, b) pairs are distinct residues and their order as residues is

    (0, b ≥ 0)  <  (1, b)  <  (0, b < 0)

with ties broken by b. (0, -c) is the residue 2N - c.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from src.core.errors import InputError


@dataclass(frozen=True, slots=True)
class SymbolicTerm:
    q: int
    b: int

    @property
    def is_small(self) -> bool:
        return self.q == 0 and self.b >= 0

    @property
    def is_high(self) -> bool:
        return self.q == 1

    @property
    def is_top(self) -> bool:
        return self.q == 0 and self.b < 0

    def sort_key(self) -> tuple[int, int]:
        if self.q == 1:
            return (1, self.b)
        return (0, self.b) if self.b >= 0 else (2, self.b)

    def __lt__(self, other: "SymbolicTerm") -> bool:
        return self.sort_key() < other.sort_key()

    def representable(self, bound: int) -> bool:
        return abs(self.b) <= bound

    def evaluate(self, n: int) -> int:
        return (self.q * n + self.b) % (2 * n)

    def __str__(self) -> str:
        if self.q == 1:
            if self.b == 0:
                return "N"
            return f"N+{self.b}" if self.b > 0 else f"N-{-self.b}"
        return str(self.b) if self.b >= 0 else f"2N-{-self.b}"

    def __repr__(self) -> str:
        return f"SymbolicTerm({self})"


# OVERFLOW is represented by None
Term = Optional[SymbolicTerm]


def reduce(q: int, b: int) -> SymbolicTerm:
    """Reduce the N-coefficient mod 2 without any offset bound."""
    return SymbolicTerm(q % 2, b)


def canon(q: int, b: int, bound: int) -> Term:
    """Canonical term for q·N + b, or None (OVERFLOW) when |b| > bound."""
    if abs(b) > bound:
        return None
    return SymbolicTerm(q % 2, b)


def ap_target(x: SymbolicTerm, y: SymbolicTerm) -> SymbolicTerm:
    """2y - x, unbounded."""
    return reduce(2 * y.q - x.q, 2 * y.b - x.b)


_TERM_RE = re.compile(r"^\s*(?:(2N|N)\s*([+-])\s*(\d+)|(2N|N)|(\d+))\s*$")


@lru_cache(maxsize=65536)
def parse_term(text: str) -> SymbolicTerm:
    """Parse "c", "N", "N+c", "N-c" or "2N-c".

    Raises:
        InputError: anything else.
    """
    m = _TERM_RE.match(text)
    if not m:
        raise InputError(f"unrecognized term {text!r}")
    head, sign, digits, bare, small = m.groups()
    if small is not None:
        return SymbolicTerm(0, int(small))
    if bare is not None:
        if bare == "N":
            return SymbolicTerm(1, 0)
        raise InputError(f"unrecognized term {text!r}")
    c = int(digits)
    if head == "N":
        return SymbolicTerm(1, c if sign == "+" else -c)
    if sign == "-" and c >= 1:
        return SymbolicTerm(0, -c)
    raise InputError(f"unrecognized term {text!r}")
