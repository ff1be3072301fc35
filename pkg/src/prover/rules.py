"""Deduction rules shared by the search and the trace checker.

R1  antipode:     x IN  ⇒  x + N OUT
R2  progression:  u, v IN (u ≠ v)  ⇒  2v - u, 2u - v and both midpoints OUT
R3  mod-cover:    a residue c < λ that is OUT needs a witness pair x < y, both IN
R4  strict cover: residues c ≥ λ and every 2N - c need a witness pair as well;
                  there the pair must cover over the integers (ω < λ)

Cover rules fire two ways: an OUT target with one common component across its
viable witnesses forces that component IN, and an UNKNOWN target without any
viable witness is forced IN (it could not be covered if it were left out).
Witness lists are complete for small and 2N - c targets; (1, e) targets carry
no obligation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable

from src.prover.terms import SymbolicTerm, ap_target, canon, reduce


class Status(str, Enum):
    IN = "IN"
    OUT = "OUT"
    UNKNOWN = "UNKNOWN"

    def flipped(self) -> "Status":
        if self is Status.IN:
            return Status.OUT
        if self is Status.OUT:
            return Status.IN
        return self


class Rule(str, Enum):
    INIT = "INIT"
    ANTIPODE = "R1"
    PROGRESSION = "R2"
    MOD_COVER = "R3"
    STRICT_COVER = "R4"
    DISPATCH = "T"
    SPLIT = "SPLIT"


class ContradictionKind(str, Enum):
    MOD_AP = "mod-AP"
    UNCOVERABLE = "uncoverable residue"
    CLASH = "unique-witness clash"
    CHARACTER = "character mismatch"


Lookup = Callable[[SymbolicTerm], Status]
Pair = tuple[SymbolicTerm, SymbolicTerm]


@dataclass(frozen=True)
class ProverParams:
    lam: int
    bound: int

    @property
    def half(self) -> int:
        return (self.lam - 1) // 2

    @property
    def n_min(self) -> int:
        return 2 * self.bound + 4

    @property
    def max_term(self) -> SymbolicTerm:
        return SymbolicTerm(1, self.half)


def antipode(t: SymbolicTerm) -> SymbolicTerm:
    return reduce(t.q + 1, t.b)


def completions(u: SymbolicTerm, v: SymbolicTerm, bound: int) -> list[SymbolicTerm]:
    """Every representable z forming a mod-AP with the pair {u, v}: both extensions and the midpoints.

    Midpoints solve 2y ≡ u + v (mod 2N); with an odd N-coefficient they sit in
    the unrepresentable middle range and are skipped. Offsets past the bound
    overflow and are dropped.
    """
    raw = [(t.q, t.b) for t in (ap_target(u, v), ap_target(v, u))]
    sq, sb = u.q + v.q, u.b + v.b
    if sq % 2 == 0 and sb % 2 == 0:
        raw += [(0, sb // 2), (1, sb // 2)]
    return [t for t in (canon(q, b, bound) for q, b in raw) if t is not None]


def cover_rule(target: SymbolicTerm, lam: int) -> Rule | None:
    if target.is_small:
        if target.b == 0:
            return None
        return Rule.MOD_COVER if target.b < lam else Rule.STRICT_COVER
    if target.is_top:
        return Rule.STRICT_COVER
    return None


@lru_cache(maxsize=None)
def witnesses(target: SymbolicTerm, lam: int) -> tuple[Pair, ...]:
    """All pairs x < y that could cover `target`, with max(A) = N + (λ-1)/2."""
    half = (lam - 1) // 2
    pairs: list[Pair] = []
    if target.is_small:
        c = target.b
        for y in range((c + 1) // 2, c):
            pairs.append((SymbolicTerm(0, 2 * y - c), SymbolicTerm(0, y)))
        for e in range((c + 1) // 2, half + 1):
            pairs.append((SymbolicTerm(0, 2 * e - c), SymbolicTerm(1, e)))
    elif target.is_top:
        c = -target.b
        for e in range(-(c // 2), half + 1):
            pairs.append((SymbolicTerm(0, 2 * e + c), SymbolicTerm(1, e)))
    return tuple(pairs)


@lru_cache(maxsize=None)
def cover_targets(lam: int, bound: int) -> tuple[SymbolicTerm, ...]:
    small = [SymbolicTerm(0, c) for c in range(1, bound + 1)]
    top = [SymbolicTerm(0, -c) for c in range(1, bound + 1)]
    return tuple(small + top)


@lru_cache(maxsize=None)
def watchers(lam: int, bound: int) -> dict[SymbolicTerm, tuple[SymbolicTerm, ...]]:
    """Component term → cover targets listing it in some witness pair."""
    index: dict[SymbolicTerm, list[SymbolicTerm]] = {}
    for target in cover_targets(lam, bound):
        for x, y in witnesses(target, lam):
            for comp in (x, y):
                if comp.representable(bound):
                    index.setdefault(comp, [])
                    if not index[comp] or index[comp][-1] != target:
                        index[comp].append(target)
    return {k: tuple(v) for k, v in index.items()}


@dataclass
class CoverAnalysis:
    viable: list[Pair] = field(default_factory=list)
    forced: list[SymbolicTerm] = field(default_factory=list)


def analyze_cover(target: SymbolicTerm, lam: int, bound: int, lookup: Lookup) -> CoverAnalysis:
    """Viable witnesses for `target` (read as OUT) and the UNKNOWN terms common to all of them."""

    def status(t: SymbolicTerm) -> Status:
        return Status.OUT if t == target else lookup(t)

    analysis = CoverAnalysis()
    common: set[SymbolicTerm] | None = None
    for x, y in witnesses(target, lam):
        sx, sy = status(x), status(y)
        if sx is Status.OUT or sy is Status.OUT:
            continue
        analysis.viable.append((x, y))
        open_parts = {t for t, s in ((x, sx), (y, sy)) if s is Status.UNKNOWN and t.representable(bound)}
        common = open_parts if common is None else common & open_parts
    if common:
        analysis.forced = sorted(common)
    return analysis
