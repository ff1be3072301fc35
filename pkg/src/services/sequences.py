"""Greedy generation of Stanley sequences.

S(A) extends a finite 3-free set A by repeatedly appending the smallest integer
above the current maximum that keeps the set 3-free. A candidate a is blocked
exactly when some accepted pair x < y has 2y - x = a, so the generator keeps a
growable boolean sieve `cover` indexed by value and flips bit 2y - x for every
earlier term x whenever a term y is accepted. Covers only point upward
(2y - x > y), which makes the bit of any z at or below the last term final.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np

from src.core.errors import InputError
from src.models.sequence import GrowthDiagnostics, GrowthSample, OmittedSummary, SequenceRecord

logger = logging.getLogger(__name__)

_SCAN_CHUNK = 4096
_INITIAL_COVER = 1024
_INITIAL_TERMS = 64


def find_progression(xs: Iterable[int]) -> tuple[int, int, int] | None:
    """Return the lexicographically smallest 3-term AP (x, y, 2y - x) in `xs`, if any."""
    values = sorted(set(xs))
    present = set(values)
    for i, x in enumerate(values):
        for y in values[i + 1 :]:
            z = 2 * y - x
            if z in present:
                return (x, y, z)
    return None


def is_three_free(xs: Iterable[int]) -> bool:
    return find_progression(xs) is None


def validate_generators(generators: Iterable[int]) -> tuple[int, ...]:
    """Canonicalize a generator set.

    Args:
        generators: Non-negative integers in any order; 0 must be present.

    Returns:
        The sorted generator tuple.

    Raises:
        InputError: duplicates, negatives, missing 0, or a 3-term progression.
    """
    raw = [int(g) for g in generators]
    if not raw:
        raise InputError("generator set is empty; it must contain 0")
    values = sorted(raw)
    if len(set(values)) != len(values):
        dupes = sorted({v for v in values if values.count(v) > 1})
        raise InputError(f"generator set has duplicate elements: {dupes}")
    if values[0] < 0:
        raise InputError(f"generator set has a negative element: {values[0]}")
    if values[0] != 0:
        raise InputError("generator set must contain 0")
    triple = find_progression(values)
    if triple is not None:
        x, y, z = triple
        raise InputError(f"generator set is not 3-free: {x}, {y}, {z} is an arithmetic progression")
    return tuple(values)


class SequencePrefix:
    """A finite greedy run of S(A) together with its cover sieve.

    Generation starts at max(A) + 1, so every candidate lies above every
    generator and the only admissibility test needed is the cover bit.
    """

    def __init__(self, generators: Iterable[int]) -> None:
        self.generators = validate_generators(generators)
        self._terms = np.zeros(max(_INITIAL_TERMS, 2 * len(self.generators)), dtype=np.int64)
        self._count = 0
        self._cover = np.zeros(max(_INITIAL_COVER, 2 * self.generators[-1] + 2), dtype=bool)
        for g in self.generators:
            self._accept(g)
        # smallest value not yet examined as a candidate
        self._scan = self.generators[-1] + 1

    def __len__(self) -> int:
        return self._count

    def __repr__(self) -> str:
        return f"SequencePrefix(generators={list(self.generators)}, terms={self._count}, last={self.last})"

    @property
    def terms(self) -> list[int]:
        return self._terms[: self._count].tolist()

    @property
    def last(self) -> int:
        return int(self._terms[self._count - 1])

    @property
    def horizon(self) -> int:
        """Largest value whose cover status is final."""
        return self.last

    def term_array(self) -> np.ndarray:
        return self._terms[: self._count].copy()

    def cover_mask(self, limit: int) -> np.ndarray:
        """Cover bits for values [0, limit), zero-padded past the allocated sieve."""
        out = np.zeros(limit, dtype=bool)
        n = min(limit, self._cover.size)
        out[:n] = self._cover[:n]
        return out

    def member_mask(self, limit: int) -> np.ndarray:
        out = np.zeros(limit, dtype=bool)
        arr = self._terms[: self._count]
        out[arr[arr < limit]] = True
        return out

    def extend(self, count_limit: int, value_limit: int | None = None) -> "SequencePrefix":
        """Append greedy terms until `count_limit` terms or the next term would exceed `value_limit`."""
        if count_limit < len(self.generators):
            raise InputError(
                f"count_limit={count_limit} is smaller than the {len(self.generators)} generators"
            )
        while self._count < count_limit:
            candidate = self._next_candidate()
            if value_limit is not None and candidate > value_limit:
                self._scan = candidate
                break
            self._accept(candidate)
            self._scan = candidate + 1
        return self

    def extend_past(self, value: int) -> "SequencePrefix":
        """Generate until the last term is at least `value`."""
        while self.last < value:
            self.extend(self._count + max(64, self._count // 2))
        return self

    def to_record(self) -> SequenceRecord:
        return SequenceRecord(generators=list(self.generators), terms=self.terms)

    def _next_candidate(self) -> int:
        pos = self._scan
        while pos < self._cover.size:
            chunk = self._cover[pos : pos + _SCAN_CHUNK]
            free = np.flatnonzero(~chunk)
            if free.size:
                return pos + int(free[0])
            pos += chunk.size
        return pos

    def _accept(self, y: int) -> None:
        self._grow_cover(2 * y + 1)
        if self._count:
            earlier = self._terms[: self._count]
            self._cover[2 * y - earlier] = True
        if self._count == self._terms.size:
            grown = np.zeros(2 * self._terms.size, dtype=np.int64)
            grown[: self._count] = self._terms
            self._terms = grown
        self._terms[self._count] = y
        self._count += 1

    def _grow_cover(self, size: int) -> None:
        if size <= self._cover.size:
            return
        grown = np.zeros(max(size, 2 * self._cover.size), dtype=bool)
        grown[: self._cover.size] = self._cover
        self._cover = grown


def generate(generators: Iterable[int], count_limit: int, value_limit: int | None = None) -> SequencePrefix:
    """Greedy extension of `generators`, stopping at whichever limit is hit first.

    Raises:
        InputError: invalid generators or count_limit below their number.
    """
    return SequencePrefix(generators).extend(count_limit, value_limit)


def naive_generate(generators: Iterable[int], count_limit: int) -> list[int]:
    """Re-scan oracle: test every candidate against all earlier terms literally."""
    terms = list(validate_generators(generators))
    present = set(terms)
    candidate = terms[-1] + 1
    while len(terms) < count_limit:
        blocked = False
        for x in terms:
            # x, m, candidate with m the midpoint, or x, candidate, 2*candidate - x
            if (x + candidate) % 2 == 0 and (x + candidate) // 2 in present and (x + candidate) // 2 != x:
                blocked = True
                break
            if 2 * candidate - x in present:
                blocked = True
                break
        if not blocked:
            terms.append(candidate)
            present.add(candidate)
        candidate += 1
    return terms


def covered(prefix: SequencePrefix, z: int) -> tuple[int, int] | None:
    """Lexicographically smallest x < y in the prefix with 2y - x = z.

    Raises:
        InputError: z lies beyond the prefix horizon.
    """
    if z > prefix.horizon:
        raise InputError(f"z={z} lies beyond the horizon {prefix.horizon}; its cover status is not final")
    if z < 0:
        return None
    arr = prefix.term_array()
    xs = arr[arr < z]
    doubled = z + xs
    ys = doubled // 2
    hits = (doubled % 2 == 0) & (xs < ys) & np.isin(ys, arr)
    idx = np.flatnonzero(hits)
    if not idx.size:
        return None
    first = int(idx[0])
    return (int(xs[first]), int(ys[first]))


def omitted_set(generators: Iterable[int], bound: int) -> OmittedSummary:
    """Exact omitted set of S(A) below `bound`."""
    gens = validate_generators(generators)
    if bound < gens[-1]:
        raise InputError(f"bound={bound} is below max(generators)={gens[-1]}")
    prefix = SequencePrefix(gens).extend_past(bound)
    free = ~prefix.cover_mask(bound) & ~prefix.member_mask(bound)
    omitted = np.flatnonzero(free).tolist()
    return OmittedSummary(
        generators=list(gens),
        omitted=omitted,
        omega=omitted[-1] if omitted else None,
        final_up_to=bound,
    )


def power_of_two_indices(count: int) -> list[int]:
    """Sample indices 2, 4, 8, ... below `count`."""
    out: list[int] = []
    n = 2
    while n < count:
        out.append(n)
        n *= 2
    return out


def growth_diagnostics(prefix: SequencePrefix, sample_points: Sequence[int]) -> GrowthDiagnostics:
    """Report a_n / n^{log2 3} and a_n ln(n) / n^2 at each sample index.

    n^{log2 3} is evaluated as 3^{log2 n}, which is exact at powers of two.
    """
    n = np.asarray(list(sample_points), dtype=np.int64)
    if n.size and (n.min() < 2 or n.max() >= len(prefix)):
        raise InputError(f"sample indices must lie in [2, {len(prefix) - 1}]")
    a = prefix.term_array()[n].astype(np.float64)
    nf = n.astype(np.float64)
    ratio1 = a / np.power(3.0, np.log2(nf))
    ratio2 = a * np.log(nf) / (nf * nf)
    samples = [
        GrowthSample(n=int(i), a_n=int(v), ratio_type1=float(r1), ratio_type2=float(r2))
        for i, v, r1, r2 in zip(n, a, ratio1, ratio2)
    ]
    if samples and not all(math.isfinite(s.ratio_type1) and math.isfinite(s.ratio_type2) for s in samples):
        logger.warning(f"non-finite growth ratio for S({list(prefix.generators)})")
    return GrowthDiagnostics(generators=list(prefix.generators), samples=samples)
