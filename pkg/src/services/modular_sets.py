"""Modular sets modulo N.

A ⊆ {0..N-1} with 0 ∈ A is a modular set when it contains no mod-AP
(x ≠ y in A, in either order, with (2y - x) mod N ∈ A; z may equal x) and every
residue outside A is mod-covered by some x < y in A. λ(A) = 2·max(A) - N + 1
and ω(A) is the largest non-member that is mod-covered but not covered over
the integers.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Mapping

import numpy as np

from src.core.config import settings
from src.core.errors import BudgetExceededError, InputError, InvariantViolation
from src.models.modular_set import (
    CoverReport,
    ModularSet,
    ResidueCover,
    ResidueStatus,
    Verdict,
    Violation,
    ViolationKind,
)
from src.services.sequences import generate

logger = logging.getLogger(__name__)

FORBIDDEN_CHARACTERS: tuple[int, ...] = (1, 3, 5, 9, 11, 15)

CharacterTable = dict[int, list[ModularSet]]


def omega_below(omega: int | None, value: int) -> bool:
    """ω < value with NONE ordered below every integer."""
    return omega is None or omega < value


def _check_input(elements: Iterable[int], modulus: int) -> np.ndarray:
    if modulus < 1:
        raise InputError(f"modulus must be a positive integer, got {modulus}")
    values = [int(e) for e in elements]
    if len(set(values)) != len(values):
        dupes = sorted({v for v in values if values.count(v) > 1})
        raise InputError(f"duplicate elements: {dupes}")
    outside = sorted(v for v in values if not 0 <= v < modulus)
    if outside:
        raise InputError(f"elements outside 0..{modulus - 1}: {outside}")
    if 0 not in values:
        raise InputError("a modular set must contain 0")
    return np.array(sorted(values), dtype=np.int64)


def _pair_targets(elems: np.ndarray, modulus: int) -> np.ndarray:
    # row i is x = elems[i], column j is y = elems[j]
    return (2 * elems[None, :] - elems[:, None]) % modulus


def _first_witnesses(elems: np.ndarray, targets: np.ndarray) -> dict[int, tuple[int, int]]:
    """Lexicographically smallest x < y per target value, from the strict upper triangle."""
    rows, cols = np.triu_indices(elems.size, 1)
    flat = targets[rows, cols]
    values, first = np.unique(flat, return_index=True)
    return {int(v): (int(elems[rows[i]]), int(elems[cols[i]])) for v, i in zip(values, first)}


def _integer_covers(elems: np.ndarray, modulus: int) -> dict[int, tuple[int, int]]:
    raw = 2 * elems[None, :] - elems[:, None]
    raw = np.where(raw < modulus, raw, modulus)
    witnesses = _first_witnesses(elems, raw)
    witnesses.pop(modulus, None)
    return witnesses


def verify_modular(elements: Iterable[int], modulus: int) -> Verdict:
    """Check the modular-set definition and report λ and ω.

    Raises:
        InputError: residues outside {0..N-1}, duplicates, or 0 missing.
    """
    elems = _check_input(elements, modulus)
    targets = _pair_targets(elems, modulus)
    hits = np.isin(targets, elems)
    np.fill_diagonal(hits, False)
    bad = np.argwhere(hits)
    if bad.size:
        i, j = (int(v) for v in bad[0])
        x, y = int(elems[i]), int(elems[j])
        return Verdict(
            valid=False,
            violation=Violation(kind=ViolationKind.MOD_AP, triple=(x, y, int(targets[i, j]))),
        )

    mod_cover = _first_witnesses(elems, targets)
    members = set(elems.tolist())
    for r in range(modulus):
        if r not in members and r not in mod_cover:
            return Verdict(valid=False, violation=Violation(kind=ViolationKind.UNCOVERED, residue=r))

    integer_cover = _integer_covers(elems, modulus)
    mod_only = [r for r in range(modulus) if r not in members and r not in integer_cover]
    return Verdict(
        valid=True,
        lambda_=2 * int(elems[-1]) - modulus + 1,
        omega=mod_only[-1] if mod_only else None,
    )


def build_modular_set(elements: Iterable[int], modulus: int) -> ModularSet:
    """Verified constructor; raises InputError naming the violation."""
    elems = tuple(sorted(int(e) for e in elements))
    verdict = verify_modular(elems, modulus)
    if not verdict.valid:
        raise InputError(f"({list(elems)}, {modulus}) is not a modular set: {verdict.describe()}")
    return ModularSet(modulus=modulus, elements=elems, lambda_=verdict.lambda_, omega=verdict.omega)


def cover_report(ms: ModularSet) -> CoverReport:
    elems = _check_input(ms.elements, ms.modulus)
    members = set(elems.tolist())
    mod_cover = _first_witnesses(elems, _pair_targets(elems, ms.modulus))
    integer_cover = _integer_covers(elems, ms.modulus)
    residues: list[ResidueCover] = []
    for r in range(ms.modulus):
        if r in members:
            residues.append(ResidueCover(residue=r, status=ResidueStatus.MEMBER))
        elif r in integer_cover:
            residues.append(ResidueCover(residue=r, status=ResidueStatus.COVERED, witness=integer_cover[r]))
        elif r in mod_cover:
            residues.append(
                ResidueCover(residue=r, status=ResidueStatus.MOD_COVERED_ONLY, witness=mod_cover[r])
            )
        else:
            residues.append(ResidueCover(residue=r, status=ResidueStatus.UNCOVERED))
    mod_only = [c.residue for c in residues if c.status is ResidueStatus.MOD_COVERED_ONLY]
    return CoverReport(modulus=ms.modulus, residues=residues, omega=mod_only[-1] if mod_only else None)


def tensor(a: ModularSet, b: ModularSet) -> ModularSet:
    """A ⊗ B = A + N·B modulo N·M, re-verified against λ(A) + N·λ(B).

    Raises:
        InvariantViolation: the product fails verification or the character identity.
    """
    n, m = a.modulus, b.modulus
    elems = tuple(sorted(x + n * y for y in b.elements for x in a.elements))
    verdict = verify_modular(elems, n * m)
    expected = a.lambda_ + n * b.lambda_
    if not verdict.valid or verdict.lambda_ != expected:
        raise InvariantViolation(
            f"tensor of ({list(a.elements)}, {n}) and ({list(b.elements)}, {m}) gave "
            f"{verdict.describe()}, expected lambda={expected}"
        )
    return ModularSet(modulus=n * m, elements=elems, lambda_=verdict.lambda_, omega=verdict.omega)


def restriction_check(ms: ModularSet) -> Verdict:
    """S(a_0..a_k) ∩ [0, N) must reproduce the set, for a_k the first element above ω."""
    verdict = verify_modular(ms.elements, ms.modulus)
    if not verdict.valid:
        return verdict
    omega = verdict.omega
    k = next(
        (i for i, e in enumerate(ms.elements) if omega is None or e > omega),
        len(ms.elements) - 1,
    )
    gens = ms.elements[: k + 1]
    greedy = generate(gens, count_limit=max(ms.modulus, len(gens)), value_limit=ms.modulus - 1).terms
    if tuple(greedy) != tuple(ms.elements):
        return Verdict(
            valid=False,
            lambda_=verdict.lambda_,
            omega=omega,
            violation=Violation(
                kind=ViolationKind.RESTRICTION,
                detail=f"S({list(gens)}) below {ms.modulus} is {greedy}",
            ),
        )
    return verdict


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _blocked_by(a: int, e: int, modulus: int) -> int:
    """Residues that cannot join a set containing both a and e (all mod-AP completions)."""
    mask = (1 << ((2 * e - a) % modulus)) | (1 << ((2 * a - e) % modulus))
    s = a + e
    if modulus % 2:
        mask |= 1 << (s * ((modulus + 1) // 2) % modulus)
    elif s % 2 == 0:
        mask |= (1 << ((s // 2) % modulus)) | (1 << ((s // 2 + modulus // 2) % modulus))
    return mask


def _search(
    modulus: int,
    elements: list[int],
    members: int,
    blocked: int,
    covered: int,
    start: int,
    out: list[tuple[int, ...]],
) -> None:
    full = (1 << modulus) - 1
    if members | covered == full:
        out.append(tuple(elements))
    half = modulus // 2 if modulus % 2 == 0 else None
    for e in range(start, modulus):
        if blocked >> e & 1:
            continue
        nb, nc = blocked, covered
        for a in elements:
            nb |= _blocked_by(a, e, modulus)
            nc |= 1 << ((2 * e - a) % modulus)
        if half is not None:
            nb |= 1 << ((e + half) % modulus)
        elements.append(e)
        _search(modulus, elements, members | (1 << e), nb, nc, e + 1, out)
        elements.pop()


def _root_state(modulus: int) -> tuple[int, int]:
    blocked = 1 << (modulus // 2) if modulus % 2 == 0 else 0
    return 1, blocked


def _enumerate_branch(modulus: int, second: int | None) -> list[tuple[int, ...]]:
    """All mod-3-free extensions of {0} (second is None) or of {0, second}."""
    members, blocked = _root_state(modulus)
    out: list[tuple[int, ...]] = []
    if second is None:
        if members == (1 << modulus) - 1:
            out.append((0,))
        return out
    if blocked >> second & 1:
        return out
    nb = blocked | _blocked_by(0, second, modulus)
    if modulus % 2 == 0:
        nb |= 1 << ((second + modulus // 2) % modulus)
    nc = 1 << ((2 * second) % modulus)
    _search(modulus, [0, second], members | (1 << second), nb, nc, second + 1, out)
    return out


def enumerate_modular_sets(
    modulus: int,
    workers: int | None = None,
    max_modulus: int | None = None,
) -> list[ModularSet]:
    """Every modular set modulo N, lexicographically ordered.

    Depth-first over elements in increasing order, pruning on mod-AP
    completions; cover completeness is checked at every node since a later
    element can still cover a smaller residue.

    Raises:
        BudgetExceededError: modulus above the configured budget.
    """
    limit = max_modulus if max_modulus is not None else settings.ENUMERATION_MAX_MODULUS
    if modulus < 1:
        raise InputError(f"modulus must be a positive integer, got {modulus}")
    if modulus > limit:
        raise BudgetExceededError(f"modulus {modulus} exceeds the enumeration budget {limit}")
    workers = workers if workers is not None else settings.WORKERS

    branches: list[int | None] = [None, *range(1, modulus)]
    if workers > 1 and modulus > 12:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_enumerate_branch, [modulus] * len(branches), branches))
    else:
        parts = [_enumerate_branch(modulus, b) for b in branches]

    found = sorted(s for part in parts for s in part)
    result: list[ModularSet] = []
    for elems in found:
        verdict = verify_modular(elems, modulus)
        if not verdict.valid:
            raise InvariantViolation(f"enumerator produced an invalid set {list(elems)} mod {modulus}: {verdict.describe()}")
        result.append(ModularSet(modulus=modulus, elements=elems, lambda_=verdict.lambda_, omega=verdict.omega))
    logger.info(f"modulus {modulus}: {len(result)} modular sets")
    return result


def table_from_sets(sets_by_modulus: Mapping[int, list[ModularSet]]) -> CharacterTable:
    table: dict[int, list[ModularSet]] = defaultdict(list)
    for modulus in sorted(sets_by_modulus):
        for ms in sets_by_modulus[modulus]:
            table[ms.lambda_].append(ms)
    return {lam: sorted(table[lam], key=lambda ms: ms.sort_key) for lam in sorted(table)}


def character_table(max_modulus: int, workers: int | None = None) -> CharacterTable:
    """λ → every (modulus, elements) with that character, over all N ≤ max_modulus."""
    return table_from_sets({n: enumerate_modular_sets(n, workers=workers) for n in range(1, max_modulus + 1)})


def missing_characters(table: Mapping[int, list[ModularSet]], upto: int) -> list[int]:
    return [lam for lam in range(upto + 1) if lam not in table]
