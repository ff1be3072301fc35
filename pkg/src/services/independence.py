"""Independence certificates, modulus detection and character search.

A Stanley sequence is independent when, from some κ on, its terms double
additively (a_{2^k+i} = a_{2^k} + a_i for i < 2^k) and the jump into each new
block is fixed by one constant λ (a_{2^k} = 2·a_{2^k-1} - λ + 1). A finite
prefix can only be *consistent* with independence up to the depth it covers,
so certificates always carry `verified_through`.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Iterator

import numpy as np

from src.core.config import settings
from src.core.errors import BudgetExceededError, InputError, InvariantViolation
from src.models.certificate import CharacterDetection, DetectionSource, IndependenceCertificate, ModulusMatch
from src.models.modular_set import ModularSet, Verdict, Violation, ViolationKind
from src.services.modular_sets import omega_below, restriction_check, verify_modular
from src.services.sequences import SequencePrefix, generate, omitted_set

logger = logging.getLogger(__name__)

GeneratorSet = tuple[int, ...]


def prefix_for_depth(generators: Iterable[int], k_max: int) -> SequencePrefix:
    """The 2^{k_max+1} terms a depth-k_max certificate needs."""
    return generate(generators, 2 ** (k_max + 1))


def detect_independence(
    prefix: SequencePrefix,
    k_max: int,
    min_levels: int | None = None,
) -> IndependenceCertificate | None:
    """Smallest κ whose doubling recursions hold on every level κ..k_max.

    Args:
        prefix: Generated prefix with at least 2^{k_max+1} terms.
        k_max: Deepest doubling level to check.
        min_levels: Levels a certificate must span (default from settings).

    Returns:
        The certificate, or None when no (κ, λ) fits.

    Raises:
        InputError: the prefix is too short for k_max.
    """
    need = 2 ** (k_max + 1)
    if len(prefix) < need:
        raise InputError(f"prefix has {len(prefix)} terms; depth k_max={k_max} needs {need}")
    levels = min_levels if min_levels is not None else settings.MIN_VERIFIED_LEVELS
    a = prefix.term_array()[:need]

    additive: list[bool] = []
    jumps: list[int] = []
    for k in range(k_max + 1):
        p = 2**k
        additive.append(bool(np.array_equal(a[p : 2 * p] - a[p], a[:p])))
        jumps.append(int(2 * a[p - 1] - a[p] + 1))

    kappa: int | None = None
    for k in range(k_max, -1, -1):
        if not additive[k] or jumps[k] != jumps[k_max]:
            break
        kappa = k
    if kappa is None or k_max - kappa + 1 < levels or jumps[k_max] < 0:
        return None
    return IndependenceCertificate(
        kappa=kappa,
        lambda_=jumps[k_max],
        rho=int(a[2**kappa]),
        verified_through=k_max,
    )


def _prefix_modular_set(prefix: SequencePrefix, modulus: int) -> ModularSet | None:
    """prefix ∩ [0, M) if it is a modular set whose greedy sequence is the prefix."""
    terms = prefix.term_array()
    elems = terms[terms < modulus].tolist()
    verdict = verify_modular(elems, modulus)
    if not verdict.valid:
        return None
    ms = ModularSet(modulus=modulus, elements=tuple(elems), lambda_=verdict.lambda_, omega=verdict.omega)
    if modulus <= prefix.generators[-1]:
        # the set does not contain every generator, so S(set) may differ
        if generate(ms.elements, len(prefix)).terms != prefix.terms:
            return None
    if not restriction_check(ms).valid:
        raise InvariantViolation(f"({list(ms.elements)}, {modulus}) fails the restriction check")
    return ms


def find_modulus(
    prefix: SequencePrefix,
    cert: IndependenceCertificate,
    l_max: int,
) -> ModulusMatch | None:
    """Smallest ℓ ≤ l_max such that prefix ∩ [0, 3^ℓ·ρ) is a modular set generating the prefix.

    Raises:
        InputError: the prefix does not reach 3^{l_max}·ρ.
    """
    top = 3**l_max * cert.rho
    if prefix.last < top:
        raise InputError(f"prefix ends at {prefix.last}; l_max={l_max} needs terms past {top}")
    for level in range(l_max + 1):
        modulus = 3**level * cert.rho
        ms = _prefix_modular_set(prefix, modulus)
        if ms is not None:
            return ModulusMatch(modulus=modulus, level=level, modular_set=ms)
    return None


def scan_modulus(prefix: SequencePrefix) -> ModulusMatch | None:
    """Smallest term M above max(A) at which the prefix is modular modulo M.

    A modular sequence repeats as T ∩ [M, 2M) = T ∩ [0, M) + M with nothing in
    [2M, 3M); only moduli passing that shape filter are verified.
    """
    terms = prefix.term_array()
    last = int(terms[-1])
    floor = prefix.generators[-1]
    for m in terms[1:].tolist():
        if 3 * m > last:
            break
        if m <= floor:
            continue
        lo, mid, hi = np.searchsorted(terms, [m, 2 * m, 3 * m]).tolist()
        if mid - lo != lo or hi != mid:
            continue
        if not np.array_equal(terms[lo:mid] - m, terms[:lo]):
            continue
        ms = _prefix_modular_set(prefix, m)
        if ms is not None:
            return ModulusMatch(modulus=m, modular_set=ms)
    return None


def detect_character(
    prefix: SequencePrefix,
    k_max: int | None = None,
    l_max: int | None = None,
) -> CharacterDetection | None:
    """Character backed by a verified modular prefix: certificate route first, then the scan."""
    l_max = l_max if l_max is not None else settings.DISPATCH_L_MAX
    if k_max is None:
        k_max = max(0, len(prefix).bit_length() - 2)
    match: ModulusMatch | None = None
    source = DetectionSource.CERTIFICATE
    if k_max >= 1 and len(prefix) >= 2 ** (k_max + 1):
        cert = detect_independence(prefix, k_max)
        if cert is not None:
            usable = l_max
            while usable > 0 and 3**usable * cert.rho > prefix.last:
                usable -= 1
            if 3**usable * cert.rho <= prefix.last:
                match = find_modulus(prefix, cert, usable)
    if match is None:
        source = DetectionSource.SCAN
        match = scan_modulus(prefix)
    if match is None:
        return None
    return CharacterDetection(
        character=match.modular_set.lambda_,
        modulus=match.modulus,
        elements=match.modular_set.elements,
        source=source,
    )


def omega_lambda_check(prefix: SequencePrefix, cert: IndependenceCertificate) -> Verdict:
    """ω(A) < λ(A) for the certified sequence (NONE passes)."""
    bound = max(3 * cert.rho, prefix.generators[-1])
    summary = omitted_set(prefix.generators, bound)
    if omega_below(summary.omega, cert.lambda_):
        return Verdict(valid=True, lambda_=cert.lambda_, omega=summary.omega)
    return Verdict(
        valid=False,
        lambda_=cert.lambda_,
        omega=summary.omega,
        violation=Violation(
            kind=ViolationKind.OMEGA,
            residue=summary.omega,
            detail=f"omega={summary.omega} is not below lambda={cert.lambda_}",
        ),
    )


# ---------------------------------------------------------------------------
# Character search
# ---------------------------------------------------------------------------


def three_free_generator_sets(bound: int) -> Iterator[GeneratorSet]:
    """Every 3-free subset of [0, bound] containing 0, in lexicographic order."""
    chosen = [0]
    present = {0}

    def extend(start: int) -> Iterator[GeneratorSet]:
        yield tuple(chosen)
        for e in range(start, bound + 1):
            if any((x + e) % 2 == 0 and (x + e) // 2 in present for x in chosen):
                continue
            chosen.append(e)
            present.add(e)
            yield from extend(e + 1)
            chosen.pop()
            present.discard(e)

    yield from extend(1)


def _certify(generators: GeneratorSet, k_max: int) -> tuple[tuple[int, ...], IndependenceCertificate | None]:
    prefix = prefix_for_depth(generators, k_max)
    return tuple(prefix.terms), detect_independence(prefix, k_max)


def _certify_chunk(chunk: list[GeneratorSet], k_max: int) -> list[tuple[tuple[int, ...], IndependenceCertificate | None]]:
    return [_certify(g, k_max) for g in chunk]


def character_search_table(
    generator_bound: int,
    k_max: int | None = None,
    workers: int | None = None,
    max_sets: int | None = None,
) -> dict[int, list[GeneratorSet]]:
    """λ → generator sets whose sequences certify λ, one set per distinct sequence.

    Two generator sets are the same hit when their prefixes agree to 2^{k_max+1}
    terms; the lexicographically smallest (shortest) set is kept.

    Raises:
        BudgetExceededError: more generator sets than the configured budget.
    """
    k_max = k_max if k_max is not None else settings.SEARCH_K_MAX
    workers = workers if workers is not None else settings.WORKERS
    budget = max_sets if max_sets is not None else settings.SEARCH_MAX_GENERATOR_SETS

    candidates: list[GeneratorSet] = []
    for gens in three_free_generator_sets(generator_bound):
        candidates.append(gens)
        if len(candidates) > budget:
            raise BudgetExceededError(
                f"more than {budget} generator sets within [0, {generator_bound}]"
            )
    logger.info(f"character search: {len(candidates)} generator sets within [0, {generator_bound}], k_max={k_max}")

    if workers > 1:
        size = max(1, len(candidates) // (workers * 8))
        chunks = [candidates[i : i + size] for i in range(0, len(candidates), size)]
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_certify_chunk, chunks, [k_max] * len(chunks)))
        outcomes = [o for part in parts for o in part]
    else:
        outcomes = [_certify(g, k_max) for g in candidates]

    seen: set[tuple[int, ...]] = set()
    table: dict[int, list[GeneratorSet]] = defaultdict(list)
    for gens, (terms, cert) in zip(candidates, outcomes):
        if cert is None or terms in seen:
            continue
        seen.add(terms)
        table[cert.lambda_].append(gens)
    return {lam: sorted(table[lam]) for lam in sorted(table)}


def search_by_character(
    target: int,
    generator_bound: int,
    k_max: int | None = None,
    workers: int | None = None,
) -> list[GeneratorSet]:
    """Generator sets within [0, bound] whose sequences certify character `target`."""
    if target < 0:
        raise InputError(f"character must be non-negative, got {target}")
    return character_search_table(generator_bound, k_max=k_max, workers=workers).get(target, [])
