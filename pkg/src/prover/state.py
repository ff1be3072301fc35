"""Constraint state and unit propagation for the character prover.

A state maps every representable term to IN, OUT or UNKNOWN and keeps a
journal of every status change with the rule and premises that produced it.
Statuses never change once decided; a second, conflicting assignment is a
contradiction. Terms outside the representable range are never assigned and
read as UNKNOWN, except where the structure of A decides them:

* anything above max(A) = N + (λ-1)/2 is OUT,
* small terms past the bound follow the dispatched sequence T once it exists.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from src.core.config import settings
from src.core.errors import InputError, PreconditionError
from src.models.certificate import CharacterDetection
from src.prover.rules import (
    ContradictionKind,
    ProverParams,
    Rule,
    Status,
    analyze_cover,
    antipode,
    completions,
    cover_rule,
    cover_targets,
    watchers,
)
from src.prover.terms import SymbolicTerm
from src.services.independence import detect_character
from src.services.sequences import generate

logger = logging.getLogger(__name__)

ZERO = SymbolicTerm(0, 0)


@dataclass(frozen=True)
class Deduction:
    term: SymbolicTerm
    status: Status
    rule: Rule
    premises: tuple[SymbolicTerm, ...] = ()


@dataclass(frozen=True)
class Contradiction:
    kind: ContradictionKind
    # the assignment that clashed (mod-AP, unique-witness clash)
    deduction: Deduction | None = None
    # the OUT residue left without a witness
    target: SymbolicTerm | None = None
    character: int | None = None
    modulus: int | None = None

    def describe(self) -> str:
        if self.deduction is not None:
            d = self.deduction
            return f"{self.kind.value}: {d.term} {d.status.value} by {d.rule.value}"
        if self.target is not None:
            return f"{self.kind.value}: {self.target}"
        return f"{self.kind.value}: character {self.character} at modulus {self.modulus}"


@dataclass(frozen=True)
class DispatchRecord:
    """The concrete greedy sequence T = S(generators) a branch committed to."""

    generators: tuple[int, ...]
    terms: tuple[int, ...]
    members: frozenset[int]
    detection: CharacterDetection | None


@lru_cache(maxsize=512)
def dispatch_sequence(generators: tuple[int, ...], prefix_terms: int, l_max: int) -> DispatchRecord:
    prefix = generate(generators, prefix_terms)
    detection = detect_character(prefix, l_max=l_max)
    logger.debug(
        f"dispatch S({list(generators)}): {len(prefix)} terms, "
        f"character {detection.character if detection else 'undetected'}"
    )
    return DispatchRecord(
        generators=generators,
        terms=tuple(prefix.terms),
        members=frozenset(prefix.terms),
        detection=detection,
    )


class ConstraintState:
    def __init__(self, params: ProverParams) -> None:
        self.params = params
        self.status: dict[SymbolicTerm, Status] = {}
        self.journal: list[Deduction] = []
        # representable IN terms in assignment order
        self.members: list[SymbolicTerm] = []
        self.dispatched: DispatchRecord | None = None
        self.contradiction: Contradiction | None = None
        self.events: deque[SymbolicTerm] = deque()
        self.sweep_pending = False

    @property
    def lam(self) -> int:
        return self.params.lam

    @property
    def bound(self) -> int:
        return self.params.bound

    def copy(self) -> "ConstraintState":
        other = ConstraintState(self.params)
        other.status = dict(self.status)
        other.journal = list(self.journal)
        other.members = list(self.members)
        other.dispatched = self.dispatched
        other.contradiction = self.contradiction
        other.events = deque(self.events)
        other.sweep_pending = self.sweep_pending
        return other

    def lookup(self, t: SymbolicTerm) -> Status:
        if t.representable(self.bound):
            return self.status.get(t, Status.UNKNOWN)
        if t.is_top:
            return Status.OUT
        if t.is_high:
            return Status.OUT if t.b > self.params.half else Status.UNKNOWN
        if self.dispatched is not None:
            return Status.IN if t.b in self.dispatched.members else Status.OUT
        return Status.UNKNOWN

    def assign(
        self,
        term: SymbolicTerm | None,
        status: Status,
        rule: Rule,
        premises: Iterable[SymbolicTerm] = (),
    ) -> Contradiction | None:
        """Record a deduction; returns the contradiction when the term is already the other way."""
        if term is None or not term.representable(self.bound):
            return None
        current = self.status.get(term, Status.UNKNOWN)
        if current is status:
            return None
        entry = Deduction(term, status, rule, tuple(premises))
        if current is not Status.UNKNOWN:
            # cover rules only force UNKNOWN terms, so clashes come from R1, R2 or T
            kind = ContradictionKind.CLASH if rule is Rule.DISPATCH else ContradictionKind.MOD_AP
            return Contradiction(kind, deduction=entry)
        self.status[term] = status
        self.journal.append(entry)
        self.events.append(term)
        if status is Status.IN:
            self.members.append(term)
        return None

    def decide(self, term: SymbolicTerm, status: Status) -> None:
        """Apply a split decision.

        Raises:
            PreconditionError: the term is already decided or not representable.
        """
        if not term.representable(self.bound) or self.status.get(term, Status.UNKNOWN) is not Status.UNKNOWN:
            raise PreconditionError(f"cannot split on {term}: already decided or out of range")
        self.assign(term, status, Rule.SPLIT)

    def fail(self, contradiction: Contradiction) -> Contradiction:
        self.contradiction = contradiction
        self.events.clear()
        return contradiction

    def undecided(self) -> list[SymbolicTerm]:
        b = self.bound
        universe = (
            [SymbolicTerm(0, c) for c in range(b + 1)]
            + [SymbolicTerm(1, e) for e in range(-b, b + 1)]
            + [SymbolicTerm(0, -c) for c in range(1, b + 1)]
        )
        return [t for t in universe if t not in self.status]


def init_state(lam: int, bound: int | None = None) -> ConstraintState:
    """Root state for character λ: 0 and N + (λ-1)/2 IN, everything above OUT.

    Raises:
        InputError: λ is even or below 1, or the bound cannot hold max(A).
    """
    if lam < 1 or lam % 2 == 0:
        raise InputError(f"character must be an odd positive integer for an even modulus, got {lam}")
    bound = bound if bound is not None else settings.PROVER_BOUND_FACTOR * lam
    if bound < lam:
        raise InputError(f"offset bound {bound} is below the character {lam}")
    params = ProverParams(lam=lam, bound=bound)
    state = ConstraintState(params)
    state.assign(ZERO, Status.IN, Rule.INIT)
    state.assign(params.max_term, Status.IN, Rule.INIT)
    for e in range(params.half + 1, bound + 1):
        state.assign(SymbolicTerm(1, e), Status.OUT, Rule.INIT)
    for c in range(1, bound + 1):
        state.assign(SymbolicTerm(0, -c), Status.OUT, Rule.INIT)
    contradiction = state.assign(antipode(ZERO), Status.OUT, Rule.ANTIPODE, (ZERO,))
    if contradiction is not None:
        state.fail(contradiction)
    return state


def _close_member(state: ConstraintState, t: SymbolicTerm) -> Contradiction | None:
    c = state.assign(antipode(t), Status.OUT, Rule.ANTIPODE, (t,))
    if c is not None:
        return c
    for u in list(state.members):
        if u == t:
            continue
        for z in completions(u, t, state.bound):
            c = state.assign(z, Status.OUT, Rule.PROGRESSION, (u, t))
            if c is not None:
                return c
    return None


def check_cover(state: ConstraintState, target: SymbolicTerm) -> Contradiction | None:
    current = state.lookup(target)
    if current is Status.IN:
        return None
    rule = cover_rule(target, state.lam)
    if rule is None:
        return None
    analysis = analyze_cover(target, state.lam, state.bound, state.lookup)
    if current is Status.OUT:
        if not analysis.viable:
            return Contradiction(ContradictionKind.UNCOVERABLE, target=target)
        for t in analysis.forced:
            c = state.assign(t, Status.IN, rule, (target,))
            if c is not None:
                return c
        return None
    if not analysis.viable:
        return state.assign(target, Status.IN, rule, (target,))
    return None


def propagate(state: ConstraintState) -> Contradiction | None:
    """Run R1-R4 to a fixpoint. Returns the first contradiction, if any."""
    if state.contradiction is not None:
        return state.contradiction
    index = watchers(state.lam, state.bound)
    if state.sweep_pending:
        state.sweep_pending = False
        for target in cover_targets(state.lam, state.bound):
            c = check_cover(state, target)
            if c is not None:
                return state.fail(c)
    while state.events:
        t = state.events.popleft()
        current = state.status[t]
        if current is Status.IN:
            c = _close_member(state, t)
            if c is not None:
                return state.fail(c)
            continue
        affected = index.get(t, ())
        if cover_rule(t, state.lam) is not None:
            affected = affected + (t,)
        for target in affected:
            c = check_cover(state, target)
            if c is not None:
                return state.fail(c)
    return None


def dispatch_ready(state: ConstraintState) -> int | None:
    """Index a ≥ λ of the first small IN term once every small term up to it is decided."""
    if state.dispatched is not None:
        return None
    for c in range(state.bound + 1):
        current = state.status.get(SymbolicTerm(0, c), Status.UNKNOWN)
        if current is Status.UNKNOWN:
            return None
        if current is Status.IN and c >= state.lam:
            return c
    return None


def dispatch_generators(state: ConstraintState, a: int) -> tuple[int, ...]:
    return tuple(c for c in range(a + 1) if state.status.get(SymbolicTerm(0, c)) is Status.IN)


def dispatch_concrete(
    state: ConstraintState,
    prefix_terms: int | None = None,
    l_max: int | None = None,
) -> Contradiction | None:
    """Commit the small range to T = S(A ∩ [0, a]) and check T's character.

    Since ω(A) < λ ≤ a, everything past a in A's small range is the greedy
    continuation of A ∩ [0, a].

    Raises:
        PreconditionError: the state is not ready for dispatch.
    """
    a = dispatch_ready(state)
    if a is None:
        raise PreconditionError("dispatch needs a decided small prefix ending in an IN term ≥ λ")
    prefix_terms = prefix_terms if prefix_terms is not None else settings.DISPATCH_PREFIX_TERMS
    l_max = l_max if l_max is not None else settings.DISPATCH_L_MAX
    record = dispatch_sequence(dispatch_generators(state, a), prefix_terms, l_max)
    state.dispatched = record
    for c in range(state.bound + 1):
        wanted = Status.IN if c in record.members else Status.OUT
        contradiction = state.assign(SymbolicTerm(0, c), wanted, Rule.DISPATCH)
        if contradiction is not None:
            return state.fail(contradiction)
    detection = record.detection
    if detection is not None and detection.character != state.lam:
        return state.fail(
            Contradiction(
                ContradictionKind.CHARACTER,
                character=detection.character,
                modulus=detection.modulus,
            )
        )
    state.sweep_pending = True
    return None
