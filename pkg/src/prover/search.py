"""Depth-first case split over symbolic modular sets of a fixed character.

Each branch propagates to a fixpoint, commits to the concrete greedy sequence
as soon as the small range allows it, and otherwise splits on one UNKNOWN term
(IN branch first). The search records every step as a proof trace; a verdict of
"impossible" means every leaf of the trace is a contradiction.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from src.core.config import settings
from src.core.errors import InputError
from src.models.modular_set import ModularSet
from src.models.trace import (
    CandidateRecord,
    ContradictionRecord,
    NodeKind,
    ProofTrace,
    TraceDeduction,
    TraceNode,
    TraceVerdict,
)
from src.prover.concretize import concretize
from src.prover.rules import Status
from src.prover.small_moduli import SmallModulusCheck, check_small_moduli
from src.prover.state import (
    ConstraintState,
    Contradiction,
    Deduction,
    dispatch_concrete,
    dispatch_ready,
    init_state,
    propagate,
)
from src.prover.terms import SymbolicTerm
from src.services.result_cache import ResultCache

logger = logging.getLogger(__name__)


@dataclass
class ProverLimits:
    bound: int | None = None
    max_depth: int = field(default_factory=lambda: settings.PROVER_MAX_DEPTH)
    max_nodes: int = field(default_factory=lambda: settings.PROVER_MAX_NODES)
    max_seconds: float = field(default_factory=lambda: settings.PROVER_MAX_SECONDS)
    dispatch_terms: int = field(default_factory=lambda: settings.DISPATCH_PREFIX_TERMS)
    dispatch_l_max: int = field(default_factory=lambda: settings.DISPATCH_L_MAX)
    concretize_window: int = field(default_factory=lambda: settings.CONCRETIZE_WINDOW)
    small_modulus_max: int | None = None


@dataclass
class ProverResult:
    lam: int
    verdict: TraceVerdict
    trace: ProofTrace | None
    candidate: ModularSet | None = None
    n_value: int | None = None
    nodes: int = 0
    elapsed: float = 0.0
    reason: str = ""
    small_moduli: SmallModulusCheck | None = None

    @property
    def exit_code(self) -> int:
        return {TraceVerdict.IMPOSSIBLE: 0, TraceVerdict.CANDIDATE: 1, TraceVerdict.INCONCLUSIVE: 2}[self.verdict]

    def describe(self) -> str:
        text = f"lambda={self.lam}: {self.verdict.value}"
        if self.candidate is not None:
            text += f" (modular set with modulus {self.candidate.modulus}, N={self.n_value})"
        if self.reason:
            text += f"; {self.reason}"
        if self.small_moduli is not None and self.small_moduli.witness is None:
            text += f"; {self.small_moduli.describe()}"
        return text


class _BudgetExhausted(Exception):
    pass


def trace_deduction(d: Deduction) -> TraceDeduction:
    return TraceDeduction(
        term=str(d.term),
        status=d.status.value,
        rule=d.rule.value,
        premises=[str(p) for p in d.premises],
    )


def contradiction_record(c: Contradiction) -> ContradictionRecord:
    return ContradictionRecord(
        kind=c.kind.value,
        deduction=trace_deduction(c.deduction) if c.deduction is not None else None,
        target=str(c.target) if c.target is not None else None,
        character=c.character,
        modulus=c.modulus,
    )


def choose_split(state: ConstraintState) -> SymbolicTerm | None:
    """Next UNKNOWN term to split on, or None when every representable term is decided.

    Order: wrap offsets N+e below max(A) from the top down, then the smallest
    small term, then N-b once the small range is committed, then the rest.
    """
    status = state.status
    for e in range(state.params.half - 1, 0, -1):
        t = SymbolicTerm(1, e)
        if t not in status:
            return t
    small_open = [SymbolicTerm(0, c) for c in range(state.bound + 1) if SymbolicTerm(0, c) not in status]
    if small_open:
        return small_open[0]
    for b in range(-1, -state.bound - 1, -1):
        t = SymbolicTerm(1, b)
        if t not in status:
            return t
    rest = state.undecided()
    return rest[0] if rest else None


class _Search:
    def __init__(self, lam: int, limits: ProverLimits) -> None:
        self.lam = lam
        self.limits = limits
        self.nodes: list[TraceNode] = []
        self.started = time.monotonic()
        self.found: ModularSet | None = None
        self.n_value: int | None = None
        self.unconfirmed = 0
        self.depth_limited = 0

    def _add(self, node: TraceNode) -> int:
        if len(self.nodes) >= self.limits.max_nodes:
            raise _BudgetExhausted(f"node budget of {self.limits.max_nodes} exhausted")
        if time.monotonic() - self.started > self.limits.max_seconds:
            raise _BudgetExhausted(f"time budget of {self.limits.max_seconds}s exhausted")
        self.nodes.append(node)
        return len(self.nodes) - 1

    def _leaf(self, contradiction: Contradiction) -> int:
        return self._add(TraceNode(kind=NodeKind.CONTRADICTION, contradiction=contradiction_record(contradiction)))

    def run(self, state: ConstraintState) -> None:
        root = self._add(
            TraceNode(kind=NodeKind.INIT, deductions=[trace_deduction(d) for d in state.journal])
        )
        if state.contradiction is not None:
            self.nodes[root].children.append(self._leaf(state.contradiction))
            return
        self.nodes[root].children.append(self._explore(state, 0))

    def _explore(self, state: ConstraintState, depth: int) -> int:
        start = len(state.journal)
        node = self._add(TraceNode(kind=NodeKind.DEDUCE))
        contradiction = propagate(state)
        self.nodes[node].deductions = [trace_deduction(d) for d in state.journal[start:]]
        if contradiction is not None:
            child = self._leaf(contradiction)
        else:
            child = self._advance(state, depth)
        self.nodes[node].children.append(child)
        return node

    def _advance(self, state: ConstraintState, depth: int) -> int:
        if dispatch_ready(state) is not None:
            return self._dispatch(state, depth)
        term = choose_split(state)
        if term is None:
            return self._candidate(state, final=True)
        if depth >= self.limits.max_depth:
            self.depth_limited += 1
            return self._add(TraceNode(kind=NodeKind.OPEN, reason=f"depth limit {self.limits.max_depth}"))
        split = self._add(TraceNode(kind=NodeKind.SPLIT, term=str(term), branches=["IN", "OUT"]))
        for status in (Status.IN, Status.OUT):
            if self.found is not None:
                child = self._add(TraceNode(kind=NodeKind.OPEN, reason="not explored after a candidate"))
            else:
                branch = state.copy()
                branch.decide(term, status)
                child = self._explore(branch, depth + 1)
            self.nodes[split].children.append(child)
        return split

    def _dispatch(self, state: ConstraintState, depth: int) -> int:
        start = len(state.journal)
        node = self._add(TraceNode(kind=NodeKind.DISPATCH))
        contradiction = dispatch_concrete(state, self.limits.dispatch_terms, self.limits.dispatch_l_max)
        record = state.dispatched
        assert record is not None
        dnode = self.nodes[node]
        dnode.generators = list(record.generators)
        dnode.deductions = [trace_deduction(d) for d in state.journal[start:]]
        if record.detection is not None:
            dnode.character = record.detection.character
            dnode.modulus = record.detection.modulus
        if contradiction is not None:
            dnode.children.append(self._leaf(contradiction))
            return node
        if record.detection is not None:
            # character already matches; try to finish the branch right away
            leaf = self._candidate(state, final=False)
            if leaf is not None:
                dnode.children.append(leaf)
                return node
        dnode.children.append(self._explore(state, depth))
        return node

    def _candidate(self, state: ConstraintState, final: bool) -> int | None:
        result = concretize(state, window=self.limits.concretize_window, chain_only=not final)
        if result.modular_set is not None:
            ms = result.modular_set
            self.found = ms
            self.n_value = result.n_value
            record = CandidateRecord(
                confirmed=True,
                n_value=result.n_value,
                modulus=ms.modulus,
                elements=list(ms.elements),
                lambda_=ms.lambda_,
            )
            return self._add(TraceNode(kind=NodeKind.CANDIDATE, candidate=record))
        if not final:
            return None
        self.unconfirmed += 1
        logger.warning(f"lambda={self.lam}: symbolic branch survived but did not concretize ({result.reason})")
        return self._add(
            TraceNode(kind=NodeKind.CANDIDATE, candidate=CandidateRecord(confirmed=False), reason=result.reason)
        )

    def verdict(self) -> tuple[TraceVerdict, str]:
        if self.found is not None:
            return TraceVerdict.CANDIDATE, ""
        if self.unconfirmed:
            return TraceVerdict.CANDIDATE, f"{self.unconfirmed} surviving branch(es) without a concrete N"
        if self.depth_limited:
            return TraceVerdict.INCONCLUSIVE, f"{self.depth_limited} branch(es) hit the depth limit"
        return TraceVerdict.IMPOSSIBLE, ""


def prove_character_impossible(
    lam: int,
    limits: ProverLimits | None = None,
    cache: ResultCache | None = None,
    workers: int | None = None,
) -> ProverResult:
    """Decide whether any modular set with an even modulus has character λ.

    Args:
        lam: Odd positive character.
        limits: Bound and budgets; defaults come from settings.
        cache: Enumeration cache for the even moduli below 2·N_min, when
            limits.small_modulus_max asks for them.
        workers: Processes for that enumeration.

    Returns:
        The verdict with its proof trace (None when a budget ran out).

    Raises:
        InputError: λ even or below 1.
    """
    limits = limits or ProverLimits()
    if lam < 1 or lam % 2 == 0:
        raise InputError(f"character must be an odd positive integer, got {lam}")
    state = init_state(lam, limits.bound)
    search = _Search(lam, limits)
    logger.info(f"lambda={lam}: searching with offset bound {state.bound}, N_min={state.params.n_min}")
    try:
        search.run(state)
    except _BudgetExhausted as exc:
        elapsed = time.monotonic() - search.started
        logger.warning(f"lambda={lam}: {exc}")
        return ProverResult(
            lam=lam,
            verdict=TraceVerdict.INCONCLUSIVE,
            trace=None,
            nodes=len(search.nodes),
            elapsed=elapsed,
            reason=str(exc),
        )
    verdict, reason = search.verdict()
    elapsed = time.monotonic() - search.started
    trace = ProofTrace(
        lambda_=lam,
        bound=state.bound,
        dispatch_terms=limits.dispatch_terms,
        dispatch_l_max=limits.dispatch_l_max,
        verdict=verdict,
        nodes=search.nodes,
        stats={
            "nodes": len(search.nodes),
            "splits": sum(1 for n in search.nodes if n.kind is NodeKind.SPLIT),
        },
    )
    logger.info(f"lambda={lam}: {verdict.value} after {len(search.nodes)} trace nodes in {elapsed:.2f}s")
    result = ProverResult(
        lam=lam,
        verdict=verdict,
        trace=trace,
        candidate=search.found,
        n_value=search.n_value,
        nodes=len(search.nodes),
        elapsed=elapsed,
        reason=reason,
    )
    if verdict is TraceVerdict.IMPOSSIBLE and limits.small_modulus_max is not None:
        check = check_small_moduli(
            lam, state.params.n_min, limits.small_modulus_max, cache=cache, workers=workers
        )
        result.small_moduli = check
        if check.witness is not None:
            result.verdict = TraceVerdict.CANDIDATE
            result.candidate = check.witness
            result.n_value = check.witness.modulus // 2
            result.reason = f"modulus {check.witness.modulus} below 2·N_min={check.below} has character {lam}"
    return result
