"""Independent replay of proof traces.

The checker rebuilds the root state, then walks the trace re-deriving every
deduction from the statuses that precede it. It shares the rule definitions
with the search but none of its control flow: the order of deductions, the
split terms and the dispatch points are all taken from the trace and checked,
never recomputed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from pydantic import ValidationError

from src.core.errors import InputError
from src.models.trace import ContradictionRecord, NodeKind, ProofTrace, TraceDeduction, TraceNode, TraceVerdict
from src.prover.rules import (
    ContradictionKind,
    ProverParams,
    Rule,
    Status,
    analyze_cover,
    antipode,
    completions,
    cover_rule,
)
from src.prover.state import dispatch_generators, dispatch_ready, dispatch_sequence, init_state, ConstraintState
from src.prover.terms import SymbolicTerm, parse_term
from src.services.modular_sets import verify_modular

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceCheck:
    valid: bool
    path: str | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid

    def describe(self) -> str:
        if self.valid:
            return "trace valid"
        return f"trace invalid at {self.path}: {self.reason}"


class _Reject(Exception):
    def __init__(self, path: str, reason: str) -> None:
        super().__init__(reason)
        self.path = path
        self.reason = reason


class _Replay:
    """Status bookkeeping for the replay; uses ConstraintState only as a container."""

    def __init__(self, state: ConstraintState) -> None:
        self.state = state

    @property
    def params(self) -> ProverParams:
        return self.state.params

    def lookup(self, t: SymbolicTerm) -> Status:
        return self.state.lookup(t)

    def set(self, t: SymbolicTerm, status: Status) -> None:
        self.state.status[t] = status
        if status is Status.IN:
            self.state.members.append(t)

    def copy(self) -> "_Replay":
        return _Replay(self.state.copy())


def _parse(text: str, path: str) -> SymbolicTerm:
    try:
        return parse_term(text)
    except InputError as exc:
        raise _Reject(path, str(exc)) from exc


def _unpack(d: TraceDeduction, replay: _Replay, path: str) -> tuple[SymbolicTerm, Status, Rule, list[SymbolicTerm]]:
    term = _parse(d.term, path)
    try:
        status = Status(d.status)
        rule = Rule(d.rule)
    except ValueError as exc:
        raise _Reject(path, f"unknown status or rule ({d.status}, {d.rule})") from exc
    if status is Status.UNKNOWN:
        raise _Reject(path, "a deduction must decide its term")
    if not term.representable(replay.params.bound):
        raise _Reject(path, f"{term} is outside the offset bound")
    premises = [_parse(p, path) for p in d.premises]
    return term, status, rule, premises


def _justify(term: SymbolicTerm, status: Status, rule: Rule, premises: list[SymbolicTerm], replay: _Replay, path: str) -> None:
    """Raise unless `rule` derives term=status from the replayed statuses."""
    lam, bound = replay.params.lam, replay.params.bound
    if rule is Rule.ANTIPODE:
        if status is not Status.OUT or len(premises) != 1:
            raise _Reject(path, "R1 derives one OUT term from one premise")
        (p,) = premises
        if replay.lookup(p) is not Status.IN or antipode(p) != term:
            raise _Reject(path, f"R1: {term} is not the antipode of an IN term {p}")
        return
    if rule is Rule.PROGRESSION:
        if status is not Status.OUT or len(premises) != 2:
            raise _Reject(path, "R2 derives one OUT term from two premises")
        u, v = premises
        if u == v or replay.lookup(u) is not Status.IN or replay.lookup(v) is not Status.IN:
            raise _Reject(path, f"R2: premises {u}, {v} are not two distinct IN terms")
        if term not in completions(u, v, bound):
            raise _Reject(path, f"R2: {term} does not complete a progression with {u}, {v}")
        return
    if rule in (Rule.MOD_COVER, Rule.STRICT_COVER):
        if status is not Status.IN or len(premises) != 1:
            raise _Reject(path, f"{rule.value} derives one IN term from its cover target")
        (target,) = premises
        if cover_rule(target, lam) is not rule:
            raise _Reject(path, f"{rule.value} does not govern residue {target}")
        analysis = analyze_cover(target, lam, bound, replay.lookup)
        if term == target:
            if replay.lookup(target) is not Status.UNKNOWN or analysis.viable:
                raise _Reject(path, f"{rule.value}: {target} could still be covered")
        elif replay.lookup(target) is not Status.OUT or term not in analysis.forced:
            raise _Reject(path, f"{rule.value}: {term} is not needed by every witness of {target}")
        return
    raise _Reject(path, f"rule {rule.value} cannot appear here")


def _apply_deductions(node: TraceNode, replay: _Replay, path: str) -> None:
    for i, d in enumerate(node.deductions):
        where = f"{path}.deductions[{i}]"
        term, status, rule, premises = _unpack(d, replay, where)
        if replay.lookup(term) is not Status.UNKNOWN:
            raise _Reject(where, f"{term} is already decided")
        _justify(term, status, rule, premises, replay, where)
        replay.set(term, status)


def _check_contradiction(record: ContradictionRecord | None, replay: _Replay, path: str) -> None:
    if record is None:
        raise _Reject(path, "contradiction leaf without a record")
    try:
        kind = ContradictionKind(record.kind)
    except ValueError as exc:
        raise _Reject(path, f"unknown contradiction kind {record.kind!r}") from exc
    params = replay.params
    if kind is ContradictionKind.UNCOVERABLE:
        if record.target is None:
            raise _Reject(path, "uncoverable residue without a target")
        target = _parse(record.target, path)
        if cover_rule(target, params.lam) is None or replay.lookup(target) is not Status.OUT:
            raise _Reject(path, f"{target} is not an OUT residue with a cover obligation")
        if analyze_cover(target, params.lam, params.bound, replay.lookup).viable:
            raise _Reject(path, f"{target} still has a viable witness")
        return
    if kind is ContradictionKind.CHARACTER:
        record_ = replay.state.dispatched
        detection = record_.detection if record_ is not None else None
        if detection is None or detection.character == params.lam or detection.character != record.character:
            raise _Reject(path, "character mismatch not backed by the dispatched sequence")
        if record.modulus != detection.modulus:
            raise _Reject(
                path, f"character {record.character} detected at modulus {detection.modulus}, not {record.modulus}"
            )
        return
    if record.deduction is None:
        raise _Reject(path, f"{kind.value} without the clashing deduction")
    term, status, rule, premises = _unpack(record.deduction, replay, path)
    if replay.lookup(term) is not status.flipped():
        raise _Reject(path, f"{term} is not decided {status.flipped().value}")
    if rule is Rule.DISPATCH:
        dispatched = replay.state.dispatched
        if kind is not ContradictionKind.CLASH or dispatched is None or not term.is_small:
            raise _Reject(path, "dispatch clash without a dispatched sequence")
        if (term.b in dispatched.members) != (status is Status.IN):
            raise _Reject(path, f"{term} membership in the dispatched sequence is not {status.value}")
        return
    if kind is not ContradictionKind.MOD_AP or rule not in (Rule.ANTIPODE, Rule.PROGRESSION):
        raise _Reject(path, f"{kind.value} cannot come from rule {rule.value}")
    _justify(term, status, rule, premises, replay, path)


def _check_dispatch(node: TraceNode, replay: _Replay, trace: ProofTrace, path: str) -> None:
    state = replay.state
    if state.dispatched is not None:
        raise _Reject(path, "second dispatch on one branch")
    a = dispatch_ready(state)
    if a is None:
        raise _Reject(path, "dispatch before the small prefix is decided")
    gens = dispatch_generators(state, a)
    if node.generators != list(gens):
        raise _Reject(path, f"generators {node.generators} differ from the decided prefix {list(gens)}")
    record = dispatch_sequence(gens, trace.dispatch_terms, trace.dispatch_l_max)
    state.dispatched = record
    detection = record.detection
    if (node.character, node.modulus) != (
        detection.character if detection else None,
        detection.modulus if detection else None,
    ):
        raise _Reject(path, "recorded character does not match the dispatched sequence")
    for i, d in enumerate(node.deductions):
        where = f"{path}.deductions[{i}]"
        term, status, rule, _ = _unpack(d, replay, where)
        if rule is not Rule.DISPATCH or not term.is_small:
            raise _Reject(where, "dispatch nodes only commit small terms by rule T")
        if replay.lookup(term) is not Status.UNKNOWN:
            raise _Reject(where, f"{term} is already decided")
        if (term.b in record.members) != (status is Status.IN):
            raise _Reject(where, f"{term} membership in the dispatched sequence is not {status.value}")
        replay.set(term, status)


def _walk(trace: ProofTrace, root_replay: _Replay) -> None:
    nodes = trace.nodes
    seen: set[int] = {0}
    impossible = trace.verdict is TraceVerdict.IMPOSSIBLE
    kinds_seen: set[NodeKind] = set()
    if len(nodes[0].children) != 1:
        raise _Reject("nodes[0]", "the root has exactly one child")
    stack: list[tuple[int, _Replay, str]] = [(c, root_replay, f"nodes[{c}]") for c in nodes[0].children]

    while stack:
        idx, replay, path = stack.pop()
        if not 0 <= idx < len(nodes) or idx in seen:
            raise _Reject(path, f"child index {idx} is out of range or shared")
        seen.add(idx)
        node = nodes[idx]
        kinds_seen.add(node.kind)
        leaf = node.kind in (NodeKind.CONTRADICTION, NodeKind.CANDIDATE, NodeKind.OPEN)
        if leaf and node.children:
            raise _Reject(path, f"{node.kind.value} node with children")

        if node.kind is NodeKind.DEDUCE:
            _apply_deductions(node, replay, path)
        elif node.kind is NodeKind.DISPATCH:
            _check_dispatch(node, replay, trace, path)
        elif node.kind is NodeKind.SPLIT:
            if node.term is None:
                raise _Reject(path, "split without a term")
            term = _parse(node.term, path)
            if not term.representable(replay.params.bound) or replay.lookup(term) is not Status.UNKNOWN:
                raise _Reject(path, f"split term {term} is not an UNKNOWN representable term")
            if node.branches != ["IN", "OUT"] or len(node.children) != 2:
                raise _Reject(path, "a split has exactly an IN and an OUT branch")
            for status, child in reversed(list(zip((Status.IN, Status.OUT), node.children))):
                branch = replay.copy()
                branch.set(term, status)
                stack.append((child, branch, f"{path}/{status.value}:nodes[{child}]"))
            continue
        elif node.kind is NodeKind.CONTRADICTION:
            _check_contradiction(node.contradiction, replay, path)
            continue
        elif node.kind is NodeKind.CANDIDATE:
            if impossible:
                raise _Reject(path, "candidate leaf in an impossibility trace")
            cand = node.candidate
            if cand is not None and cand.confirmed:
                if cand.elements is None or cand.modulus is None or cand.n_value is None:
                    raise _Reject(path, "confirmed candidate without a concrete set")
                verdict = verify_modular(cand.elements, cand.modulus)
                if cand.modulus != 2 * cand.n_value or not verdict.valid or verdict.lambda_ != trace.lambda_:
                    raise _Reject(path, f"candidate does not verify ({verdict.describe()})")
            continue
        elif node.kind is NodeKind.OPEN:
            if impossible:
                raise _Reject(path, "open branch in an impossibility trace")
            continue
        else:
            raise _Reject(path, f"unexpected {node.kind.value} node")

        if len(node.children) != 1:
            raise _Reject(path, f"{node.kind.value} node has exactly one child")
        child = node.children[0]
        stack.append((child, replay, f"{path}/nodes[{child}]"))

    if len(seen) != len(nodes):
        raise _Reject("nodes", f"{len(nodes) - len(seen)} node(s) unreachable from the root")
    if trace.verdict is TraceVerdict.CANDIDATE and NodeKind.CANDIDATE not in kinds_seen:
        raise _Reject("verdict", "candidate verdict without a candidate leaf")


def check_trace(trace: ProofTrace | str, lam: int) -> TraceCheck:
    """Replay a proof trace for character λ.

    Returns:
        TraceCheck, truthy when every step re-derives; otherwise it names the
        first offending node.
    """
    if isinstance(trace, str):
        try:
            trace = ProofTrace.from_json(trace)
        except ValidationError as exc:
            return TraceCheck(False, "trace", f"not a proof trace ({exc.error_count()} validation errors)")
    if trace.lambda_ != lam:
        return TraceCheck(False, "lambda", f"trace is for lambda={trace.lambda_}, not {lam}")
    try:
        root_state = init_state(lam, trace.bound)
    except InputError as exc:
        return TraceCheck(False, "lambda", str(exc))
    if not trace.nodes:
        return TraceCheck(False, "nodes", "empty trace")
    root = trace.nodes[0]
    expected = [
        TraceDeduction(term=str(d.term), status=d.status.value, rule=d.rule.value, premises=[str(p) for p in d.premises])
        for d in root_state.journal
    ]
    if root.kind is not NodeKind.INIT or root.deductions != expected:
        return TraceCheck(False, "nodes[0]", "root does not match the initial state")
    # replay starts from the init statuses without any pending events
    replay = _Replay(root_state)
    root_state.contradiction = None
    root_state.events.clear()
    try:
        _walk(trace, replay)
    except _Reject as exc:
        logger.debug(f"trace rejected at {exc.path}: {exc.reason}")
        return TraceCheck(False, exc.path, exc.reason)
    return TraceCheck(True)
