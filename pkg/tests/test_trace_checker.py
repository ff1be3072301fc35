"""Trace checker tests: valid traces pass, single-node mutations are rejected."""

from __future__ import annotations

import random
from functools import lru_cache

import pytest

from src.models.trace import ContradictionRecord, NodeKind, ProofTrace, TraceVerdict
from src.prover.checker import _check_contradiction, _Reject, _Replay, check_trace
from src.prover.rules import ContradictionKind, Status
from src.prover.search import contradiction_record, prove_character_impossible
from src.prover.state import ConstraintState, dispatch_concrete, init_state
from src.prover.terms import SymbolicTerm
from src.services.modular_sets import FORBIDDEN_CHARACTERS


@lru_cache(maxsize=None)
def _impossibility_trace(lam: int) -> ProofTrace:
    result = prove_character_impossible(lam)
    assert result.verdict is TraceVerdict.IMPOSSIBLE
    assert result.trace is not None
    return result.trace


def _flip_status(trace: ProofTrace, rng: random.Random) -> bool:
    spots = [(i, j) for i, n in enumerate(trace.nodes) for j in range(len(n.deductions))]
    if not spots:
        return False
    i, j = rng.choice(spots)
    d = trace.nodes[i].deductions[j]
    d.status = "OUT" if d.status == "IN" else "IN"
    return True


def _delete_split_child(trace: ProofTrace, rng: random.Random) -> bool:
    splits = [n for n in trace.nodes if n.kind is NodeKind.SPLIT]
    if not splits:
        return False
    node = rng.choice(splits)
    node.children.pop(rng.randrange(len(node.children)))
    return True


def _swap_branches(trace: ProofTrace, rng: random.Random) -> bool:
    splits = [n for n in trace.nodes if n.kind is NodeKind.SPLIT]
    if not splits:
        return False
    node = rng.choice(splits)
    node.branches = list(reversed(node.branches))
    return True


def _relabel_leaf(trace: ProofTrace, rng: random.Random) -> bool:
    leaves = [trace.nodes[i] for i in trace.leaves()]
    node = rng.choice(leaves)
    node.kind = rng.choice([NodeKind.CANDIDATE, NodeKind.OPEN])
    return True


MUTATIONS = (_flip_status, _delete_split_child, _swap_branches, _relabel_leaf)


def _mutants(trace: ProofTrace, count: int, seed: int) -> list[ProofTrace]:
    rng = random.Random(seed)
    out: list[ProofTrace] = []
    while len(out) < count:
        mutant = trace.model_copy(deep=True)
        if rng.choice(MUTATIONS)(mutant, rng):
            out.append(mutant)
    return out


def test_valid_trace_passes() -> None:
    """The prover's own trace replays."""
    check = check_trace(_impossibility_trace(5), 5)
    assert check
    assert check.describe() == "trace valid"


def test_trace_for_other_lambda_is_rejected() -> None:
    """A trace only proves the character it was built for."""
    check = check_trace(_impossibility_trace(5), 3)
    assert not check
    assert check.path == "lambda"


def test_garbage_json_is_rejected() -> None:
    """Malformed JSON is reported, not raised."""
    assert not check_trace('{"lambda": 5}', 5)


def test_flipped_deduction_names_its_node() -> None:
    """The report points at the first offending deduction."""
    trace = _impossibility_trace(5).model_copy(deep=True)
    idx = next(i for i, n in enumerate(trace.nodes) if n.kind is NodeKind.DEDUCE and n.deductions)
    d = trace.nodes[idx].deductions[0]
    d.status = "OUT" if d.status == "IN" else "IN"
    check = check_trace(trace, 5)
    assert not check
    assert check.path is not None and f"nodes[{idx}].deductions[0]" in check.path


def test_unreachable_node_is_rejected() -> None:
    """Every node must hang off the root."""
    trace = _impossibility_trace(5).model_copy(deep=True)
    trace.nodes.append(trace.nodes[-1].model_copy())
    assert not check_trace(trace, 5)


@pytest.mark.parametrize("lam", [1, 3, 5])
def test_random_mutations_are_rejected(lam: int) -> None:
    """100 single-node mutations of a small impossibility trace all fail."""
    trace = _impossibility_trace(lam)
    for mutant in _mutants(trace, 100, seed=lam):
        assert not check_trace(mutant, lam)


@pytest.mark.slow
@pytest.mark.parametrize("lam", FORBIDDEN_CHARACTERS)
def test_random_mutations_of_every_forbidden_trace(lam: int) -> None:
    """Mutation robustness for each of the six impossibility traces."""
    trace = _impossibility_trace(lam)
    for mutant in _mutants(trace, 100, seed=1000 + lam):
        assert not check_trace(mutant, lam)


def test_clash_kind_must_match_its_rule() -> None:
    """An R1/R2 clash relabelled as a dispatch clash is rejected."""
    state = init_state(1)
    assert state.contradiction is not None
    record = contradiction_record(state.contradiction)
    assert record.kind == ContradictionKind.MOD_AP.value
    _check_contradiction(record, _Replay(state), "leaf")
    relabelled = record.model_copy(update={"kind": ContradictionKind.CLASH.value})
    with pytest.raises(_Reject, match="cannot come from rule"):
        _check_contradiction(relabelled, _Replay(state), "leaf")


def test_relabelled_clash_fails_the_whole_trace() -> None:
    """The same relabelling inside a serialized trace makes it invalid."""
    trace = _impossibility_trace(1).model_copy(deep=True)
    leaf = trace.nodes[trace.nodes[0].children[0]]
    assert leaf.contradiction is not None
    leaf.contradiction.kind = ContradictionKind.CLASH.value
    assert not check_trace(trace, 1)


def _character_eight_branch() -> tuple[ConstraintState, ContradictionRecord]:
    state = init_state(5)
    state.decide(SymbolicTerm(1, 1), Status.IN)
    for c in range(1, 6):
        state.decide(SymbolicTerm(0, c), Status.IN if c in (3, 5) else Status.OUT)
    contradiction = dispatch_concrete(state)
    assert contradiction is not None
    assert contradiction.kind is ContradictionKind.CHARACTER
    return state, contradiction_record(contradiction)


def test_character_contradiction_replays() -> None:
    """A character leaf matching the dispatched detection is accepted."""
    state, record = _character_eight_branch()
    assert (record.character, record.modulus) == (8, 9)
    _check_contradiction(record, _Replay(state), "leaf")


@pytest.mark.parametrize("update", [{"modulus": 27}, {"modulus": None}, {"character": 20}])
def test_character_contradiction_must_match_detection(update: dict[str, object]) -> None:
    """Character and modulus must both agree with the regenerated detection."""
    state, record = _character_eight_branch()
    with pytest.raises(_Reject):
        _check_contradiction(record.model_copy(update=update), _Replay(state), "leaf")
