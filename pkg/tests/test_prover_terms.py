"""Unit tests for symbolic residues and the deduction rules."""

from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import InputError
from src.prover.rules import (
    ProverParams,
    Rule,
    Status,
    analyze_cover,
    antipode,
    completions,
    cover_rule,
    witnesses,
)
from src.prover.terms import SymbolicTerm, ap_target, canon, parse_term

BOUND = 20

terms = st.builds(SymbolicTerm, st.integers(min_value=0, max_value=1), st.integers(min_value=-BOUND, max_value=BOUND))


@pytest.mark.parametrize(
    "text,term",
    [("7", SymbolicTerm(0, 7)), ("N", SymbolicTerm(1, 0)), ("N+3", SymbolicTerm(1, 3)),
     ("N-2", SymbolicTerm(1, -2)), ("2N-4", SymbolicTerm(0, -4))],
)
def test_parse_and_format_agree(text: str, term: SymbolicTerm) -> None:
    """Terms print in the syntax parse_term reads."""
    assert parse_term(text) == term
    assert str(term) == text


@pytest.mark.parametrize("text", ["2N+1", "x", "N*2", "2N", "-3", "2N-0"])
def test_parse_rejects_unknown_syntax(text: str) -> None:
    """Anything outside the term grammar is an input error."""
    with pytest.raises(InputError):
        parse_term(text)


def test_residue_order() -> None:
    """Small < N-range < top, ties broken by offset."""
    shuffled = [SymbolicTerm(0, -1), SymbolicTerm(1, 3), SymbolicTerm(0, 5), SymbolicTerm(1, -2), SymbolicTerm(0, -7)]
    assert sorted(shuffled) == [
        SymbolicTerm(0, 5),
        SymbolicTerm(1, -2),
        SymbolicTerm(1, 3),
        SymbolicTerm(0, -7),
        SymbolicTerm(0, -1),
    ]


def test_canon_overflows_past_bound() -> None:
    """Offsets beyond the bound have no canonical term."""
    assert canon(1, BOUND + 1, BOUND) is None
    assert canon(3, -2, BOUND) == SymbolicTerm(1, -2)


@settings(max_examples=200, deadline=None)
@given(terms, terms, st.integers(min_value=2 * BOUND + 4, max_value=10_000))
def test_evaluation_is_a_homomorphism(x: SymbolicTerm, y: SymbolicTerm, n: int) -> None:
    """Symbolic 2y - x evaluates to (2y - x) mod 2N, and order matches residue order."""
    assert ap_target(x, y).evaluate(n) == (2 * y.evaluate(n) - x.evaluate(n)) % (2 * n)
    assert (x < y) == (x.evaluate(n) < y.evaluate(n))


@settings(max_examples=100, deadline=None)
@given(terms, terms, st.integers(min_value=2 * BOUND + 4, max_value=10_000))
def test_completions_form_progressions(u: SymbolicTerm, v: SymbolicTerm, n: int) -> None:
    """Each completion z makes {u, v, z} a progression modulo 2N."""
    if u == v:
        return
    m = 2 * n
    a, b = u.evaluate(n), v.evaluate(n)
    for z in completions(u, v, BOUND):
        assert z.representable(BOUND)
        c = z.evaluate(n)
        assert (2 * b - a) % m == c or (2 * a - b) % m == c or (2 * c - a) % m == b


def test_completions_drop_overflowing_offsets() -> None:
    """Completions past the bound overflow and are left out; the rest stay canonical."""
    u, v = SymbolicTerm(0, 0), SymbolicTerm(0, 10)
    assert completions(u, v, 12) == [SymbolicTerm(0, -10), SymbolicTerm(0, 5), SymbolicTerm(1, 5)]
    assert SymbolicTerm(0, 20) in completions(u, v, 20)
    assert completions(SymbolicTerm(0, 3), SymbolicTerm(1, 2), 12)[0] == SymbolicTerm(0, 1)


def test_antipode_adds_n() -> None:
    """x and x + N are antipodes."""
    assert antipode(SymbolicTerm(0, 3)) == SymbolicTerm(1, 3)
    assert antipode(SymbolicTerm(1, -2)) == SymbolicTerm(0, -2)


def test_cover_rule_scoping() -> None:
    """Residues below λ need a mod-cover; others need an integer cover."""
    assert cover_rule(SymbolicTerm(0, 3), 5) is Rule.MOD_COVER
    assert cover_rule(SymbolicTerm(0, 5), 5) is Rule.STRICT_COVER
    assert cover_rule(SymbolicTerm(0, -1), 5) is Rule.STRICT_COVER
    assert cover_rule(SymbolicTerm(1, 1), 5) is None
    assert cover_rule(SymbolicTerm(0, 0), 5) is None


def test_witnesses_for_small_residue() -> None:
    """Residue 3 with λ=5 is covered by (1, 2) or (1, N+2)."""
    assert witnesses(SymbolicTerm(0, 3), 5) == (
        (SymbolicTerm(0, 1), SymbolicTerm(0, 2)),
        (SymbolicTerm(0, 1), SymbolicTerm(1, 2)),
    )


def test_analyze_cover_forces_common_component() -> None:
    """With 2 OUT, residue 3 can only be covered through 1."""
    params = ProverParams(lam=5, bound=20)
    decided = {SymbolicTerm(0, 2): Status.OUT, SymbolicTerm(1, 2): Status.IN}

    def lookup(t: SymbolicTerm) -> Status:
        return decided.get(t, Status.UNKNOWN)

    analysis = analyze_cover(SymbolicTerm(0, 3), params.lam, params.bound, lookup)
    assert analysis.viable == [(SymbolicTerm(0, 1), SymbolicTerm(1, 2))]
    assert analysis.forced == [SymbolicTerm(0, 1)]
