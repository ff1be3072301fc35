"""Unit tests for greedy Stanley sequence generation."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from src.core.errors import InputError
from src.models.sequence import SequenceRecord
from src.services.sequences import (
    covered,
    find_progression,
    generate,
    growth_diagnostics,
    is_three_free,
    naive_generate,
    omitted_set,
    power_of_two_indices,
    validate_generators,
)


GOLDEN_PREFIXES = [
    ((0, 1, 5), [0, 1, 5, 6, 8, 13]),
    ((0, 2, 5, 7, 11), [0, 2, 5, 7, 11, 13, 16, 18, 28]),
    ((0, 2, 3, 7, 9), [0, 2, 3, 7, 9, 10, 19]),
    ((0, 3, 5, 8, 15), [0, 3, 5, 8, 15, 17, 18, 20]),
]


@pytest.mark.parametrize("generators,expected", GOLDEN_PREFIXES)
def test_generate_reproduces_golden_prefixes(generators: tuple[int, ...], expected: list[int]) -> None:
    """Published prefixes are reproduced exactly."""
    assert generate(generators, len(expected)).terms == expected


def test_generate_from_zero_is_ternary_without_twos() -> None:
    """S(0) lists the integers whose base-3 digits are 0 or 1."""
    assert generate([0], 9).terms == [0, 1, 3, 4, 9, 10, 12, 13, 27]


def test_generate_accepts_unsorted_generators() -> None:
    """Generators are canonicalized before generation."""
    assert generate([5, 0, 1], 6).terms == [0, 1, 5, 6, 8, 13]


def test_generate_stops_at_value_limit() -> None:
    """The value limit stops generation before the count limit."""
    assert generate([0], 100, value_limit=10).terms == [0, 1, 3, 4, 9, 10]


def test_generate_grows_past_initial_buffers() -> None:
    """Long prefixes stay increasing and 3-free at the tail."""
    prefix = generate([0], 4096)
    terms = prefix.terms
    assert len(terms) == 4096
    assert terms == sorted(set(terms))
    assert terms[-1] == int("1" * 12, 3)
    assert is_three_free(terms[-40:])


def test_validate_generators_names_the_progression() -> None:
    """A generator set with a 3-term AP is rejected with the triple in the message."""
    with pytest.raises(InputError, match="0, 1, 2"):
        validate_generators([0, 1, 2])


@pytest.mark.parametrize("bad", [[0, 1, 1], [1, 2], [-1, 0], []])
def test_validate_generators_rejects_malformed_sets(bad: list[int]) -> None:
    """Duplicates, a missing 0, negatives and empty sets are input errors."""
    with pytest.raises(InputError):
        validate_generators(bad)


def test_count_limit_below_generator_count_is_rejected() -> None:
    """A prefix can't be shorter than its generator set."""
    with pytest.raises(InputError):
        generate([0, 1, 5], 2)


def test_find_progression_returns_smallest_triple() -> None:
    """The witness is the lexicographically smallest progression."""
    assert find_progression([0, 4, 2, 6]) == (0, 2, 4)
    assert find_progression([0, 1, 3]) is None


@st.composite
def three_free_generators(draw: st.DrawFn) -> list[int]:
    extra = draw(st.sets(st.integers(min_value=1, max_value=30), max_size=5))
    gens = [0, *sorted(extra)]
    assume(is_three_free(gens))
    return gens


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(three_free_generators())
def test_sieve_matches_rescan_oracle(generators: list[int]) -> None:
    """The cover sieve agrees with re-scanning every candidate."""
    count = len(generators) + 60
    assert generate(generators, count).terms == naive_generate(generators, count)


def test_covered_returns_smallest_witness() -> None:
    """covered() reports the first pair x < y with 2y - x = z."""
    prefix = generate([0], 8)
    assert covered(prefix, 2) == (0, 1)
    assert covered(prefix, 5) == (1, 3)
    assert covered(prefix, 4) is None


def test_covered_rejects_values_past_horizon() -> None:
    """Cover status beyond the last term is not final."""
    prefix = generate([0], 8)
    with pytest.raises(InputError):
        covered(prefix, prefix.last + 1)


def test_omitted_set_of_zero_is_empty() -> None:
    """Every non-member of S(0) is covered."""
    summary = omitted_set([0], 200)
    assert summary.omitted == []
    assert summary.omega is None


def test_omitted_set_stays_below_largest_generator() -> None:
    """Greedy rejections are covered, so omissions sit below max(A)."""
    assert omitted_set([0, 2], 100).omitted == [1]
    summary = omitted_set([0, 3, 5], 100)
    assert summary.omitted == [1, 2, 4]
    assert summary.omega == 4


def test_growth_ratios_are_exact_for_zero() -> None:
    """a_n = 3^{log2 n} for S(0) at powers of two, so the Type I ratio is 1."""
    prefix = generate([0], 64)
    diag = growth_diagnostics(prefix, power_of_two_indices(len(prefix)))
    assert [s.n for s in diag.samples] == [2, 4, 8, 16, 32]
    assert all(s.ratio_type1 == pytest.approx(1.0) for s in diag.samples)


def test_growth_rejects_indices_outside_prefix() -> None:
    """Sample indices must lie inside the prefix."""
    prefix = generate([0], 16)
    with pytest.raises(InputError):
        growth_diagnostics(prefix, [32])


def test_sequence_record_json_roundtrip() -> None:
    """SequenceRecord survives JSON serialization."""
    record = generate([0, 1, 5], 6).to_record()
    assert SequenceRecord.model_validate_json(record.model_dump_json()) == record


@pytest.mark.parametrize("generators", [(0,), (0, 1, 5), (0, 3, 5), (0, 2, 5, 7, 11)])
def test_shorter_prefix_is_a_prefix_of_longer(generators: tuple[int, ...]) -> None:
    """Asking for more terms never changes the earlier ones."""
    long = generate(generators, 300).terms
    for count in (len(generators), 17, 64, 299):
        assert generate(generators, count).terms == long[:count]


@pytest.mark.parametrize("generators", [(0,), (0, 1, 5), (0, 3, 5), (0, 2, 3, 7, 9)])
def test_every_skipped_value_is_covered(generators: tuple[int, ...]) -> None:
    """Above max(A), each value left out of the sequence completes a progression."""
    prefix = generate(generators, 200)
    members = set(prefix.terms)
    for m in range(generators[-1] + 1, prefix.last):
        if m not in members:
            assert covered(prefix, m) is not None, m


@pytest.mark.parametrize("generators", [(0,), (0, 1, 5), (0, 3, 5)])
def test_cover_status_is_final(generators: tuple[int, ...]) -> None:
    """Extending the prefix never changes the cover status of a value it already reached."""
    short = generate(generators, 40)
    long = generate(generators, 400)
    for z in range(short.last + 1):
        assert covered(short, z) == covered(long, z), z


def _three_free_sets_within(bound: int) -> list[tuple[int, ...]]:
    sets: list[tuple[int, ...]] = []
    for mask in range(2**bound):
        gens = (0, *(v for v in range(1, bound + 1) if mask >> (v - 1) & 1))
        if is_three_free(gens):
            sets.append(gens)
    return sets


def test_sieve_matches_rescan_oracle_exhaustively_small() -> None:
    """Every 3-free generator set within [0, 6] agrees with the oracle on 100 terms."""
    for gens in _three_free_sets_within(6):
        assert generate(gens, 100).terms == naive_generate(gens, 100), gens


@pytest.mark.slow
def test_sieve_matches_rescan_oracle_exhaustively() -> None:
    """Every 3-free generator set within [0, 12] agrees with the oracle on 200 terms."""
    for gens in _three_free_sets_within(12):
        assert generate(gens, 200).terms == naive_generate(gens, 200), gens
