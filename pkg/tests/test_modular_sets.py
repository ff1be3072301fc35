"""Unit tests for modular set verification, tensor products and enumeration."""

from __future__ import annotations

from itertools import combinations

import pytest

from src.core.errors import InputError
from src.models.modular_set import ModularSet, ResidueStatus, ViolationKind
from src.services.modular_sets import (
    FORBIDDEN_CHARACTERS,
    build_modular_set,
    character_table,
    cover_report,
    enumerate_modular_sets,
    missing_characters,
    omega_below,
    restriction_check,
    table_from_sets,
    tensor,
    verify_modular,
)


def _is_modular_naive(elements: tuple[int, ...], modulus: int) -> bool:
    """The definition, literally: no mod-AP and every other residue mod-covered."""
    members = set(elements)
    for x in elements:
        for y in elements:
            if x != y and (2 * y - x) % modulus in members:
                return False
    for r in range(modulus):
        if r in members:
            continue
        if not any((2 * y - x) % modulus == r for x, y in combinations(elements, 2)):
            return False
    return True


def _naive_enumeration(modulus: int) -> list[tuple[int, ...]]:
    found = []
    rest = range(1, modulus)
    for size in range(modulus):
        for combo in combinations(rest, size):
            elements = (0, *combo)
            if _is_modular_naive(elements, modulus):
                found.append(elements)
    return sorted(found)


def test_verify_small_examples() -> None:
    """({0,1},3) has λ=0, ({0,3,5,8},9) has λ=8 and ω=4, ({0,1},2) is invalid."""
    v = verify_modular([0, 1], 3)
    assert v.valid and v.lambda_ == 0 and v.omega is None

    v = verify_modular([0, 3, 5, 8], 9)
    assert v.valid and v.lambda_ == 8 and v.omega == 4

    v = verify_modular([0, 1], 2)
    assert not v.valid
    assert v.violation is not None
    assert v.violation.kind is ViolationKind.MOD_AP
    assert v.describe() == "invalid: mod-AP (x=0,y=1,z=0)"


def test_verify_reports_uncovered_residue() -> None:
    """{0} mod 2 leaves residue 1 uncovered."""
    v = verify_modular([0], 2)
    assert not v.valid
    assert v.violation is not None
    assert v.violation.kind is ViolationKind.UNCOVERED
    assert v.violation.residue == 1


def test_verify_accepts_unsorted_input() -> None:
    """Element order does not matter."""
    assert verify_modular([8, 0, 5, 3], 9) == verify_modular([0, 3, 5, 8], 9)


@pytest.mark.parametrize(
    "elements,modulus",
    [([0, 1, 1], 3), ([0, 3], 3), ([1, 2], 5), ([0, 1], 0)],
)
def test_verify_rejects_malformed_input(elements: list[int], modulus: int) -> None:
    """Duplicates, out-of-range residues, a missing 0 and bad moduli are input errors."""
    with pytest.raises(InputError):
        verify_modular(elements, modulus)


def test_build_modular_set_raises_on_invalid_set() -> None:
    """The verified constructor names the violation."""
    assert build_modular_set([0, 2], 3).lambda_ == 2
    with pytest.raises(InputError, match="mod-AP"):
        build_modular_set([0, 1], 2)


def test_cover_report_classifies_every_residue() -> None:
    """Residue 4 of ({0,3,5,8},9) is mod-covered only, which makes it ω."""
    report = cover_report(build_modular_set([0, 3, 5, 8], 9))
    assert report.with_status(ResidueStatus.MEMBER) == [0, 3, 5, 8]
    assert report.with_status(ResidueStatus.UNCOVERED) == []
    assert 4 in report.with_status(ResidueStatus.MOD_COVERED_ONLY)
    assert report.omega == 4
    assert len(report.residues) == 9


def test_tensor_character_identity() -> None:
    """λ(A⊗B) = λ(A) + N·λ(B)."""
    a = build_modular_set([0, 1], 3)
    b = build_modular_set([0, 2], 3)
    product = tensor(a, b)
    assert product.modulus == 9
    assert product.elements == (0, 1, 6, 7)
    assert product.lambda_ == a.lambda_ + 3 * b.lambda_


def test_restriction_check_passes_for_modular_set() -> None:
    """The greedy continuation of the prefix up to ω reproduces the set."""
    assert restriction_check(build_modular_set([0, 3, 5, 8], 9)).valid


def test_omega_below_orders_none_first() -> None:
    """NONE is below every integer."""
    assert omega_below(None, 0)
    assert omega_below(3, 4)
    assert not omega_below(4, 4)


def test_enumerate_tiny_moduli() -> None:
    """N=1, 2, 3 enumerate exactly {0}, nothing, and {0,1}, {0,2}."""
    assert [ms.elements for ms in enumerate_modular_sets(1)] == [(0,)]
    assert enumerate_modular_sets(2) == []
    assert [ms.elements for ms in enumerate_modular_sets(3)] == [(0, 1), (0, 2)]


def test_enumerate_contains_known_set() -> None:
    """({0,3,5,8},9) is among the modular sets modulo 9."""
    sets = enumerate_modular_sets(9)
    assert any(ms.elements == (0, 3, 5, 8) and ms.lambda_ == 8 for ms in sets)
    assert sets == sorted(sets, key=lambda ms: ms.sort_key)


@pytest.mark.parametrize("modulus", range(1, 11))
def test_enumeration_matches_naive_filter(modulus: int) -> None:
    """The pruned search equals filtering every subset by the definition."""
    assert [ms.elements for ms in enumerate_modular_sets(modulus)] == _naive_enumeration(modulus)


def test_missing_characters_lists_gaps() -> None:
    """Characters without a witness are reported."""
    table = table_from_sets({n: enumerate_modular_sets(n) for n in range(1, 4)})
    assert sorted(table) == [0, 2]
    assert missing_characters(table, 3) == [1, 3]


def test_character_table_collects_witnesses() -> None:
    """({0,1},3) is filed under character 0 and ({0,2},3) under character 2."""
    small = character_table(3)
    assert [(ms.modulus, ms.elements) for ms in small[0]] == [(1, (0,)), (3, (0, 1))]
    assert [(ms.modulus, ms.elements) for ms in small[2]] == [(3, (0, 2))]

    table = character_table(9)
    assert any(ms.elements == (0, 3, 5, 8) for ms in table[8])


def test_tensor_results_are_modular_sets() -> None:
    """Every tensor product of small modular sets verifies."""
    sets = [ms for n in range(1, 10) for ms in enumerate_modular_sets(n)]
    for a in sets:
        for b in sets:
            if a.modulus * b.modulus > 27:
                continue
            product = tensor(a, b)
            assert isinstance(product, ModularSet)


@pytest.mark.slow
@pytest.mark.parametrize("modulus", range(11, 19))
def test_enumeration_matches_naive_filter_to_18(modulus: int) -> None:
    """Oracle equivalence for the remaining moduli up to 18."""
    assert [ms.elements for ms in enumerate_modular_sets(modulus)] == _naive_enumeration(modulus)


@pytest.mark.slow
def test_no_forbidden_character_up_to_36() -> None:
    """No modular set with N ≤ 36 has a forbidden character, and every one has ω < λ."""
    for modulus in range(1, 37):
        for ms in enumerate_modular_sets(modulus):
            assert ms.lambda_ not in FORBIDDEN_CHARACTERS, ms
            assert omega_below(ms.omega, ms.lambda_), ms
            if modulus % 2 == 0:
                half = modulus // 2
                assert ms.lambda_ % 2 == 1
                assert all((x + half) % modulus not in ms.elements for x in ms.elements)


@pytest.mark.slow
def test_tensor_identity_up_to_81() -> None:
    """Tensor products with modulus ≤ 81 verify with the character identity."""
    sets = [ms for n in range(1, 28) for ms in enumerate_modular_sets(n)]
    for a in sets:
        for b in sets:
            if a.modulus * b.modulus <= 81:
                product = tensor(a, b)
                assert product.lambda_ == a.lambda_ + a.modulus * b.lambda_


def test_tensor_of_nine_and_three() -> None:
    """({0,3,5,8},9) ⊗ ({0,1},3) is a modular set modulo 27 with λ=8."""
    product = tensor(build_modular_set([0, 3, 5, 8], 9), build_modular_set([0, 1], 3))
    assert product.modulus == 27
    assert product.elements == (0, 3, 5, 8, 9, 12, 14, 17)
    assert product.lambda_ == 8


def _subsets_with_zero(modulus: int) -> list[tuple[int, ...]]:
    rest = range(1, modulus)
    return [(0, *combo) for size in range(modulus) for combo in combinations(rest, size)]


@pytest.mark.parametrize("modulus", range(1, 11))
def test_verify_matches_definition_on_every_subset(modulus: int) -> None:
    """verify_modular agrees with the literal definition on valid and invalid subsets alike."""
    for elements in _subsets_with_zero(modulus):
        assert verify_modular(elements, modulus).valid == _is_modular_naive(elements, modulus), elements


@pytest.mark.parametrize("modulus", range(1, 16))
def test_every_enumerated_set_passes_restriction(modulus: int) -> None:
    """The greedy sequence of a set's generators reproduces the set below N."""
    for ms in enumerate_modular_sets(modulus):
        assert restriction_check(ms).valid, ms


@pytest.mark.slow
@pytest.mark.parametrize("modulus", range(11, 19))
def test_verify_matches_definition_on_every_subset_to_18(modulus: int) -> None:
    """Subset-by-subset agreement with the definition for the moduli 11..18."""
    for elements in _subsets_with_zero(modulus):
        assert verify_modular(elements, modulus).valid == _is_modular_naive(elements, modulus), elements


@pytest.mark.slow
@pytest.mark.parametrize("modulus", range(16, 31))
def test_every_enumerated_set_passes_restriction_to_30(modulus: int) -> None:
    """Restriction holds for every modular set with N ≤ 30."""
    for ms in enumerate_modular_sets(modulus):
        assert restriction_check(ms).valid, ms
