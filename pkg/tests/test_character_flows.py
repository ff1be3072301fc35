"""Unit tests for the Prefect sweep tasks, run outside a flow context."""

from __future__ import annotations

import json
from pathlib import Path

from src.models.modular_set import ModularSet
from src.pipelines.flows.character_sweep import (
    enumerate_modulus_task,
    forbidden_at_even_moduli,
    pending_moduli,
    summarize_characters,
)
from src.pipelines.flows.forbidden_characters import prove_character_task
from src.services.modular_sets import enumerate_modular_sets
from src.services.result_cache import ResultCache


def test_summarize_characters_per_modulus() -> None:
    """Characters are listed once per modulus, sorted."""
    sets = {n: enumerate_modular_sets(n) for n in (1, 2, 3)}
    assert summarize_characters(sets) == {1: [0], 2: [], 3: [0, 2]}


def test_enumerate_task_appends_to_cache(tmp_path: Path) -> None:
    """A freshly enumerated modulus is written once and reads back complete."""
    cache = tmp_path / "sets.jsonl"
    sets = enumerate_modulus_task.fn(9, str(cache), 1)
    assert ResultCache(cache).load() == {9: sets}
    markers = [line for line in cache.read_text(encoding="utf-8").splitlines() if '"complete"' in line]
    assert len(markers) == 1


def test_cached_moduli_are_not_pending(tmp_path: Path) -> None:
    """Only moduli missing from the loaded cache are handed to the task."""
    cache = ResultCache(tmp_path / "sets.jsonl")
    for modulus in (2, 3, 5):
        cache.append(modulus, enumerate_modular_sets(modulus))
    assert pending_moduli(6, cache.load()) == [1, 4, 6]


def test_no_forbidden_character_at_small_even_moduli() -> None:
    """Enumeration up to 12 finds none of the forbidden characters at an even modulus."""
    sets = {n: enumerate_modular_sets(n) for n in range(1, 13)}
    assert forbidden_at_even_moduli(sets) == {}


def test_forbidden_character_at_even_modulus_is_reported() -> None:
    """A forbidden character is flagged at even moduli and ignored at odd ones."""
    odd = ModularSet(modulus=3, elements=(0, 1), lambda_=0, omega=None)
    planted = ModularSet(modulus=10, elements=(0, 1, 6), lambda_=3, omega=None)
    also_odd = ModularSet(modulus=9, elements=(0, 1, 6), lambda_=3, omega=None)
    assert forbidden_at_even_moduli({3: [odd], 9: [also_odd], 10: [planted]}) == {3: [10]}


def test_prove_task_writes_checked_trace(tmp_path: Path) -> None:
    """The prover task reports a checked trace and writes it to disk."""
    summary = prove_character_task.fn(3, str(tmp_path), small_modulus_max=12)
    assert summary["verdict"] == "impossible"
    assert summary["trace_valid"] is True
    payload = json.loads((tmp_path / "lambda_3.json").read_text(encoding="utf-8"))
    assert payload["lambda"] == 3


def test_prove_task_reports_unenumerated_moduli(tmp_path: Path) -> None:
    """Even moduli between the enumeration limit and 2·N_min are listed as uncovered."""
    summary = prove_character_task.fn(3, None, small_modulus_max=12, cache_path=str(tmp_path / "sets.jsonl"))
    assert summary["small_moduli_checked_upto"] == 12
    assert summary["uncovered_moduli"] == [14, 54]
    assert set(ResultCache(tmp_path / "sets.jsonl").load()) == {2, 4, 6, 8, 10, 12}
