"""Prefect flow: enumerate modular sets and tabulate their characters.

This module implements:
- Enumerate every modular set for N = 1..max_modulus, resuming from the JSON-lines cache
- Tabulate the characters seen per modulus
- Report characters below the largest seen that never occur
- Flag any forbidden character that shows up at an even modulus

The cache is read once per run; each modulus it lacks is its own task, which
appends the result so a long sweep resumes after an interruption.
"""

from __future__ import annotations

import logging
from pathlib import Path

from prefect import flow, get_run_logger, task
from prefect.exceptions import MissingContextError

from src.core.config import settings
from src.models.modular_set import ModularSet
from src.services.modular_sets import (
    FORBIDDEN_CHARACTERS,
    enumerate_modular_sets,
    missing_characters,
    table_from_sets,
)
from src.services.result_cache import ResultCache


def _get_logger() -> logging.Logger:
    """Return a logger usable both inside and outside Prefect contexts."""
    try:
        return get_run_logger()  # type: ignore[return-value]
    except MissingContextError:
        return logging.getLogger(__name__)


def summarize_characters(sets_by_modulus: dict[int, list[ModularSet]]) -> dict[int, list[int]]:
    """Modulus → sorted distinct characters of its modular sets."""
    return {m: sorted({ms.lambda_ for ms in sets}) for m, sets in sorted(sets_by_modulus.items())}


def forbidden_at_even_moduli(sets_by_modulus: dict[int, list[ModularSet]]) -> dict[int, list[int]]:
    """Forbidden character → even moduli where a set of that character turned up."""
    found: dict[int, list[int]] = {}
    for modulus, sets in sorted(sets_by_modulus.items()):
        if modulus % 2:
            continue
        for lam in sorted({ms.lambda_ for ms in sets} & set(FORBIDDEN_CHARACTERS)):
            found.setdefault(lam, []).append(modulus)
    return found


def pending_moduli(max_modulus: int, cached: dict[int, list[ModularSet]]) -> list[int]:
    return [m for m in range(1, max_modulus + 1) if m not in cached]


@task
def enumerate_modulus_task(modulus: int, cache_path: str | None, workers: int) -> list[ModularSet]:
    logger = _get_logger()
    sets = enumerate_modular_sets(modulus, workers=workers)
    if cache_path:
        ResultCache(cache_path).append(modulus, sets)
    logger.info(f"N={modulus}: {len(sets)} modular sets")
    return sets


@flow(name="character-table-sweep", log_prints=True)
def character_table_sweep_flow(
    max_modulus: int | None = None,
    cache_path: str | None = None,
    workers: int | None = None,
) -> dict[str, object]:
    """Enumerate modular sets up to max_modulus and report which characters are missing."""
    logger = _get_logger()
    max_modulus = max_modulus or settings.ENUMERATION_MAX_MODULUS
    workers = workers or settings.WORKERS
    cache_path = cache_path if cache_path is not None else str(Path(settings.STANLEY_CACHE))

    cached = ResultCache(cache_path).load() if cache_path else {}
    pending = pending_moduli(max_modulus, cached)
    logger.info(f"{max_modulus - len(pending)} of {max_modulus} moduli served from the cache")
    sets_by_modulus = {m: cached[m] for m in range(1, max_modulus + 1) if m in cached}
    for modulus in pending:
        sets_by_modulus[modulus] = enumerate_modulus_task(modulus, cache_path, workers)

    table = summarize_characters(sets_by_modulus)
    seen = {lam for chars in table.values() for lam in chars}
    upto = max(seen) if seen else 0
    missing = missing_characters(table_from_sets(sets_by_modulus), upto)
    forbidden_found = forbidden_at_even_moduli(sets_by_modulus)
    logger.info(f"Sweep to N={max_modulus}: {len(seen)} characters seen, missing {missing}")
    if forbidden_found:
        logger.error(f"Forbidden characters at even moduli: {forbidden_found}")
    return {"characters": table, "missing": missing, "forbidden_found": forbidden_found}
