"""Prefect flow: run the character prover over a list of characters.

Every trace the prover emits is replayed by the checker before it is counted;
traces are written as JSON when a directory is given. The even moduli below
2·N_min are enumerated up to the enumeration budget, and whatever lies beyond
it is reported in the summary as uncovered.
"""

from __future__ import annotations

import logging
from pathlib import Path

from prefect import flow, get_run_logger, task
from prefect.exceptions import MissingContextError

from src.core.config import settings
from src.models.trace import TraceVerdict
from src.prover.checker import check_trace
from src.prover.search import ProverLimits, prove_character_impossible
from src.services.modular_sets import FORBIDDEN_CHARACTERS
from src.services.result_cache import ResultCache


def _get_logger() -> logging.Logger:
    """Return a logger usable both inside and outside Prefect contexts."""
    try:
        return get_run_logger()  # type: ignore[return-value]
    except MissingContextError:
        return logging.getLogger(__name__)


@task
def prove_character_task(
    lam: int,
    trace_dir: str | None,
    bound: int | None = None,
    small_modulus_max: int | None = None,
    cache_path: str | None = None,
) -> dict[str, object]:
    logger = _get_logger()
    limits = ProverLimits(
        bound=bound,
        small_modulus_max=small_modulus_max if small_modulus_max is not None else settings.ENUMERATION_MAX_MODULUS,
    )
    cache = ResultCache(cache_path) if cache_path else None
    result = prove_character_impossible(lam, limits, cache=cache)
    summary: dict[str, object] = {
        "lambda": lam,
        "verdict": result.verdict.value,
        "nodes": result.nodes,
        "seconds": round(result.elapsed, 3),
        "trace_valid": None,
    }
    if result.trace is not None:
        check = check_trace(result.trace, lam)
        summary["trace_valid"] = check.valid
        if not check:
            logger.error(f"lambda={lam}: {check.describe()}")
        if trace_dir:
            out = Path(trace_dir) / f"lambda_{lam}.json"
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(result.trace.to_json(), encoding="utf-8")
            summary["trace_path"] = str(out)
    if result.small_moduli is not None:
        summary["small_moduli_checked_upto"] = result.small_moduli.checked_upto
        gap = result.small_moduli.uncovered
        summary["uncovered_moduli"] = list(gap) if gap is not None else None
    if result.candidate is not None:
        summary["modulus"] = result.candidate.modulus
        summary["elements"] = list(result.candidate.elements)
    logger.info(result.describe())
    return summary


@flow(name="forbidden-characters", log_prints=True)
def forbidden_characters_flow(
    lambdas: list[int] | None = None,
    trace_dir: str | None = None,
    bound: int | None = None,
    small_modulus_max: int | None = None,
    cache_path: str | None = None,
) -> list[dict[str, object]]:
    """Prove or refute each character; defaults to the characters no even modulus reaches."""
    logger = _get_logger()
    lambdas = list(lambdas) if lambdas else list(FORBIDDEN_CHARACTERS)
    results = [prove_character_task(lam, trace_dir, bound, small_modulus_max, cache_path) for lam in lambdas]
    proved = [r["lambda"] for r in results if r["verdict"] == TraceVerdict.IMPOSSIBLE.value and r["trace_valid"]]
    gaps = {r["lambda"]: r["uncovered_moduli"] for r in results if r.get("uncovered_moduli")}
    logger.info(f"Impossible with checked traces: {proved} of {lambdas}")
    if gaps:
        logger.warning(f"Even moduli left unenumerated per character: {gaps}")
    return results
