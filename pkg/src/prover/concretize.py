"""Instantiate a surviving symbolic branch at a concrete N."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from src.core.config import settings
from src.core.errors import InputError, PreconditionError
from src.models.modular_set import ModularSet
from src.prover.rules import Status
from src.prover.state import ConstraintState
from src.services.modular_sets import verify_modular

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConcretizeResult:
    modular_set: ModularSet | None
    n_value: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.modular_set is not None


def modulus_chain(state: ConstraintState, window: int) -> list[int]:
    """N = M/2, 3M/2, 9M/2, ... from the detected even modulus M, from N_min on."""
    detection = state.dispatched.detection if state.dispatched else None
    if detection is None or detection.character != state.lam or detection.modulus % 2:
        return []
    n_min = state.params.n_min
    out: list[int] = []
    m = detection.modulus
    while m // 2 <= n_min + window or not out:
        if m // 2 >= n_min:
            out.append(m // 2)
        m *= 3
    return out


def candidate_values(state: ConstraintState, window: int, chain_only: bool = False) -> list[int]:
    """N values to try: the detected modulus chain, then the rest of [N_min, N_min + window]."""
    chain = modulus_chain(state, window)
    if chain_only:
        return chain
    seen = set(chain)
    n_min = state.params.n_min
    return chain + [n for n in range(n_min, n_min + window + 1) if n not in seen]


def instantiate(state: ConstraintState, n: int) -> ModularSet | None:
    """T ∩ [0, 2N) overridden by the decided terms at N, if that is a modular set of character λ."""
    assert state.dispatched is not None
    terms = state.dispatched.terms
    two_n = 2 * n
    if terms[-1] < two_n:
        return None
    decided = {t.evaluate(n): s for t, s in state.status.items()}
    elements = {v for v in terms if v < two_n and decided.get(v) is not Status.OUT}
    elements.update(v for v, s in decided.items() if s is Status.IN)
    top = n + state.params.half
    if top not in elements or max(elements) != top:
        return None
    verdict = verify_modular(elements, two_n)
    if not verdict.valid or verdict.lambda_ != state.lam:
        return None
    return ModularSet(modulus=two_n, elements=tuple(sorted(elements)), lambda_=verdict.lambda_, omega=verdict.omega)


def concretize(
    state: ConstraintState,
    n_value: int | None = None,
    window: int | None = None,
    chain_only: bool = False,
) -> ConcretizeResult:
    """Search for a concrete N at which the branch is a verified modular set.

    With chain_only, only the multiples of the detected modulus are tried.

    Raises:
        PreconditionError: the state already holds a contradiction.
        InputError: an explicit n_value below N_min.
    """
    if state.contradiction is not None:
        raise PreconditionError(f"cannot concretize a contradicted state ({state.contradiction.describe()})")
    if state.dispatched is None:
        return ConcretizeResult(None, reason="branch never committed to a greedy sequence")
    window = window if window is not None else settings.CONCRETIZE_WINDOW
    if n_value is not None:
        if n_value < state.params.n_min:
            raise InputError(f"N={n_value} is below N_min={state.params.n_min}")
        values = [n_value]
    else:
        values = candidate_values(state, window, chain_only)
    for n in values:
        ms = instantiate(state, n)
        if ms is not None:
            logger.info(f"lambda={state.lam}: branch concretizes at N={n} (modulus {ms.modulus})")
            return ConcretizeResult(ms, n_value=n)
    if n_value is None and chain_only:
        return ConcretizeResult(None, reason=f"no N on the detected modulus chain {values} yields a verified modular set")
    lo, hi = state.params.n_min, state.params.n_min + window
    return ConcretizeResult(None, reason=f"no N in [{lo}, {hi}] yields a verified modular set")
