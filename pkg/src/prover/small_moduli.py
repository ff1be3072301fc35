"""Exhaustive check of the even moduli the symbolic search does not reach.

The case split only speaks for N ≥ N_min, so every modular set with an even
modulus 2N < 2·N_min has to be looked at directly. The enumeration budget caps
how far that goes; whatever lies between the budget and 2·N_min is reported as
uncovered instead of being silently assumed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from src.models.modular_set import ModularSet
from src.services.modular_sets import enumerate_modular_sets
from src.services.result_cache import ResultCache

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmallModulusCheck:
    below: int
    checked_upto: int
    witness: ModularSet | None = None

    @property
    def uncovered(self) -> tuple[int, int] | None:
        """First and last even modulus below `below` that was not enumerated."""
        if self.witness is not None:
            return None
        first = self.checked_upto + 2 - self.checked_upto % 2
        last = self.below - 2
        return (first, last) if first <= last else None

    def describe(self) -> str:
        if self.witness is not None:
            return f"modulus {self.witness.modulus} below {self.below} has the character"
        gap = self.uncovered
        if gap is None:
            return f"every even modulus below {self.below} checked"
        return f"even moduli {gap[0]}..{gap[1]} not enumerated"


def check_small_moduli(
    lam: int,
    n_min: int,
    max_modulus: int,
    cache: ResultCache | None = None,
    workers: int | None = None,
) -> SmallModulusCheck:
    """Enumerate the even moduli below 2·N_min, up to max_modulus, looking for character λ."""
    below = 2 * n_min
    top = min(below - 1, max_modulus)
    cached = cache.load() if cache is not None else {}
    for modulus in range(2, top + 1, 2):
        sets = cached.get(modulus)
        if sets is None:
            sets = enumerate_modular_sets(modulus, workers=workers)
            if cache is not None:
                cache.append(modulus, sets)
        witness = next((ms for ms in sets if ms.lambda_ == lam), None)
        if witness is not None:
            logger.warning(f"lambda={lam}: modulus {modulus} realises the character")
            return SmallModulusCheck(below=below, checked_upto=modulus, witness=witness)
    checked = max(top - top % 2, 0)
    logger.info(f"lambda={lam}: even moduli up to {checked} carry no set of this character (limit {below})")
    return SmallModulusCheck(below=below, checked_upto=checked)
