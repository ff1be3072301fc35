"""Append-only JSON-lines cache of enumerated modular sets.

One record per set ({"modulus","elements","lambda","omega"}) followed by a
completion marker ({"modulus","complete":true,"count"}) per modulus. Nothing
read back is trusted: every record is re-verified, and a modulus is served from
the cache only when its marker count matches the records that survived.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from pathlib import Path

from pydantic import BaseModel, ValidationError

from src.core.config import settings
from src.core.errors import InputError
from src.models.modular_set import ModularSet
from src.services.modular_sets import enumerate_modular_sets, verify_modular

logger = logging.getLogger(__name__)


class CompletionMarker(BaseModel):
    modulus: int
    complete: bool = True
    count: int


class ResultCache:
    def __init__(self, path: Path | str | None = None) -> None:
        self.path = Path(path) if path is not None else Path(settings.STANLEY_CACHE)

    def load(self) -> dict[int, list[ModularSet]]:
        """Re-verified sets for every modulus whose enumeration completed."""
        if not self.path.exists():
            return {}
        records: dict[int, dict[tuple[int, ...], ModularSet]] = defaultdict(dict)
        markers: dict[int, int] = {}
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError:
                    logger.warning(f"{self.path}:{lineno}: not JSON, skipped")
                    continue
                if isinstance(payload, dict) and payload.get("complete"):
                    try:
                        marker = CompletionMarker.model_validate(payload)
                    except ValidationError:
                        logger.warning(f"{self.path}:{lineno}: malformed completion marker, skipped")
                        continue
                    markers[marker.modulus] = marker.count
                    continue
                record = self._trusted(payload, f"{self.path}:{lineno}")
                if record is not None:
                    records[record.modulus][record.elements] = record

        complete: dict[int, list[ModularSet]] = {}
        for modulus, count in markers.items():
            kept = records.get(modulus, {})
            if len(kept) != count:
                logger.warning(
                    f"cache holds {len(kept)} verified sets for modulus {modulus}, marker says {count}; recomputing"
                )
                continue
            complete[modulus] = sorted(kept.values(), key=lambda ms: ms.sort_key)
        return complete

    def append(self, modulus: int, sets: list[ModularSet]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            for ms in sets:
                fh.write(json.dumps(ms.to_record()) + "\n")
            fh.write(CompletionMarker(modulus=modulus, count=len(sets)).model_dump_json() + "\n")

    @staticmethod
    def _trusted(payload: object, where: str) -> ModularSet | None:
        try:
            record = ModularSet.model_validate(payload)
            verdict = verify_modular(record.elements, record.modulus)
        except (ValidationError, InputError) as exc:
            logger.warning(f"{where}: corrupt record skipped ({exc.__class__.__name__})")
            return None
        if not verdict.valid or verdict.lambda_ != record.lambda_ or verdict.omega != record.omega:
            logger.warning(f"{where}: record fails re-verification ({verdict.describe()}), skipped")
            return None
        return record


def enumerate_with_cache(
    max_modulus: int,
    cache: ResultCache | None = None,
    workers: int | None = None,
) -> dict[int, list[ModularSet]]:
    """Modular sets for every N ≤ max_modulus, resuming from and extending the cache."""
    cached = cache.load() if cache is not None else {}
    out: dict[int, list[ModularSet]] = {}
    for modulus in range(1, max_modulus + 1):
        if modulus in cached:
            out[modulus] = cached[modulus]
            continue
        out[modulus] = enumerate_modular_sets(modulus, workers=workers)
        if cache is not None:
            cache.append(modulus, out[modulus])
    hits = sum(1 for m in out if m in cached)
    logger.info(f"enumerated moduli 1..{max_modulus} ({hits} served from cache)")
    return out
