"""Pydantic records for Stanley sequence prefixes and their diagnostics."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class SequenceRecord(BaseModel):
    """Serialized prefix: {"generators": [...], "terms": [...]}."""

    model_config = ConfigDict(frozen=True)

    generators: list[int]
    terms: list[int]


class OmittedSummary(BaseModel):
    """Omitted set of S(A) below `final_up_to`, exact for every value below it."""

    model_config = ConfigDict(frozen=True)

    generators: list[int]
    omitted: list[int]
    # None is the NONE sentinel: ordered below every integer.
    omega: int | None
    final_up_to: int


class GrowthSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    a_n: int
    ratio_type1: float
    ratio_type2: float


class GrowthDiagnostics(BaseModel):
    """Raw growth ratios; no Type I / Type II verdict is attached."""

    model_config = ConfigDict(frozen=True)

    generators: list[int]
    samples: list[GrowthSample] = Field(default_factory=list)
