"""Pydantic records for modular sets, verdicts and cover reports."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class ModularSet(BaseModel):
    """A verified modular set: JSON {"modulus","elements","lambda","omega"}."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    modulus: int
    elements: tuple[int, ...]
    lambda_: int = Field(alias="lambda")
    omega: int | None = None

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (self.modulus, self.elements)

    def to_record(self) -> dict:
        return {
            "modulus": self.modulus,
            "elements": list(self.elements),
            "lambda": self.lambda_,
            "omega": self.omega,
        }


class ViolationKind(str, Enum):
    MOD_AP = "mod-AP"
    UNCOVERED = "uncovered"
    RESTRICTION = "restriction"
    OMEGA = "omega"


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ViolationKind
    residue: int | None = None
    triple: tuple[int, int, int] | None = None
    detail: str = ""


class Verdict(BaseModel):
    """Outcome of a check; `lambda`/`omega` are filled for valid modular sets."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    valid: bool
    lambda_: int | None = Field(default=None, alias="lambda")
    omega: int | None = None
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.valid

    def describe(self) -> str:
        if self.valid:
            return f"valid lambda={self.lambda_} omega={_fmt_omega(self.omega)}"
        v = self.violation
        if v is None:
            return "invalid"
        if v.triple is not None:
            x, y, z = v.triple
            return f"invalid: {v.kind.value} (x={x},y={y},z={z})"
        if v.residue is not None:
            return f"invalid: {v.kind.value} residue {v.residue}"
        return f"invalid: {v.kind.value} {v.detail}".rstrip()


class ResidueStatus(str, Enum):
    MEMBER = "MEMBER"
    COVERED = "COVERED"
    MOD_COVERED_ONLY = "MOD_COVERED_ONLY"
    UNCOVERED = "UNCOVERED"


class ResidueCover(BaseModel):
    model_config = ConfigDict(frozen=True)

    residue: int
    status: ResidueStatus
    witness: tuple[int, int] | None = None


class CoverReport(BaseModel):
    """Per-residue classification of a modular set's complement."""

    model_config = ConfigDict(frozen=True)

    modulus: int
    residues: list[ResidueCover]
    omega: int | None = None

    def with_status(self, status: ResidueStatus) -> list[int]:
        return [r.residue for r in self.residues if r.status is status]


def _fmt_omega(omega: int | None) -> str:
    return "NONE" if omega is None else str(omega)
