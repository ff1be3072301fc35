"""Independence certificates and character detections."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from src.models.modular_set import ModularSet


class IndependenceCertificate(BaseModel):
    """(κ, λ, ρ) consistent with the doubling recursions up to `verified_through`.

    This is a finite-depth observation, never a proof of independence.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kappa: int
    lambda_: int = Field(alias="lambda")
    rho: int
    verified_through: int

    def describe(self) -> str:
        return (
            f"kappa={self.kappa} lambda={self.lambda_} rho={self.rho} "
            f"(consistent up to k={self.verified_through})"
        )


class ModulusMatch(BaseModel):
    model_config = ConfigDict(frozen=True)

    modulus: int
    level: int | None = None
    modular_set: ModularSet


class DetectionSource(str, Enum):
    CERTIFICATE = "certificate"
    SCAN = "scan"


class CharacterDetection(BaseModel):
    """A character backed by a verified modular prefix of the sequence."""

    model_config = ConfigDict(frozen=True)

    character: int
    modulus: int
    elements: tuple[int, ...]
    source: DetectionSource
