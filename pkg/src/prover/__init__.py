"""Symbolic prover for forbidden characters of even-modulus modular sets."""

from src.prover.checker import TraceCheck, check_trace
from src.prover.concretize import concretize
from src.prover.search import ProverLimits, ProverResult, prove_character_impossible
from src.prover.small_moduli import SmallModulusCheck, check_small_moduli

__all__ = [
    "TraceCheck",
    "check_trace",
    "concretize",
    "ProverLimits",
    "ProverResult",
    "prove_character_impossible",
    "SmallModulusCheck",
    "check_small_moduli",
]
