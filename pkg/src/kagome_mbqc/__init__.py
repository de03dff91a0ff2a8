"""Measurement-based quantum computation on a Rydberg dimer resource state.

Modules
-------
blockade   blockaded cluster Hamiltonians, pulses and effective measurements
dimer      Kagome patches, dimer coverings and loop parities
peps       bowtie tensors and exact patch contraction
gates      measurement schemes, induced gates, byproducts and retry counts
frame      Pauli frames
engine     end-to-end runs of logical programs
noise      perturbed tensors, heralding and fidelity estimates
cli        command-line driver
"""

from .dimer import KagomePatch, build_dimer_state, enumerate_coverings
from .engine import LogicalProgram, RandomSource, circuit_oracle, run
from .frame import PauliFrame
from .gates import OutcomeRecord, Scheme, extract_gate, verify_against_claim
from .noise import NoiseModel
from .peps import build_peps_tensor, contract_patch

__version__ = "0.1.0"

__all__ = [
    "KagomePatch",
    "build_dimer_state",
    "enumerate_coverings",
    "LogicalProgram",
    "RandomSource",
    "circuit_oracle",
    "run",
    "PauliFrame",
    "OutcomeRecord",
    "Scheme",
    "extract_gate",
    "verify_against_claim",
    "NoiseModel",
    "build_peps_tensor",
    "contract_patch",
]
