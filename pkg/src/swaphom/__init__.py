"""Exact simulation of SWAP tests, Hong-Ou-Mandel interference and
single-photon quantum fingerprinting on a qubit and a photonic backend."""

from .exceptions import CapacityError, DimensionMismatchError, SwapHomError, ValidationError
from .fingerprint import Code, compare_strings, false_equal_bound, fingerprint_state, simplex_code
from .fock_sim import FockSuperposition, Mode, OccupationVector, beam_splitter, single_photon
from .protocols import (
    PassStats,
    TestOutcome,
    Verdict,
    ancilla_swap_test_prob,
    destructive_swap_test,
    hom_swap_test,
    optical_swap_test_with_ancilla,
)
from .qubit_sim import Circuit, GateSpec, PureState

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "DimensionMismatchError", "SwapHomError", "ValidationError",
    "Code", "compare_strings", "false_equal_bound", "fingerprint_state", "simplex_code",
    "FockSuperposition", "Mode", "OccupationVector", "beam_splitter", "single_photon",
    "PassStats", "TestOutcome", "Verdict", "ancilla_swap_test_prob", "destructive_swap_test",
    "hom_swap_test", "optical_swap_test_with_ancilla",
    "Circuit", "GateSpec", "PureState",
]
