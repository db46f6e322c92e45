"""SWAP-test variants on the qubit and photonic backends.

Every exact routine returns a :class:`PassStats`; the samplers draw single
records from the same exact distributions.  Register layout for the
qubit circuits:

* ancilla test: qubit 0 is the ancilla, ``1..n`` hold phi, ``n+1..2n`` hold psi;
* destructive test: ``0..n-1`` hold phi, ``n..2n-1`` hold psi.

Photonic paths: the compared photons enter on ``U`` (phi) and ``D`` (psi);
the ancilla photon of the interferometric test uses ``AU`` and ``AD``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock_sim as fs
from . import qubit_sim as qs
from .exceptions import DimensionMismatchError, ValidationError

ANCILLA_UPPER, ANCILLA_LOWER = "AU", "AD"
INPUT_NORM_TOL = 1e-9


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PassStats:
    """Exact outcome statistics of one SWAP-test round.

    ``overlap_sq`` is ``None`` when the input was a joint (possibly
    entangled) state rather than a product of two states.
    """

    p_pass: float
    p_fail: float
    overlap_sq: float | None
    outcome_distribution: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p_pass": self.p_pass,
            "p_fail": self.p_fail,
            "overlap_sq": self.overlap_sq,
            "outcome_distribution": dict(self.outcome_distribution),
        }


@dataclass(frozen=True)
class TestOutcome:
    verdict: Verdict
    raw_bits: tuple[str, ...]

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "raw_bits": list(self.raw_bits)}


def _check_pair(phi: qs.PureState, psi: qs.PureState) -> int:
    if phi.num_qubits != psi.num_qubits:
        raise DimensionMismatchError(
            f"cannot compare {phi.num_qubits}- and {psi.num_qubits}-qubit states")
    return phi.num_qubits


def overlap_sq(phi: qs.PureState, psi: qs.PureState) -> float:
    return abs(qs.inner_product(phi, psi)) ** 2


def analytic_pass_prob(overlap: float) -> float:
    return (1.0 + overlap) / 2.0


# -- ancilla-based test -------------------------------------------------------

def ancilla_circuit(n: int) -> qs.Circuit:
    """H on the ancilla, one CSWAP per qubit pair, H on the ancilla."""
    gates = [qs.gate("H", 0)]
    gates += [qs.gate("CSWAP", 0, 1 + i, 1 + n + i) for i in range(n)]
    gates.append(qs.gate("H", 0))
    return qs.Circuit(2 * n + 1, tuple(gates))


def ancilla_swap_test_prob(phi: qs.PureState, psi: qs.PureState) -> PassStats:
    n = _check_pair(phi, psi)
    joint = qs.tensor_product(qs.zero_state(1), qs.tensor_product(phi, psi))
    out = qs.apply_circuit(joint, ancilla_circuit(n))
    p0, p1 = qs.marginal_probabilities(out, [0])
    return PassStats(
        p_pass=float(p0),
        p_fail=float(p1),
        overlap_sq=overlap_sq(phi, psi),
        outcome_distribution={"0": float(p0), "1": float(p1)},
    )


# -- destructive test ---------------------------------------------------------

def nand_verdict(o1: str, o2: str) -> Verdict:
    """Fail iff the bitwise AND of the two records has odd parity."""
    if len(o1) != len(o2):
        raise DimensionMismatchError(f"records of length {len(o1)} and {len(o2)}")
    if set(o1 + o2) - {"0", "1"}:
        raise ValidationError("records must be strings of 0 and 1")
    parity = sum(a == "1" and b == "1" for a, b in zip(o1, o2)) % 2
    return Verdict.FAIL if parity else Verdict.PASS


def destructive_circuit(n: int, mirrored: bool = False) -> qs.Circuit:
    """CNOT from each phi qubit onto its psi partner, then H on the phi qubit.

    ``mirrored=True`` swaps the roles of the registers (control on psi, H on
    psi); the two forms give identical comparison statistics.
    """
    gates = []
    for i in range(n):
        a, b = (n + i, i) if mirrored else (i, n + i)
        gates += [qs.gate("CNOT", a, b), qs.gate("H", a)]
    return qs.Circuit(2 * n, tuple(gates))


def verdict_table(n: int) -> np.ndarray:
    """Boolean fail flag for each of the ``4**n`` raw records."""
    idx = np.arange(4**n)
    o1, o2 = idx >> n, idx & ((1 << n) - 1)
    anded = o1 & o2
    parity = np.zeros_like(idx)
    for bit in range(n):
        parity ^= (anded >> bit) & 1
    return parity.astype(bool)


def _destructive_distribution(joint: qs.PureState, n: int, mirrored: bool) -> np.ndarray:
    out = qs.apply_circuit(joint, destructive_circuit(n, mirrored))
    return np.abs(out.amplitudes) ** 2


def _stats_from_records(probs: np.ndarray, n: int, overlap: float | None) -> PassStats:
    fail = verdict_table(n)
    p_fail = float(probs[fail].sum())
    p_pass = float(probs[~fail].sum())
    dist = {format(j, f"0{2 * n}b"): float(p) for j, p in enumerate(probs) if p > 1e-15}
    return PassStats(p_pass=p_pass, p_fail=p_fail, overlap_sq=overlap, outcome_distribution=dist)


def destructive_swap_test(phi: qs.PureState, psi: qs.PureState, mirrored: bool = False) -> PassStats:
    """Ancilla-free test; the raw record is the 2n measured bits (phi's first)."""
    n = _check_pair(phi, psi)
    if n < 1:
        raise ValidationError("destructive test needs at least one qubit per state")
    probs = _destructive_distribution(qs.tensor_product(phi, psi), n, mirrored)
    return _stats_from_records(probs, n, overlap_sq(phi, psi))


def destructive_swap_test_joint(joint: qs.PureState, mirrored: bool = False) -> PassStats:
    """Diagnostic: run the destructive circuit on an arbitrary 2n-qubit state.

    The verdict is only a state comparison for product inputs; for entangled
    inputs the statistics describe the joint state (``overlap_sq`` is None).
    """
    if joint.num_qubits < 2 or joint.num_qubits % 2:
        raise ValidationError("joint state must have an even number (>= 2) of qubits")
    n = joint.num_qubits // 2
    return _stats_from_records(_destructive_distribution(joint, n, mirrored), n, None)


def _outcome(j: int, n: int) -> TestOutcome:
    bits = format(j, f"0{2 * n}b")
    o1, o2 = bits[:n], bits[n:]
    return TestOutcome(nand_verdict(o1, o2), (o1, o2))


def destructive_swap_test_sample(phi: qs.PureState, psi: qs.PureState, rng=None) -> TestOutcome:
    """Sample one measurement record of the destructive circuit."""
    rng = np.random.default_rng(rng)
    n = _check_pair(phi, psi)
    probs = _destructive_distribution(qs.tensor_product(phi, psi), n, False)
    return _outcome(int(qs.sample_indices(probs, None, rng)), n)


def destructive_swap_test_samples(phi: qs.PureState, psi: qs.PureState, shots: int,
                                  rng=None) -> list[TestOutcome]:
    """``shots`` independent rounds on fresh copies; consumes the stream exactly
    as ``shots`` calls to :func:`destructive_swap_test_sample` would."""
    rng = np.random.default_rng(rng)
    n = _check_pair(phi, psi)
    probs = _destructive_distribution(qs.tensor_product(phi, psi), n, False)
    return [_outcome(int(j), n) for j in qs.sample_indices(probs, shots, rng)]


def repeated_pass_prob(overlap_sq: float, n: int) -> float:
    """Probability of passing ``n`` independent rounds."""
    if not 0.0 <= overlap_sq <= 1.0:
        raise ValidationError(f"overlap_sq={overlap_sq!r} outside [0, 1]")
    if n < 0:
        raise ValidationError("round count must be non-negative")
    return ((1.0 + overlap_sq) / 2.0) ** n


# -- photonic tests -----------------------------------------------------------

def _photon_amplitudes(amps) -> np.ndarray:
    a = np.asarray(amps, dtype=complex).reshape(-1)
    norm = np.linalg.norm(a)
    if a.size == 0 or abs(norm - 1.0) > INPUT_NORM_TOL:
        raise ValidationError(f"photon amplitudes must be normalized (norm {norm!r})")
    return a / norm


def _photon_pair(phi_amps, psi_amps) -> tuple[np.ndarray, np.ndarray]:
    phi = _photon_amplitudes(phi_amps)
    psi = _photon_amplitudes(psi_amps)
    if phi.size != psi.size:
        raise DimensionMismatchError(f"photon dimensions {phi.size} and {psi.size} differ")
    return phi, psi


def _amp_overlap_sq(phi: np.ndarray, psi: np.ndarray) -> float:
    return float(abs(np.vdot(phi, psi)) ** 2)


def hom_output_state(phi_amps, psi_amps) -> fs.FockSuperposition:
    """Two-photon state after the beam splitter, phi entering U and psi D."""
    phi, psi = _photon_pair(phi_amps, psi_amps)
    d = phi.size
    joint = fs.product(fs.single_photon(phi, fs.UPPER, d), fs.single_photon(psi, fs.LOWER, d))
    return fs.beam_splitter(joint, fs.UPPER, fs.LOWER)


def hom_swap_test(phi_amps, psi_amps) -> tuple[fs.DetectorStats, PassStats]:
    """Destructive SWAP test as Hong-Ou-Mandel interference; a coincidence fails."""
    phi, psi = _photon_pair(phi_amps, psi_amps)
    det = fs.detector_stats(hom_output_state(phi, psi), fs.UPPER, fs.LOWER)
    stats = PassStats(
        p_pass=1.0 - det.p_coincidence,
        p_fail=det.p_coincidence,
        overlap_sq=_amp_overlap_sq(phi, psi),
        outcome_distribution={
            "upper_only": det.p_upper_only,
            "lower_only": det.p_lower_only,
            "coincidence": det.p_coincidence,
            "none": det.p_none,
        },
    )
    return det, stats


def hom_swap_test_sample(phi_amps, psi_amps, rng=None) -> TestOutcome:
    """One HOM round; raw bits are the two detector clicks (upper, lower)."""
    rng = np.random.default_rng(rng)
    det, _ = hom_swap_test(phi_amps, psi_amps)
    return _hom_outcome(det, int(qs.sample_indices(hom_click_probabilities(det), None, rng)))


def hom_click_probabilities(det: fs.DetectorStats) -> np.ndarray:
    # index = 2*click_upper + click_lower, matching the NAND record layout
    return np.array([det.p_none, det.p_lower_only, det.p_upper_only, det.p_coincidence])


def _hom_outcome(det: fs.DetectorStats, j: int) -> TestOutcome:
    o1, o2 = str(j >> 1), str(j & 1)
    return TestOutcome(nand_verdict(o1, o2), (o1, o2))


def optical_cswap(state: fs.FockSuperposition, b: int) -> fs.FockSuperposition:
    """Interferometer with a pi phase on D switched by the classical bit ``b``."""
    if b not in (0, 1):
        raise ValidationError("control bit must be 0 or 1")
    out = fs.beam_splitter(state, fs.UPPER, fs.LOWER)
    if b:
        out = fs.phase_shift(out, fs.LOWER, math.pi)
    return fs.beam_splitter(out, fs.UPPER, fs.LOWER)


def _ancilla_chain(phi: np.ndarray, psi: np.ndarray, close_lower: bool) -> fs.FockSuperposition:
    d = phi.size
    ancilla = fs.single_photon(np.eye(d)[0], ANCILLA_UPPER, d)
    tested = fs.product(fs.single_photon(phi, fs.UPPER, d), fs.single_photon(psi, fs.LOWER, d))
    state = fs.product(ancilla, tested)
    state = fs.beam_splitter(state, ANCILLA_UPPER, ANCILLA_LOWER)
    state = fs.beam_splitter(state, fs.UPPER, fs.LOWER)
    state = fs.cross_phase(state, ANCILLA_LOWER, fs.LOWER)
    if close_lower:
        state = fs.beam_splitter(state, fs.UPPER, fs.LOWER)
    return fs.beam_splitter(state, ANCILLA_UPPER, ANCILLA_LOWER)


def optical_swap_test_with_ancilla(phi_amps, psi_amps, close_lower: bool = True) -> PassStats:
    """Full interferometric SWAP test; passing means the ancilla exits at D1 (AU).

    ``close_lower=False`` drops the second beam splitter of the lower
    interferometer, which does not affect the ancilla statistics.
    """
    phi, psi = _photon_pair(phi_amps, psi_amps)
    state = _ancilla_chain(phi, psi, close_lower)
    counts = fs.photon_count_distribution(state, [ANCILLA_UPPER, ANCILLA_LOWER])
    p_d1 = sum(p for (n_up, _), p in counts.items() if n_up > 0)
    p_d2 = sum(p for (n_up, n_low), p in counts.items() if n_up == 0 and n_low > 0)
    return PassStats(
        p_pass=float(p_d1),
        p_fail=float(p_d2),
        overlap_sq=_amp_overlap_sq(phi, psi),
        outcome_distribution={"D1": float(p_d1), "D2": float(p_d2)},
    )


@dataclass(frozen=True)
class DetectorReduction:
    """Joint statistics of the ancilla detectors and the D3/D4 pair placed
    straight after the cross-phase (no closing lower beam splitter).

    ``p_single_at_d4_without_d3`` is the probability of exactly one photon
    at D4 while D3 stays dark; photon-number conservation forces it to 0.
    """

    p_coincidence: float
    p_d3_only: float
    p_d4_only: float
    p_single_at_d4_without_d3: float
    p_fail_ancilla: float
    p_fail_without_coincidence: float
    p_coincidence_without_fail: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def optical_detector_reduction(phi_amps, psi_amps) -> DetectorReduction:
    phi, psi = _photon_pair(phi_amps, psi_amps)
    state = _ancilla_chain(phi, psi, close_lower=False)
    counts = fs.photon_count_distribution(
        state, [ANCILLA_UPPER, ANCILLA_LOWER, fs.UPPER, fs.LOWER])
    acc = dict.fromkeys(
        ["coinc", "d3", "d4", "single_d4", "fail", "fail_nc", "coinc_nf"], 0.0)
    for (a_up, a_low, n3, n4), p in counts.items():
        failed = a_up == 0 and a_low > 0
        coinc = n3 > 0 and n4 > 0
        acc["coinc"] += p * coinc
        acc["d3"] += p * (n3 > 0 and n4 == 0)
        acc["d4"] += p * (n4 > 0 and n3 == 0)
        acc["single_d4"] += p * (n4 == 1 and n3 == 0)
        acc["fail"] += p * failed
        acc["fail_nc"] += p * (failed and not coinc)
        acc["coinc_nf"] += p * (coinc and not failed)
    return DetectorReduction(
        p_coincidence=acc["coinc"],
        p_d3_only=acc["d3"],
        p_d4_only=acc["d4"],
        p_single_at_d4_without_d3=acc["single_d4"],
        p_fail_ancilla=acc["fail"],
        p_fail_without_coincidence=acc["fail_nc"],
        p_coincidence_without_fail=acc["coinc_nf"],
    )


def amplitudes_to_state(amps) -> qs.PureState:
    """Qubit-register view of a photon's internal amplitudes (d a power of two)."""
    a = np.asarray(amps, dtype=complex).reshape(-1)
    if a.size < 2 or a.size & (a.size - 1):
        raise ValidationError(f"dimension {a.size} is not a power of two >= 2")
    return qs.PureState.from_amplitudes(a)


def all_routes(phi_amps, psi_amps) -> dict[str, float]:
    """Pass probability from every implemented route plus the analytic law.

    Qubit-circuit routes are skipped unless the dimension is a power of two.
    """
    phi, psi = _photon_pair(phi_amps, psi_amps)
    routes = {"analytic": analytic_pass_prob(_amp_overlap_sq(phi, psi))}
    d = phi.size
    if d >= 2 and not d & (d - 1):
        a, b = amplitudes_to_state(phi), amplitudes_to_state(psi)
        routes["ancilla"] = ancilla_swap_test_prob(a, b).p_pass
        routes["destructive"] = destructive_swap_test(a, b).p_pass
    routes["hom"] = hom_swap_test(phi, psi)[1].p_pass
    routes["optical_ancilla"] = optical_swap_test_with_ancilla(phi, psi).p_pass
    return routes
