"""Mechanical checks of the circuit identities and of cross-backend agreement."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import protocols as pr
from . import qubit_sim as qs
from .utils import random_amplitudes

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class IdentityReport:
    identity_name: str
    max_deviation: float
    passed: bool
    tolerance: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AgreementReport:
    trial_count: int
    dims_tested: list[int]
    max_abs_error: float
    per_backend_pass_probs: dict[str, list[float]] = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _report(name: str, deviation: float, tol: float) -> IdentityReport:
    return IdentityReport(name, float(deviation), bool(deviation <= tol), tol)


def _circuit(n: int, *gates: tuple) -> qs.Circuit:
    return qs.Circuit(n, tuple(qs.gate(*g) for g in gates))


def _unitary(n: int, *gates: tuple) -> np.ndarray:
    return qs.circuit_unitary(_circuit(n, *gates))


def check_identity(name: str, u: np.ndarray, v: np.ndarray, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Compare two unitaries up to a global phase."""
    return _report(name, qs.global_phase_deviation(u, v, tol), tol)


def xor_swap_circuit() -> qs.Circuit:
    """Three alternating CNOTs exchanging two qubits."""
    return _circuit(2, ("CNOT", 1, 0), ("CNOT", 0, 1), ("CNOT", 1, 0))


def cswap_decomposition() -> qs.Circuit:
    """Controlled swap from CNOTs around a Toffoli; qubit 0 is the control."""
    return _circuit(3, ("CNOT", 2, 1), ("CCNOT", 0, 1, 2), ("CNOT", 2, 1))


def swap_test_ccz_circuit() -> qs.Circuit:
    """Ancilla SWAP test with the Toffoli rewritten as H-CCZ-H on its target."""
    return _circuit(
        3,
        ("H", 0),
        ("CNOT", 2, 1), ("H", 2), ("CCZ", 0, 1, 2), ("H", 2), ("CNOT", 2, 1),
        ("H", 0),
    )


def bell_states() -> dict[str, qs.PureState]:
    s = 1 / np.sqrt(2)
    return {
        "phi+": qs.PureState([s, 0, 0, s]),
        "psi+": qs.PureState([0, s, s, 0]),
        "phi-": qs.PureState([s, 0, 0, -s]),
        "psi-": qs.PureState([0, s, -s, 0]),
    }


def bell_basis_map(mirrored: bool = False) -> dict[str, tuple[str, float]]:
    """Most likely output bitstring (and its probability) for each Bell input."""
    circuit = pr.destructive_circuit(1, mirrored)
    out = {}
    for name, state in bell_states().items():
        probs = np.abs(qs.apply_circuit(state, circuit).amplitudes) ** 2
        j = int(np.argmax(probs))
        out[name] = (format(j, "02b"), float(probs[j]))
    return out


def _bell_report(tol: float) -> IdentityReport:
    mapping = bell_basis_map()
    deviation = max(1.0 - p for _, p in mapping.values())
    if len({bits for bits, _ in mapping.values()}) != 4:
        deviation = float("inf")
    return _report("bell_states_to_distinct_basis_states", deviation, tol)


def check_circuit_identities(tol: float = DEFAULT_TOL) -> list[IdentityReport]:
    x, z = qs.gate_block("X"), qs.gate_block("Z")
    reports = [
        check_identity("HZH=X", _unitary(1, ("H", 0), ("Z", 0), ("H", 0)), x, tol),
        check_identity("HXH=Z", _unitary(1, ("H", 0), ("X", 0), ("H", 0)), z, tol),
        check_identity("HH=I", _unitary(1, ("H", 0), ("H", 0)), np.eye(2), tol),
        check_identity(
            "(1xH)CZ(1xH)=CNOT",
            _unitary(2, ("H", 1), ("CZ", 0, 1), ("H", 1)),
            _unitary(2, ("CNOT", 0, 1)), tol),
    ]
    for target in range(3):
        controls = [q for q in range(3) if q != target]
        reports.append(check_identity(
            f"H{target}.CCZ.H{target}=CCNOT({controls[0]},{controls[1]}->{target})",
            _unitary(3, ("H", target), ("CCZ", 0, 1, 2), ("H", target)),
            _unitary(3, ("CCNOT", *controls, target)), tol))
    reports.append(check_identity(
        "CZ(0,1)=CZ(1,0)", _unitary(2, ("CZ", 0, 1)), _unitary(2, ("CZ", 1, 0)), tol))
    ccz = _unitary(3, ("CCZ", 0, 1, 2))
    for perm in [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]:
        reports.append(check_identity(
            f"CCZ(0,1,2)=CCZ({','.join(map(str, perm))})", ccz, _unitary(3, ("CCZ", *perm)), tol))
    reports.append(check_identity(
        "xor_swap=SWAP", qs.circuit_unitary(xor_swap_circuit()), _unitary(2, ("SWAP", 0, 1)), tol))

    decomposed = qs.circuit_unitary(cswap_decomposition())
    reports.append(check_identity(
        "cnot_toffoli_cnot=CSWAP", decomposed, _unitary(3, ("CSWAP", 0, 1, 2)), tol))
    # ancilla fixed: the blocks acting on the test register
    reports.append(check_identity("cswap|ancilla=0>=I", decomposed[:4, :4], np.eye(4), tol))
    reports.append(check_identity(
        "cswap|ancilla=1>=SWAP", decomposed[4:, 4:], _unitary(2, ("SWAP", 0, 1)), tol))
    off_block = max(np.abs(decomposed[:4, 4:]).max(), np.abs(decomposed[4:, :4]).max())
    reports.append(_report("cswap_keeps_ancilla", off_block, tol))
    reports.append(check_identity(
        "swap_test_ccz_form=swap_test",
        qs.circuit_unitary(swap_test_ccz_circuit()),
        qs.circuit_unitary(pr.ancilla_circuit(1)), tol))
    reports.append(_bell_report(tol))
    return reports


def _ancilla_route_fail(phi: qs.PureState, psi: qs.PureState) -> float:
    """Ancilla measured at the end of the CCZ form of the circuit."""
    joint = qs.tensor_product(qs.zero_state(1), qs.tensor_product(phi, psi))
    out = qs.apply_circuit(joint, swap_test_ccz_circuit())
    return float(qs.marginal_probabilities(out, [0])[1])


def _measured_route_fail(phi: qs.PureState, psi: qs.PureState) -> float:
    """Test qubits measured right after CNOT and H; fail iff both read 1."""
    out = qs.apply_circuit(
        qs.tensor_product(phi, psi), _circuit(2, ("CNOT", 1, 0), ("H", 1)))
    return float(qs.outcome_distribution(out, [0, 1]).get("11", 0.0))


def deferred_measurement_deviation(phi: qs.PureState, psi: qs.PureState) -> float:
    a = _ancilla_route_fail(phi, psi)
    b = _measured_route_fail(phi, psi)
    c = pr.destructive_swap_test(phi, psi).p_fail
    return max(abs(a - b), abs(a - c))


def check_deferred_measurement(trials: int = 100, rng=0, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Fail probability with a coherent ancilla equals that of measuring the
    test qubits first and post-processing, for random single-qubit inputs."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(trials):
        phi = qs.PureState(random_amplitudes(2, rng))
        psi = qs.PureState(random_amplitudes(2, rng))
        worst = max(worst, deferred_measurement_deviation(phi, psi))
    return _report("deferred_measurement", worst, tol)


def cross_backend_agreement(dims: Sequence[int] = (2, 4, 8), trials_per_dim: int = 200,
                            rng=0, extra_pairs: Sequence[tuple] = ()) -> AgreementReport:
    """Pass probabilities of all routes on random product pairs.

    ``rng`` may be a seed or a Generator; integer seeds are recorded in the
    report.  ``extra_pairs`` are amplitude pairs evaluated in addition to the
    random trials.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    for d in dims:
        if d < 2:
            raise ValueError(f"dimension {d} < 2")
    pairs = [
        (random_amplitudes(d, rng), random_amplitudes(d, rng))
        for d in dims for _ in range(trials_per_dim)
    ]
    pairs += [(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in extra_pairs]
    table: dict[str, list[float]] = {}
    worst = 0.0
    for phi, psi in pairs:
        routes = pr.all_routes(phi, psi)
        values = list(routes.values())
        worst = max(worst, max(values) - min(values))
        for name, p in routes.items():
            table.setdefault(name, []).append(p)
    return AgreementReport(
        trial_count=len(pairs),
        dims_tested=sorted({len(p) for p, _ in pairs}),
        max_abs_error=float(worst),
        per_backend_pass_probs=table,
        seed=int(seed) if seed is not None else None,
    )


def monte_carlo_estimate(sampler: Callable[[np.random.Generator, int], np.ndarray],
                         shots: int, rng=0) -> tuple[float, float]:
    """Pass frequency over ``shots`` rounds and its binomial standard error.

    ``sampler(rng, shots)`` returns a boolean array, True for Pass.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(rng)
    passed = np.asarray(sampler(rng, shots), dtype=bool)
    if passed.shape != (shots,):
        raise ValueError(f"sampler returned shape {passed.shape}, expected ({shots},)")
    p_hat = float(passed.mean())
    return p_hat, float(np.sqrt(p_hat * (1.0 - p_hat) / shots))


def destructive_sampler(phi: qs.PureState, psi: qs.PureState):
    """Vectorized pass/fail sampler for :func:`monte_carlo_estimate`."""
    stats = pr.destructive_swap_test(phi, psi)
    n = phi.num_qubits
    probs = np.zeros(4**n)
    for bits, p in stats.outcome_distribution.items():
        probs[int(bits, 2)] = p
    fail = pr.verdict_table(n)

    def sample(rng: np.random.Generator, shots: int) -> np.ndarray:
        return ~fail[qs.sample_indices(probs, shots, rng)]

    return sample


def run_default_suite(dims: Sequence[int] = (2, 4, 8), trials: int = 200,
                      tol: float = DEFAULT_TOL, seed: int = 0) -> dict:
    """Everything the ``verify`` command reports, plus an overall flag."""
    identities = check_circuit_identities(tol)
    deferred = check_deferred_measurement(trials, seed, tol)
    agreement = cross_backend_agreement(dims, trials, seed)
    ok = all(r.passed for r in identities) and deferred.passed and agreement.max_abs_error <= tol
    return {
        "identities": [r.to_dict() for r in identities + [deferred]],
        "agreement": {
            "trial_count": agreement.trial_count,
            "dims_tested": agreement.dims_tested,
            "max_abs_error": agreement.max_abs_error,
            "tolerance": tol,
            "seed": agreement.seed,
        },
        "passed": ok,
    }
