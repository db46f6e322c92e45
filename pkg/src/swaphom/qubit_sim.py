"""Dense statevector simulator for small qubit registers.

Qubit 0 is the most significant bit of the basis index, so the ket
``|x0 x1 ... x_{n-1}>`` sits at index ``int("x0x1...", 2)``.  Gates act on the
amplitude tensor of shape ``(2,) * n`` through a local ``2**k x 2**k`` block;
the full ``2**n x 2**n`` operator is only ever built by :func:`circuit_unitary`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import CapacityError, DimensionMismatchError, ValidationError

MAX_QUBITS = 20
MAX_UNITARY_QUBITS = 10
NORM_TOL = 1e-10

GATE_ARITY = {
    "H": 1, "X": 1, "Z": 1,
    "CNOT": 2, "CZ": 2, "SWAP": 2,
    "CCNOT": 3, "CCZ": 3, "CSWAP": 3,
}


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector of ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        if dim == 0 or dim & (dim - 1):
            raise ValidationError(f"state length {dim} is not a power of two")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (|psi|^2 = {norm_sq!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "PureState":
        """Build a state, rescaling to unit norm unless ``normalize`` is False."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValidationError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps)

    @classmethod
    def from_bits(cls, bits: str) -> "PureState":
        """Computational basis state, e.g. ``from_bits("01")``."""
        n = len(bits)
        amps = np.zeros(2**n, dtype=complex)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(amps)

    def to_json(self) -> list:
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]

    @classmethod
    def from_json(cls, data, normalize: bool = True) -> "PureState":
        """Parse a list of ``[re, im]`` pairs (bare reals are also accepted)."""
        return cls.from_amplitudes(parse_amplitudes(data), normalize=normalize)

    def __repr__(self) -> str:
        return f"PureState(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


def parse_amplitudes(data) -> np.ndarray:
    out = []
    for item in data:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise ValidationError(f"expected [re, im] pair, got {item!r}")
            out.append(complex(float(item[0]), float(item[1])))
        else:
            out.append(complex(item))
    return np.array(out, dtype=complex)


@dataclass(frozen=True)
class GateSpec:
    """A gate kind and the qubits it acts on, controls first."""

    kind: str
    qubit_indices: tuple[int, ...]

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in GATE_ARITY:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubit_indices)
        if len(qubits) != GATE_ARITY[kind]:
            raise ValidationError(
                f"{kind} takes {GATE_ARITY[kind]} qubit(s), got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise ValidationError(f"repeated qubit in {kind}{qubits}")
        if any(q < 0 for q in qubits):
            raise ValidationError(f"negative qubit index in {kind}{qubits}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubit_indices", qubits)

    def check(self, num_qubits: int) -> None:
        if max(self.qubit_indices) >= num_qubits:
            raise ValidationError(
                f"{self.kind}{self.qubit_indices} out of range for {num_qubits} qubits")

    def to_json(self) -> dict:
        return {"kind": self.kind, "qubits": list(self.qubit_indices)}


def gate(kind: str, *qubits: int) -> GateSpec:
    """Shorthand: ``gate("CNOT", 0, 1)``."""
    return GateSpec(kind, qubits)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[GateSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        gates = tuple(g if isinstance(g, GateSpec) else GateSpec(*g) for g in self.gates)
        for g in gates:
            g.check(self.num_qubits)
        object.__setattr__(self, "gates", gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise DimensionMismatchError("cannot concatenate circuits of different width")
        return Circuit(self.num_qubits, self.gates + other.gates)

    def to_json(self) -> list:
        return [g.to_json() for g in self.gates]

    @classmethod
    def from_json(cls, data: Iterable[Mapping], num_qubits: int | None = None) -> "Circuit":
        gates = tuple(GateSpec(d["kind"], tuple(d["qubits"])) for d in data)
        if num_qubits is None:
            num_qubits = 1 + max((max(g.qubit_indices) for g in gates), default=-1)
        return cls(num_qubits, gates)


def zero_state(n: int, max_qubits: int = MAX_QUBITS) -> PureState:
    if n < 0:
        raise ValidationError("qubit count must be non-negative")
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceeds the cap of {max_qubits}")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return PureState(amps)


def _permutation_block(k: int, mapping) -> np.ndarray:
    dim = 2**k
    block = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (k - 1 - j)) & 1 for j in range(k)]
        out = mapping(*bits)
        block[int("".join(map(str, out)), 2), col] = 1.0
    return block


def _phase_block(k: int, sign) -> np.ndarray:
    diag = []
    for col in range(2**k):
        bits = [(col >> (k - 1 - j)) & 1 for j in range(k)]
        diag.append(sign(*bits))
    return np.diag(np.array(diag, dtype=complex))


@lru_cache(maxsize=None)
def gate_block(kind: str) -> np.ndarray:
    """Local matrix of ``kind`` in the ordering of its qubit indices."""
    if kind == "H":
        block = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    elif kind == "X":
        block = np.array([[0, 1], [1, 0]], dtype=complex)
    elif kind == "Z":
        block = np.array([[1, 0], [0, -1]], dtype=complex)
    elif kind == "CNOT":
        block = _permutation_block(2, lambda x, y: (x, x ^ y))
    elif kind == "SWAP":
        block = _permutation_block(2, lambda x, y: (y, x))
    elif kind == "CZ":
        block = _phase_block(2, lambda x, y: (-1) ** (x & y))
    elif kind == "CCNOT":
        block = _permutation_block(3, lambda x, y, z: (x, y, (x & y) ^ z))
    elif kind == "CCZ":
        block = _phase_block(3, lambda x, y, z: (-1) ** (x & y & z))
    elif kind == "CSWAP":
        block = _permutation_block(3, lambda c, x, y: (c, y, x) if c else (c, x, y))
    else:
        raise ValidationError(f"unknown gate kind {kind!r}")
    block.flags.writeable = False
    return block


def _apply_block(amps: np.ndarray, n: int, block: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    k = len(qubits)
    tensor = np.moveaxis(amps.reshape((2,) * n), qubits, range(k))
    shape = tensor.shape
    out = (block @ tensor.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), qubits).reshape(-1)


def apply_gate(state: PureState, g: GateSpec) -> PureState:
    g.check(state.num_qubits)
    amps = _apply_block(state.amplitudes, state.num_qubits, gate_block(g.kind), g.qubit_indices)
    return PureState(amps)


def apply_circuit(state: PureState, circuit: Circuit) -> PureState:
    if circuit.num_qubits != state.num_qubits:
        raise DimensionMismatchError(
            f"circuit acts on {circuit.num_qubits} qubits, state has {state.num_qubits}")
    amps = state.amplitudes
    n = state.num_qubits
    for g in circuit.gates:
        amps = _apply_block(amps, n, gate_block(g.kind), g.qubit_indices)
    return PureState(amps)


def tensor_product(a: PureState, b: PureState, max_qubits: int = MAX_QUBITS) -> PureState:
    """Kronecker product with ``a`` on the most significant qubits."""
    n = a.num_qubits + b.num_qubits
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceeds the cap of {max_qubits}")
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def inner_product(a: PureState, b: PureState) -> complex:
    """``<a|b>``, conjugate-linear in the first argument."""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatchError(
            f"inner product of {a.num_qubits}- and {b.num_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _check_indices(state: PureState, qubit_indices: Sequence[int]) -> tuple[int, ...]:
    idx = tuple(int(q) for q in qubit_indices)
    if len(set(idx)) != len(idx):
        raise ValidationError(f"repeated qubit index in {idx}")
    if any(q < 0 or q >= state.num_qubits for q in idx):
        raise ValidationError(f"qubit index out of range in {idx}")
    return idx


def marginal_probabilities(state: PureState, qubit_indices: Sequence[int]) -> np.ndarray:
    """Probabilities of each bitstring on ``qubit_indices``, as a flat array.

    Entry ``j`` is the probability that the measured bits, read in the order
    given, spell the binary expansion of ``j``.
    """
    idx = _check_indices(state, qubit_indices)
    n, k = state.num_qubits, len(idx)
    probs = np.abs(state.amplitudes) ** 2
    tensor = np.moveaxis(probs.reshape((2,) * n), idx, range(k))
    return tensor.reshape(2**k, -1).sum(axis=1)


def _bitstring(j: int, k: int) -> str:
    return format(j, f"0{k}b") if k else ""


def outcome_distribution(state: PureState, qubit_indices: Sequence[int]) -> dict[str, float]:
    """Map each bitstring with non-negligible probability to that probability."""
    probs = marginal_probabilities(state, qubit_indices)
    k = len(qubit_indices)
    return {_bitstring(j, k): float(p) for j, p in enumerate(probs) if p > 1e-15}


def sample_indices(probs: np.ndarray, size: int | None, rng: np.random.Generator):
    """Inverse-CDF sampling; one uniform draw per sample, so batched and
    one-at-a-time calls consume the stream identically."""
    cdf = np.cumsum(probs)
    u = rng.random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def measure(state: PureState, qubit_indices: Sequence[int], rng=None) -> tuple[str, PureState]:
    """Projectively measure ``qubit_indices``; return the bits and the collapsed state."""
    rng = np.random.default_rng(rng)
    idx = _check_indices(state, qubit_indices)
    probs = marginal_probabilities(state, idx)
    j = int(sample_indices(probs, None, rng))
    k, n = len(idx), state.num_qubits
    tensor = np.moveaxis(state.amplitudes.reshape((2,) * n), idx, range(k)).reshape(2**k, -1)
    projected = np.zeros_like(tensor)
    projected[j] = tensor[j] / np.sqrt(probs[j])
    amps = np.moveaxis(projected.reshape((2,) * n), range(k), idx).reshape(-1)
    return _bitstring(j, k), PureState(amps)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Matrix whose column ``k`` is the circuit applied to basis state ``k``."""
    n = circuit.num_qubits
    if n > MAX_UNITARY_QUBITS:
        raise CapacityError(f"circuit_unitary is limited to {MAX_UNITARY_QUBITS} qubits")
    dim = 2**n
    # columns evolve independently; carry them as a batch along a trailing axis
    batch = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        block = gate_block(g.kind)
        k = len(g.qubit_indices)
        tensor = np.moveaxis(batch.reshape((2,) * n + (dim,)), g.qubit_indices, range(k))
        shape = tensor.shape
        tensor = (block @ tensor.reshape(2**k, -1)).reshape(shape)
        batch = np.moveaxis(tensor, range(k), g.qubit_indices).reshape(dim, dim)
    return batch


def global_phase_deviation(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> float:
    """Largest entry of ``|u - theta*v|`` with the phase ``theta`` anchored at
    the first entry of ``v`` whose modulus exceeds ``tol``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatchError(f"cannot compare matrices of shape {u.shape} and {v.shape}")
    flat_v = v.reshape(-1)
    significant = np.flatnonzero(np.abs(flat_v) > tol)
    if significant.size == 0:
        return float(np.max(np.abs(u), initial=0.0))
    anchor = significant[0]
    ratio = u.reshape(-1)[anchor] / flat_v[anchor]
    if abs(ratio) == 0:
        return float(np.max(np.abs(u - v)))
    theta = ratio / abs(ratio)
    return float(np.max(np.abs(u - theta * v)))


def unitary_equiv_global_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    return global_phase_deviation(u, v, tol) <= tol
