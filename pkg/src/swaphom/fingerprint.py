"""Single-photon quantum fingerprints built from binary linear codes.

The fingerprint of a message ``x`` is ``|h_x> = m**-0.5 * sum_i (-1)**E_i(x) |i>``
with ``E(x) = x G`` over GF(2).  Two fingerprints overlap by
``1 - 2*hamming(E(x), E(y))/m``, so a code whose nonzero codewords all have
weight close to ``m/2`` gives nearly orthogonal fingerprints.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import protocols
from .exceptions import CapacityError, DimensionMismatchError, ValidationError
from .qubit_sim import sample_indices
from .utils import derive_rng

MAX_EXHAUSTIVE_K = 20
BACKENDS = ("circuit", "optical")


@dataclass(frozen=True, eq=False)
class Code:
    """Binary linear code with generator rows as basis codewords.

    ``delta`` is a certified bound on ``|<h_x|h_y>|`` over distinct messages.
    """

    n_bits: int
    m: int
    generator: np.ndarray
    delta: float

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=np.uint8)
        if g.shape != (self.n_bits, self.m):
            raise ValidationError(f"generator shape {g.shape} != ({self.n_bits}, {self.m})")
        g.flags.writeable = False
        object.__setattr__(self, "generator", g)

    def to_dict(self) -> dict:
        return {"k": self.n_bits, "m": self.m, "delta": self.delta}


class Comparison(str, enum.Enum):
    EQUAL = "Equal"
    DIFFERENT = "Different"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ComparisonResult:
    verdict: Comparison
    rounds_used: int
    fail_round: int | None


@dataclass(frozen=True, eq=False)
class FingerprintState:
    amplitudes: np.ndarray

    @property
    def m(self) -> int:
        return self.amplitudes.size


def _as_generator(generator) -> np.ndarray:
    g = np.atleast_2d(np.asarray(generator))
    if g.ndim != 2 or g.size == 0:
        raise ValidationError("generator must be a non-empty 2-D 0/1 matrix")
    if not np.isin(g, (0, 1)).all():
        raise ValidationError("generator entries must be 0 or 1")
    return g.astype(np.uint8)


def _message_bits(x, k: int) -> np.ndarray:
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise ValidationError(f"message {x!r} is not a bitstring")
        bits = np.array([int(c) for c in x], dtype=np.uint8)
    else:
        bits = np.asarray(x, dtype=np.uint8).reshape(-1)
        if not np.isin(bits, (0, 1)).all():
            raise ValidationError("message entries must be 0 or 1")
    if bits.size != k:
        raise DimensionMismatchError(f"message has {bits.size} bits, code expects {k}")
    return bits


def encode(code: Code, x) -> np.ndarray:
    """Codeword ``x G`` over GF(2); bit 0 of ``x`` selects generator row 0."""
    bits = _message_bits(x, code.n_bits)
    return (bits.astype(np.int64) @ code.generator) % 2


def _codeword_weights(g: np.ndarray, chunk: int = 1 << 14):
    k = g.shape[0]
    g64 = g.astype(np.int64)
    shifts = np.arange(k - 1, -1, -1)
    for start in range(1, 2**k, chunk):
        msgs = np.arange(start, min(start + chunk, 2**k))
        bits = (msgs[:, None] >> shifts) & 1
        yield ((bits @ g64) % 2).sum(axis=1)


def code_delta(code) -> float:
    """Exhaustive ``max |1 - 2 wt(E(z))/m|`` over nonzero messages ``z``.

    By linearity this is the largest fingerprint overlap magnitude between
    distinct messages.  Accepts a :class:`Code` or a bare generator matrix.
    """
    g = code.generator if isinstance(code, Code) else _as_generator(code)
    k, m = g.shape
    if k > MAX_EXHAUSTIVE_K:
        raise CapacityError(f"exhaustive enumeration limited to k <= {MAX_EXHAUSTIVE_K}")
    worst = 0
    for weights in _codeword_weights(g):
        worst = max(worst, int(np.abs(m - 2 * weights).max()))
    # single division keeps rational bounds such as 1/7 exact in floating point
    return worst / m


def linear_code(generator) -> Code:
    """Code from an explicit generator; rejects codes that cannot separate messages."""
    g = _as_generator(generator)
    delta = code_delta(g)
    if delta >= 1.0:
        raise ValidationError(
            "code has delta = 1: some distinct messages give identical or antipodal "
            "fingerprints, which no SWAP test can tell apart")
    return Code(n_bits=g.shape[0], m=g.shape[1], generator=g, delta=delta)


def simplex_code(k: int) -> Code:
    """The [2**k - 1, k] simplex code; column ``j`` (1-based) is ``j`` in binary."""
    if not 2 <= k <= 16:
        raise ValidationError(f"simplex code needs 2 <= k <= 16, got {k}")
    m = 2**k - 1
    cols = np.arange(1, m + 1)
    g = ((cols[None, :] >> np.arange(k - 1, -1, -1)[:, None]) & 1).astype(np.uint8)
    return Code(n_bits=k, m=m, generator=g, delta=1 / m)


def load_generator(path) -> np.ndarray:
    """Read a generator matrix written as one row of 0/1 characters per line."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].replace(" ", "").replace(",", "").strip()
            if line:
                rows.append([int(c) for c in line])
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{path}: rows must be non-empty and of equal length")
    return _as_generator(rows)


def fingerprint_state(code: Code, x) -> FingerprintState:
    signs = 1.0 - 2.0 * encode(code, x)
    return FingerprintState(signs / np.sqrt(code.m))


def fingerprint_overlap(code: Code, x, y) -> float:
    cx, cy = encode(code, x), encode(code, y)
    return 1.0 - 2.0 * int(np.sum(cx != cy)) / code.m


def false_equal_bound(delta: float, rounds: int) -> float:
    """Chance that unequal messages pass every one of ``rounds`` tests."""
    if not 0.0 <= delta <= 1.0:
        raise ValidationError(f"delta={delta!r} outside [0, 1]")
    if rounds < 0:
        raise ValidationError("rounds must be non-negative")
    return ((1.0 + delta**2) / 2.0) ** rounds


def _padded(amps: np.ndarray) -> np.ndarray:
    size = 1 << max(1, (amps.size - 1).bit_length())
    out = np.zeros(size, dtype=complex)
    out[: amps.size] = amps
    return out


@lru_cache(maxsize=4096)
def _round_distribution(backend: str, cx: tuple, cy: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-round record probabilities and fail flags for one message pair."""
    m = len(cx)
    hx = (1.0 - 2.0 * np.array(cx)) / np.sqrt(m)
    hy = (1.0 - 2.0 * np.array(cy)) / np.sqrt(m)
    if backend == "circuit":
        # zero padding to a power of two leaves every overlap unchanged
        phi = protocols.amplitudes_to_state(_padded(hx))
        stats = protocols.destructive_swap_test(phi, protocols.amplitudes_to_state(_padded(hy)))
        n = phi.num_qubits
        probs = np.zeros(4**n)
        for bits, p in stats.outcome_distribution.items():
            probs[int(bits, 2)] = p
        return probs, protocols.verdict_table(n)
    det, _ = protocols.hom_swap_test(hx, hy)
    return protocols.hom_click_probabilities(det), np.array([False, False, False, True])


def round_fail_probability(code: Code, x, y, backend: str = "optical") -> float:
    """Exact probability that a single round reports Fail."""
    probs, fail = _round_distribution(_check_backend(backend), *_codewords(code, x, y))
    return float(probs[fail].sum())


def _check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ValidationError(f"backend must be one of {BACKENDS}, got {backend!r}")
    return backend


def _codewords(code: Code, x, y) -> tuple[tuple, tuple]:
    return tuple(int(b) for b in encode(code, x)), tuple(int(b) for b in encode(code, y))


def compare_strings(code: Code, x, y, rounds: int, backend: str = "optical",
                    rng=None) -> ComparisonResult:
    """Compare two messages with up to ``rounds`` sampled tests on fresh copies.

    Reports Different at the first failing round; ``fail_round`` is 1-based.
    One uniform draw is taken per round, including rounds after a failure,
    so the stream position after a call depends only on ``rounds``.
    """
    _check_backend(backend)
    if rounds < 1:
        raise ValidationError("rounds must be at least 1")
    rng = np.random.default_rng(rng)
    probs, fail = _round_distribution(backend, *_codewords(code, x, y))
    records = sample_indices(probs, rounds, rng)
    failed = np.flatnonzero(fail[records])
    if failed.size:
        first = int(failed[0]) + 1
        return ComparisonResult(Comparison.DIFFERENT, first, first)
    return ComparisonResult(Comparison.EQUAL, rounds, None)


def compare_batch(code: Code, pairs: Sequence[tuple], rounds: int, backend: str = "optical",
                  seed: int = 0) -> list[ComparisonResult]:
    """Run :func:`compare_strings` on each pair with its own derived stream."""
    return [
        compare_strings(code, x, y, rounds, backend, derive_rng(seed, i))
        for i, (x, y) in enumerate(pairs)
    ]

