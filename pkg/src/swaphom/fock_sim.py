"""Few-photon states of multimode bosonic fields.

A mode is an internal label ``i`` in ``[0, d)`` (frequency, time bin, OAM, ...)
together with a spatial path label.  States are sparse superpositions of
occupation vectors.  Passive elements conserve photon number, so no Fock
cutoff is needed: the reachable space is fixed by the input photon count.

The 50% beam splitter uses the real scattering matrix ``[[1, 1], [1, -1]]/sqrt(2)``
in the Heisenberg picture::

    a+(i, upper) -> (a+(r(i), upper) + a+(i, lower)) / sqrt(2)
    a+(i, lower) -> (a+(i, upper)    - a+(r(i), lower)) / sqrt(2)

where ``r`` is an involution applied to the reflected outputs (identity
unless the internal label changes under reflection, as OAM does).
"""
from __future__ import annotations

import csv
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import DimensionMismatchError, ValidationError

PRUNE_TOL = 1e-15
WAVEPACKET_NORM_TOL = 1e-6

UPPER, LOWER = "U", "D"


class Mode(NamedTuple):
    internal: int
    path: str


@dataclass(frozen=True)
class OccupationVector:
    """Photon counts per occupied mode, stored in canonical (sorted) order."""

    occupations: tuple[tuple[Mode, int], ...] = ()

    @classmethod
    def of(cls, counts: Mapping[Mode, int] | Iterable[tuple[Mode, int]]) -> "OccupationVector":
        items = counts.items() if isinstance(counts, Mapping) else counts
        merged: dict[Mode, int] = defaultdict(int)
        for mode, n in items:
            if n < 0:
                raise ValidationError(f"negative photon count for {mode}")
            merged[Mode(int(mode[0]), str(mode[1]))] += int(n)
        return cls(tuple(sorted((m, n) for m, n in merged.items() if n > 0)))

    @classmethod
    def from_modes(cls, modes: Iterable[Mode]) -> "OccupationVector":
        """One photon per listed mode; repeated modes accumulate."""
        return cls.of((m, 1) for m in modes)

    def count(self, mode: Mode) -> int:
        for m, n in self.occupations:
            if m == mode:
                return n
        return 0

    def on_path(self, path: str) -> int:
        return sum(n for m, n in self.occupations if m.path == path)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.occupations)

    @property
    def paths(self) -> frozenset[str]:
        return frozenset(m.path for m, _ in self.occupations)

    def __str__(self) -> str:
        if not self.occupations:
            return "|vac>"
        return "".join(f"|{m.internal}_{m.path}^{n}>" for m, n in self.occupations)


_VACUUM = OccupationVector()


def _pruned(terms: Mapping[OccupationVector, complex]) -> dict[OccupationVector, complex]:
    return {k: complex(a) for k, a in terms.items() if abs(a) >= PRUNE_TOL}


@dataclass(frozen=True, eq=False)
class FockSuperposition:
    terms: Mapping[OccupationVector, complex]
    internal_dim: int

    def __post_init__(self):
        if self.internal_dim < 1:
            raise ValidationError("internal dimension must be at least 1")
        for occ in self.terms:
            for mode, _ in occ.occupations:
                if not 0 <= mode.internal < self.internal_dim:
                    raise ValidationError(
                        f"internal label {mode.internal} outside [0, {self.internal_dim})")
        object.__setattr__(self, "terms", _pruned(self.terms))

    @classmethod
    def _trusted(cls, terms: dict[OccupationVector, complex], internal_dim: int) -> "FockSuperposition":
        # internal constructor for element outputs whose labels are known valid
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", _pruned(terms))
        object.__setattr__(obj, "internal_dim", internal_dim)
        return obj

    @classmethod
    def vacuum(cls, internal_dim: int = 1) -> "FockSuperposition":
        return cls({_VACUUM: 1.0}, internal_dim)

    def amplitude(self, occ: OccupationVector | Mapping[Mode, int]) -> complex:
        if not isinstance(occ, OccupationVector):
            occ = OccupationVector.of(occ)
        return self.terms.get(occ, 0j)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    @property
    def paths(self) -> frozenset[str]:
        out: set[str] = set()
        for occ in self.terms:
            out |= occ.paths
        return frozenset(out)

    def photon_numbers(self) -> set[int]:
        return {occ.total for occ in self.terms}

    def distance(self, other: "FockSuperposition") -> float:
        """Max-entry distance between the two amplitude maps."""
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.amplitude(k) - other.amplitude(k)) for k in keys), default=0.0)

    def to_json(self) -> list:
        return [
            {
                "occupations": [[m.internal, m.path, n] for m, n in occ.occupations],
                "amp": [a.real, a.imag],
            }
            for occ, a in sorted(self.terms.items(), key=lambda kv: kv[0].occupations)
        ]

    @classmethod
    def from_json(cls, data: Sequence[Mapping], internal_dim: int) -> "FockSuperposition":
        terms: dict[OccupationVector, complex] = defaultdict(complex)
        for item in data:
            occ = OccupationVector.of((Mode(i, p), n) for i, p, n in item["occupations"])
            re, im = item["amp"]
            terms[occ] += complex(re, im)
        return cls(terms, internal_dim)

    def __str__(self) -> str:
        return " + ".join(f"({a:.6g}){occ}" for occ, a in self.terms.items()) or "0"


def single_photon(internal_amplitudes, path: str, internal_dim: int | None = None) -> FockSuperposition:
    """``sum_i alpha_i a+(i, path)|vac>``, renormalized."""
    alpha = np.asarray(internal_amplitudes, dtype=complex).reshape(-1)
    d = alpha.size if internal_dim is None else internal_dim
    if alpha.size != d:
        raise DimensionMismatchError(f"{alpha.size} amplitudes for internal dimension {d}")
    norm = np.linalg.norm(alpha)
    if norm == 0:
        raise ValidationError("photon amplitudes must not all vanish")
    alpha = alpha / norm
    terms = {OccupationVector.of({Mode(i, path): 1}): a for i, a in enumerate(alpha)}
    return FockSuperposition(terms, d)


def product(a: FockSuperposition, b: FockSuperposition) -> FockSuperposition:
    """Joint state of two independently prepared fields on disjoint paths."""
    if a.internal_dim != b.internal_dim:
        raise DimensionMismatchError(
            f"internal dimensions differ: {a.internal_dim} vs {b.internal_dim}")
    shared = a.paths & b.paths
    if shared:
        raise ValidationError(f"states share path(s) {sorted(shared)}")
    terms: dict[OccupationVector, complex] = {}
    for (oa, xa), (ob, xb) in itertools.product(a.terms.items(), b.terms.items()):
        terms[OccupationVector(tuple(sorted(oa.occupations + ob.occupations)))] = xa * xb
    return FockSuperposition(terms, a.internal_dim)


def apply_creation(state: FockSuperposition, mode: Mode) -> FockSuperposition:
    """``a+|n> = sqrt(n+1)|n+1>`` on every term; the result is not renormalized."""
    mode = Mode(int(mode[0]), str(mode[1]))
    terms: dict[OccupationVector, complex] = {}
    for occ, amp in state.terms.items():
        n = occ.count(mode)
        raised = OccupationVector.of(list(occ.occupations) + [(mode, 1)])
        terms[raised] = amp * math.sqrt(n + 1)
    return FockSuperposition(terms, state.internal_dim)


def _as_involution(reflect, d: int) -> tuple[int, ...]:
    if reflect is None:
        return tuple(range(d))
    table = tuple(reflect(i) for i in range(d)) if callable(reflect) else tuple(reflect)
    if len(table) != d or sorted(table) != list(range(d)):
        raise ValidationError("reflect must be a permutation of the internal labels")
    if any(table[table[i]] != i for i in range(d)):
        raise ValidationError("reflect must be an involution")
    return table


def _expand(state: FockSuperposition,
            substitute: Callable[[Mode], list[tuple[Mode, float]] | None]) -> FockSuperposition:
    """Heisenberg-picture evolution of a linear optical element.

    Each term is rewritten as a monomial of creation operators acting on the
    vacuum, every factor is replaced by its image under ``substitute`` (None
    leaves the mode untouched), and the product is expanded back into
    normalized Fock states.
    """
    images: dict[Mode, tuple] = {}
    out: dict[tuple[Mode, ...], complex] = defaultdict(complex)
    for occ, amp in state.terms.items():
        coeff = amp
        factors = []
        for mode, n in occ.occupations:
            if n > 1:
                coeff /= math.sqrt(math.factorial(n))
            image = images.get(mode)
            if image is None:
                image = images[mode] = tuple(substitute(mode) or ((mode, 1.0),))
            factors.extend([image] * n)
        for choice in itertools.product(*factors):
            c = coeff
            modes = []
            for m, w in choice:
                c *= w
                modes.append(m)
            modes.sort()
            out[tuple(modes)] += c
    terms: dict[OccupationVector, complex] = {}
    for modes, c in out.items():
        if abs(c) < PRUNE_TOL:
            continue
        items = []
        for mode, group in itertools.groupby(modes):
            k = sum(1 for _ in group)
            if k > 1:
                c *= math.sqrt(math.factorial(k))
            items.append((mode, k))
        terms[OccupationVector(tuple(items))] = c
    return FockSuperposition._trusted(terms, state.internal_dim)


_INV_SQRT2 = 1 / math.sqrt(2)


def beam_splitter(state: FockSuperposition, upper: str = UPPER, lower: str = LOWER,
                  reflect=None) -> FockSuperposition:
    """50% beam splitter between paths ``upper`` and ``lower``.

    ``reflect`` is an involution on internal labels (callable or lookup
    sequence) applied to the reflected outputs; by default the identity.
    """
    if upper == lower:
        raise ValidationError("beam splitter needs two distinct paths")
    r = _as_involution(reflect, state.internal_dim)

    def substitute(mode: Mode):
        i = mode.internal
        if mode.path == upper:
            return [(Mode(r[i], upper), _INV_SQRT2), (Mode(i, lower), _INV_SQRT2)]
        if mode.path == lower:
            return [(Mode(i, upper), _INV_SQRT2), (Mode(r[i], lower), -_INV_SQRT2)]
        return None

    return _expand(state, substitute)


def phase_shift(state: FockSuperposition, path: str, theta: float) -> FockSuperposition:
    """Multiply each term by ``exp(i*theta*n)`` with ``n`` photons on ``path``."""
    terms = {occ: amp * np.exp(1j * theta * occ.on_path(path)) for occ, amp in state.terms.items()}
    return FockSuperposition._trusted(terms, state.internal_dim)


def cross_phase(state: FockSuperposition, path_a: str, path_b: str) -> FockSuperposition:
    """Idealized optical CZ: sign ``(-1)**(n_a * n_b)`` on each term."""
    terms = {
        occ: -amp if (occ.on_path(path_a) * occ.on_path(path_b)) % 2 else amp
        for occ, amp in state.terms.items()
    }
    return FockSuperposition._trusted(terms, state.internal_dim)


@dataclass(frozen=True)
class DetectorStats:
    """Click statistics of two binary (non photon-counting) detectors."""

    p_upper_only: float
    p_lower_only: float
    p_coincidence: float
    p_none: float

    def to_dict(self) -> dict:
        return {
            "p_upper_only": self.p_upper_only,
            "p_lower_only": self.p_lower_only,
            "p_coincidence": self.p_coincidence,
            "p_none": self.p_none,
        }


def detector_stats(state: FockSuperposition, upper: str = UPPER, lower: str = LOWER) -> DetectorStats:
    p = np.zeros((2, 2))
    for occ, amp in state.terms.items():
        p[int(occ.on_path(upper) > 0), int(occ.on_path(lower) > 0)] += abs(amp) ** 2
    total = p.sum()
    if total == 0:
        raise ValidationError("zero state has no detector statistics")
    p /= total
    return DetectorStats(
        p_upper_only=float(p[1, 0]),
        p_lower_only=float(p[0, 1]),
        p_coincidence=float(p[1, 1]),
        p_none=float(p[0, 0]),
    )


def photon_count_distribution(state: FockSuperposition, paths: Sequence[str]) -> dict[tuple[int, ...], float]:
    """Joint distribution of total photon numbers on each of ``paths``."""
    out: dict[tuple[int, ...], float] = defaultdict(float)
    for occ, amp in state.terms.items():
        out[tuple(occ.on_path(p) for p in paths)] += abs(amp) ** 2
    total = sum(out.values())
    return {k: v / total for k, v in sorted(out.items())}


def oam_index(ell: int, internal_dim: int) -> int:
    """Internal label for winding number ``ell`` in a symmetric set ``-L..L``."""
    if internal_dim % 2 == 0:
        raise ValidationError("OAM label sets -L..L have odd size")
    half = internal_dim // 2
    if abs(ell) > half:
        raise ValidationError(f"|ell|={abs(ell)} exceeds {half}")
    return ell + half


def oam_reflection(internal_dim: int) -> tuple[int, ...]:
    """The involution ``ell -> -ell`` on labels produced by :func:`oam_index`."""
    oam_index(0, internal_dim)
    return tuple(internal_dim - 1 - i for i in range(internal_dim))


def _normalized_wavepacket(xi: np.ndarray, dt: float) -> np.ndarray:
    norm_sq = float(trapezoid(np.abs(xi) ** 2, dx=dt))
    if abs(norm_sq - 1.0) > WAVEPACKET_NORM_TOL:
        raise ValidationError(
            f"wavepacket norm {norm_sq!r} deviates from 1 by more than {WAVEPACKET_NORM_TOL}")
    return xi / math.sqrt(norm_sq)


def wavepacket_coincidence(xi1, xi2, dt: float) -> float:
    """Coincidence probability ``(1 - |int conj(xi1) xi2 dt|^2) / 2`` for two
    sampled single-photon wavepackets on a common uniform grid."""
    xi1 = np.asarray(xi1, dtype=complex).reshape(-1)
    xi2 = np.asarray(xi2, dtype=complex).reshape(-1)
    if xi1.size != xi2.size:
        raise DimensionMismatchError(f"wavepackets have {xi1.size} and {xi2.size} samples")
    if xi1.size < 2:
        raise ValidationError("need at least two samples")
    if not dt > 0:
        raise ValidationError("sample spacing must be positive")
    xi1 = _normalized_wavepacket(xi1, dt)
    xi2 = _normalized_wavepacket(xi2, dt)
    overlap = trapezoid(np.conj(xi1) * xi2, dx=dt)
    return float(min(max((1.0 - abs(overlap) ** 2) / 2, 0.0), 0.5))


def load_wavepacket_csv(path) -> tuple[np.ndarray, float]:
    """Read ``t, re[, im]`` rows; returns the complex samples and the spacing.

    Rows that do not parse as numbers (headers, ``#`` comments) are skipped.
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                values = [float(x) for x in row if x.strip()]
            except ValueError:
                continue
            if len(values) not in (2, 3):
                raise ValidationError(f"expected 2 or 3 columns, got {len(values)}")
            rows.append(values + [0.0] * (3 - len(values)))
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least two samples")
    data = np.array(rows)
    t = data[:, 0]
    steps = np.diff(t)
    dt = float(steps.mean())
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ValidationError(f"{path}: time samples must be uniformly increasing")
    return data[:, 1] + 1j * data[:, 2], dt
