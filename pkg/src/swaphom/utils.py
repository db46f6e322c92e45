"""Random-stream helpers shared by the samplers and the verification harness."""
from __future__ import annotations

import numpy as np


def derive_rng(seed: int, k: int) -> np.random.Generator:
    """Independent stream ``k`` derived from a master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(k)]))


def random_amplitudes(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector: complex Gaussian entries, then normalized."""
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
