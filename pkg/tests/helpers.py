"""Small statistical utilities shared across test modules."""

import math

import numpy as np
from scipy.special import gammaincc

from qrngkit import QrngConfig


def random_configs(count, seed):
    """Generator settings drawn away from the degenerate edges."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield QrngConfig(
            theta=float(rng.uniform(0.05, math.pi / 2 - 0.05)),
            e0_plus=float(rng.uniform(0.05, 1.0)),
            e1_plus=float(rng.uniform(0.05, 1.0)),
            e0_times=float(rng.uniform(0.05, 1.0)),
            e1_times=float(rng.uniform(0.05, 1.0)),
        )


def chi2_against(counts, probs) -> float:
    """p-value of the chi-squared fit of observed counts to given cell masses."""
    counts = np.asarray(counts, dtype=np.float64)
    expected = counts.sum() * np.asarray(probs, dtype=np.float64)
    stat = ((counts - expected) ** 2 / expected).sum()
    return float(gammaincc((counts.size - 1) / 2.0, stat / 2.0))


def coin_flips(key: int, n: int, p: float = 0.5) -> np.ndarray:
    """Deterministic Bernoulli(p) uint8 array from a counter-based generator."""
    rng = np.random.Generator(np.random.Philox(key=key))
    return (rng.random(n) < p).astype(np.uint8)
