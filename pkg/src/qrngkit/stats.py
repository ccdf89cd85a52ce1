"""Statistical tests and estimators for generated bitstrings.

Everything here is a pure function of its inputs. Tests return TestReport
values; estimators return plain numbers or small result records. Block-based
tests use non-overlapping blocks throughout, which keeps cells independent
and matches the usual definition of the normality criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc

from .bitstring import BitString, hamming_distance
from .exact import ExactDistribution
from .errors import UsageError
from .extractors import xor_offset

__all__ = [
    "TestReport",
    "ThetaEstimate",
    "chi2_uniformity",
    "borel_normality",
    "correlation_estimate",
    "exor_rate",
    "estimate_theta",
    "empirical_distribution",
]

DEFAULT_ALPHA = 0.01


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class, despite the name

    test_name: str
    statistic: float
    p_value: float | None
    passed: bool
    sample_size: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p_value is not None and not 0.0 <= self.p_value <= 1.0:
            raise UsageError("p-value outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "test": self.test_name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "passed": self.passed,
            "sample_size": self.sample_size,
            "params": dict(self.params),
        }


@dataclass(frozen=True)
class ThetaEstimate:
    theta: float
    stderr: float
    sample_size: int
    at_boundary: bool

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "stderr": self.stderr,
            "sample_size": self.sample_size,
            "at_boundary": self.at_boundary,
        }


def _block_values(bits: BitString, k: int) -> np.ndarray:
    """Integer values of the non-overlapping k-bit blocks, leftovers dropped."""
    blocks = len(bits) // k
    arr = bits.to_array()[: blocks * k].reshape(blocks, k)
    return arr @ (1 << np.arange(k - 1, -1, -1, dtype=np.int64))


def chi2_uniformity(bits: BitString, k: int, alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Chi-squared test that non-overlapping k-bit blocks are uniform.

    2^k cells, 2^k - 1 degrees of freedom; the p-value comes from the
    regularized upper incomplete gamma function, good to ~1e-15 absolute, so
    extreme misfits report genuinely tiny p-values instead of a clipped zero.
    Requires at least 100 blocks worth of bits per cell count (100 * 2^k).
    """
    if not 1 <= k <= 8:
        raise UsageError("block length k must lie in 1..8")
    if len(bits) < 100 * (1 << k):
        raise UsageError(
            f"need at least {100 * (1 << k)} bits for k={k}, got {len(bits)}"
        )
    values = _block_values(bits, k)
    counts = np.bincount(values, minlength=1 << k)
    expected = values.size / (1 << k)
    stat = float(((counts - expected) ** 2 / expected).sum())
    dof = (1 << k) - 1
    p = float(gammaincc(dof / 2.0, stat / 2.0))
    return TestReport(
        "chi2_uniformity", stat, p, p >= alpha, len(bits), {"k": k, "alpha": alpha}
    )


def borel_normality(bits: BitString) -> list[TestReport]:
    """Check all k-block frequencies against the finite-sample normality bound.

    For every k up to log2(log2(n)), each non-overlapping k-block frequency
    must deviate from 2^-k by strictly less than sqrt(log2(n)/n). Returns one
    report per k; the statistic is the worst deviation. There is no p-value,
    the bound itself is the criterion.
    """
    n = len(bits)
    if n < 64:
        raise UsageError("need at least 64 bits")
    k_max = int(math.floor(math.log2(math.log2(n))))
    bound = math.sqrt(math.log2(n) / n)
    reports = []
    for k in range(1, k_max + 1):
        values = _block_values(bits, k)
        freqs = np.bincount(values, minlength=1 << k) / values.size
        worst = float(np.abs(freqs - 0.5 ** k).max())
        reports.append(
            TestReport(
                "borel_normality", worst, None, worst < bound, n, {"k": k, "bound": bound}
            )
        )
    return reports


def correlation_estimate(x: BitString, y: BitString) -> float:
    """(#equal - #different)/n over aligned positions; lies in [-1, 1]."""
    if len(x) != len(y) or len(x) == 0:
        raise UsageError("need equal-length non-empty strings")
    d = hamming_distance(x, y)
    return (len(x) - 2 * d) / len(x)


def exor_rate(x: BitString, y: BitString, j: int = 0) -> float:
    """Fraction of ones in the offset-XOR of the two strings.

    At j = 0 this equals (1 - correlation_estimate)/2 identically.
    """
    z = xor_offset(x, y, j)
    return z.count(1) / len(z)


def estimate_theta(x: BitString, y: BitString) -> ThetaEstimate:
    """Invert the misalignment angle from the observed disagreement rate.

    Disagreements occur at rate sin^2(theta), so theta = arcsin(sqrt(rate)).
    The delta-method standard error is 1/(2 sqrt(n)) independent of the rate;
    a rate of exactly 0 or 1 pins the estimate to the boundary and sets the
    flag, since no finite-sample error bar is meaningful there.
    """
    if len(x) != len(y):
        raise UsageError("need equal-length strings")
    n = len(x)
    if n < 10_000:
        raise UsageError("need at least 10000 positions for a stable estimate")
    rate = exor_rate(x, y, 0)
    theta = math.asin(math.sqrt(min(max(rate, 0.0), 1.0)))
    return ThetaEstimate(theta, 1.0 / (2.0 * math.sqrt(n)), n, rate in (0.0, 1.0))


def empirical_distribution(samples, n: int) -> ExactDistribution:
    """Frequency-normalized law of equal-length samples.

    ``samples`` may be an iterable of BitString or a numpy integer array of
    string values (as produced in bulk by the simulator helpers).
    """
    if n < 1:
        raise UsageError("support length must be positive")
    size = 1 << n
    if isinstance(samples, np.ndarray):
        values = samples.astype(np.int64, copy=False)
        if values.size and (values.min() < 0 or values.max() >= size):
            raise UsageError(f"sample values outside the {n}-bit range")
    else:
        collected = []
        for s in samples:
            if len(s) != n:
                raise UsageError(f"sample of length {len(s)} in a length-{n} batch")
            collected.append(s.value)
        values = np.asarray(collected, dtype=np.int64)
    if values.size == 0:
        raise UsageError("need at least one sample")
    counts = np.bincount(values, minlength=size)
    return ExactDistribution(n, counts / values.size)
