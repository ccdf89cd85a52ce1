"""Exact output distributions of the entangled-pair generator.

Two independent routes are kept deliberately separate so they can check each
other. The enumeration route (`joint_distribution`, `xor_distribution`) sums
per-pair weights over the full outcome space and normalizes by the brute
total. The closed-form route (`pair_prob`, `marginal_bias`, `xor_bias`,
`xor_distribution_closed_form`) evaluates the analytic formulas directly.

Single-pair law
---------------
With s = sin^2(theta), c = cos^2(theta) and efficiency weights e, a joint
outcome (a, b) of the two contexts has probability

    P(a, b) = s^(a XOR b) * c^(1 - a XOR b) * e_a_plus * e_b_times / Z1,

Z1 being the sum of the four numerators. Strings of n pairs are i.i.d.
across positions, so the n-pair law factorizes; the enumeration route does
not rely on that and recovers it as a property.

The offset-XOR output z (z_i = x_i XOR y_{i+j}, strings of length n + j) has
distribution `xor_distribution(n, j, cfg)`. At j = 0 it collapses to a
constantly biased product law, `xor_distribution_closed_form`; at j >= 1 and
equal efficiencies it is exactly uniform.

Dense storage: a distribution over n-bit strings is an array indexed by the
integer value of the string (leftmost bit most significant); a distribution
over pairs of strings is the corresponding 2-d array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bitstring import BitString
from .config import QrngConfig
from .errors import ResourceBudgetError, UsageError

__all__ = [
    "ENUMERATION_CAP",
    "BiasParams",
    "ExactDistribution",
    "pair_prob",
    "pair_prob_table",
    "joint_distribution",
    "marginal_bias",
    "xor_bias",
    "xor_distribution",
    "xor_distribution_closed_form",
    "tv_distance",
    "l1_distance",
    "xor_expectation_quantum",
    "xor_expectation_classical",
    "taylor_gap",
]

# Enumerating the XOR'd law touches 2^(2(n+j)) weight terms; n + j = 12 keeps
# that at 2^24, a few seconds of array work. Callers may raise the cap.
ENUMERATION_CAP = 12

_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class BiasParams:
    """Zero/one probabilities of a constantly biased source."""

    p0: float
    p1: float

    def __post_init__(self):
        if self.p0 < 0 or self.p1 < 0:
            raise UsageError("bias probabilities must be non-negative")
        if abs(self.p0 + self.p1 - 1.0) > _NORMALIZATION_TOL:
            raise UsageError(f"bias probabilities must sum to 1, got {self.p0 + self.p1}")


class ExactDistribution:
    """Explicit mass function over n-bit strings or over pairs of them.

    `probs` has shape (2**n,) for a single-string law and (2**n, 2**n) for a
    joint law over (x, y). Index = integer value of the string.
    """

    __slots__ = ("n", "probs")

    def __init__(self, n: int, probs: np.ndarray):
        if n < 1:
            raise UsageError("support length must be positive")
        probs = np.ascontiguousarray(probs, dtype=np.float64)
        size = 1 << n
        if probs.shape not in ((size,), (size, size)):
            raise UsageError(f"probs shape {probs.shape} does not match n={n}")
        if probs.min(initial=0.0) < 0.0:
            raise UsageError("negative mass")
        total = float(probs.sum())
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise UsageError(f"mass must sum to 1 within {_NORMALIZATION_TOL}, got {total!r}")
        probs.setflags(write=False)
        self.n = n
        self.probs = probs

    # --- constructors -----------------------------------------------------

    @classmethod
    def uniform(cls, n: int) -> "ExactDistribution":
        size = 1 << n
        return cls(n, np.full(size, 1.0 / size))

    @classmethod
    def from_bias(cls, bias: BiasParams, n: int) -> "ExactDistribution":
        """Product law of n independent draws from ``bias``."""
        ones = _popcounts(np.arange(1 << n, dtype=np.uint32))
        probs = (bias.p1 ** ones) * (bias.p0 ** (n - ones))
        return cls(n, probs)

    # --- accessors ----------------------------------------------------------

    @property
    def is_pair(self) -> bool:
        return self.probs.ndim == 2

    def prob(self, z: BitString) -> float:
        if self.is_pair:
            raise UsageError("joint law indexed by a pair of strings; use prob_pair")
        if len(z) != self.n:
            raise UsageError(f"string length {len(z)} does not match support {self.n}")
        return float(self.probs[z.value])

    def prob_pair(self, x: BitString, y: BitString) -> float:
        if not self.is_pair:
            raise UsageError("single-string law; use prob")
        if len(x) != self.n or len(y) != self.n:
            raise UsageError("string lengths do not match support")
        return float(self.probs[x.value, y.value])

    def __getitem__(self, idx) -> float:
        return float(self.probs[idx])

    def support(self):
        """Yield (index, text form, probability) over single-string support."""
        if self.is_pair:
            raise UsageError("support iteration is for single-string laws")
        for i, p in enumerate(self.probs):
            yield i, BitString.from_index(i, self.n).to01(), float(p)

    def deviation_from_uniform(self) -> np.ndarray:
        if self.is_pair:
            raise UsageError("uniform deviation is for single-string laws")
        return self.probs - 1.0 / (1 << self.n)

    # --- cylinder queries on joint laws -------------------------------------

    def marginal(self, side: str) -> "ExactDistribution":
        """Discard one string of a joint law; ``side`` names the kept one."""
        if not self.is_pair:
            raise UsageError("marginal is for joint laws")
        if side == "plus":
            return ExactDistribution(self.n, self.probs.sum(axis=1))
        if side == "times":
            return ExactDistribution(self.n, self.probs.sum(axis=0))
        raise UsageError("side must be 'plus' or 'times'")

    def prefix_prob(self, xp: BitString, yp: BitString) -> float:
        """Probability that x starts with ``xp`` and y starts with ``yp``."""
        if not self.is_pair:
            raise UsageError("prefix_prob is for joint laws")
        k = len(xp)
        if len(yp) != k or k > self.n:
            raise UsageError("prefixes must have equal length <= n")
        rest = 1 << (self.n - k)
        block = self.probs.reshape(1 << k, rest, 1 << k, rest)
        return float(block[xp.value, :, yp.value, :].sum())

    def infix_prob(self, offset: int, x: BitString, y: BitString) -> float:
        """Probability that positions offset..offset+L-1 equal ``x`` and ``y``."""
        if not self.is_pair:
            raise UsageError("infix_prob is for joint laws")
        L = len(x)
        if len(y) != L or offset < 0 or offset + L > self.n:
            raise UsageError("infix placement out of range")
        values = np.arange(1 << self.n, dtype=np.uint32)
        shift = self.n - offset - L
        mid = (values >> shift) & ((1 << L) - 1)
        selx = mid == x.value
        sely = mid == y.value
        return float(self.probs[np.ix_(selx, sely)].sum())


# --- closed forms ----------------------------------------------------------


def _pair_weights(cfg: QrngConfig):
    """Unnormalized single-pair weights w[a][b] and their fixed-order sum Z1."""
    s = math.sin(cfg.theta) ** 2
    c = math.cos(cfg.theta) ** 2
    w00 = c * cfg.e0_plus * cfg.e0_times
    w01 = s * cfg.e0_plus * cfg.e1_times
    w10 = s * cfg.e1_plus * cfg.e0_times
    w11 = c * cfg.e1_plus * cfg.e1_times
    z1 = w00 + w01 + w10 + w11
    return (w00, w01, w10, w11), z1


def pair_prob(a: int, b: int, cfg: QrngConfig) -> float:
    """Probability of the joint outcome (a, b) for one detected pair."""
    if a not in (0, 1) or b not in (0, 1):
        raise UsageError("outcomes must be bits")
    w, z1 = _pair_weights(cfg)
    return w[2 * a + b] / z1


def pair_prob_table(cfg: QrngConfig) -> np.ndarray:
    """All four pair probabilities as a 2x2 array indexed [a, b]."""
    w, z1 = _pair_weights(cfg)
    return np.array(w, dtype=np.float64).reshape(2, 2) / z1


def marginal_bias(cfg: QrngConfig, side: str = "plus") -> BiasParams:
    """Bias of one string when the other is discarded.

    Each kept string is i.i.d. with

        p0 = e0 * (e1' * sin^2 + e0' * cos^2) / Z1,

    primes marking the discarded side's efficiencies; at theta = pi/4 (or
    equal efficiencies on the discarded side) this collapses to
    e0 / (e0 + e1).
    """
    (w00, w01, w10, w11), z1 = _pair_weights(cfg)
    if side == "plus":
        n0, n1 = w00 + w01, w10 + w11
    elif side == "times":
        n0, n1 = w00 + w10, w01 + w11
    else:
        raise UsageError("side must be 'plus' or 'times'")
    return BiasParams(n0 / z1, n1 / z1)


def xor_bias(cfg: QrngConfig) -> BiasParams:
    """Bias of a single XOR'd bit at offset zero.

    p1 = sin^2(theta) * (e0+ e1x + e1+ e0x) / Z1 and p0 is the complementary
    cos^2 term; the j = 0 output law is the product of these.
    """
    (w00, w01, w10, w11), z1 = _pair_weights(cfg)
    return BiasParams((w00 + w11) / z1, (w01 + w10) / z1)


def xor_distribution_closed_form(n: int, cfg: QrngConfig) -> ExactDistribution:
    """Closed form of the j = 0 XOR output law: mass(z) = p1^#1(z) * p0^#0(z)."""
    if n < 1:
        raise UsageError("n must be positive")
    return ExactDistribution.from_bias(xor_bias(cfg), n)


# --- enumeration route -------------------------------------------------------


def _popcounts(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values).astype(np.int64)


def _check_budget(total_bits: int, cap: int):
    if total_bits > cap:
        raise ResourceBudgetError(
            f"enumeration over {total_bits}-bit strings exceeds the cap of {cap}; "
            "raise max_bits explicitly if you really want this"
        )


def _position_weights(m: int, cfg: QrngConfig):
    """Per-string efficiency weights and per-distance angle factors for length m."""
    exps = np.arange(m + 1, dtype=np.float64)
    s = math.sin(cfg.theta) ** 2
    c = math.cos(cfg.theta) ** 2
    spow = s ** exps
    cpow = c ** exps
    ones = _popcounts(np.arange(1 << m, dtype=np.uint32))
    wplus = (cfg.e0_plus ** (m - ones)) * (cfg.e1_plus ** ones)
    wtimes = (cfg.e0_times ** (m - ones)) * (cfg.e1_times ** ones)
    return ones, spow, cpow, wplus, wtimes


def joint_distribution(n: int, cfg: QrngConfig, max_bits: int = ENUMERATION_CAP) -> ExactDistribution:
    """Joint law of the two n-bit strings, by full enumeration.

    The weight of (x, y) is s^d * c^(n-d) times the per-detector efficiency
    weights, d the Hamming distance; normalization divides by the brute sum
    of all 4^n weights rather than by the analytic Z1^n, so this stays an
    independent oracle for the closed forms.
    """
    if n < 1:
        raise UsageError("n must be positive")
    _check_budget(n, max_bits)
    values = np.arange(1 << n, dtype=np.uint32)
    _, spow, cpow, wplus, wtimes = _position_weights(n, cfg)
    d = np.bitwise_count(values[:, None] ^ values[None, :])
    weights = spow[d] * cpow[n - d] * wplus[:, None] * wtimes[None, :]
    return ExactDistribution(n, weights / weights.sum())


class _KahanArray:
    """Per-index compensated accumulator; merge order is the caller's block order."""

    def __init__(self, size: int):
        self.total = np.zeros(size)
        self._comp = np.zeros(size)

    def add(self, part: np.ndarray):
        y = part - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


def xor_distribution(
    n: int, j: int, cfg: QrngConfig, max_bits: int = ENUMERATION_CAP
) -> ExactDistribution:
    """Law of the offset-XOR output, by full enumeration.

    Every pair (x, y) of (n+j)-bit strings contributes its joint-law weight to
    the n-bit string z with z_i = x_i XOR y_{i+j}; x's trailing j bits and y's
    leading j bits are marginalized out. Enumeration runs over fixed-size
    blocks of x values with compensated cross-block accumulation, so results
    do not depend on the block partitioning.
    """
    if n < 1:
        raise UsageError("n must be positive")
    if j < 0:
        raise UsageError("offset j must be non-negative")
    m = n + j
    _check_budget(m, max_bits)
    values = np.arange(1 << m, dtype=np.uint32)
    _, spow, cpow, wplus, wtimes = _position_weights(m, cfg)
    mask = np.uint32((1 << n) - 1)
    z_of_x = values >> np.uint32(j)  # leading n bits of x
    z_of_y = values & mask           # trailing n bits of y

    acc = _KahanArray(1 << n)
    block_totals = []
    rows_per_block = max(1, (1 << 22) >> m)
    for start in range(0, 1 << m, rows_per_block):
        stop = min(start + rows_per_block, 1 << m)
        d = np.bitwise_count(values[start:stop, None] ^ values[None, :])
        w = spow[d] * cpow[m - d] * wplus[start:stop, None] * wtimes[None, :]
        zi = z_of_x[start:stop, None] ^ z_of_y[None, :]
        part = np.bincount(zi.ravel(), weights=w.ravel(), minlength=1 << n)
        acc.add(part)
        block_totals.append(float(w.sum()))
    z_total = math.fsum(block_totals)
    return ExactDistribution(n, acc.total / z_total)


# --- distances and expectation curves ---------------------------------------


def _check_same_support(d1: ExactDistribution, d2: ExactDistribution):
    if d1.n != d2.n or d1.is_pair != d2.is_pair:
        raise UsageError("distributions must share support")


def tv_distance(d1: ExactDistribution, d2: ExactDistribution) -> float:
    """Total variation distance, half the L1 distance; lies in [0, 1]."""
    _check_same_support(d1, d2)
    return 0.5 * float(np.abs(d1.probs - d2.probs).sum())


def l1_distance(d1: ExactDistribution, d2: ExactDistribution) -> float:
    """Unhalved sum of absolute mass differences (twice `tv_distance`)."""
    _check_same_support(d1, d2)
    return float(np.abs(d1.probs - d2.probs).sum())


def _check_theta_range(theta: float):
    if not 0.0 <= theta <= math.pi / 2:
        raise UsageError(f"theta must lie in [0, pi/2], got {theta}")


def xor_expectation_quantum(theta: float) -> float:
    """(1 + cos 2*theta)/2: the probability that an XOR'd bit equals 0.

    Note the convention: this is the equal-outcomes probability cos^2(theta),
    which is 1 at theta = 0, not the mean of the XOR bits (their mean is the
    complement, sin^2(theta); `stats.xor_rate` estimates that one).
    """
    _check_theta_range(theta)
    return 0.5 * (1.0 + math.cos(2.0 * theta))


def xor_expectation_classical(theta: float) -> float:
    """The linear benchmark 1 - 2*theta/pi; meets the quantum curve only at
    0, pi/4 and pi/2."""
    _check_theta_range(theta)
    return 1.0 - 2.0 * theta / math.pi


def taylor_gap(delta_theta: float) -> tuple[float, float]:
    """First-order deviations of both curves from 1/2 around theta = pi/4.

    Returns (|delta|, (2/pi)*|delta|): a misalignment of delta moves the
    quantum curve pi/2 times faster than the classical one.
    """
    if abs(delta_theta) > 0.2:
        raise UsageError("taylor_gap is a small-angle expansion; |delta| <= 0.2")
    d = abs(delta_theta)
    return d, 2.0 * d / math.pi
