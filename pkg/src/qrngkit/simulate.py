"""Monte Carlo pair source and the stream-level transforms.

Randomness comes from numpy's Philox counter-based generator, keyed directly
by the caller's seed, so identical (n, cfg, seed) always reproduce the same
stream byte for byte. The draw order is part of the contract:

* ideal mode: inter-arrival gaps, then one outcome uniform per pair;
* physical mode: gaps, plus-context outcome uniforms, anti-correlation flip
  uniforms, plus-detection uniforms, times-detection uniforms;
* double counting: one uniform per record except the last.

`run_pipeline` chains the configured imperfections in fixed order: sampling,
double counting (keyed by seed + 1), dead-time filtering, demon filtering.
The demon acts on the offset-0 XOR bit of each record, so rejected bits drop
whole records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bitstring import BitString
from .config import QrngConfig
from .errors import UsageError
from .streams import PairStream

__all__ = [
    "SimulationResult",
    "sample_pairs",
    "sample_pairs_physical",
    "apply_double_counting",
    "dead_time_filter",
    "demon_modulus",
    "demon_filter",
    "run_pipeline",
]


@dataclass(frozen=True)
class SimulationResult:
    """A generated stream plus the bookkeeping needed to audit losses."""

    records: PairStream
    generated: int
    dropped_undetected: int
    dropped_dead_time: int
    dropped_demon: int
    seed: int

    def __post_init__(self):
        lost = self.dropped_undetected + self.dropped_dead_time + self.dropped_demon
        if len(self.records) + lost != self.generated:
            raise UsageError("drop counters do not add up to the generation count")

    def counters(self) -> dict:
        return {
            "generated": self.generated,
            "kept": len(self.records),
            "dropped_undetected": self.dropped_undetected,
            "dropped_dead_time": self.dropped_dead_time,
            "dropped_demon": self.dropped_demon,
            "seed": self.seed,
        }


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _arrival_times(n: int, cfg: QrngConfig, rng: np.random.Generator) -> np.ndarray:
    times = np.cumsum(rng.exponential(cfg.mean_pair_interval, n))
    # an extremely short gap can round away in the cumsum; nudge such times up
    bad = np.flatnonzero(np.diff(times) <= 0.0)
    while bad.size:
        for i in bad:
            times[i + 1] = np.nextafter(times[i], math.inf)
        bad = np.flatnonzero(np.diff(times) <= 0.0)
    return times


def _check_n(n: int):
    if n < 1:
        raise UsageError("pair count must be positive")


def sample_pairs(n: int, cfg: QrngConfig, seed: int) -> SimulationResult:
    """Draw n pairs straight from the detected-pair law.

    Each record's outcomes follow `exact.pair_prob` evaluated with the
    efficiencies in force at the record's arrival time, so a configured drift
    shows up as a slowly wandering bias.
    """
    _check_n(n)
    rng = _generator(seed)
    times = _arrival_times(n, cfg, rng)
    e0p, e1p, e0t, e1t = cfg.efficiencies_at(times).T
    s = math.sin(cfg.theta) ** 2
    c = math.cos(cfg.theta) ** 2
    weights = np.stack(
        [c * e0p * e0t, s * e0p * e1t, s * e1p * e0t, c * e1p * e1t], axis=1
    )
    cum = np.cumsum(weights, axis=1)
    u = rng.random(n) * cum[:, -1]
    cell = np.minimum((u[:, None] >= cum).sum(axis=1), 3)
    a = (cell >> 1).astype(np.uint8)
    b = (cell & 1).astype(np.uint8)
    return SimulationResult(PairStream(times, a, b), n, 0, 0, 0, seed)


def sample_pairs_physical(n: int, cfg: QrngConfig, seed: int) -> SimulationResult:
    """Draw n raw singlet pairs and keep only coincident detections.

    The plus context outcome is a fair coin; the times context flips it with
    probability sin^2(theta); each photon is then detected with its detector's
    efficiency and pairs missing a detection are dropped. Conditioned on
    keeping, outcomes follow the same law as `sample_pairs` (checked as a
    test property, not assumed here).
    """
    _check_n(n)
    rng = _generator(seed)
    times = _arrival_times(n, cfg, rng)
    s = math.sin(cfg.theta) ** 2
    a = (rng.random(n) < 0.5).astype(np.uint8)
    b = a ^ (rng.random(n) < s).astype(np.uint8)
    e0p, e1p, e0t, e1t = cfg.efficiencies_at(times).T
    eff_plus = np.where(a == 0, e0p, e1p)
    eff_times = np.where(b == 0, e0t, e1t)
    detected = (rng.random(n) < eff_plus) & (rng.random(n) < eff_times)
    stream = PairStream(times[detected], a[detected], b[detected])
    return SimulationResult(stream, n, n - len(stream), 0, 0, seed)


def apply_double_counting(stream: PairStream, p_dc: float, seed: int) -> PairStream:
    """Replace each times outcome by the next record's, with probability p_dc.

    Models a detector pairing a photon with one from the following pair. The
    substituted values are the original neighbours (no cascading), the last
    record has no neighbour and is never touched, and the stream length is
    preserved.
    """
    if not 0.0 <= p_dc <= 1.0:
        raise UsageError("double-count probability must lie in [0, 1]")
    if p_dc == 0.0 or len(stream) <= 1:
        return stream
    rng = _generator(seed)
    swap = rng.random(len(stream) - 1) < p_dc
    b = stream.b.copy()
    b[:-1][swap] = stream.b[1:][swap]
    return PairStream(stream.t, stream.a, b)


def dead_time_filter(stream: PairStream, T_d: float) -> PairStream:
    """Drop records closer than T_d to the previously kept record.

    Comparisons are against the last *kept* time, which makes the filter
    idempotent; the first record is always kept.
    """
    if T_d < 0:
        raise UsageError("dead time must be non-negative")
    if T_d == 0.0 or len(stream) <= 1:
        return stream
    t = stream.t
    keep = np.zeros(len(stream), dtype=bool)
    keep[0] = True
    last = t[0]
    for i in range(1, len(stream)):
        if t[i] - last > T_d:
            keep[i] = True
            last = t[i]
    return PairStream(t[keep], stream.a[keep], stream.b[keep])


def demon_modulus(rho: float) -> int:
    """Forced-zero spacing k = ceil(1/(1-rho)).

    The quotient is computed with a one-ulp-scale backoff so budgets like 0.8,
    whose reciprocal lands a rounding error above the exact integer 5, do not
    get bumped to the next slot width.
    """
    if not 0.0 < rho < 1.0:
        raise UsageError("demon efficiency budget must lie strictly in (0, 1)")
    return math.ceil((1.0 / (1.0 - rho)) * (1.0 - 1e-12))


def _demon_kept_indices(bits: np.ndarray, k: int) -> np.ndarray:
    """Input indices surviving the forced-zero rule with spacing k."""
    kept = []
    out_pos = 1
    for i, bit in enumerate(bits):
        if out_pos % k == 0 and bit:
            continue
        kept.append(i)
        out_pos += 1
    return np.asarray(kept, dtype=np.intp)


def demon_filter(bits: BitString, rho: float, seed: int | None = None) -> BitString:
    """Reject ones so that every k-th output bit is zero, k = ceil(1/(1-rho)).

    This is the fair-sampling adversary: within a rejection budget rho it
    plants an all-zero arithmetic subsequence (output positions k, 2k, ...,
    counting from 1) by discarding input ones that land on those slots. All
    other bits pass through in order. The construction is deterministic;
    ``seed`` is accepted for interface symmetry with the other transforms and
    ignored. If the input runs out while a forced slot waits for a zero, the
    output simply ends there.
    """
    if seed is not None and not isinstance(seed, int):
        raise UsageError("seed must be an integer when given")
    arr = bits.to_array()
    kept = _demon_kept_indices(arr, demon_modulus(rho))
    return BitString.from_array(arr[kept])


def run_pipeline(
    n: int, cfg: QrngConfig, seed: int, mode: str = "ideal"
) -> SimulationResult:
    """Generate n raw pairs and push them through the configured transforms.

    Stages run in a fixed order: sampling (ideal or physical), double
    counting when cfg.double_count_prob > 0, dead-time filtering when
    cfg.dead_time_Td > 0, then the demon when cfg.demon_rho is set. The demon
    consumes the stream's offset-0 XOR bits, so a rejected bit removes its
    whole record.
    """
    if mode == "ideal":
        result = sample_pairs(n, cfg, seed)
    elif mode == "physical":
        result = sample_pairs_physical(n, cfg, seed)
    else:
        raise UsageError(f"unknown simulation mode {mode!r}")
    stream = result.records
    if cfg.double_count_prob > 0.0:
        stream = apply_double_counting(stream, cfg.double_count_prob, seed + 1)
    dropped_dead = 0
    if cfg.dead_time_Td > 0.0:
        filtered = dead_time_filter(stream, cfg.dead_time_Td)
        dropped_dead = len(stream) - len(filtered)
        stream = filtered
    dropped_demon = 0
    if cfg.demon_rho is not None and len(stream):
        z = stream.a ^ stream.b
        kept = _demon_kept_indices(z, demon_modulus(cfg.demon_rho))
        dropped_demon = len(stream) - kept.size
        stream = PairStream(stream.t[kept], stream.a[kept], stream.b[kept])
    return SimulationResult(
        stream, n, result.dropped_undetected, dropped_dead, dropped_demon, seed
    )
