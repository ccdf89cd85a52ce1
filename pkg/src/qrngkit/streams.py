"""Timestamped joint-outcome streams.

A PairStream holds one measurement run: for each detected pair, the arrival
time and the two outcome bits (the "plus" context and the "times" context).
Columns are numpy arrays so million-record streams stay cheap; element access
yields PairRecord values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitstring import BitString
from .errors import UsageError

__all__ = ["PairRecord", "PairStream"]


@dataclass(frozen=True)
class PairRecord:
    time: float
    outcome_plus: int
    outcome_times: int


class PairStream:
    """Columnar sequence of pair records, strictly increasing in time."""

    __slots__ = ("t", "a", "b")

    def __init__(self, t: np.ndarray, a: np.ndarray, b: np.ndarray):
        t = np.ascontiguousarray(t, dtype=np.float64)
        a = np.ascontiguousarray(a, dtype=np.uint8)
        b = np.ascontiguousarray(b, dtype=np.uint8)
        if not (t.ndim == a.ndim == b.ndim == 1) or not (t.size == a.size == b.size):
            raise UsageError("stream columns must be 1-d and equally long")
        if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
            raise UsageError("record times must be non-negative and strictly increasing")
        if a.size and (a.max() > 1 or b.max() > 1):
            raise UsageError("outcomes must be bits")
        self.t = t
        self.a = a
        self.b = b

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> PairRecord:
        return PairRecord(float(self.t[i]), int(self.a[i]), int(self.b[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PairStream)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    def plus_string(self) -> BitString:
        return BitString.from_array(self.a)

    def times_string(self) -> BitString:
        return BitString.from_array(self.b)

    def xor_string(self, j: int = 0) -> BitString:
        """Offset-XOR of the two outcome columns: bit i is a_i XOR b_{i+j}."""
        if j < 0 or (len(self) and j >= len(self)):
            raise UsageError(f"offset j={j} out of range for {len(self)} records")
        if j == 0:
            return BitString.from_array(self.a ^ self.b)
        return BitString.from_array(self.a[: len(self) - j] ^ self.b[j:])

    def __repr__(self) -> str:
        return f"PairStream(n={len(self)})"
