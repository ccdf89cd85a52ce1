"""Bitstring post-processing: offset-XOR, von Neumann, Peres, pair-compare.

Every extractor exists in two forms: a one-shot function returning an
ExtractionOutput, and a streaming class with feed()/finish() so unbounded
inputs can be processed in chunks. Splitting the input differently never
changes the concatenated output; the one-shot forms are thin wrappers over
the streaming ones, so there is a single implementation of each rule.

Two-bit values are ordered lexicographically with the leftmost bit most
significant: 00 < 01 < 10 < 11.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitstring import BitString
from .errors import UsageError

__all__ = [
    "ExtractionOutput",
    "xor_offset",
    "von_neumann",
    "peres",
    "pair_von_neumann",
    "XorOffsetExtractor",
    "VonNeumannExtractor",
    "PeresExtractor",
    "PairVonNeumannExtractor",
]


@dataclass(frozen=True)
class ExtractionOutput:
    """Extractor result with position accounting.

    `consumed` counts input positions taken in (per string, for the two-string
    extractor); every consumed position either survives into `bits` or is
    counted in `discarded`, including odd leftovers at a pairing stage.
    """

    bits: BitString
    consumed: int
    discarded: int

    def __post_init__(self):
        if self.discarded < 0 or len(self.bits) + self.discarded != self.consumed:
            raise UsageError("extraction accounting does not add up")


def _empty() -> BitString:
    return BitString("")


def _concat(parts: list[BitString]) -> BitString:
    out = _empty()
    for p in parts:
        out = out + p
    return out


# --- offset XOR ---------------------------------------------------------------


def xor_offset(x: BitString, y: BitString, j: int = 0) -> BitString:
    """Combine z_i = x_i XOR y_(i+j); inputs of length n + j give n bits."""
    if len(x) != len(y):
        raise UsageError("xor_offset needs equal-length inputs")
    if not 0 <= j < len(x):
        raise UsageError(f"offset must satisfy 0 <= j < {len(x)}, got {j}")
    n = len(x) - j
    return BitString.from_index((x.value >> j) ^ (y.value & ((1 << n) - 1)), n)


class XorOffsetExtractor:
    """Streaming offset-XOR over two aligned chunk streams.

    Each feed takes equally long chunks of both strings; a bit x_i becomes
    available once y_(i+j) has arrived, so up to j leading x bits are carried
    between calls and the final j trailing x bits never pair up.
    """

    def __init__(self, j: int = 0):
        if j < 0:
            raise UsageError("offset must be non-negative")
        self.j = j
        self._x_pending = np.zeros(0, dtype=np.uint8)
        self._seen = 0
        self.emitted = 0

    def feed(self, x_chunk: BitString, y_chunk: BitString) -> BitString:
        if len(x_chunk) != len(y_chunk):
            raise UsageError("chunks must have equal length")
        L = len(x_chunk)
        xs = np.concatenate([self._x_pending, x_chunk.to_array()])
        emit = min(self._seen + L - self.j, L) if self._seen + L > self.j else 0
        self._seen += L
        if emit <= 0:
            self._x_pending = xs
            return _empty()
        out = xs[:emit] ^ y_chunk.to_array()[L - emit :]
        self._x_pending = xs[emit:]
        self.emitted += emit
        return BitString.from_array(out)

    def finish(self) -> BitString:
        return _empty()


# --- von Neumann ---------------------------------------------------------------


class VonNeumannExtractor:
    """Pairwise debiaser: 01 -> 0, 10 -> 1, equal pairs discarded."""

    def __init__(self):
        self._pending: int | None = None
        self.consumed = 0
        self.emitted = 0

    def feed(self, chunk: BitString) -> BitString:
        arr = chunk.to_array()
        self.consumed += len(chunk)
        if self._pending is not None:
            arr = np.concatenate([[self._pending], arr])
            self._pending = None
        half = arr.size // 2
        if arr.size % 2:
            self._pending = int(arr[-1])
        pairs = arr[: 2 * half].reshape(half, 2)
        out = pairs[pairs[:, 0] != pairs[:, 1], 0]
        self.emitted += out.size
        return BitString.from_array(out)

    def finish(self) -> BitString:
        self._pending = None
        return _empty()


def von_neumann(z: BitString) -> ExtractionOutput:
    ext = VonNeumannExtractor()
    bits = ext.feed(z) + ext.finish()
    return ExtractionOutput(bits, len(z), len(z) - len(bits))


# --- Peres ---------------------------------------------------------------------


class PeresExtractor:
    """Iterated von Neumann.

    Level one emits the usual 01/10 bits as they appear. The pair parities
    feed one child extractor and the values of equal pairs feed another, each
    one level shallower; their output follows all level-one bits, so it is
    held back until finish(). depth 1 is exactly von Neumann.
    """

    def __init__(self, depth: int = 4):
        if depth < 1:
            raise UsageError("depth must be at least 1")
        self.depth = depth
        self._pending: int | None = None
        self._child_parity = PeresExtractor(depth - 1) if depth > 1 else None
        self._child_equal = PeresExtractor(depth - 1) if depth > 1 else None
        self._held_parity: list[BitString] = []
        self._held_equal: list[BitString] = []
        self.consumed = 0
        self.emitted = 0

    def feed(self, chunk: BitString) -> BitString:
        arr = chunk.to_array()
        self.consumed += len(chunk)
        if self._pending is not None:
            arr = np.concatenate([[self._pending], arr])
            self._pending = None
        half = arr.size // 2
        if arr.size % 2:
            self._pending = int(arr[-1])
        pairs = arr[: 2 * half].reshape(half, 2)
        unequal = pairs[:, 0] != pairs[:, 1]
        out = pairs[unequal, 0]
        if self._child_parity is not None and half:
            self._held_parity.append(
                self._child_parity.feed(BitString.from_array(pairs[:, 0] ^ pairs[:, 1]))
            )
            self._held_equal.append(
                self._child_equal.feed(BitString.from_array(pairs[~unequal, 0]))
            )
        self.emitted += out.size
        return BitString.from_array(out)

    def finish(self) -> BitString:
        self._pending = None
        if self._child_parity is None:
            return _empty()
        tail = (
            _concat(self._held_parity)
            + self._child_parity.finish()
            + _concat(self._held_equal)
            + self._child_equal.finish()
        )
        self._held_parity = []
        self._held_equal = []
        self.emitted += len(tail)
        return tail


def peres(z: BitString, depth: int = 4) -> ExtractionOutput:
    ext = PeresExtractor(depth)
    bits = ext.feed(z) + ext.finish()
    return ExtractionOutput(bits, len(z), len(z) - len(bits))


# --- pair comparison over two strings -------------------------------------------


class PairVonNeumannExtractor:
    """Two-string debiaser over consecutive position-pairs.

    Positions 2i and 2i+1 supply outcome pairs (a1, b1) and (a2, b2); the
    output bit is 0 when a1 b1 < a2 b2 lexicographically, 1 when greater, and
    nothing when equal.
    """

    def __init__(self):
        self._pending: tuple[int, int] | None = None
        self.consumed = 0
        self.emitted = 0

    def feed(self, x_chunk: BitString, y_chunk: BitString) -> BitString:
        if len(x_chunk) != len(y_chunk):
            raise UsageError("chunks must have equal length")
        self.consumed += len(x_chunk)
        values = 2 * x_chunk.to_array().astype(np.int8) + y_chunk.to_array()
        if self._pending is not None:
            values = np.concatenate([[2 * self._pending[0] + self._pending[1]], values])
            self._pending = None
        half = values.size // 2
        if values.size % 2:
            v = int(values[-1])
            self._pending = (v >> 1, v & 1)
        first = values[: 2 * half : 2]
        second = values[1 : 2 * half : 2]
        out = (first > second)[first != second].astype(np.uint8)
        self.emitted += out.size
        return BitString.from_array(out)

    def finish(self) -> BitString:
        self._pending = None
        return _empty()


def pair_von_neumann(x: BitString, y: BitString) -> ExtractionOutput:
    """One-shot pair comparison; `consumed` counts positions of each string."""
    if len(x) != len(y):
        raise UsageError("pair_von_neumann needs equal-length inputs")
    ext = PairVonNeumannExtractor()
    bits = ext.feed(x, y) + ext.finish()
    return ExtractionOutput(bits, len(x), len(x) - len(bits))
