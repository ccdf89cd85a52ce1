"""File formats: bit files, NDJSON pair streams, CSV/JSON reports.

All writers go through a temp-file-plus-rename so a crashed run never leaves
a half-written artifact, and none of them embed timestamps or other
run-varying data; two runs with the same inputs produce byte-identical files.

Bit-file format: one header line ``#bits=<n>`` followed by the payload. In
ascii mode the payload is n characters of '0'/'1' (newlines permitted and
ignored). In packed mode it is ceil(n/8) raw bytes, least significant bit
first within each byte, zero padding in the final byte. Readers distinguish
the modes by payload shape, which is unambiguous for n > 1.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .bitstring import BitString
from .errors import InputFormatError, UsageError
from .streams import PairStream

__all__ = [
    "atomic_write_bytes",
    "write_bits",
    "read_bits",
    "write_stream_ndjson",
    "read_stream_ndjson",
    "write_json",
    "write_distribution_csv",
    "write_deviation_csv",
    "write_reports_csv",
    "write_sweep_csv",
]


def atomic_write_bytes(path, payload: bytes) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)
    return path


def _atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("ascii"))


# --- bit files -----------------------------------------------------------------


def write_bits(path, bits: BitString, mode: str = "ascii") -> Path:
    header = f"#bits={len(bits)}\n".encode("ascii")
    if mode == "ascii":
        payload = bits.to01().encode("ascii") + b"\n" if len(bits) else b""
    elif mode == "packed":
        payload = np.packbits(bits.to_array(), bitorder="little").tobytes()
    else:
        raise UsageError(f"unknown bit-file mode {mode!r}")
    return atomic_write_bytes(path, header + payload)


def read_bits(path) -> BitString:
    raw = Path(path).read_bytes()
    eol = raw.find(b"\n")
    if eol < 0 or not raw.startswith(b"#bits="):
        raise InputFormatError(f"{path}: missing '#bits=<n>' header")
    try:
        n = int(raw[6:eol])
    except ValueError:
        raise InputFormatError(f"{path}: unreadable bit count in header") from None
    if n < 0:
        raise InputFormatError(f"{path}: negative bit count")
    payload = raw[eol + 1 :]
    text = payload.translate(None, b"\r\n")
    if len(text) == n and (not text or max(text) <= 0x31 and min(text) >= 0x30):
        return BitString(text.decode("ascii"))
    if len(payload) == math.ceil(n / 8):
        arr = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
        return BitString.from_array(arr[:n])
    raise InputFormatError(
        f"{path}: payload is neither {n} ascii bits nor {math.ceil(n / 8)} packed bytes"
    )


# --- pair streams ----------------------------------------------------------------


def write_stream_ndjson(path, stream: PairStream) -> Path:
    lines = [
        json.dumps({"t": float(t), "a": int(a), "b": int(b)}, separators=(",", ":"))
        for t, a, b in zip(stream.t, stream.a, stream.b)
    ]
    return _atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_stream_ndjson(path) -> PairStream:
    ts, aa, bb = [], [], []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                ts.append(float(rec["t"]))
                aa.append(int(rec["a"]))
                bb.append(int(rec["b"]))
            except (ValueError, TypeError, KeyError):
                raise InputFormatError(f"{path}:{lineno}: expected {{t,a,b}} record") from None
    try:
        return PairStream(np.array(ts), np.array(aa, dtype=np.uint8), np.array(bb, dtype=np.uint8))
    except (UsageError, OverflowError) as exc:
        raise InputFormatError(f"{path}: {exc}") from None


# --- JSON and CSV reports ---------------------------------------------------------


def write_json(path, obj) -> Path:
    return _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_distribution_csv(path, dist) -> Path:
    rows = ["index,bitstring,probability"]
    rows += [f"{i},{s},{p!r}" for i, s, p in dist.support()]
    return _atomic_write_text(path, "\n".join(rows) + "\n")


def write_deviation_csv(path, dist) -> Path:
    """Per-string deviation from the uniform mass, for plotting."""
    uniform = 1.0 / (1 << dist.n)
    rows = ["index,bitstring,deviation"]
    rows += [f"{i},{s},{p - uniform!r}" for i, s, p in dist.support()]
    return _atomic_write_text(path, "\n".join(rows) + "\n")


def write_reports_csv(path, reports) -> Path:
    """Tidy test-by-parameter table; one row per report."""
    rows = ["test,k,statistic,p_value,passed"]
    for r in reports:
        k = r.params.get("k", "")
        p = "" if r.p_value is None else repr(r.p_value)
        rows.append(f"{r.test_name},{k},{r.statistic!r},{p},{int(r.passed)}")
    return _atomic_write_text(path, "\n".join(rows) + "\n")


def write_sweep_csv(path, rows, with_empirical: bool) -> Path:
    header = "theta,expectation_quantum,expectation_classical"
    if with_empirical:
        header += ",expectation_empirical"
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return _atomic_write_text(path, "\n".join(lines) + "\n")
