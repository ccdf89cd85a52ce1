"""Experiment configuration for the pair source and its imperfections.

QrngConfig collects everything the exact engine and the simulator need: the
relative analyzer angle theta, the four detector efficiency weights (order
e0_plus, e1_plus, e0_times, e1_times throughout the package), optional
sinusoidal efficiency drift, dead time, pair rate, double-counting
probability and the adversarial efficiency bound. Configs are immutable and
round-trip through plain JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import InputFormatError, UsageError

__all__ = ["DriftSpec", "QrngConfig", "DETECTOR_NAMES"]

DETECTOR_NAMES = ("e0_plus", "e1_plus", "e0_times", "e1_times")


@dataclass(frozen=True)
class DriftSpec:
    """Sinusoidal per-detector efficiency drift.

    Each detector's efficiency follows e(t) = e + A * sin(2*pi*t/period + phase)
    with its own amplitude A (efficiency units) and phase (radians); the period
    (seconds) is shared. Amplitudes of zero switch a detector's drift off.
    """

    amplitudes: tuple[float, float, float, float]
    period: float
    phases: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if len(self.amplitudes) != 4 or len(self.phases) != 4:
            raise UsageError("drift amplitudes and phases must have one entry per detector")
        if any(a < 0 for a in self.amplitudes):
            raise UsageError("drift amplitudes must be non-negative")
        if not self.period > 0:
            raise UsageError("drift period must be positive")


@dataclass(frozen=True)
class QrngConfig:
    theta: float = math.pi / 4
    e0_plus: float = 1.0
    e1_plus: float = 1.0
    e0_times: float = 1.0
    e1_times: float = 1.0
    drift: DriftSpec | None = None
    dead_time_Td: float = 0.0
    mean_pair_interval: float = 1.0
    double_count_prob: float = 0.0
    demon_rho: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2:
            raise UsageError(f"theta must lie in [0, pi/2], got {self.theta}")
        for name, e in zip(DETECTOR_NAMES, self.efficiencies):
            if not 0.0 < e <= 1.0:
                raise UsageError(f"{name} must lie in (0, 1], got {e}")
        if self.drift is not None:
            for name, e, a in zip(DETECTOR_NAMES, self.efficiencies, self.drift.amplitudes):
                # Keep e(t) inside (0, 1] for every phase of the sinusoid.
                if a >= e:
                    raise UsageError(f"drift amplitude {a} on {name} reaches zero efficiency")
                if e + a > 1.0:
                    raise UsageError(f"drift amplitude {a} on {name} exceeds unit efficiency")
        if self.dead_time_Td < 0:
            raise UsageError("dead_time_Td must be >= 0")
        if not self.mean_pair_interval > 0:
            raise UsageError("mean_pair_interval must be positive")
        if not 0.0 <= self.double_count_prob <= 1.0:
            raise UsageError("double_count_prob must lie in [0, 1]")
        if self.demon_rho is not None and not 0.0 < self.demon_rho < 1.0:
            raise UsageError("demon_rho must lie strictly between 0 and 1")

    @property
    def efficiencies(self) -> tuple[float, float, float, float]:
        return (self.e0_plus, self.e1_plus, self.e0_times, self.e1_times)

    def efficiencies_at(self, t) -> np.ndarray:
        """Efficiencies evaluated at time(s) ``t``; shape (len(t), 4) for array input."""
        base = np.asarray(self.efficiencies, dtype=np.float64)
        if self.drift is None:
            t = np.asarray(t, dtype=np.float64)
            return np.broadcast_to(base, t.shape + (4,)).copy()
        t = np.asarray(t, dtype=np.float64)[..., None]
        amp = np.asarray(self.drift.amplitudes)
        phase = np.asarray(self.drift.phases)
        return base + amp * np.sin(2.0 * math.pi * t / self.drift.period + phase)

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.drift is not None:
            d["drift"] = {
                "amplitudes": list(self.drift.amplitudes),
                "period": self.drift.period,
                "phases": list(self.drift.phases),
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "QrngConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InputFormatError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(d)
        drift = kwargs.get("drift")
        if drift is not None:
            if not isinstance(drift, dict):
                raise InputFormatError("drift must be an object with amplitudes/period[/phases]")
            try:
                kwargs["drift"] = DriftSpec(
                    amplitudes=tuple(drift["amplitudes"]),
                    period=drift["period"],
                    phases=tuple(drift.get("phases", (0.0, 0.0, 0.0, 0.0))),
                )
            except KeyError as exc:
                raise InputFormatError(f"drift spec missing key {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "QrngConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InputFormatError(f"config file {path} must hold a JSON object")
        return cls.from_dict(data)
