"""Dead-zone uniform quantizer for keyframe deltas.

Deltas below the dead-zone threshold collapse to code 0; everything else
maps to sign(d) * ceil(|d| / step) with saturation at the symmetric b-bit
limit. Reconstruction uses mid-rise levels (|q| - 0.5) * step, the
worst-case-optimal inverse of the ceil rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import QualityModeConfig

# Step sizes cover +/- clamp without saturating: pitch and rate deltas are
# z-score units (+/-4 sigma swing), energy deltas live in the unit range.
CLAMP_RANGE = {"pitch": 4.0, "energy": 1.5, "rate": 4.0}


@dataclass(frozen=True)
class QuantizerSpec:
    bits: int
    dead_zone: float
    clamp_range: float

    def __post_init__(self):
        if not (2 <= self.bits <= 8):
            raise ValueError(f"bits out of range [2, 8]: {self.bits}")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if not (0 <= self.dead_zone < self.clamp_range):
            raise ValueError("require 0 <= dead_zone < clamp_range")

    @property
    def max_code(self) -> int:
        return 2 ** (self.bits - 1) - 1

    @property
    def step(self) -> float:
        return self.clamp_range / (2 ** (self.bits - 1) - 1)

    def quantize(self, delta: float) -> int:
        if abs(delta) < self.dead_zone:
            return 0
        q = math.ceil(abs(delta) / self.step)
        q = min(q, self.max_code)
        return q if delta > 0 else -q

    def dequantize(self, code: int) -> float:
        if code == 0:
            return 0.0
        if abs(code) > self.max_code:
            raise ValueError(f"code {code} outside the {self.bits}-bit range")
        mag = (abs(code) - 0.5) * self.step
        return mag if code > 0 else -mag


def spec_for(cfg: QualityModeConfig, feature: str) -> QuantizerSpec:
    return QuantizerSpec(
        bits=cfg.bits_for(feature),
        dead_zone=cfg.dead_zone_for(feature),
        clamp_range=CLAMP_RANGE[feature],
    )
