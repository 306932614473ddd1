"""Seeded lossy-channel model: independent bit flips, whole-packet drops.

Identical seeds produce identical fault schedules; the RNG is consumed in
strict transmit order by the single-threaded simulator loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ProtocolError


@dataclass(frozen=True)
class ChannelModel:
    ber: float = 0.0
    drop_rate: float = 0.0
    rtt_ticks: int = 20
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.ber <= 1.0):
            raise ProtocolError(f"ber out of [0, 1]: {self.ber}")
        if not (0.0 <= self.drop_rate <= 1.0):
            raise ProtocolError(f"drop_rate out of [0, 1]: {self.drop_rate}")
        if self.rtt_ticks < 0:
            raise ProtocolError(f"rtt_ticks negative: {self.rtt_ticks}")


class Channel:
    """Stateful instance applying one ChannelModel's fault schedule."""

    def __init__(self, model: ChannelModel):
        self.model = model
        self._rng = np.random.default_rng(model.seed)

    def transmit(self, data: bytes) -> bytes | None:
        """Deliver data with faults applied; None means the packet dropped."""
        if self.model.drop_rate > 0.0 and self._rng.random() < self.model.drop_rate:
            return None
        if self.model.ber == 0.0 or not data:
            return data
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        flips = self._rng.random(len(bits)) < self.model.ber
        return np.packbits(np.bitwise_xor(bits, flips.astype(np.uint8))).tobytes()


def channel_transmit(data: bytes, model: ChannelModel) -> bytes | None:
    """One-shot transmit with a fresh fault schedule from model.seed."""
    return Channel(model).transmit(data)
