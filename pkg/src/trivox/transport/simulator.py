"""Discrete-event transport simulator: priority queues, differentiated
reliability, selective retransmission, receiver-side packet combining.

One tick is one centisecond. The loop is single-threaded and fully
deterministic for a given (messages, channel seed, config): sender and
receiver state machines interleave in a fixed order and the channel RNG
is consumed strictly in transmit order.

Reliability tiers:
  * TEXT / TIMBRE / TIMBRE_PROFILE: ack-gated ARQ, configurable
    retransmission budget (default 8).
  * PROSODY_KEY: at most one retransmission.
  * PROSODY_DELTA: fire-and-forget; the receiver interpolates through
    gaps.

Corrupted copies of ARQ-tracked packets are cached and bitwise
majority-combined; acceptance is still gated on the CRC (and the payload
codecs' own checksums above), never on the combine heuristic itself.
Copies are grouped by transmission slot, standing in for the physical
framing a real link provides. Without combining, independent bit flips
make intact delivery of a kilobit packet astronomically unlikely at 10%
BER no matter the budget.

The reverse (ack) channel is modeled ideal with rtt_ticks latency; the
forward channel owns all loss and corruption.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ProtocolError
from .channel import Channel, ChannelModel
from .wire import (
    CRC_BYTES,
    Packet,
    PacketHeader,
    PacketType,
    Priority,
    decode_packet,
    encode_packet,
    header_size,
)

GRACE_TICKS = 2
DEFAULT_RETRANSMIT_BUDGET = 8
PROSODY_KEY_BUDGET = 1
MAX_COMBINE_COPIES = 129


@dataclass
class TraceEvent:
    tick: int
    event: str
    ptype: str | None = None
    seq: int | None = None
    detail: str = ""
    priority: int | None = None
    header_bytes: int = 0
    payload_bytes: int = 0
    semantic_bits: int = 0
    retransmission: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {k: v for k, v in self.__dict__.items() if v not in (None, "", 0, False)}
            | {"tick": self.tick, "event": self.event},
            sort_keys=True,
        )


def export_trace(events: list[TraceEvent], path) -> None:
    with open(path, "w") as fh:
        for ev in events:
            fh.write(ev.to_json() + "\n")


@dataclass
class OutboundMessage:
    """One logical packet plus its reliability state.

    payload_factory, when set, builds the payload at emission time (after
    depends_on has been acknowledged); this is how ack-gated dictionary
    compression sees exactly the acknowledged history. Retransmissions
    always reuse the first-built bytes so receiver-side combining works.
    """

    packet: Packet
    semantic_bits: int
    emit_tick: int
    retransmit_budget: int
    fallback: "OutboundMessage | None" = None  # full TIMBRE behind a profile id
    depends_on: tuple[int, int] | None = None  # (ptype, seq) that must ack first
    payload_factory: "Callable[[], tuple[bytes, int]] | None" = None
    # Semantic bits of other components riding in this packet's payload
    # (piggybacked prosody keys): (ptype name, bits) pairs.
    aux_semantic: tuple = ()
    attempts: int = 0
    acked: bool = False
    gave_up: bool = False
    last_tx_tick: int = -1
    queued: bool = False

    @property
    def key(self) -> tuple[int, int]:
        return (int(self.packet.header.ptype), self.packet.header.seq)

    @property
    def tracked(self) -> bool:
        return self.packet.header.ptype != PacketType.PROSODY_DELTA

    def finalize_payload(self) -> None:
        if self.payload_factory is None:
            return
        payload, semantic_bits = self.payload_factory()
        hdr = self.packet.header
        length = len(payload) if hdr.length is not None else None
        self.packet = Packet(
            PacketHeader(
                hdr.ptype, hdr.seq, hdr.timestamp_cs, hdr.priority, hdr.flags, hdr.version, length
            ),
            payload,
        )
        self.semantic_bits = semantic_bits
        self.payload_factory = None


def default_budget(ptype: PacketType, retransmit_budget: int) -> int:
    if ptype == PacketType.PROSODY_DELTA:
        return 0
    if ptype == PacketType.PROSODY_KEY:
        return PROSODY_KEY_BUDGET
    return retransmit_budget


@dataclass
class SimulatorConfig:
    dispatch_per_tick: int = 8
    queue_capacity: int = 512
    grace_ticks: int = GRACE_TICKS
    hard_cap_slack: int = 4000


# Handlers return "accept", "reject", or "profile_miss".
Handler = Callable[[Packet], str]


class PriorityQueues:
    """Bounded strict-priority FIFO queues; overflow sheds LOW first."""

    def __init__(self, capacity: int, trace: list[TraceEvent]):
        self.capacity = capacity
        self.queues: dict[Priority, deque] = {p: deque() for p in Priority}
        self.trace = trace

    def enqueue(self, msg: OutboundMessage, tick: int) -> bool:
        prio = msg.packet.header.priority
        self.trace.append(
            TraceEvent(
                tick,
                "enqueue",
                msg.packet.header.ptype.name,
                msg.packet.header.seq,
                priority=int(prio),
            )
        )
        if len(self.queues[prio]) < self.capacity:
            self.queues[prio].append(msg)
            msg.queued = True
            return True
        # Shed from the lowest-priority backlog strictly below the
        # newcomer; a full queue of its own class tail-drops the newcomer.
        for victim_prio in (Priority.LOW, Priority.MEDIUM, Priority.HIGH):
            if victim_prio == prio:
                break
            q = self.queues[victim_prio]
            if q:
                victim = q.pop()
                victim.queued = False
                victim.gave_up = True
                self.trace.append(
                    TraceEvent(
                        tick,
                        "queue_drop",
                        victim.packet.header.ptype.name,
                        victim.packet.header.seq,
                        detail="overflow-evicted",
                        priority=int(victim_prio),
                    )
                )
                self.queues[prio].append(msg)
                msg.queued = True
                return True
        msg.gave_up = True
        self.trace.append(
            TraceEvent(
                tick,
                "queue_drop",
                msg.packet.header.ptype.name,
                msg.packet.header.seq,
                detail="overflow-incoming",
                priority=int(prio),
            )
        )
        return False

    def pop(self) -> OutboundMessage | None:
        for prio in (Priority.HIGH, Priority.MEDIUM, Priority.LOW):
            q = self.queues[prio]
            while q:
                msg = q.popleft()
                if msg.gave_up or msg.acked:
                    continue
                msg.queued = False
                return msg
        return None

    def __len__(self) -> int:
        return sum(len(q) for q in self.queues.values())


class Receiver:
    """Receiver state machine: CRC gate, dedupe, copy combining, handlers."""

    def __init__(self, handlers: dict[PacketType, Handler], trace: list[TraceEvent]):
        self.handlers = handlers
        self.trace = trace
        self.accepted: set[tuple[int, int]] = set()
        self.copies: dict[tuple[int, int], list[bytes]] = {}
        self.profile_requests: list[tuple[int, int]] = []  # keys needing fallback

    def _dispatch(self, packet: Packet, tick: int, via: str) -> str:
        handler = self.handlers.get(packet.header.ptype)
        status = handler(packet) if handler else "accept"
        if status == "accept" or status == "profile_miss":
            self.accepted.add((int(packet.header.ptype), packet.header.seq))
            self.trace.append(
                TraceEvent(
                    tick,
                    "accept",
                    packet.header.ptype.name,
                    packet.header.seq,
                    detail=via,
                )
            )
            if status == "profile_miss":
                key = (int(packet.header.ptype), packet.header.seq)
                self.profile_requests.append(key)
                self.trace.append(
                    TraceEvent(
                        tick,
                        "profile_miss",
                        packet.header.ptype.name,
                        packet.header.seq,
                    )
                )
        else:
            self.trace.append(
                TraceEvent(
                    tick,
                    "handler_reject",
                    packet.header.ptype.name,
                    packet.header.seq,
                    detail=via,
                )
            )
        return status

    def on_delivery(self, msg: OutboundMessage, data: bytes | None, tick: int) -> bool:
        """Process one channel delivery; True when the packet is acked."""
        hdr = msg.packet.header
        key = msg.key
        if data is None:
            self.trace.append(TraceEvent(tick, "lost", hdr.ptype.name, hdr.seq))
            return False
        if key in self.accepted:
            # Identity comes from the transmission slot, so a duplicate is
            # re-acked even if this copy arrived damaged.
            self.trace.append(TraceEvent(tick, "duplicate", hdr.ptype.name, hdr.seq))
            return True
        try:
            packet = decode_packet(data)
            ok = True
        except ProtocolError:
            ok = False
        if ok:
            status = self._dispatch(packet, tick, via="direct")
            return status in ("accept", "profile_miss")

        self.trace.append(TraceEvent(tick, "corrupt", hdr.ptype.name, hdr.seq))
        if hdr.ptype == PacketType.PROSODY_DELTA:
            self.trace.append(
                TraceEvent(tick, "gap", hdr.ptype.name, hdr.seq, detail="delta-discarded")
            )
            return False
        if not msg.tracked:
            return False
        stash = self.copies.setdefault(key, [])
        if len(stash) < MAX_COMBINE_COPIES:
            stash.append(data)
        combined = self._combine(stash)
        if combined is None:
            return False
        try:
            packet = decode_packet(combined)
        except ProtocolError:
            return False
        status = self._dispatch(packet, tick, via=f"combined-{len(stash)}")
        if status in ("accept", "profile_miss"):
            del self.copies[key]
            return True
        return False

    @staticmethod
    def _combine(copies: list[bytes]) -> bytes | None:
        """Bitwise majority over equal-length corrupted copies."""
        if len(copies) < 3:
            return None
        n = len(copies[0])
        if any(len(c) != n for c in copies):
            return None
        stack = np.stack([np.unpackbits(np.frombuffer(c, dtype=np.uint8)) for c in copies])
        votes = stack.sum(axis=0)
        majority = (votes * 2 > len(copies)).astype(np.uint8)
        return np.packbits(majority).tobytes()


class Simulator:
    """Single-session forward link + ideal reverse ack channel."""

    def __init__(
        self,
        channel_model: ChannelModel,
        sim_config: SimulatorConfig | None = None,
        handlers: dict[PacketType, Handler] | None = None,
        on_ack: Callable[[PacketType, int], None] | None = None,
        on_give_up: Callable[[PacketType, int], None] | None = None,
    ):
        self.channel_model = channel_model
        self.config = sim_config or SimulatorConfig()
        self.handlers = handlers or {}
        self.on_ack = on_ack
        self.on_give_up = on_give_up
        self.trace: list[TraceEvent] = []
        self.wire_log: list[bytes] = []  # pre-channel bytes, transmission order

    def run(self, messages: list[OutboundMessage], duration_ticks: int) -> list[TraceEvent]:
        cfg = self.config
        channel = Channel(self.channel_model)
        receiver = Receiver(self.handlers, self.trace)
        queues = PriorityQueues(cfg.queue_capacity, self.trace)
        rtt = self.channel_model.rtt_ticks
        timeout = rtt + cfg.grace_ticks

        pending_emit = sorted(
            messages, key=lambda m: (m.emit_tick, int(m.packet.header.ptype), m.packet.header.seq)
        )
        tracked: list[OutboundMessage] = []
        acks: deque[tuple[int, OutboundMessage]] = deque()  # (arrival tick, msg)
        acked_keys: set[tuple[int, int]] = set()
        failed_keys: set[tuple[int, int]] = set()
        waiting: list[OutboundMessage] = []  # emit-due but dependency unmet
        emit_idx = 0

        def give_up(msg: OutboundMessage) -> None:
            failed_keys.add(msg.key)
            if self.on_give_up:
                self.on_give_up(msg.packet.header.ptype, msg.packet.header.seq)

        max_budget = max((m.retransmit_budget for m in messages), default=0)
        hard_cap = (
            max([duration_ticks] + [m.emit_tick for m in messages])
            + (max_budget + 2) * (timeout + 1)
            + cfg.hard_cap_slack
        )

        tick = 0
        while tick <= hard_cap:
            # Ack arrivals.
            while acks and acks[0][0] <= tick:
                _, msg = acks.popleft()
                if not msg.acked:
                    msg.acked = True
                    acked_keys.add(msg.key)
                    self.trace.append(
                        TraceEvent(
                            tick, "ack", msg.packet.header.ptype.name, msg.packet.header.seq
                        )
                    )
                    if self.on_ack:
                        self.on_ack(msg.packet.header.ptype, msg.packet.header.seq)

            # Profile-miss fallbacks requested by the receiver.
            while receiver.profile_requests:
                key = receiver.profile_requests.pop(0)
                for m in tracked:
                    if m.key == key and m.fallback is not None and m.fallback.emit_tick < 0:
                        # Request travels the reverse channel; schedule the
                        # full embedding strictly after already-consumed
                        # emissions so the index scan picks it up.
                        m.fallback.emit_tick = tick + max(rtt, 1)
                        pos = emit_idx
                        while (
                            pos < len(pending_emit)
                            and pending_emit[pos].emit_tick <= m.fallback.emit_tick
                        ):
                            pos += 1
                        pending_emit.insert(pos, m.fallback)
                        self.trace.append(
                            TraceEvent(
                                tick,
                                "profile_fallback",
                                m.fallback.packet.header.ptype.name,
                                m.fallback.packet.header.seq,
                            )
                        )

            # Emissions due this tick; dependency-gated messages wait for
            # their predecessor's ack (or its terminal failure).
            due: list[OutboundMessage] = []
            while emit_idx < len(pending_emit) and pending_emit[emit_idx].emit_tick <= tick:
                msg = pending_emit[emit_idx]
                emit_idx += 1
                if msg.emit_tick >= 0:
                    due.append(msg)
            still_waiting: list[OutboundMessage] = []
            for msg in waiting + due:
                if msg.depends_on is not None and msg.depends_on not in acked_keys:
                    if msg.depends_on not in failed_keys:
                        still_waiting.append(msg)
                        continue
                msg.finalize_payload()
                if queues.enqueue(msg, tick):
                    if msg.tracked:
                        tracked.append(msg)
                elif msg.tracked:
                    give_up(msg)
            waiting = still_waiting

            # Retransmission timers.
            for msg in tracked:
                if msg.acked or msg.gave_up or msg.queued:
                    continue
                if msg.attempts == 0 or msg.last_tx_tick + timeout > tick:
                    continue
                if msg.attempts <= msg.retransmit_budget:
                    self.trace.append(
                        TraceEvent(
                            tick,
                            "retransmit",
                            msg.packet.header.ptype.name,
                            msg.packet.header.seq,
                            detail=f"attempt-{msg.attempts + 1}",
                        )
                    )
                    if not queues.enqueue(msg, tick):
                        give_up(msg)
                else:
                    msg.gave_up = True
                    self.trace.append(
                        TraceEvent(
                            tick,
                            "give_up",
                            msg.packet.header.ptype.name,
                            msg.packet.header.seq,
                            detail=f"budget-exhausted-{msg.attempts}",
                        )
                    )
                    give_up(msg)

            # Strict-priority dispatch.
            for _ in range(cfg.dispatch_per_tick):
                msg = queues.pop()
                if msg is None:
                    break
                hdr = msg.packet.header
                wire = encode_packet(msg.packet)
                self.wire_log.append(wire)
                first = msg.attempts == 0
                msg.attempts += 1
                msg.last_tx_tick = tick
                self.trace.append(
                    TraceEvent(
                        tick,
                        "transmit",
                        hdr.ptype.name,
                        hdr.seq,
                        priority=int(hdr.priority),
                        header_bytes=header_size(hdr.ptype),
                        payload_bytes=len(msg.packet.payload),
                        semantic_bits=msg.semantic_bits if first else 0,
                        retransmission=not first,
                    )
                )
                if first:
                    for aux_ptype, aux_bits in msg.aux_semantic:
                        self.trace.append(
                            TraceEvent(
                                tick,
                                "piggyback_semantic",
                                aux_ptype,
                                hdr.seq,
                                semantic_bits=aux_bits,
                            )
                        )
                delivered = channel.transmit(wire)
                if receiver.on_delivery(msg, delivered, tick) and msg.tracked and not msg.acked:
                    acks.append((tick + rtt, msg))

            done_emitting = emit_idx >= len(pending_emit) and not waiting
            all_settled = all(m.acked or m.gave_up for m in tracked)
            if done_emitting and len(queues) == 0 and not acks and all_settled:
                if tick >= duration_ticks:
                    break
                tick = max(tick + 1, duration_ticks)
                continue
            tick += 1

        for msg in tracked:
            if not msg.acked and not msg.gave_up:
                msg.gave_up = True
                self.trace.append(
                    TraceEvent(
                        tick,
                        "give_up",
                        msg.packet.header.ptype.name,
                        msg.packet.header.seq,
                        detail="session-end",
                    )
                )
                give_up(msg)
        for msg in waiting:
            self.trace.append(
                TraceEvent(
                    tick,
                    "give_up",
                    msg.packet.header.ptype.name,
                    msg.packet.header.seq,
                    detail="dependency-never-satisfied",
                )
            )
            give_up(msg)
        return self.trace
