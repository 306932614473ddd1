"""Payload and wire bitrate accounting from a transport trace.

Component columns count semantic payload bits only, once per unique
packet, over the full utterance duration including silence: text and
timbre as their compressed stream bytes (format/precision markers
excluded), prosody as the exact entropy-coded bit count. Wire bitrate
adds headers, markers, checksums, and every retransmission. Amortized
timbre is by definition 8 * compressed_bytes / duration.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import ProtocolError
from .simulator import TraceEvent
from .wire import CRC_BYTES, PacketType

_TIMBRE_TYPES = ("TIMBRE", "TIMBRE_PROFILE")
_PROSODY_TYPES = ("PROSODY_KEY", "PROSODY_DELTA")


@dataclass(frozen=True)
class BitrateReport:
    duration_s: float
    text_bps: float
    prosody_bps: float
    timbre_bps: float  # amortized over the full duration
    total_excl_timbre_bps: float
    wire_bps: float
    header_overhead_fraction: float
    text_bits: int
    prosody_bits: int
    timbre_bits: int
    wire_bits: int
    packets_sent: int
    retransmissions: int
    queue_drops: int
    delivery_failures: int

    def to_dict(self) -> dict:
        return asdict(self)

    def table_row(self) -> dict:
        """The bitrate-table columns (text / prosody / timbre / total)."""
        return {
            "total_bps": round(self.total_excl_timbre_bps, 2),
            "text_bps": round(self.text_bps, 2),
            "prosody_bps": round(self.prosody_bps, 2),
            "timbre_bps": round(self.timbre_bps, 2),
        }


def account_bitrate(trace: list[TraceEvent], duration_s: float) -> BitrateReport:
    if duration_s <= 0:
        raise ProtocolError(f"cannot account over non-positive duration {duration_s}")
    text_bits = prosody_bits = timbre_bits = 0
    wire_bits = 0
    header_plus_crc_bytes = 0
    payload_bytes = 0
    packets = retransmissions = queue_drops = failures = 0

    for ev in trace:
        if ev.event == "transmit" or ev.event == "piggyback_semantic":
            if ev.event == "transmit":
                packets += 1
                if ev.retransmission:
                    retransmissions += 1
                wire_bits += 8 * (ev.header_bytes + ev.payload_bytes + CRC_BYTES)
                header_plus_crc_bytes += ev.header_bytes + CRC_BYTES
                payload_bytes += ev.payload_bytes
            if ev.semantic_bits:
                if ev.ptype == "TEXT":
                    text_bits += ev.semantic_bits
                elif ev.ptype in _PROSODY_TYPES:
                    prosody_bits += ev.semantic_bits
                elif ev.ptype in _TIMBRE_TYPES:
                    timbre_bits += ev.semantic_bits
        elif ev.event == "queue_drop":
            queue_drops += 1
        elif ev.event == "give_up":
            failures += 1

    denom = header_plus_crc_bytes + payload_bytes
    overhead = header_plus_crc_bytes / denom if denom else 0.0
    return BitrateReport(
        duration_s=duration_s,
        text_bps=text_bits / duration_s,
        prosody_bps=prosody_bits / duration_s,
        timbre_bps=timbre_bits / duration_s,
        total_excl_timbre_bps=(text_bits + prosody_bits) / duration_s,
        wire_bps=wire_bits / duration_s,
        header_overhead_fraction=overhead,
        text_bits=text_bits,
        prosody_bits=prosody_bits,
        timbre_bits=timbre_bits,
        wire_bits=wire_bits,
        packets_sent=packets,
        retransmissions=retransmissions,
        queue_drops=queue_drops,
        delivery_failures=failures,
    )


def write_report_json(report: BitrateReport | dict, path: str | Path) -> None:
    doc = report.to_dict() if isinstance(report, BitrateReport) else report
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True))


def write_report_csv(rows: list[dict], path: str | Path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    keys = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)
