from .accounting import BitrateReport, account_bitrate, write_report_csv, write_report_json
from .capture import CAPTURE_MAGIC, read_capture, write_capture
from .channel import Channel, ChannelModel, channel_transmit
from .simulator import (
    DEFAULT_RETRANSMIT_BUDGET,
    OutboundMessage,
    Simulator,
    SimulatorConfig,
    TraceEvent,
    default_budget,
    export_trace,
)
from .wire import (
    CRC_BYTES,
    DEFAULT_PRIORITY,
    Packet,
    PacketHeader,
    PacketType,
    Priority,
    build_header,
    crc16,
    decode_packet,
    encode_packet,
    header_size,
    make_packet,
    parse_header,
    unwrap_timestamp,
)

__all__ = [
    "BitrateReport",
    "CAPTURE_MAGIC",
    "CRC_BYTES",
    "Channel",
    "ChannelModel",
    "DEFAULT_PRIORITY",
    "DEFAULT_RETRANSMIT_BUDGET",
    "OutboundMessage",
    "Packet",
    "PacketHeader",
    "PacketType",
    "Priority",
    "Simulator",
    "SimulatorConfig",
    "TraceEvent",
    "account_bitrate",
    "build_header",
    "channel_transmit",
    "crc16",
    "decode_packet",
    "default_budget",
    "encode_packet",
    "export_trace",
    "header_size",
    "make_packet",
    "parse_header",
    "read_capture",
    "unwrap_timestamp",
    "write_capture",
    "write_report_csv",
    "write_report_json",
]
