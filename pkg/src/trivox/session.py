"""End-to-end encode/decode sessions.

encode_session runs the full sender pipeline (VAD, prosody extraction,
component codecs), simulates the duplex transport over a seeded channel,
and produces the capture file, the receiver's reconstruction manifest,
and exact bitrate accounting. decode_session replays a capture offline
through the receiver state machine only.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adapters import SttAdapter, TranscriptReplayAdapter, load_transcript
from .config import QualityModeConfig
from .dsp.audio import AudioBuffer, load_audio
from .dsp.track import ProsodyTrack, extract_prosody
from .dsp.vad import vad_segment
from .errors import AudioError, CodecError, DecodeError, ProtocolError
from .prosody.payload import ProsodyStreamDecoder, ProsodyStreamEncoder
from .prosody.reconstruct import reconstruct_contour
from .prosody.schedule import sample_keyframes
from .text_codec import (
    ContextDictionary,
    MIN_TEXT_CHARS,
    TextChunk,
    compress_text,
    decompress_text,
    preprocess_text,
    update_context,
)
from .timbre_codec import (
    ProfileCache,
    SendDecision,
    TimbreEmbedding,
    TimbreProfileId,
    build_timbre_payload,
    compressed_stream_size,
    detect_speaker_change,
    load_embedding,
    parse_timbre_payload,
    quantize_embedding,
    resolve_profile,
)
from .transport.accounting import BitrateReport, account_bitrate
from .transport.capture import read_capture, write_capture
from .transport.channel import ChannelModel
from .transport.simulator import (
    DEFAULT_RETRANSMIT_BUDGET,
    OutboundMessage,
    Simulator,
    SimulatorConfig,
    default_budget,
    export_trace,
)
from .transport.wire import Packet, PacketType, make_packet

PROFILE_ID_SEMANTIC_BITS = 64

log = logging.getLogger(__name__)


def _log_stats_drift(audio: AudioBuffer, stats) -> None:
    """Speaker statistics stay fixed after estimation; note when the tail
    of a long utterance has drifted away from the estimation window."""
    from .dsp.features import extract_energy
    from .dsp.track import STATS_WINDOW_SECONDS

    if audio.duration_s < 2 * STATS_WINDOW_SECONDS:
        return
    tail = AudioBuffer(audio.samples[-int(STATS_WINDOW_SECONDS * audio.sample_rate_hz) :])
    tail_energy = extract_energy(tail)
    tail_p95 = float(np.percentile(tail_energy, 95))
    if tail_p95 > 0 and not (0.5 <= tail_p95 / stats.e_max <= 2.0):
        log.debug(
            "energy stats drift: estimation e_max=%.4f vs tail p95=%.4f",
            stats.e_max,
            tail_p95,
        )


def _build_piggyback_block(payloads) -> bytes:
    """Flags-extended TEXT frame prefix carrying prosody keyframes:
    [count:1] then per key [timestamp:3][bit_length:1][payload bytes]."""
    out = bytearray([len(payloads)])
    for p in payloads:
        if p.bit_length > 255:
            raise CodecError(f"keyframe payload of {p.bit_length} bits cannot piggyback")
        out += p.timestamp_cs.to_bytes(3, "big")
        out.append(p.bit_length)
        out += p.data
    return bytes(out)


def _split_piggyback_block(payload: bytes):
    """Inverse of _build_piggyback_block; returns (keys, remaining_bytes)
    where keys are (timestamp_cs, data) pairs."""
    if not payload:
        raise DecodeError("flags-extended frame missing the key count")
    count = payload[0]
    off = 1
    keys = []
    for _ in range(count):
        if off + 4 > len(payload):
            raise DecodeError("flags-extended frame truncated inside a key entry")
        ts = int.from_bytes(payload[off : off + 3], "big")
        bit_len = payload[off + 3]
        n = (bit_len + 7) // 8
        off += 4
        if off + n > len(payload):
            raise DecodeError("flags-extended frame truncated inside key data")
        keys.append((ts, payload[off : off + n]))
        off += n
    return keys, payload[off:]


@dataclass
class SessionContext:
    """State that survives across sessions: the receiver's profile cache,
    the sender's knowledge of it, and the last active embedding."""

    receiver_cache: ProfileCache = field(default_factory=ProfileCache)
    sender_known_profiles: set[int] = field(default_factory=set)
    previous_embedding: TimbreEmbedding | None = None


@dataclass
class ReconstructionManifest:
    mode_name: str
    duration_s: float
    utterances: list[dict]
    prosody: dict  # f0_norm / energy_norm / rate_norm / voiced / features / keyframes_received
    timbre: dict  # profile_id / precision / source
    stats: dict

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def from_json(cls, path: str | Path) -> "ReconstructionManifest":
        doc = json.loads(Path(path).read_text())
        return cls(**doc)

    def prosody_track(self) -> ProsodyTrack:
        p = self.prosody
        return ProsodyTrack(
            np.asarray(p["f0_norm"]),
            np.asarray(p["energy_norm"]),
            np.asarray(p["rate_norm"]),
            np.asarray(p["voiced"], dtype=bool),
        )


@dataclass
class SessionResult:
    report: BitrateReport
    manifest: ReconstructionManifest
    capture_packets: list[bytes]
    trace: list
    sender_dict: ContextDictionary
    receiver_dict: ContextDictionary
    delivery: dict
    capture_path: str | None = None
    manifest_path: str | None = None
    trace_path: str | None = None


def _neutral_manifest_prosody(duration_frames: int, features: tuple[str, ...]) -> dict:
    from .prosody.reconstruct import NEUTRAL_VALUES

    return {
        "f0_norm": [NEUTRAL_VALUES["pitch"]] * duration_frames,
        "energy_norm": [NEUTRAL_VALUES["energy"]] * duration_frames,
        "rate_norm": [NEUTRAL_VALUES["rate"]] * duration_frames,
        "voiced": [False] * duration_frames,
        "features": list(features),
        "keyframes_received": 0,
        "neutral": True,
    }


def _prosody_dict(track: ProsodyTrack, features: tuple[str, ...], n_keyframes: int) -> dict:
    return {
        "f0_norm": [round(float(v), 6) for v in track.f0_norm],
        "energy_norm": [round(float(v), 6) for v in track.energy_norm],
        "rate_norm": [round(float(v), 6) for v in track.rate_norm],
        "voiced": [bool(v) for v in track.voiced],
        "features": list(features),
        "keyframes_received": n_keyframes,
        "neutral": False,
    }


def encode_session(
    audio: AudioBuffer | str | Path,
    transcript: str | Path | SttAdapter,
    embedding: TimbreEmbedding | str | Path,
    cfg: QualityModeConfig,
    channel: ChannelModel | None = None,
    *,
    streaming: bool = False,
    piggyback: bool = False,
    retransmit_budget: int = DEFAULT_RETRANSMIT_BUDGET,
    context: SessionContext | None = None,
    sim_config: SimulatorConfig | None = None,
    capture_path: str | Path | None = None,
    manifest_path: str | Path | None = None,
    trace_path: str | Path | None = None,
) -> SessionResult:
    channel = channel or ChannelModel()
    context = context or SessionContext()

    if not isinstance(audio, AudioBuffer):
        audio = load_audio(audio)
    if len(audio) == 0:
        raise AudioError("zero-length audio: nothing to encode")
    if isinstance(embedding, (str, Path)):
        embedding = load_embedding(embedding, cfg.embedding_precision)
    if embedding.dim != cfg.embedding_dim:
        raise CodecError(
            f"embedding dimension {embedding.dim} != configured {cfg.embedding_dim}"
        )
    def _is_existing_path(value) -> bool:
        try:
            return Path(value).exists()
        except OSError:
            return False  # raw transcript text, not a filename

    if isinstance(transcript, Path) or (
        isinstance(transcript, str) and _is_existing_path(transcript)
    ):
        stt: SttAdapter = TranscriptReplayAdapter(load_transcript(transcript), streaming)
    elif isinstance(transcript, str):
        stt = TranscriptReplayAdapter(transcript, streaming)
    else:
        stt = transcript

    duration_s = audio.duration_s
    duration_ticks = math.ceil(duration_s * 100)

    # --- Sender-side analysis -------------------------------------------
    segments = vad_segment(audio, cfg)
    track, stats = extract_prosody(audio)
    _log_stats_drift(audio, stats)

    chunks = stt.transcribe(audio, segments)
    if cfg.text_preprocess:
        cleaned = []
        for c in chunks:
            text = preprocess_text(c.text)
            if len(text.strip()) >= MIN_TEXT_CHARS:
                cleaned.append(TextChunk(c.utterance_id, text, c.timestamp_cs))
        chunks = cleaned

    schedule = sample_keyframes(len(track), cfg.keyframe_rate_hz)
    prosody_payloads = ProsodyStreamEncoder(cfg).encode(track, schedule)

    # --- Timbre decision -------------------------------------------------
    precision = cfg.embedding_precision
    if context.previous_embedding is not None and not detect_speaker_change(
        embedding, context.previous_embedding, cfg.speaker_change_threshold
    ):
        active_embedding = context.previous_embedding  # unchanged voice keeps its profile
    else:
        active_embedding = embedding
    quantized = quantize_embedding(active_embedding, precision)
    profile_id = TimbreProfileId.of(quantized)
    decision = resolve_profile(context.sender_known_profiles, profile_id)
    timbre_payload = build_timbre_payload(active_embedding, precision)
    context.previous_embedding = active_embedding

    # --- Outbound messages ----------------------------------------------
    messages: list[OutboundMessage] = []
    seq_counters = {pt: 0 for pt in PacketType}

    def next_seq(ptype: PacketType) -> int:
        seq = seq_counters[ptype]
        seq_counters[ptype] = (seq + 1) % (1 << 16)
        return seq

    sender_dict_holder = [ContextDictionary()]
    receiver_dict_holder = [ContextDictionary()]
    chunk_text_by_seq: dict[int, str] = {}

    if streaming:
        emit_ticks = [min(seg.end_ms // 10, duration_ticks) for seg in segments]
    else:
        utterance_end = segments[-1].end_ms // 10 if segments else duration_ticks
        emit_ticks = [utterance_end] * len(chunks)

    # Wire-efficient profile: absolute keyframes ride inside the first
    # TEXT packet's flags-extended frame instead of paying their own
    # headers. They inherit TEXT reliability (an upgrade over MEDIUM).
    riding = [p for p in prosody_payloads if p.is_absolute] if (piggyback and chunks) else []
    riding_set = {id(p) for p in riding}

    prev_text_key = None
    for chunk_i, (chunk, emit_tick) in enumerate(zip(chunks, emit_ticks)):
        seq = next_seq(PacketType.TEXT)
        chunk_text_by_seq[seq] = chunk.text
        carried = riding if chunk_i == 0 else []

        def factory(chunk=chunk, carried=carried):
            payload = compress_text(chunk, sender_dict_holder[0], cfg.text_compress_level)
            if not carried:
                return payload, 8 * (len(payload) - 1)  # format byte excluded
            block = _build_piggyback_block(carried)
            return block + payload, 8 * (len(payload) - 1)

        placeholder = make_packet(
            PacketType.TEXT, seq, chunk.timestamp_cs, b"", flags=1 if carried else 0
        )
        msg = OutboundMessage(
            packet=placeholder,
            semantic_bits=0,
            emit_tick=emit_tick,
            retransmit_budget=default_budget(PacketType.TEXT, retransmit_budget),
            depends_on=prev_text_key,
            payload_factory=factory,
            aux_semantic=tuple(
                ("PROSODY_KEY", p.bit_length) for p in carried
            ),
        )
        messages.append(msg)
        prev_text_key = (int(PacketType.TEXT), seq)

    for payload in prosody_payloads:
        if id(payload) in riding_set:
            continue
        ptype = PacketType.PROSODY_KEY if payload.is_absolute else PacketType.PROSODY_DELTA
        seq = next_seq(ptype)
        pkt = make_packet(ptype, seq, payload.timestamp_cs, payload.data)
        messages.append(
            OutboundMessage(
                packet=pkt,
                semantic_bits=payload.bit_length,
                emit_tick=payload.timestamp_cs,
                retransmit_budget=default_budget(ptype, retransmit_budget),
            )
        )

    full_timbre_msg = OutboundMessage(
        packet=make_packet(
            PacketType.TIMBRE, next_seq(PacketType.TIMBRE), 0, timbre_payload
        ),
        semantic_bits=8 * compressed_stream_size(timbre_payload),
        emit_tick=0,
        retransmit_budget=default_budget(PacketType.TIMBRE, retransmit_budget),
    )
    if decision is SendDecision.SEND_PROFILE_ID:
        full_timbre_msg.emit_tick = -1  # sits behind the profile packet
        profile_msg = OutboundMessage(
            packet=make_packet(
                PacketType.TIMBRE_PROFILE,
                next_seq(PacketType.TIMBRE_PROFILE),
                0,
                profile_id.to_bytes(),
            ),
            semantic_bits=PROFILE_ID_SEMANTIC_BITS,
            emit_tick=0,
            retransmit_budget=default_budget(PacketType.TIMBRE_PROFILE, retransmit_budget),
            fallback=full_timbre_msg,
        )
        messages.append(profile_msg)
    else:
        messages.append(full_timbre_msg)

    # --- Receiver state ----------------------------------------------------
    received_text: dict[int, tuple[str, int]] = {}
    failed_text: set[int] = set()
    prosody_decoder = ProsodyStreamDecoder(cfg)
    received_timbre: list[tuple[TimbreProfileId, str, bytes, str]] = []

    def on_text(packet: Packet) -> str:
        payload = packet.payload
        keys = []
        try:
            if packet.header.flags:
                keys, payload = _split_piggyback_block(payload)
            text = decompress_text(payload, receiver_dict_holder[0])
        except DecodeError:
            return "reject"
        for ts, data in keys:
            prosody_decoder.push(ts, data)
        received_text[packet.header.seq] = (text, packet.header.timestamp_cs)
        receiver_dict_holder[0] = update_context(receiver_dict_holder[0], text)
        return "accept"

    def on_prosody(packet: Packet) -> str:
        try:
            prosody_decoder.push(packet.header.timestamp_cs, packet.payload)
        except DecodeError:
            return "reject"
        return "accept"

    def on_timbre(packet: Packet) -> str:
        try:
            prec, quant = parse_timbre_payload(packet.payload)
        except DecodeError:
            return "reject"
        pid = TimbreProfileId.of(quant)
        context.receiver_cache.put(pid, prec, quant)
        received_timbre.append((pid, prec, quant, "full"))
        return "accept"

    def on_timbre_profile(packet: Packet) -> str:
        try:
            pid = TimbreProfileId.from_bytes(packet.payload)
        except DecodeError:
            return "reject"
        entry = context.receiver_cache.get(pid)
        if entry is None:
            return "profile_miss"
        received_timbre.append((pid, entry[0], entry[1], "cache"))
        return "accept"

    def on_ack(ptype: PacketType, seq: int) -> None:
        if ptype == PacketType.TEXT:
            sender_dict_holder[0] = update_context(
                sender_dict_holder[0], chunk_text_by_seq[seq]
            )
        elif ptype in (PacketType.TIMBRE, PacketType.TIMBRE_PROFILE):
            context.sender_known_profiles.add(profile_id.id)

    def on_give_up(ptype: PacketType, seq: int) -> None:
        if ptype == PacketType.TEXT:
            failed_text.add(seq)

    sim = Simulator(
        channel,
        sim_config,
        handlers={
            PacketType.TEXT: on_text,
            PacketType.PROSODY_KEY: on_prosody,
            PacketType.PROSODY_DELTA: on_prosody,
            PacketType.TIMBRE: on_timbre,
            PacketType.TIMBRE_PROFILE: on_timbre_profile,
        },
        on_ack=on_ack,
        on_give_up=on_give_up,
    )
    trace = sim.run(messages, duration_ticks)

    # --- Manifest ----------------------------------------------------------
    utterances = []
    for seq in sorted(set(received_text) | failed_text):
        if seq in received_text:
            text, ts = received_text[seq]
            utterances.append({"utterance_id": seq, "text": text, "timestamp_cs": ts})
        else:
            utterances.append({"utterance_id": seq, "gap": True})

    features = cfg.enabled_features()
    keyframes = prosody_decoder.finalize()
    if keyframes:
        recon = reconstruct_contour(keyframes, duration_ticks, features)
        prosody_doc = _prosody_dict(recon, features, len(keyframes))
    else:
        prosody_doc = _neutral_manifest_prosody(duration_ticks, features)

    timbre_doc = {"profile_id": None, "precision": None, "source": None}
    if received_timbre:
        pid, prec, _, source = received_timbre[-1]
        timbre_doc = {"profile_id": f"{pid.id:016x}", "precision": prec, "source": source}

    sent_deltas = sum(
        1 for m in messages if m.packet.header.ptype == PacketType.PROSODY_DELTA
    )
    delivered_deltas = sum(
        1
        for ev in trace
        if ev.event == "accept" and ev.ptype == "PROSODY_DELTA"
    )
    delivery = {
        "text_chunks_sent": len(chunks),
        "text_chunks_delivered": len(received_text),
        "text_failures": len(failed_text),
        "prosody_sent": len(prosody_payloads),
        "prosody_delivered": prosody_decoder.received_count,
        "deltas_sent": sent_deltas,
        "deltas_delivered": delivered_deltas,
        "delta_survival": (delivered_deltas / sent_deltas) if sent_deltas else 1.0,
        "retransmissions": sum(1 for ev in trace if ev.event == "retransmit"),
        "vad_segments": len(segments),
    }

    manifest = ReconstructionManifest(
        mode_name=cfg.mode_name,
        duration_s=duration_s,
        utterances=utterances,
        prosody=prosody_doc,
        timbre=timbre_doc,
        stats=delivery,
    )

    report = account_bitrate(trace, duration_s)
    result = SessionResult(
        report=report,
        manifest=manifest,
        capture_packets=list(sim.wire_log),
        trace=trace,
        sender_dict=sender_dict_holder[0],
        receiver_dict=receiver_dict_holder[0],
        delivery=delivery,
    )

    if capture_path is not None:
        write_capture(capture_path, cfg.mode_name, result.capture_packets)
        result.capture_path = str(capture_path)
    if manifest_path is not None:
        manifest.write_json(manifest_path)
        result.manifest_path = str(manifest_path)
    if trace_path is not None:
        export_trace(trace, trace_path)
        result.trace_path = str(trace_path)
    return result


def decode_session(
    capture: str | Path,
    cfg: QualityModeConfig | None = None,
    context: SessionContext | None = None,
) -> ReconstructionManifest:
    """Replay a capture file through the receiver state machine."""
    from .config import load_mode_config
    from .transport.wire import decode_packet

    context = context or SessionContext()
    mode_name, raw_packets = read_capture(capture)
    if cfg is None:
        cfg = load_mode_config(mode_name)

    seen: set[tuple[int, int]] = set()
    text_packets: dict[int, Packet] = {}
    prosody_decoder = ProsodyStreamDecoder(cfg)
    received_timbre: list[tuple[TimbreProfileId, str, bytes, str]] = []
    corrupt = 0
    max_ts = 0

    for raw in raw_packets:
        try:
            packet = decode_packet(raw)
        except ProtocolError:
            corrupt += 1
            continue
        key = (int(packet.header.ptype), packet.header.seq)
        if key in seen:
            continue
        seen.add(key)
        max_ts = max(max_ts, packet.header.timestamp_cs)
        pt = packet.header.ptype
        if pt == PacketType.TEXT:
            if packet.header.flags:
                try:
                    keys, _ = _split_piggyback_block(packet.payload)
                    for ts, data in keys:
                        prosody_decoder.push(ts, data)
                except DecodeError:
                    corrupt += 1
            text_packets[packet.header.seq] = packet
        elif pt in (PacketType.PROSODY_KEY, PacketType.PROSODY_DELTA):
            try:
                prosody_decoder.push(packet.header.timestamp_cs, packet.payload)
            except DecodeError:
                corrupt += 1
        elif pt == PacketType.TIMBRE:
            try:
                prec, quant = parse_timbre_payload(packet.payload)
            except DecodeError:
                corrupt += 1
                continue
            pid = TimbreProfileId.of(quant)
            context.receiver_cache.put(pid, prec, quant)
            received_timbre.append((pid, prec, quant, "full"))
        elif pt == PacketType.TIMBRE_PROFILE:
            try:
                pid = TimbreProfileId.from_bytes(packet.payload)
            except DecodeError:
                corrupt += 1
                continue
            entry = context.receiver_cache.get(pid)
            if entry is not None:
                received_timbre.append((pid, entry[0], entry[1], "cache"))
            else:
                received_timbre.append((pid, None, b"", "unresolved"))

    receiver_dict = ContextDictionary()
    utterances = []
    for seq in sorted(text_packets):
        packet = text_packets[seq]
        try:
            payload = packet.payload
            if packet.header.flags:
                _, payload = _split_piggyback_block(payload)
            text = decompress_text(payload, receiver_dict)
        except DecodeError:
            utterances.append({"utterance_id": seq, "gap": True})
            continue
        receiver_dict = update_context(receiver_dict, text)
        utterances.append(
            {"utterance_id": seq, "text": text, "timestamp_cs": packet.header.timestamp_cs}
        )

    duration_frames = max_ts + 1
    features = cfg.enabled_features()
    keyframes = prosody_decoder.finalize()
    if keyframes:
        recon = reconstruct_contour(keyframes, duration_frames, features)
        prosody_doc = _prosody_dict(recon, features, len(keyframes))
    else:
        prosody_doc = _neutral_manifest_prosody(duration_frames, features)

    timbre_doc = {"profile_id": None, "precision": None, "source": None}
    if received_timbre:
        pid, prec, _, source = received_timbre[-1]
        timbre_doc = {"profile_id": f"{pid.id:016x}", "precision": prec, "source": source}

    return ReconstructionManifest(
        mode_name=mode_name,
        duration_s=duration_frames / 100.0,
        utterances=utterances,
        prosody=prosody_doc,
        timbre=timbre_doc,
        stats={
            "replayed_packets": len(raw_packets),
            "unique_packets": len(seen),
            "corrupt_packets": corrupt,
            "keyframes_received": prosody_decoder.received_count,
        },
    )
