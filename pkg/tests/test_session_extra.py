import numpy as np
import pytest

from trivox.config import preset
from trivox.fixtures import synth_embedding, synth_speech, synth_transcript
from trivox.session import SessionContext, decode_session, encode_session
from trivox.timbre_codec import TimbreEmbedding, TimbreProfileId, quantize_embedding
from trivox.transport.channel import ChannelModel
from trivox.transport.wire import PacketType, decode_packet


@pytest.fixture(scope="module")
def utterance():
    audio = synth_speech(13.0, base_f0_hz=150.0, seed=81)
    text = synth_transcript(13.0, seed=81)
    emb = TimbreEmbedding(synth_embedding(81), "half")
    return audio, text, emb


def test_piggyback_round_trip_and_wire_savings(utterance, tmp_path):
    audio, text, emb = utterance
    cfg = preset("balanced")
    plain = encode_session(audio, text, emb, cfg)
    rode = encode_session(audio, text, emb, cfg, piggyback=True)

    # Same text, same number of keyframes received.
    assert [u.get("text") for u in rode.manifest.utterances] == [
        u.get("text") for u in plain.manifest.utterances
    ]
    assert (
        rode.manifest.prosody["keyframes_received"]
        == plain.manifest.prosody["keyframes_received"]
    )
    # Component accounting unchanged; wire cost and overhead drop.
    assert rode.report.prosody_bits == plain.report.prosody_bits
    assert rode.report.text_bits == plain.report.text_bits
    assert rode.report.wire_bps < plain.report.wire_bps
    assert rode.report.header_overhead_fraction < plain.report.header_overhead_fraction
    # No standalone PROSODY_KEY packets remain on the wire.
    types = [decode_packet(p).header.ptype for p in rode.capture_packets]
    assert PacketType.PROSODY_KEY not in types
    # The flags bit marks the extended frame.
    text_pkt = next(p for p in rode.capture_packets if decode_packet(p).header.ptype == PacketType.TEXT)
    assert decode_packet(text_pkt).header.flags == 1


def test_piggyback_capture_replays(utterance, tmp_path):
    audio, text, emb = utterance
    capture = tmp_path / "w.stct"
    result = encode_session(audio, text, emb, preset("balanced"), piggyback=True, capture_path=capture)
    manifest = decode_session(capture)
    assert [u["text"] for u in manifest.utterances if "text" in u] == [
        u["text"] for u in result.manifest.utterances if "text" in u
    ]
    assert manifest.prosody["keyframes_received"] == result.manifest.prosody["keyframes_received"]


def test_payload_stays_below_raw_encoding(utterance):
    # Entropy coding must beat transmitting the raw quantizer words plus
    # the two flag bits at every keyframe.
    audio, text, emb = utterance
    for mode in ("minimal", "balanced", "high_quality"):
        cfg = preset(mode)
        result = encode_session(audio, text, emb, cfg)
        raw_bits_per_kf = 2 + sum(cfg.bits_for(f) for f in cfg.enabled_features())
        n_kf = result.delivery["prosody_sent"]
        assert result.report.prosody_bits < raw_bits_per_kf * n_kf


def test_timbre_coherent_under_noise_and_speaker_change(utterance):
    audio, text, emb = utterance
    ctx = SessionContext()
    cfg = preset("balanced")
    encode_session(audio, text, emb, cfg, ChannelModel(ber=0.005, seed=31), context=ctx, retransmit_budget=64)

    changed = TimbreEmbedding(synth_embedding(777), "half")
    result = encode_session(
        audio, text, changed, cfg, ChannelModel(ber=0.005, seed=32), context=ctx, retransmit_budget=64
    )
    expected = TimbreProfileId.of(quantize_embedding(changed, "half"))
    # The receiver ended the session holding the changed speaker's
    # profile, never a stale one.
    assert result.manifest.timbre["profile_id"] == f"{expected.id:016x}"


def test_trace_export_is_line_delimited_json(utterance, tmp_path):
    import json

    audio, text, emb = utterance
    trace_path = tmp_path / "trace.jsonl"
    encode_session(audio, text, emb, preset("balanced"), trace_path=trace_path)
    lines = trace_path.read_text().strip().splitlines()
    assert len(lines) > 5
    for line in lines[:20]:
        doc = json.loads(line)
        assert "tick" in doc and "event" in doc
