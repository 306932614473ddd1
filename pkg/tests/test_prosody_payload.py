import numpy as np
import pytest

from trivox.config import preset
from trivox.dsp.track import ProsodyTrack
from trivox.errors import CodecError, DecodeError
from trivox.prosody import (
    ProsodyStreamDecoder,
    ProsodyStreamEncoder,
    delta_decode,
    delta_encode,
    encode_keyframe,
    parse_payload,
    reconstruct_contour,
    sample_keyframes,
)
from trivox.prosody.payload import DeltaVector, smooth_for_sampling
from trivox.prosody.quantizer import spec_for


def make_track(pitch, energy=None, rate=None, voiced=None):
    n = len(pitch)
    pitch = np.asarray(pitch, dtype=float)
    energy = np.asarray(energy if energy is not None else np.full(n, 0.5), dtype=float)
    rate = np.asarray(rate if rate is not None else np.zeros(n), dtype=float)
    voiced = np.asarray(voiced if voiced is not None else np.ones(n, dtype=bool))
    return ProsodyTrack(pitch, energy, rate, voiced)


def test_schedule_balanced_cadence():
    sched = sample_keyframes(1000, 0.5)
    assert sched.stride_frames == 200
    assert sched.indices == (0, 200, 400, 600, 800)


def test_schedule_dense_degenerate():
    sched = sample_keyframes(5, 100.0)
    assert sched.stride_frames == 1
    assert sched.indices == (0, 1, 2, 3, 4)


def test_schedule_sparser_than_track():
    sched = sample_keyframes(500, 0.1)
    assert sched.stride_frames == 1000
    assert sched.indices == (0,)


def test_schedule_rejects_bad_rates():
    with pytest.raises(CodecError):
        sample_keyframes(100, 0.0)
    with pytest.raises(CodecError):
        sample_keyframes(100, 101.0)


def test_delta_encode_constant_track():
    track = make_track(np.full(600, 0.7), np.full(600, 0.7), np.full(600, 0.7))
    sched = sample_keyframes(600, 1.0)
    deltas = delta_encode(track, sched, ("pitch", "energy", "rate"))
    assert deltas[0].is_absolute and deltas[0].values["pitch"] == pytest.approx(0.7)
    for d in deltas[1:]:
        for f in ("pitch", "energy", "rate"):
            assert d.values[f] == pytest.approx(0.0)


def test_delta_encode_arithmetic():
    pitch = np.zeros(600)
    pitch[0], pitch[200], pitch[400] = 0.0, 0.2, 0.5
    track = make_track(pitch)
    sched = sample_keyframes(600, 0.5)
    deltas = delta_encode(track, sched, ("pitch",))
    assert deltas[0].is_absolute and deltas[0].values["pitch"] == pytest.approx(0.0)
    assert deltas[1].values["pitch"] == pytest.approx(0.2)
    assert deltas[2].values["pitch"] == pytest.approx(0.3)


def test_delta_round_trip_random_tracks():
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(300, 1500))
        track = make_track(
            rng.standard_normal(n), rng.uniform(0, 1, n), rng.standard_normal(n)
        )
        sched = sample_keyframes(n, float(rng.choice([0.5, 1.0, 5.0])))
        features = ("pitch", "energy", "rate")
        decoded = delta_decode(delta_encode(track, sched, features), features)
        for (idx, values, voiced), t in zip(decoded, sched.indices):
            assert idx == t
            for f in features:
                assert values[f] == pytest.approx(track.feature(f)[t], abs=1e-12)


def test_unvoiced_keyframes_omit_pitch_and_hold():
    pitch = np.array([1.0, 0.0, 1.4, 0.0])
    voiced = np.array([True, False, True, False])
    track = make_track(pitch, voiced=voiced)
    sched = sample_keyframes(4, 100.0)
    deltas = delta_encode(track, sched, ("pitch",))
    assert "pitch" in deltas[0].values
    assert "pitch" not in deltas[1].values  # unvoiced: no pitch bits
    assert deltas[2].values["pitch"] == pytest.approx(0.4)  # delta vs held 1.0


def test_keyframe_payload_round_trip():
    cfg = preset("balanced")
    specs = {f: spec_for(cfg, f) for f in cfg.enabled_features()}
    delta = DeltaVector({"pitch": 0.3, "energy": -0.1, "rate": 0.8}, False, True, 200)
    payload = encode_keyframe(delta, 200, cfg, specs)
    assert payload.timestamp_cs == 200
    voiced, is_abs, codes = parse_payload(payload.data, cfg, specs)
    assert voiced and not is_abs
    assert codes["pitch"] == specs["pitch"].quantize(0.3)
    assert codes["energy"] == specs["energy"].quantize(-0.1)
    assert codes["rate"] == specs["rate"].quantize(0.8)


def test_empty_feature_set_rejected():
    import dataclasses

    cfg = dataclasses.replace(preset("balanced"), features_enabled=frozenset())
    delta = DeltaVector({}, True, True, 0)
    with pytest.raises(CodecError, match="nothing to packetize"):
        encode_keyframe(delta, 0, cfg)


def test_stream_encoder_rejects_out_of_order_timestamps():
    cfg = preset("balanced")
    enc = ProsodyStreamEncoder(cfg)
    track = make_track(np.zeros(600), np.full(600, 0.5), np.zeros(600))
    enc.encode(track, sample_keyframes(600, 0.5))
    with pytest.raises(CodecError, match="out-of-order"):
        enc.encode(track, sample_keyframes(600, 0.5))  # timestamps restart at 0


def test_stream_round_trip_within_quantization_bound():
    cfg = preset("balanced")
    rng = np.random.default_rng(13)
    n = 2000
    # Smooth tracks so deltas stay inside the clamp.
    base = np.cumsum(rng.normal(0, 0.02, n))
    track = make_track(base, 0.5 + 0.3 * np.sin(np.arange(n) / 300), 0.2 * base)
    enc = ProsodyStreamEncoder(cfg)
    payloads = enc.encode(track, sample_keyframes(n, 0.5))

    dec = ProsodyStreamDecoder(cfg)
    for p in payloads:
        dec.push(p.timestamp_cs, p.data)
    keyframes = dec.finalize()

    smoothed = smooth_for_sampling(track, 200)
    specs = {f: spec_for(cfg, f) for f in cfg.enabled_features()}
    from trivox.prosody.payload import ABSOLUTE_INTERVAL

    for k, (ts, values, voiced) in enumerate(keyframes):
        steps_since_anchor = (k % ABSOLUTE_INTERVAL) + 1
        for f in cfg.enabled_features():
            bound = steps_since_anchor * specs[f].step / 2 + 1e-9
            true_value = smoothed.feature(f)[ts]
            assert abs(values[f] - true_value) <= bound


def test_decoder_tolerates_reordered_arrivals():
    cfg = preset("balanced")
    track = make_track(
        np.linspace(0, 1.0, 1000), np.linspace(0.2, 0.8, 1000), np.zeros(1000)
    )
    payloads = ProsodyStreamEncoder(cfg).encode(track, sample_keyframes(1000, 1.0))
    in_order = ProsodyStreamDecoder(cfg)
    for p in payloads:
        in_order.push(p.timestamp_cs, p.data)
    shuffled = ProsodyStreamDecoder(cfg)
    order = np.random.default_rng(5).permutation(len(payloads))
    for i in order:
        shuffled.push(payloads[i].timestamp_cs, payloads[i].data)
    assert in_order.finalize() == shuffled.finalize()


def test_payload_corruption_raises_or_stays_in_alphabet():
    cfg = preset("balanced")
    specs = {f: spec_for(cfg, f) for f in cfg.enabled_features()}
    delta = DeltaVector({"pitch": 1.0, "energy": 0.4, "rate": -0.6}, False, True, 10)
    payload = encode_keyframe(delta, 10, cfg, specs)
    rng = np.random.default_rng(55)
    for _ in range(200):
        corrupted = bytearray(payload.data)
        bit = int(rng.integers(0, payload.bit_length))
        corrupted[bit // 8] ^= 0x80 >> (bit % 8)
        try:
            _, _, codes = parse_payload(bytes(corrupted), cfg, specs)
        except DecodeError:
            continue
        for f, code in codes.items():
            assert abs(code) <= specs[f].max_code
            assert abs(specs[f].dequantize(code)) <= specs[f].clamp_range


def test_reconstruct_single_keyframe_constant():
    track = reconstruct_contour([(0, {"pitch": 0.4, "energy": 0.6, "rate": 0.1}, True)], 300, ("pitch", "energy", "rate"))
    assert np.allclose(track.f0_norm, 0.4)
    assert np.allclose(track.energy_norm, 0.6)


def test_reconstruct_passes_through_keyframes():
    kfs = [
        (0, {"pitch": 0.0, "energy": 0.5, "rate": 0.0}, True),
        (100, {"pitch": 1.0, "energy": 0.7, "rate": 0.2}, True),
        (200, {"pitch": -0.5, "energy": 0.4, "rate": -0.1}, True),
    ]
    track = reconstruct_contour(kfs, 300, ("pitch", "energy", "rate"))
    for ts, values, _ in kfs:
        assert track.f0_norm[ts] == pytest.approx(values["pitch"], abs=1e-9)
        assert track.energy_norm[ts] == pytest.approx(values["energy"], abs=1e-9)


def test_reconstruct_zero_keyframes_errors():
    with pytest.raises(CodecError, match="neutral"):
        reconstruct_contour([], 100, ("pitch",))


def test_reconstruct_disabled_features_neutral():
    track = reconstruct_contour([(0, {"pitch": 0.5}, True)], 100, ("pitch",))
    assert np.allclose(track.energy_norm, 0.5)
    assert np.allclose(track.rate_norm, 0.0)


def test_smoothing_noop_at_dense_rates():
    track = make_track(np.random.default_rng(1).standard_normal(100))
    assert smooth_for_sampling(track, 1) is track
