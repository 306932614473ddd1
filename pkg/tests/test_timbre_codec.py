import struct

import numpy as np
import pytest

from trivox.errors import CodecError, DecodeError
from trivox.fixtures import compressible_embedding, synth_embedding
from trivox.timbre_codec import (
    ProfileCache,
    SendDecision,
    TimbreEmbedding,
    TimbreProfileId,
    build_timbre_payload,
    compress_embedding,
    compressed_stream_size,
    cosine_similarity,
    decompress_embedding,
    dequantize_embedding,
    detect_speaker_change,
    load_embedding,
    parse_timbre_payload,
    quantize_embedding,
    resolve_profile,
    save_embedding,
)


def emb(seed=0, precision="half"):
    return TimbreEmbedding(synth_embedding(seed), precision)


def reference_float16(value: float) -> int:
    """Independent IEEE 754 binary16 converter (round-half-even), built on
    struct rather than numpy."""
    bits32 = struct.unpack("<I", struct.pack("<f", np.float32(value)))[0]
    sign = (bits32 >> 16) & 0x8000
    exp = (bits32 >> 23) & 0xFF
    frac = bits32 & 0x7FFFFF
    if exp == 0xFF:
        return sign | 0x7C00 | (0x200 if frac else 0)
    e16 = exp - 127 + 15
    if e16 >= 0x1F:
        return sign | 0x7C00
    if e16 <= 0:
        if e16 < -10:
            return sign
        frac |= 0x800000
        shift = 14 - e16
        half = frac >> shift
        rem = frac & ((1 << shift) - 1)
        tie = 1 << (shift - 1)
        if rem > tie or (rem == tie and (half & 1)):
            half += 1
        return sign | half
    half = (e16 << 10) | (frac >> 13)
    rem = frac & 0x1FFF
    if rem > 0x1000 or (rem == 0x1000 and (half & 1)):
        half += 1
    return sign | half


def test_half_precision_payload_is_384_bytes():
    assert len(quantize_embedding(emb(), "half")) == 384


def test_single_precision_payload_is_768_bytes():
    assert len(quantize_embedding(emb(), "single")) == 768


def test_zero_vector_rejected():
    with pytest.raises(CodecError, match="zero norm"):
        TimbreEmbedding(np.zeros(192, dtype=np.float32))


def test_non_finite_rejected():
    v = synth_embedding(1)
    v[5] = np.nan
    with pytest.raises(CodecError, match="non-finite"):
        TimbreEmbedding(v)


def test_quantize_matches_reference_converter():
    values = synth_embedding(3)
    payload = quantize_embedding(TimbreEmbedding(values), "half")
    got = np.frombuffer(payload, dtype="<u2")
    expected = np.array([reference_float16(float(v)) for v in values], dtype=np.uint16)
    assert np.array_equal(got, expected)


def test_half_precision_error_bound():
    # Relative error of binary16 rounding is at most 2^-11 for values in
    # the normalized range.
    values = synth_embedding(9)
    back = dequantize_embedding(quantize_embedding(TimbreEmbedding(values), "half"), "half")
    mask = np.abs(values) >= 2.0**-14
    rel = np.abs(back[mask] - values[mask]) / np.abs(values[mask])
    assert rel.max() <= 2.0**-11


def test_compress_round_trip_many_embeddings():
    for seed in range(1000):
        payload = quantize_embedding(TimbreEmbedding(synth_embedding(seed)), "half")
        assert decompress_embedding(compress_embedding(payload)) == payload


def test_low_entropy_embedding_compresses_10_to_20_percent():
    payload = quantize_embedding(
        TimbreEmbedding(compressible_embedding(0)), "half"
    )
    blob = compress_embedding(payload)
    assert blob[0] == 0x01  # zlib path chosen
    ratio = (len(blob) - 1) / len(payload)
    assert 0.80 <= ratio <= 0.90


def test_incompressible_payload_stored_with_bounded_overhead():
    rng = np.random.default_rng(12)
    payload = rng.integers(0, 256, size=384, dtype=np.uint8).tobytes()
    blob = compress_embedding(payload)
    assert blob[0] == 0x00  # stored mode
    assert len(blob) <= len(payload) + 16
    assert decompress_embedding(blob) == payload


def test_corrupt_stream_raises():
    payload = quantize_embedding(TimbreEmbedding(compressible_embedding(1)), "half")
    blob = bytearray(compress_embedding(payload))
    assert blob[0] == 0x01
    blob[10] ^= 0x55
    with pytest.raises(DecodeError):
        decompress_embedding(bytes(blob))


def test_cosine_similarity_basics():
    a = TimbreEmbedding(synth_embedding(5))
    assert cosine_similarity(a, a) == pytest.approx(1.0)
    v = np.zeros(192, dtype=np.float32)
    w = np.zeros(192, dtype=np.float32)
    v[0] = 1.0
    w[1] = 1.0
    assert cosine_similarity(TimbreEmbedding(v), TimbreEmbedding(w)) == pytest.approx(0.0)
    neg = TimbreEmbedding(-a.values)
    assert cosine_similarity(a, neg) == pytest.approx(-1.0)


def test_dimension_mismatch():
    with pytest.raises(CodecError, match="dimension"):
        cosine_similarity(TimbreEmbedding(synth_embedding(0, dim=192)), TimbreEmbedding(synth_embedding(0, dim=64)))


def test_change_detection_strict_less_than():
    a = TimbreEmbedding(synth_embedding(0))
    # Construct b with an exact target similarity via Gram-Schmidt.
    rng = np.random.default_rng(8)
    other = rng.standard_normal(192).astype(np.float32)
    other -= other @ a.values * a.values / float(a.values @ a.values)
    other /= np.linalg.norm(other)

    def at_similarity(s):
        v = s * a.values / np.linalg.norm(a.values) + np.sqrt(1 - s * s) * other
        return TimbreEmbedding(v.astype(np.float32))

    assert detect_speaker_change(at_similarity(0.9), a, threshold=0.7) is False
    assert detect_speaker_change(at_similarity(0.65), a, threshold=0.7) is True
    exact = at_similarity(0.7)
    sim = cosine_similarity(exact, a)
    # Strictly-less-than semantics at the threshold itself.
    assert detect_speaker_change(exact, a, threshold=sim) is False


def test_profile_id_stable_and_8_bytes():
    q = quantize_embedding(emb(4), "half")
    pid1 = TimbreProfileId.of(q)
    pid2 = TimbreProfileId.of(bytes(q))
    assert pid1 == pid2
    assert len(pid1.to_bytes()) == 8
    assert TimbreProfileId.from_bytes(pid1.to_bytes()) == pid1


def test_cache_lru_eviction():
    cache = ProfileCache(capacity=2)
    ids = []
    for seed in range(3):
        q = quantize_embedding(emb(seed), "half")
        pid = TimbreProfileId.of(q)
        ids.append((pid, q))
        cache.put(pid, "half", q)
    assert ids[0][0] not in cache  # least recently used evicted
    assert ids[1][0] in cache and ids[2][0] in cache
    cache.get(ids[1][0])
    cache.put(*[ids[0][0], "half", ids[0][1]])
    assert ids[2][0] not in cache  # 2 was refreshed, 0 inserted, 2 out


def test_resolve_profile_decisions():
    q = quantize_embedding(emb(6), "half")
    pid = TimbreProfileId.of(q)
    assert resolve_profile(set(), pid) is SendDecision.SEND_FULL_EMBEDDING
    assert resolve_profile({pid.id}, pid) is SendDecision.SEND_PROFILE_ID


def test_timbre_payload_round_trip_and_accounting():
    e = emb(7)
    payload = build_timbre_payload(e, "half")
    precision, quantized = parse_timbre_payload(payload)
    assert precision == "half"
    assert quantized == quantize_embedding(e, "half")
    assert compressed_stream_size(payload) == len(payload) - 2
    # Incompressible random embedding: the stream is exactly the 384 bytes.
    assert compressed_stream_size(payload) == 384


def test_embedding_file_formats(tmp_path):
    values = synth_embedding(11)
    raw = tmp_path / "spk.emb"
    save_embedding(raw, values)
    loaded = load_embedding(raw)
    assert np.allclose(loaded.values, values)
    js = tmp_path / "spk.json"
    js.write_text("[" + ",".join(str(float(v)) for v in values) + "]")
    assert np.allclose(load_embedding(js).values, values, atol=1e-6)
