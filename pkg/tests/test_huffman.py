import json
import math
from importlib import resources

import numpy as np
import pytest

from trivox.errors import DecodeError
from trivox.prosody.huffman import (
    BitReader,
    BitWriter,
    codebook_for_bits,
    decode_codes,
    encode_codes,
)


def test_bit_writer_reader_round_trip():
    w = BitWriter()
    w.write(0b101, 3)
    w.write(0b0110, 4)
    w.write(1, 1)
    data = w.to_bytes()
    r = BitReader(data, len(w))
    assert r.read(3) == 0b101
    assert r.read(4) == 0b0110
    assert r.read(1) == 1
    with pytest.raises(DecodeError):
        r.read_bit()


def test_round_trip_random_vectors():
    # 10^4 random code vectors across all alphabet widths.
    rng = np.random.default_rng(23)
    for _ in range(100):
        widths = list(rng.choice([2, 3, 4, 5, 6, 7, 8], size=rng.integers(1, 5)))
        codes = [int(rng.integers(-(2 ** (b - 1) - 1), 2 ** (b - 1))) for b in widths]
        data, nbits = encode_codes(codes, widths)
        assert decode_codes(data, nbits, widths) == codes
    for b in (3, 5, 6, 8):
        m = 2 ** (b - 1) - 1
        codes = [int(c) for c in rng.integers(-m, m + 1, size=10_000)]
        data, nbits = encode_codes(codes, [b] * len(codes))
        assert decode_codes(data, nbits, [b] * len(codes)) == codes


def test_zero_runs_cost_at_most_two_bits_per_symbol():
    for widths in ([6, 5, 5], [3], [8, 6, 6]):
        data, nbits = encode_codes([0] * len(widths) * 10, widths * 10)
        assert nbits <= 2 * 10 * len(widths)


def test_mean_length_within_entropy_plus_one():
    # On each codebook's own training distribution (the shipped tables
    # were built from a zero-concentrated Laplacian; recompute it here).
    doc = json.loads(resources.files("trivox.assets").joinpath("huffman_tables.json").read_text())
    scales = {2: 1.0, 3: 1.2, 4: 1.5, 5: 2.2, 6: 4.0, 7: 8.0, 8: 18.0}
    for bits_str, rows in doc["tables"].items():
        bits = int(bits_str)
        m = 2 ** (bits - 1) - 1
        r = math.exp(-1.0 / scales[bits])
        weights = [r ** (k - 1) for k in range(1, m + 1)]
        tail = 2.0 * sum(weights)
        probs = {0: 0.32}
        for k in range(1, m + 1):
            probs[k] = probs[-k] = 0.68 * weights[k - 1] / tail
        lengths = {sym: ln for sym, ln in rows}
        entropy = -sum(p * math.log2(p) for p in probs.values())
        mean_len = sum(probs[s] * lengths[s] for s in probs)
        assert mean_len <= entropy + 1.0


def test_out_of_alphabet_symbol_rejected():
    with pytest.raises(DecodeError, match="alphabet"):
        encode_codes([100], [6])


def test_truncated_bitstring_raises():
    data, nbits = encode_codes([5, -3], [6, 6])
    with pytest.raises(DecodeError):
        decode_codes(data, nbits - 3, [6, 6])


def test_corrupt_decode_totality():
    # Any bit-corrupted payload either decodes to in-alphabet codes or
    # raises DecodeError; out-of-range values never escape.
    rng = np.random.default_rng(101)
    widths = [6, 5, 5]
    m = {b: 2 ** (b - 1) - 1 for b in widths}
    trials = 0
    for _ in range(500):
        codes = [int(rng.integers(-m[b], m[b] + 1)) for b in widths]
        data, nbits = encode_codes(codes, widths)
        corrupted = bytearray(data)
        bit = int(rng.integers(0, nbits))
        corrupted[bit // 8] ^= 0x80 >> (bit % 8)
        try:
            decoded = decode_codes(bytes(corrupted), nbits, widths)
        except DecodeError:
            continue
        trials += 1
        for value, b in zip(decoded, widths):
            assert -m[b] <= value <= m[b]
    assert trials > 0  # some corruptions decode; all stayed in-alphabet


def test_canonical_order_in_asset():
    doc = json.loads(resources.files("trivox.assets").joinpath("huffman_tables.json").read_text())
    assert doc["version"] == 1
    for rows in doc["tables"].values():
        pairs = [(ln, sym) for sym, ln in rows]
        assert pairs == sorted(pairs)


def test_balanced_active_keyframe_payload_16_to_20_bits():
    # A representative active-speech balanced keyframe: pitch moving about
    # one step-quantized sigma, energy and rate a few steps. Payload =
    # 2 flag bits + three codewords.
    lengths = (
        codebook_for_bits(6).code_length(9)
        + codebook_for_bits(5).code_length(4)
        + codebook_for_bits(5).code_length(4)
    )
    assert 16 <= 2 + lengths <= 20
