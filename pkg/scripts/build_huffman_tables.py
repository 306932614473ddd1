#!/usr/bin/env python3
"""Offline builder for the shipped prosody Huffman codebooks.

One canonical table per code bit-width b in [2, 8], covering the signed
alphabet {-M..M} with M = 2**(b-1) - 1. Training distribution is a
zero-concentrated Laplacian: P(0) = 0.32, the remaining mass decaying
geometrically in |k| with a per-width scale. Wider alphabets serve finer
step sizes, so their typical code magnitudes grow with the width; the
scales below track that (clamp covers 4 sigma of delta, ordinary moves
sit around a quarter of the alphabet). The zero symbol must come out at
no more than 2 bits so dead-zone runs stay nearly free.

Regenerate with:  python scripts/build_huffman_tables.py
"""

import heapq
import json
import math
from pathlib import Path

P_ZERO = 0.32
SCALES = {2: 1.0, 3: 1.2, 4: 1.5, 5: 2.2, 6: 4.0, 7: 8.0, 8: 18.0}
TABLE_VERSION = 1
OUT = Path(__file__).resolve().parent.parent / "src" / "trivox" / "assets" / "huffman_tables.json"


def training_distribution(bits: int) -> dict[int, float]:
    m = 2 ** (bits - 1) - 1
    scale = SCALES[bits]
    r = math.exp(-1.0 / scale)
    weights = [r ** (k - 1) for k in range(1, m + 1)]
    total = 2.0 * sum(weights)
    probs = {0: P_ZERO}
    for k in range(1, m + 1):
        p = (1.0 - P_ZERO) * weights[k - 1] / total
        probs[k] = p
        probs[-k] = p
    return probs


def huffman_lengths(probs: dict[int, float]) -> dict[int, int]:
    """Code length per symbol via the standard heap construction."""
    heap = [(p, i, (sym,)) for i, (sym, p) in enumerate(sorted(probs.items()))]
    heapq.heapify(heap)
    lengths = {sym: 0 for sym in probs}
    counter = len(heap)
    while len(heap) > 1:
        p1, _, syms1 = heapq.heappop(heap)
        p2, _, syms2 = heapq.heappop(heap)
        for s in syms1 + syms2:
            lengths[s] += 1
        heapq.heappush(heap, (p1 + p2, counter, syms1 + syms2))
        counter += 1
    return lengths


def main() -> None:
    tables = {}
    for bits in range(2, 9):
        probs = training_distribution(bits)
        lengths = huffman_lengths(probs)
        assert lengths[0] <= 2, f"b={bits}: zero symbol must stay within 2 bits"
        entropy = -sum(p * math.log2(p) for p in probs.values())
        mean_len = sum(probs[s] * lengths[s] for s in probs)
        assert mean_len <= entropy + 1.0
        # Kraft equality for a complete prefix code.
        kraft = sum(2.0 ** -l for l in lengths.values())
        assert abs(kraft - 1.0) < 1e-9, f"b={bits}: kraft sum {kraft}"
        table = sorted(lengths.items(), key=lambda kv: (kv[1], kv[0]))
        tables[str(bits)] = [[sym, length] for sym, length in table]
        print(f"b={bits}: H={entropy:.3f} mean={mean_len:.3f} max_len={max(lengths.values())}")

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"version": TABLE_VERSION, "tables": tables}, indent=1))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
