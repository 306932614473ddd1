"""Corpus benchmarking: bitrate tables, channel-noise runs, rate sweeps."""

from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from .config import QualityModeConfig, load_mode_config
from .errors import CodecError
from .fixtures import CorpusEntry, load_manifest
from .session import SessionResult, encode_session
from .transport.accounting import write_report_csv
from .transport.channel import ChannelModel

BENCH_RETRANSMIT_BUDGET = 64  # ample for combining at 10% BER


def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def _seed_for(base: int, mode_i: int, ber_i: int, utt_i: int) -> int:
    return (base + 104_729 * mode_i + 1_299_709 * ber_i + 15_485_863 * utt_i) % (1 << 31)


def run_session(
    entry: CorpusEntry,
    cfg: QualityModeConfig,
    channel: ChannelModel,
    retransmit_budget: int = BENCH_RETRANSMIT_BUDGET,
) -> SessionResult:
    return encode_session(
        entry.wav_path,
        entry.transcript_path,
        entry.embedding_path,
        cfg,
        channel,
        retransmit_budget=retransmit_budget,
    )


def run_benchmark(
    corpus_manifest: str | Path,
    modes: list[str],
    bers: list[float] | None = None,
    *,
    base_seed: int = 0,
    retransmit_budget: int = BENCH_RETRANSMIT_BUDGET,
    out_json: str | Path | None = None,
    out_csv: str | Path | None = None,
) -> dict:
    """Per-mode, per-channel bitrate table over a corpus.

    Returns a report keyed by mode, each holding one block per channel
    condition with mean/std of the component bitrates plus delivery
    statistics. Missing corpus entries are listed and skipped.
    """
    bers = bers if bers is not None else [0.0]
    entries = load_manifest(corpus_manifest)
    missing = [
        e.utterance_id
        for e in entries
        if not (e.wav_path.exists() and e.transcript_path.exists() and e.embedding_path.exists())
    ]
    usable = [e for e in entries if e.utterance_id not in set(missing)]

    report: dict = {
        "corpus": str(corpus_manifest),
        "utterances": len(usable),
        "missing": missing,
        "modes": {},
    }
    csv_rows: list[dict] = []
    t0 = time.perf_counter()

    for mode_i, mode in enumerate(modes):
        cfg = load_mode_config(mode)
        mode_block: dict = {}
        for ber_i, ber in enumerate(bers):
            per = {
                "text_bps": [],
                "prosody_bps": [],
                "timbre_bps": [],
                "total_excl_timbre_bps": [],
                "wire_bps": [],
            }
            retransmissions = 0
            delta_sent = delta_delivered = 0
            text_sent = text_delivered = 0
            for utt_i, entry in enumerate(usable):
                channel = ChannelModel(
                    ber=ber, seed=_seed_for(base_seed, mode_i, ber_i, utt_i)
                )
                result = run_session(entry, cfg, channel, retransmit_budget)
                r = result.report
                for key in per:
                    per[key].append(getattr(r, key))
                retransmissions += r.retransmissions
                delta_sent += result.delivery["deltas_sent"]
                delta_delivered += result.delivery["deltas_delivered"]
                text_sent += result.delivery["text_chunks_sent"]
                text_delivered += result.delivery["text_chunks_delivered"]
                csv_rows.append(
                    {
                        "mode": cfg.mode_name,
                        "ber": ber,
                        "utterance": entry.utterance_id,
                        **r.table_row(),
                        "wire_bps": round(r.wire_bps, 2),
                        "retransmissions": r.retransmissions,
                    }
                )
            stats = {}
            for key, values in per.items():
                mean, std = _mean_std(values)
                stats[f"{key}_mean"] = round(mean, 3)
                stats[f"{key}_std"] = round(std, 3)
            stats["retransmissions"] = retransmissions
            stats["delta_survival"] = (
                round(delta_delivered / delta_sent, 4) if delta_sent else 1.0
            )
            stats["text_delivery"] = (
                round(text_delivered / text_sent, 4) if text_sent else 1.0
            )
            mode_block[_channel_key(ber)] = stats
        report["modes"][cfg.mode_name] = mode_block

    report["elapsed_s"] = round(time.perf_counter() - t0, 2)
    if out_json is not None:
        Path(out_json).write_text(json.dumps(report, indent=2, sort_keys=True))
    if out_csv is not None:
        write_report_csv(csv_rows, out_csv)
    return report


def _channel_key(ber: float) -> str:
    return "clean" if ber == 0 else f"ber_{ber:g}"


def run_prosody_sweep(
    corpus_manifest: str | Path,
    rates: list[float],
    mode: str = "balanced",
    *,
    base_seed: int = 0,
    out_json: str | Path | None = None,
    out_csv: str | Path | None = None,
) -> dict:
    """Total bitrate (amortized timbre included) versus keyframe rate.

    Reports, per rate: measured prosody bps, the analytic payload model
    f_k * mean-bits-per-keyframe, and the corpus-mean total. Also fits
    prosody bps against rate and reports the coefficient of
    determination plus a strict-monotonicity summary.
    """
    base_cfg = load_mode_config(mode)
    for rate in rates:
        if not (0.0 < rate <= 100.0):
            raise CodecError(f"sweep rate {rate} outside (0, 100]")
    entries = load_manifest(corpus_manifest)

    rows = []
    for rate_i, rate in enumerate(sorted(rates)):
        cfg = dataclasses.replace(base_cfg, keyframe_rate_hz=rate)
        prosody, totals, kf_bits, kf_count = [], [], 0, 0
        for utt_i, entry in enumerate(entries):
            channel = ChannelModel(ber=0.0, seed=_seed_for(base_seed, 0, rate_i, utt_i))
            result = run_session(entry, cfg, channel)
            r = result.report
            prosody.append(r.prosody_bps)
            totals.append(r.total_excl_timbre_bps + r.timbre_bps)
            kf_bits += r.prosody_bits
            kf_count += result.delivery["prosody_sent"]
        p_mean, p_std = _mean_std(prosody)
        t_mean, t_std = _mean_std(totals)
        mean_bits = kf_bits / kf_count if kf_count else 0.0
        rows.append(
            {
                "rate_hz": rate,
                "prosody_bps_mean": round(p_mean, 3),
                "prosody_bps_std": round(p_std, 3),
                "total_bps_mean": round(t_mean, 3),
                "total_bps_std": round(t_std, 3),
                "mean_bits_per_keyframe": round(mean_bits, 2),
                "model_prosody_bps": round(rate * mean_bits, 3),
                "keyframes": kf_count,
            }
        )

    xs = np.array([row["rate_hz"] for row in rows])
    ys = np.array([row["prosody_bps_mean"] for row in rows])
    r_squared = 1.0
    if len(xs) >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
        predicted = slope * xs + intercept
        ss_res = float(np.sum((ys - predicted) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r_squared = 1.0 - ss_res / ss_tot if ss_tot else 1.0

    totals_seq = [row["total_bps_mean"] for row in rows]
    report = {
        "corpus": str(corpus_manifest),
        "mode": base_cfg.mode_name,
        "rows": rows,
        "prosody_vs_rate_r_squared": round(r_squared, 5),
        "total_strictly_increasing": all(
            b > a for a, b in zip(totals_seq, totals_seq[1:])
        ),
    }
    if out_json is not None:
        Path(out_json).write_text(json.dumps(report, indent=2, sort_keys=True))
    if out_csv is not None:
        write_report_csv(rows, out_csv)
    return report
