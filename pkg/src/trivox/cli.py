"""Command-line interface.

Subcommands: encode, decode, bench, sweep, fixtures. Exit codes:
0 success, 2 config error, 3 input error, 4 adapter error, 5 protocol or
decode error, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import (
    AdapterError,
    AudioError,
    CodecError,
    ConfigError,
    DecodeError,
    ProtocolError,
    TrivoxError,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_ADAPTER = 4
EXIT_PROTOCOL = 5


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trivox", description=__doc__)
    p.add_argument("--version", action="version", version=f"trivox {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode one utterance into a capture file")
    enc.add_argument("--in", dest="audio", required=True, help="wav or raw pcm input")
    enc.add_argument("--transcript", required=True, help="reference transcript file")
    enc.add_argument("--embedding", required=True, help="speaker embedding (.emb or .json)")
    enc.add_argument("--mode", default="balanced", help="preset name or YAML config path")
    enc.add_argument("--out", required=True, help="capture file to write (.stct)")
    enc.add_argument("--manifest", help="also write the receiver manifest JSON")
    enc.add_argument("--report", help="write the bitrate report JSON")
    enc.add_argument("--trace", help="write the transport trace (JSONL)")
    enc.add_argument("--ber", type=float, default=0.0, help="channel bit error rate")
    enc.add_argument("--drop", type=float, default=0.0, help="whole-packet drop rate")
    enc.add_argument("--rtt", type=int, default=20, help="round-trip ticks (centiseconds)")
    enc.add_argument("--seed", type=int, default=0, help="channel fault schedule seed")
    enc.add_argument("--budget", type=int, default=8, help="retransmission budget")
    enc.add_argument("--streaming", action="store_true", help="chunk per VAD segment instead of push-to-talk")
    enc.add_argument(
        "--piggyback",
        action="store_true",
        help="wire-efficient profile: prosody keyframes ride inside the TEXT packet",
    )

    dec = sub.add_parser("decode", help="replay a capture file into a manifest")
    dec.add_argument("--in", dest="capture", required=True)
    dec.add_argument("--out", required=True, help="manifest JSON path")
    dec.add_argument("--mode", help="override the mode recorded in the capture")

    ben = sub.add_parser("bench", help="bitrate benchmark over a corpus manifest")
    ben.add_argument("--corpus", required=True, help="manifest.csv")
    ben.add_argument("--modes", default="minimal,balanced,high_quality")
    ben.add_argument("--ber", default="0", help="comma-separated BER list, e.g. 0,0.001,0.01,0.1")
    ben.add_argument("--out", required=True, help="report JSON path")
    ben.add_argument("--csv", help="per-utterance rows CSV path")
    ben.add_argument("--budget", type=int, default=64)
    ben.add_argument("--seed", type=int, default=0)

    swp = sub.add_parser("sweep", help="prosody keyframe-rate sweep")
    swp.add_argument("--corpus", required=True)
    swp.add_argument("--rates", default="0.05,0.1,0.5,1,5,20")
    swp.add_argument("--mode", default="balanced")
    swp.add_argument("--out", help="sweep report JSON path")
    swp.add_argument("--csv", help="sweep rows CSV path")
    swp.add_argument("--seed", type=int, default=0)

    fix = sub.add_parser("fixtures", help="generate a synthetic demo corpus")
    fix.add_argument("--out", required=True, help="output directory")
    fix.add_argument("--count", type=int, default=20)
    fix.add_argument("--seed", type=int, default=1234)

    return p


def _cmd_encode(args) -> int:
    from .config import load_mode_config
    from .session import encode_session
    from .transport.channel import ChannelModel

    cfg = load_mode_config(args.mode)
    channel = ChannelModel(ber=args.ber, drop_rate=args.drop, rtt_ticks=args.rtt, seed=args.seed)
    result = encode_session(
        args.audio,
        args.transcript,
        args.embedding,
        cfg,
        channel,
        streaming=args.streaming,
        piggyback=args.piggyback,
        retransmit_budget=args.budget,
        capture_path=args.out,
        manifest_path=args.manifest,
        trace_path=args.trace,
    )
    if args.report:
        from .transport.accounting import write_report_json

        write_report_json(result.report, args.report)
    r = result.report
    print(
        f"{cfg.mode_name}: text {r.text_bps:.1f} bps, prosody {r.prosody_bps:.1f} bps, "
        f"timbre {r.timbre_bps:.1f} bps (amortized), total w/o timbre "
        f"{r.total_excl_timbre_bps:.1f} bps, wire {r.wire_bps:.1f} bps"
    )
    print(f"capture: {args.out} ({len(result.capture_packets)} packets)")
    if result.delivery["text_failures"]:
        print(f"warning: {result.delivery['text_failures']} text chunk(s) undelivered")
    return EXIT_OK


def _cmd_decode(args) -> int:
    from .config import load_mode_config
    from .session import decode_session

    cfg = load_mode_config(args.mode) if args.mode else None
    manifest = decode_session(args.capture, cfg)
    manifest.write_json(args.out)
    texts = sum(1 for u in manifest.utterances if "text" in u)
    gaps = sum(1 for u in manifest.utterances if u.get("gap"))
    print(
        f"decoded {manifest.stats['unique_packets']} packets -> {texts} utterance(s), "
        f"{gaps} gap(s), {manifest.prosody['keyframes_received']} prosody keyframes"
    )
    print(f"manifest: {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .benchmark import run_benchmark

    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bers = [float(b) for b in args.ber.split(",") if b.strip() != ""]
    report = run_benchmark(
        args.corpus,
        modes,
        bers,
        base_seed=args.seed,
        retransmit_budget=args.budget,
        out_json=args.out,
        out_csv=args.csv,
    )
    if report["missing"]:
        print(f"skipped missing entries: {', '.join(report['missing'])}", file=sys.stderr)
    if report["utterances"] == 0:
        print("corpus is empty; nothing measured", file=sys.stderr)
        return EXIT_INPUT
    for mode, blocks in report["modes"].items():
        for chan, stats in blocks.items():
            print(
                f"{mode:>13} {chan:>9}: total {stats['total_excl_timbre_bps_mean']:7.1f} "
                f"text {stats['text_bps_mean']:6.1f} prosody {stats['prosody_bps_mean']:6.2f} "
                f"timbre {stats['timbre_bps_mean']:7.1f} | text delivery "
                f"{stats['text_delivery']:.2%}, delta survival {stats['delta_survival']:.2%}"
            )
    print(f"report: {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .benchmark import run_prosody_sweep

    rates = [float(r) for r in args.rates.split(",") if r.strip() != ""]
    report = run_prosody_sweep(
        args.corpus,
        rates,
        mode=args.mode,
        base_seed=args.seed,
        out_json=args.out,
        out_csv=args.csv,
    )
    for row in report["rows"]:
        print(
            f"f_k {row['rate_hz']:>6.2f} Hz: prosody {row['prosody_bps_mean']:8.2f} bps, "
            f"total {row['total_bps_mean']:8.2f} bps, "
            f"model {row['model_prosody_bps']:8.2f} bps"
        )
    print(
        f"strictly increasing: {report['total_strictly_increasing']}, "
        f"R^2(prosody~rate) = {report['prosody_vs_rate_r_squared']}"
    )
    if args.out:
        print(f"report: {args.out}")
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    from .fixtures import make_corpus

    manifest = make_corpus(args.out, count=args.count, seed=args.seed)
    print(f"wrote {args.count} utterances; manifest: {manifest}")
    return EXIT_OK


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "bench": _cmd_bench,
    "sweep": _cmd_sweep,
    "fixtures": _cmd_fixtures,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AudioError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AdapterError as exc:
        print(f"adapter error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except (ProtocolError, DecodeError) as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except CodecError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TrivoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
