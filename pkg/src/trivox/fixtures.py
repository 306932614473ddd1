"""Synthetic fixture corpus: speech-like audio, transcripts, embeddings.

The audio generator produces harmonic "voices": syllable-sized voiced
nuclei with a random-walk pitch contour, raised-cosine amplitude
envelopes, inter-syllable gaps, and occasional sentence pauses. That is
enough structure for the whole pipeline to behave as on recorded speech:
YIN locks to the contour, the energy envelope shows syllable rhythm, the
nucleus detector counts 3-5 syllables/sec, and the VAD sees real pauses.

Transcripts are generated at a read-speech character rate (~14 chars per
audio second) from a frequency-weighted vocabulary, so compressed text
bitrate lands where real transcripts do.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp.audio import SAMPLE_RATE_HZ, AudioBuffer, from_float, save_wav
from .timbre_codec import save_embedding

CHARS_PER_SECOND = 14.0
EMBEDDING_DIM = 192

# Frequency-weighted vocabulary: function words dominate like in prose.
_COMMON = (
    "the and to of a in that it was he she for on as with his her they at be this "
    "had not are but from or have an you which one all were we when there can more "
    "if no man out other so what time up go about than into could state only new "
    "year some take come these know see use get like then first any work now may "
    "such give over think most even find day also after way many must look before "
    "great back through long where much should well people down own just because "
    "good each those feel seem how high too place little world very still nation "
    "hand old life tell write become here show house both between need mean call "
    "develop under last right move thing general school never same another begin "
    "while number part turn real leave might want point form off child few small "
    "since against ask late home interest large person end open public follow "
    "during present without again hold govern around possible head consider word "
    "program problem however lead system set order eye plan run keep face fact "
    "group play stand increase early course change help line"
).split()
_WEIGHTS = np.array([1.0 / (i + 10) for i in range(len(_COMMON))])
_WEIGHTS /= _WEIGHTS.sum()


@dataclass
class UtteranceSpec:
    utterance_id: str
    duration_s: float
    base_f0_hz: float
    seed: int


def synth_speech(
    duration_s: float,
    base_f0_hz: float = 150.0,
    seed: int = 0,
    lead_silence_s: float = 0.15,
) -> AudioBuffer:
    """Speech-like harmonic audio with syllable rhythm and pauses.

    The voice has two layers: a continuous low-harmonic "voicing bed"
    (fundamental plus second harmonic, below the 300 Hz edge of the
    syllable-rate band) that runs through whole breath groups, and bursty
    upper harmonics shaped per syllable. Full-band energy therefore stays
    smooth like connected speech while the 300-3000 Hz envelope is spiky
    enough for nucleus counting. Pitch follows gentle declination with
    accent excursions; one prominent accent opens the utterance so the
    speaker's range shows inside the statistics window. Pauses carry
    low-band breath rumble.
    """
    rng = np.random.default_rng(seed)
    sr = SAMPLE_RATE_HZ
    n_total = int(duration_s * sr)
    x = np.zeros(n_total)

    # Timeline: syllables grouped into breath groups separated by pauses.
    syllables: list[tuple[float, float]] = []
    groups: list[tuple[float, float]] = []
    pauses: list[tuple[float, float]] = []
    t = lead_silence_s
    group_start = t
    until_pause = int(rng.integers(30, 46))
    # Tempo: a smooth drift, plus one brisk stretch early on so the
    # speaking-rate statistics capture the speaker's true spread. The
    # stretch ramps in and out so no single second jumps hard.
    tempo = 1.0
    bump_t0 = lead_silence_s + float(rng.uniform(1.0, 2.0))
    bump_len = float(rng.uniform(2.2, 3.0))
    while t < duration_s - 0.25:
        tempo = 0.97 * tempo + 0.03 * 1.0 + float(rng.normal(0.0, 0.006))
        factor = tempo
        if bump_t0 <= t < bump_t0 + bump_len:
            xfrac = (t - bump_t0) / bump_len
            factor *= 1.0 - 0.28 * math.sin(math.pi * xfrac)
        syl_dur = float(rng.uniform(0.15, 0.21)) * factor
        gap = float(rng.uniform(0.02, 0.05)) * factor
        if t + syl_dur > duration_s - 0.05:
            break
        syllables.append((t, t + syl_dur))
        t += syl_dur + gap
        until_pause -= 1
        if until_pause <= 0:
            groups.append((group_start, t - gap))
            pause_len = float(rng.uniform(0.22, 0.32))
            pauses.append((t, min(t + pause_len, duration_s)))
            t += pause_len
            group_start = t
            until_pause = int(rng.integers(30, 46))
    if group_start < t:
        groups.append((group_start, min(t, duration_s)))

    # Intonation: declination per group + accents; the opening accent is
    # prominent (it sets the pitch range the normalizer will see).
    accents = [(lead_silence_s + 0.4, 1.0, 0.30)]
    t_acc = lead_silence_s + float(rng.uniform(5.0, 8.0))
    while t_acc < duration_s:
        accents.append((t_acc, float(rng.uniform(0.8, 1.3)), float(rng.uniform(0.04, 0.08))))
        t_acc += float(rng.uniform(5.0, 9.0))

    tt_all = np.arange(n_total) / sr
    log_f0 = np.full(n_total, math.log(base_f0_hz))
    for g0, g1 in groups:
        i0, i1 = int(g0 * sr), min(int(g1 * sr), n_total)
        if i1 <= i0:
            continue
        seg_t = tt_all[i0:i1]
        log_f0[i0:i1] += float(rng.uniform(0.03, 0.05)) - float(
            rng.uniform(0.007, 0.011)
        ) * (seg_t - g0)
    for a0, alen, height in accents:
        i0, i1 = int(a0 * sr), min(int((a0 + alen) * sr), n_total)
        if i1 <= i0:
            continue
        xfrac = (tt_all[i0:i1] - a0) / alen
        log_f0[i0:i1] += height * np.sin(np.pi * xfrac)
    # Slow wiggle: syllable-rate AR noise, linearly interpolated.
    knots = np.arange(0.0, duration_s + 0.25, 0.25)
    w = np.zeros(len(knots))
    for i in range(1, len(knots)):
        w[i] = 0.7 * w[i - 1] + rng.normal(0.0, 0.010)
    log_f0 += np.interp(tt_all, knots, w)
    f0 = np.clip(np.exp(log_f0), 70.0, 400.0)
    phase = 2.0 * np.pi * np.cumsum(f0) / sr

    # Voicing bed: h1 + h2 across each breath group, 30 ms edges.
    bed_env = np.zeros(n_total)
    edge = int(0.03 * sr)
    for g0, g1 in groups:
        i0, i1 = int(g0 * sr), min(int(g1 * sr), n_total)
        if i1 - i0 < 2 * edge:
            continue
        bed_env[i0:i1] = 1.0
        ramp = np.linspace(0.0, 1.0, edge)
        bed_env[i0 : i0 + edge] = ramp
        bed_env[i1 - edge : i1] = ramp[::-1]
    x += bed_env * 0.30 * (np.sin(phase) + 0.35 * np.sin(2 * phase))

    # Syllable bursts: upper harmonics with a peaky envelope.
    burst = 0.32 * np.sin(3 * phase) + 0.2 * np.sin(4 * phase) + 0.1 * np.sin(5 * phase)
    burst_env = np.zeros(n_total)
    for s0, s1 in syllables:
        i0, i1 = int(s0 * sr), min(int(s1 * sr), n_total)
        if i1 <= i0:
            continue
        shape = np.sin(np.pi * np.arange(i1 - i0) / (i1 - i0)) ** 2.2
        burst_env[i0:i1] = float(rng.uniform(0.8, 1.0)) * shape
    x += burst_env * burst

    # Breath rumble during pauses (low band, no syllable nuclei).
    for p0, p1 in pauses:
        i0, i1 = int(p0 * sr), min(int(p1 * sr), n_total)
        n = i1 - i0
        if n < 8:
            continue
        breath = np.cumsum(rng.standard_normal(n))
        breath -= np.linspace(breath[0], breath[-1], n)
        rms = float(np.sqrt(np.mean(breath**2))) or 1.0
        x[i0:i1] += 0.04 * (breath / rms) * np.sin(np.pi * np.arange(n) / n)

    x += 0.002 * rng.standard_normal(n_total)  # light ambience
    return from_float(0.9 * x / max(1e-9, np.max(np.abs(x))) * 0.6)


def synth_transcript(duration_s: float, seed: int = 0, chars_per_s: float = CHARS_PER_SECOND) -> str:
    """Prose-like transcript sized to the audio duration."""
    rng = np.random.default_rng(seed + 10_000)
    budget = int(duration_s * chars_per_s)
    words: list[str] = []
    length = 0
    sentence_left = int(rng.integers(8, 16))
    while length < budget:
        w = _COMMON[rng.choice(len(_COMMON), p=_WEIGHTS)]
        words.append(w)
        length += len(w) + 1
        sentence_left -= 1
        if sentence_left == 0:
            words[-1] += "."
            sentence_left = int(rng.integers(8, 16))
    text = " ".join(words)
    if not text.endswith("."):
        text += "."
    return text[0].upper() + text[1:]


def synth_embedding(seed: int = 0, dim: int = EMBEDDING_DIM) -> np.ndarray:
    rng = np.random.default_rng(seed + 20_000)
    v = rng.standard_normal(dim)
    return (v / np.linalg.norm(v)).astype(np.float32)


def compressible_embedding(seed: int = 0, dim: int = EMBEDDING_DIM) -> np.ndarray:
    """An embedding with correlated, low-entropy components: values on a
    coarse grid with only the low mantissa bits randomized, the kind of
    statistical redundancy lossless compression actually shrinks."""
    rng = np.random.default_rng(seed + 30_000)
    levels = np.linspace(-0.12, 0.12, 17)
    v = rng.choice(levels, size=dim).astype(np.float32)
    bits = v.astype(np.float16).view(np.uint16)
    bits = bits ^ rng.integers(0, 1 << 5, size=dim).astype(np.uint16)
    out = bits.view(np.float16).astype(np.float32)
    out[~np.isfinite(out)] = 0.01
    norm = np.linalg.norm(out)
    return out / (norm if norm else 1.0)


def make_corpus(
    out_dir: str | Path,
    count: int = 20,
    seed: int = 1234,
    duration_range: tuple[float, float] = (12.0, 25.0),
    speakers: int = 6,
) -> Path:
    """Write a corpus and its manifest.csv; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    base_f0s = rng.uniform(105.0, 230.0, size=speakers)
    for i in range(count):
        uid = f"utt{i:03d}"
        duration = float(rng.uniform(*duration_range))
        speaker = int(rng.integers(0, speakers))
        audio = synth_speech(duration, base_f0s[speaker], seed=seed + i)
        wav_path = out / f"{uid}.wav"
        save_wav(wav_path, audio)
        text = synth_transcript(audio.duration_s, seed=seed + i)
        txt_path = out / f"{uid}.txt"
        txt_path.write_text(text, encoding="utf-8")
        emb_path = out / f"{uid}.emb"
        save_embedding(emb_path, synth_embedding(seed + speaker))
        rows.append(
            {
                "id": uid,
                "wav_path": wav_path.name,
                "transcript_path": txt_path.name,
                "embedding_path": emb_path.name,
                "duration_s": f"{audio.duration_s:.3f}",
            }
        )
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return manifest


@dataclass
class CorpusEntry:
    utterance_id: str
    wav_path: Path
    transcript_path: Path
    embedding_path: Path
    duration_s: float


def load_manifest(manifest_path: str | Path) -> list[CorpusEntry]:
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    entries = []
    with open(manifest_path, newline="") as fh:
        for row in csv.DictReader(fh):
            entries.append(
                CorpusEntry(
                    utterance_id=row["id"],
                    wav_path=base / row["wav_path"],
                    transcript_path=base / row["transcript_path"],
                    embedding_path=base / row["embedding_path"],
                    duration_s=float(row["duration_s"]),
                )
            )
    return entries
