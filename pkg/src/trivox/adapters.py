"""Pluggable STT and TTS adapters.

The defaults keep the pipeline fully testable without neural models: the
STT side replays a reference transcript with VAD-derived timestamps, and
the TTS side writes a ReconstructionManifest instead of audio. Real
models plug in behind the same interfaces (see trivox.subproc for the
subprocess protocol).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .dsp.audio import AudioBuffer
from .dsp.vad import VadSegment
from .errors import AdapterError
from .text_codec import MIN_TEXT_CHARS, TextChunk


class SttAdapter(Protocol):
    def capabilities(self) -> dict: ...

    def transcribe(
        self, audio: AudioBuffer, segments: list[VadSegment]
    ) -> list[TextChunk]: ...


class TtsAdapter(Protocol):
    def synthesize(self, manifest: dict) -> str:
        """Consume a reconstruction manifest; returns a result handle."""
        ...


@dataclass
class TranscriptReplayAdapter:
    """Replays a known transcript, timed against the VAD segmentation.

    push_to_talk: the whole utterance becomes one chunk stamped across the
    full speech span. streaming: words are distributed over segments
    proportionally to segment duration, one chunk per segment.
    """

    transcript: str
    streaming: bool = False

    def capabilities(self) -> dict:
        return {"name": "transcript-replay", "streaming": self.streaming}

    def transcribe(self, audio: AudioBuffer, segments: list[VadSegment]) -> list[TextChunk]:
        text = " ".join(self.transcript.split())
        if len(text) < MIN_TEXT_CHARS:
            return []
        if not segments:
            return []
        if not self.streaming:
            return [
                TextChunk(
                    utterance_id=0,
                    text=text,
                    timestamp_cs=segments[0].start_ms // 10,
                )
            ]
        words = text.split()
        durations = [seg.duration_ms for seg in segments]
        total = sum(durations)
        chunks: list[TextChunk] = []
        start = 0
        uid = 0
        for i, seg in enumerate(segments):
            if i == len(segments) - 1:
                take = len(words) - start
            else:
                take = round(len(words) * durations[i] / total)
            part = " ".join(words[start : start + take])
            start += take
            if len(part.strip()) < MIN_TEXT_CHARS:
                continue
            chunks.append(
                TextChunk(utterance_id=uid, text=part, timestamp_cs=seg.start_ms // 10)
            )
            uid += 1
        return chunks


def load_transcript(path: str | Path) -> str:
    path = Path(path)
    if not path.exists():
        raise AdapterError(f"transcript file not found: {path}")
    return path.read_text(encoding="utf-8").strip()


@dataclass
class ManifestWriterAdapter:
    """Default synthesizer stand-in: records the manifest as JSON."""

    out_path: str | Path

    def synthesize(self, manifest: dict) -> str:
        import json

        path = Path(self.out_path)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
        return str(path)
