"""Audio input: mono 16-bit PCM at 16 kHz, raw or WAV container."""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import AudioError

SAMPLE_RATE_HZ = 16000
HOP_SAMPLES = 160  # 10 ms at 16 kHz -> 100 Hz frame rate
PCM_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """A mono int16 PCM buffer at 16 kHz."""

    samples: np.ndarray  # int16
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        if self.sample_rate_hz != SAMPLE_RATE_HZ:
            raise AudioError(
                f"unsupported sample rate {self.sample_rate_hz}; expected {SAMPLE_RATE_HZ}"
            )
        if self.samples.dtype != np.int16:
            raise AudioError(f"samples must be int16, got {self.samples.dtype}")
        if self.samples.ndim != 1:
            raise AudioError("samples must be a 1-D mono array")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def normalized(self) -> np.ndarray:
        """Samples scaled to [-1, 1) float64. Exact: int16 / 2**15."""
        return self.samples.astype(np.float64) / PCM_SCALE

    def require_nonempty(self) -> None:
        if len(self.samples) == 0:
            raise AudioError("empty audio buffer")


def from_float(x: np.ndarray, clip: bool = True) -> AudioBuffer:
    """Build a buffer from float samples in [-1, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if clip:
        x = np.clip(x, -1.0, 32767.0 / PCM_SCALE)
    return AudioBuffer(np.round(x * PCM_SCALE).astype(np.int16))


def load_audio(path: str | Path) -> AudioBuffer:
    """Read a .wav (mono 16-bit 16 kHz) or raw little-endian int16 file."""
    path = Path(path)
    if not path.exists():
        raise AudioError(f"audio file not found: {path}")
    if path.suffix.lower() == ".wav":
        try:
            with wave.open(str(path), "rb") as wf:
                if wf.getnchannels() != 1:
                    raise AudioError(f"{path}: expected mono, got {wf.getnchannels()} channels")
                if wf.getsampwidth() != 2:
                    raise AudioError(f"{path}: expected 16-bit samples")
                if wf.getframerate() != SAMPLE_RATE_HZ:
                    raise AudioError(
                        f"{path}: expected {SAMPLE_RATE_HZ} Hz, got {wf.getframerate()}"
                    )
                raw = wf.readframes(wf.getnframes())
        except wave.Error as exc:
            raise AudioError(f"{path}: not a readable WAV file: {exc}") from exc
        samples = np.frombuffer(raw, dtype="<i2").astype(np.int16)
    else:
        samples = np.fromfile(path, dtype="<i2").astype(np.int16)
    return AudioBuffer(samples)


def save_wav(path: str | Path, buf: AudioBuffer) -> None:
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(buf.sample_rate_hz)
        wf.writeframes(buf.samples.astype("<i2").tobytes())


def frame_count(n_samples: int, hop: int = HOP_SAMPLES) -> int:
    """Track length: partial tail windows are zero-padded, not dropped."""
    return -(-n_samples // hop)
