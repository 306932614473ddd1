from .audio import AudioBuffer, from_float, load_audio, save_wav
from .features import extract_energy, extract_rate
from .pitch import extract_pitch
from .track import (
    DEFAULT_SPEAKER_STATS,
    ProsodyTrack,
    SpeakerStats,
    estimate_speaker_stats,
    extract_prosody,
    normalize_track,
    stats_from_tracks,
)
from .vad import EnergyDetector, VadSegment, vad_segment

__all__ = [
    "AudioBuffer",
    "DEFAULT_SPEAKER_STATS",
    "EnergyDetector",
    "ProsodyTrack",
    "SpeakerStats",
    "VadSegment",
    "estimate_speaker_stats",
    "extract_energy",
    "extract_pitch",
    "extract_prosody",
    "extract_rate",
    "from_float",
    "load_audio",
    "normalize_track",
    "save_wav",
    "stats_from_tracks",
    "vad_segment",
]
