"""Quality-mode configuration: presets, YAML loading, validation.

A QualityModeConfig parameterizes every stage of the codec: prosody
keyframe cadence and bit budgets, timbre precision and change detection,
text compression level, VAD gates, and chunking. Three presets ship
(minimal / balanced / high_quality); custom modes load from YAML files
with the same flat key set. Unknown keys are hard errors so a typo can
never silently skew a bitrate experiment.

Configs are frozen after construction and safe to share across threads.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

PROSODY_FEATURES = ("pitch", "energy", "rate")

FRAME_RATE_HZ = 100.0  # prosody analysis frame rate (10 ms shift)


@dataclass(frozen=True)
class QualityModeConfig:
    """Complete parameter set for one operating mode."""

    mode_name: str
    keyframe_rate_hz: float
    features_enabled: frozenset[str]
    bits_pitch: int
    bits_energy: int
    bits_rate: int
    dead_zone_pitch: float = 0.05
    dead_zone_energy: float = 0.02
    dead_zone_rate: float = 0.05
    embedding_dim: int = 192
    embedding_precision: str = "half"  # "half" | "single"
    speaker_change_threshold: float = 0.3
    text_compress_level: int = 5
    text_preprocess: bool = True
    chunk_ms: int = 400
    vad_threshold: float = 0.5
    vad_min_speech_ms: int = 250
    vad_min_silence_ms: int = 500
    # Reserved knob: tracked in config, not yet wired to any feature.
    emotion_rate_hz: float = 0.0

    def bits_for(self, feature: str) -> int:
        return {
            "pitch": self.bits_pitch,
            "energy": self.bits_energy,
            "rate": self.bits_rate,
        }[feature]

    def dead_zone_for(self, feature: str) -> float:
        return {
            "pitch": self.dead_zone_pitch,
            "energy": self.dead_zone_energy,
            "rate": self.dead_zone_rate,
        }[feature]

    def enabled_features(self) -> tuple[str, ...]:
        """Enabled features in canonical wire order."""
        return tuple(f for f in PROSODY_FEATURES if f in self.features_enabled)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["features_enabled"] = sorted(self.features_enabled)
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


_PRESETS: dict[str, dict] = {
    "minimal": dict(
        mode_name="minimal",
        keyframe_rate_hz=0.1,
        features_enabled=["pitch"],
        bits_pitch=3,
        bits_energy=2,
        bits_rate=2,
        embedding_precision="half",
        speaker_change_threshold=0.4,
        text_compress_level=9,
        text_preprocess=True,
        chunk_ms=400,
        vad_threshold=0.5,
    ),
    "balanced": dict(
        mode_name="balanced",
        keyframe_rate_hz=0.5,
        features_enabled=["pitch", "energy", "rate"],
        bits_pitch=6,
        bits_energy=5,
        bits_rate=5,
        embedding_precision="half",
        speaker_change_threshold=0.3,
        text_compress_level=5,
        text_preprocess=True,
        chunk_ms=400,
        vad_threshold=0.5,
        emotion_rate_hz=0.2,
    ),
    "high_quality": dict(
        mode_name="high_quality",
        keyframe_rate_hz=1.0,
        features_enabled=["pitch", "energy", "rate"],
        bits_pitch=8,
        bits_energy=6,
        bits_rate=6,
        embedding_precision="single",
        speaker_change_threshold=0.25,
        text_compress_level=5,
        text_preprocess=False,
        chunk_ms=300,
        vad_threshold=0.4,
    ),
}

PRESET_NAMES = tuple(_PRESETS)

_ALLOWED_KEYS = {f.name for f in dataclasses.fields(QualityModeConfig)}


def _build(doc: dict, origin: str) -> QualityModeConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{origin}: config document must be a mapping")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"{origin}: unknown config keys: {sorted(unknown)}")
    missing = {"mode_name", "keyframe_rate_hz", "features_enabled"} - set(doc)
    if missing:
        raise ConfigError(f"{origin}: missing required keys: {sorted(missing)}")
    doc = dict(doc)
    feats = doc.get("features_enabled")
    if not isinstance(feats, (list, tuple, set, frozenset)):
        raise ConfigError(f"{origin}: features_enabled must be a list")
    doc["features_enabled"] = frozenset(feats)
    try:
        cfg = QualityModeConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(f"{origin}: " + "; ".join(problems))
    return cfg


def preset(name: str) -> QualityModeConfig:
    """Return a shipped preset by name."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(_PRESETS)}")
    return _build(dict(_PRESETS[name]), f"preset {name}")


def load_mode_config(source: str | Path | dict) -> QualityModeConfig:
    """Load a mode config from a preset name, a YAML file path, or a dict."""
    if isinstance(source, dict):
        return _build(source, "inline config")
    name = str(source)
    if name in _PRESETS:
        return preset(name)
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"{name!r} is neither a preset nor a readable config file")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse failure: {exc}") from exc
    return _build(doc, str(path))


def validate_config(cfg: QualityModeConfig) -> list[str]:
    """Return one message per violated invariant; empty list when valid."""
    out: list[str] = []
    if not cfg.mode_name:
        out.append("mode_name empty")
    if not (0.0 < cfg.keyframe_rate_hz <= FRAME_RATE_HZ):
        out.append(
            f"keyframe_rate_hz out of range (0, {FRAME_RATE_HZ:g}]: "
            f"{cfg.keyframe_rate_hz}"
        )
    bad = cfg.features_enabled - set(PROSODY_FEATURES)
    if bad:
        out.append(f"features_enabled contains unknown features: {sorted(bad)}")
    if not cfg.features_enabled:
        out.append("features_enabled empty: at least one prosody feature required")
    for feature in PROSODY_FEATURES:
        bits = cfg.bits_for(feature)
        if not (2 <= bits <= 8):
            out.append(f"bits_{feature} out of range [2, 8]: {bits}")
        dz = cfg.dead_zone_for(feature)
        if dz < 0:
            out.append(f"dead_zone_{feature} negative: {dz}")
    if cfg.embedding_dim <= 0:
        out.append(f"embedding_dim must be positive: {cfg.embedding_dim}")
    if cfg.embedding_precision not in ("half", "single"):
        out.append(f"embedding_precision must be half|single: {cfg.embedding_precision!r}")
    if not (0.0 < cfg.speaker_change_threshold < 1.0):
        out.append(
            f"speaker_change_threshold out of (0, 1): {cfg.speaker_change_threshold}"
        )
    if not (1 <= cfg.text_compress_level <= 11):
        out.append(f"text_compress_level out of range [1, 11]: {cfg.text_compress_level}")
    if cfg.chunk_ms <= 0:
        out.append(f"chunk_ms must be positive: {cfg.chunk_ms}")
    if not (0.0 < cfg.vad_threshold < 1.0):
        out.append(f"vad_threshold out of (0, 1): {cfg.vad_threshold}")
    if cfg.vad_min_speech_ms <= 0:
        out.append(f"vad_min_speech_ms must be positive: {cfg.vad_min_speech_ms}")
    if cfg.vad_min_silence_ms <= 0:
        out.append(f"vad_min_silence_ms must be positive: {cfg.vad_min_silence_ms}")
    if cfg.emotion_rate_hz < 0:
        out.append(f"emotion_rate_hz negative: {cfg.emotion_rate_hz}")
    return out
