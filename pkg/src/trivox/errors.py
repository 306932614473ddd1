"""Exception hierarchy shared across the toolkit.

Exit-code mapping for the CLI lives in trivox.cli; library code raises
these and never calls sys.exit.
"""


class TrivoxError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TrivoxError):
    """Bad quality-mode configuration (parse failure or constraint violation)."""


class AudioError(TrivoxError):
    """Unusable audio input (empty buffer, wrong rate, unreadable file)."""


class InsufficientVoicedError(AudioError):
    """Not enough voiced material to estimate speaker statistics.

    Callers should fall back to DEFAULT_SPEAKER_STATS.
    """


class CodecError(TrivoxError):
    """Encode/decode failure in one of the component codecs."""


class DecodeError(CodecError):
    """Payload cannot be decoded (corruption, truncation, bad framing)."""


class DictionaryDesyncError(DecodeError):
    """Sender and receiver context dictionaries are out of step."""


class ProtocolError(TrivoxError):
    """Malformed packet header, capture file, or wire framing."""


class AdapterError(TrivoxError):
    """External STT/TTS adapter failed (crash, timeout, bad handshake)."""


class AdapterProtocolError(AdapterError):
    """Adapter subprocess sent a line that violates the wire protocol."""
