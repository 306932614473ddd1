"""trivox: semantic voice codec toolkit.

Decomposes speech into text, prosody, and timbre streams, compresses each
with a component-specific strategy, transports them over a simulated lossy
channel with differentiated reliability, and reconstructs the streams for
a pluggable synthesizer.

Quick start:

    from trivox import encode_session, decode_session, preset

    result = encode_session("utt.wav", "utt.txt", "utt.emb", preset("balanced"))
    print(result.report.table_row())
"""

__version__ = "0.1.0"

from .config import load_mode_config, preset  # noqa: E402
from .session import (  # noqa: E402
    ReconstructionManifest,
    SessionContext,
    SessionResult,
    decode_session,
    encode_session,
)
from .transport.channel import ChannelModel  # noqa: E402

__all__ = [
    "ChannelModel",
    "ReconstructionManifest",
    "SessionContext",
    "SessionResult",
    "__version__",
    "decode_session",
    "encode_session",
    "load_mode_config",
    "preset",
]
