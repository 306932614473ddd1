from .huffman import BitReader, BitWriter, CanonicalCodebook, codebook_for_bits, decode_codes, encode_codes
from .payload import (
    ABSOLUTE_INTERVAL,
    DeltaVector,
    ProsodyPayload,
    ProsodyStreamDecoder,
    ProsodyStreamEncoder,
    delta_decode,
    delta_encode,
    encode_keyframe,
    parse_payload,
)
from .quantizer import CLAMP_RANGE, QuantizerSpec, spec_for
from .reconstruct import NEUTRAL_VALUES, reconstruct_contour
from .schedule import KeyframeSchedule, sample_keyframes
from .spline import natural_spline

__all__ = [
    "ABSOLUTE_INTERVAL",
    "BitReader",
    "BitWriter",
    "CLAMP_RANGE",
    "CanonicalCodebook",
    "DeltaVector",
    "KeyframeSchedule",
    "NEUTRAL_VALUES",
    "ProsodyPayload",
    "ProsodyStreamDecoder",
    "ProsodyStreamEncoder",
    "QuantizerSpec",
    "codebook_for_bits",
    "decode_codes",
    "delta_decode",
    "delta_encode",
    "encode_codes",
    "encode_keyframe",
    "natural_spline",
    "parse_payload",
    "reconstruct_contour",
    "sample_keyframes",
    "spec_for",
]
