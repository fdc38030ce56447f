"""Scan orders, entropy coding and the intra-only frame codec."""

from .bitstream import HEADER_SIZE, MAGIC, VERSION, Bitstream, BitstreamHeader, parse_bitstream
from .codec import (
    CodecConfig,
    FrameEncodeResult,
    SequenceEncodeResult,
    decode_frame,
    decode_sequence,
    encode_frame,
    encode_sequence,
)
from .intra import IntraMode, available_modes, choose_mode, predict
from .range_coder import BinContext, RangeDecoder, RangeEncoder
from .residual import CoderState, ResidualContexts, decode_tb, encode_tb, last_position_width
from .scan import ScanKind, ScanOrder, scan_order

__all__ = [
    "HEADER_SIZE",
    "MAGIC",
    "VERSION",
    "BinContext",
    "Bitstream",
    "BitstreamHeader",
    "CodecConfig",
    "CoderState",
    "FrameEncodeResult",
    "IntraMode",
    "RangeDecoder",
    "RangeEncoder",
    "ResidualContexts",
    "ScanKind",
    "ScanOrder",
    "SequenceEncodeResult",
    "available_modes",
    "choose_mode",
    "decode_frame",
    "decode_sequence",
    "decode_tb",
    "encode_frame",
    "encode_sequence",
    "encode_tb",
    "last_position_width",
    "parse_bitstream",
    "predict",
    "scan_order",
]
