"""Raw video I/O, block plumbing and synthetic clips."""

from .raw_io import (
    SUPPORTED_BIT_DEPTHS,
    SUPPORTED_BLOCK_SIZES,
    ChromaFormat,
    Frame,
    FrameSequence,
    Plane,
    PlaneAssembler,
    SequenceDescriptor,
    assemble_blocks,
    block_origins,
    chroma_dimensions,
    extract_block,
    frame_byte_size,
    load_descriptor,
    load_raw,
    read_sequence_descriptor,
    write_raw,
)
from .synthetic import DEFAULT_SUITE, synthetic_clip, synthetic_suite

__all__ = [
    "SUPPORTED_BIT_DEPTHS",
    "SUPPORTED_BLOCK_SIZES",
    "ChromaFormat",
    "DEFAULT_SUITE",
    "Frame",
    "FrameSequence",
    "Plane",
    "PlaneAssembler",
    "SequenceDescriptor",
    "assemble_blocks",
    "block_origins",
    "chroma_dimensions",
    "extract_block",
    "frame_byte_size",
    "load_descriptor",
    "load_raw",
    "read_sequence_descriptor",
    "synthetic_clip",
    "synthetic_suite",
    "write_raw",
]
