"""Container format: a 32-byte header followed by length-prefixed frame payloads.

Layout (all integers little-endian)::

    0   4s  magic b"FDPQ"
    4   B   version
    5   B   chroma format id (0 = 4:2:0, 1 = 4:2:2, 2 = 4:4:4)
    6   B   bit depth
    7   B   log2 of the luma TB size
    8   B   quantiser id (0 = urq, 1 = rdoq, 2 = fdpq)
    9   B   QP
    10  B   deadzone mode id (0 = intra_third, 1 = half)
    11  B   scan id (0 = diagonal, 1 = horizontal, 2 = vertical)
    12  I   width
    16  I   height
    20  I   frame count
    24  8x  reserved, zero

Each frame is a ``u32`` byte length followed by that many range-coder bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from fdpq_lab.errors import BitstreamError, MalformedStreamError, TruncatedStreamError

MAGIC = b"FDPQ"
VERSION = 1
_HEADER = struct.Struct("<4sBBBBBBBBIII8x")
_LENGTH = struct.Struct("<I")
HEADER_SIZE = _HEADER.size


@dataclass(frozen=True)
class BitstreamHeader:
    chroma_format_id: int
    bit_depth: int
    log2_tb_size: int
    quantiser_id: int
    qp: int
    deadzone_id: int
    scan_id: int
    width: int
    height: int
    frame_count: int
    version: int = VERSION

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC,
            self.version,
            self.chroma_format_id,
            self.bit_depth,
            self.log2_tb_size,
            self.quantiser_id,
            self.qp,
            self.deadzone_id,
            self.scan_id,
            self.width,
            self.height,
            self.frame_count,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "BitstreamHeader":
        if len(data) < HEADER_SIZE:
            raise TruncatedStreamError(f"Bitstream holds {len(data)} bytes, header needs {HEADER_SIZE}")
        (
            magic,
            version,
            chroma_format_id,
            bit_depth,
            log2_tb_size,
            quantiser_id,
            qp,
            deadzone_id,
            scan_id,
            width,
            height,
            frame_count,
        ) = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise BitstreamError(f"Bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise BitstreamError(f"Unsupported bitstream version {version}")
        return cls(
            chroma_format_id=chroma_format_id,
            bit_depth=bit_depth,
            log2_tb_size=log2_tb_size,
            quantiser_id=quantiser_id,
            qp=qp,
            deadzone_id=deadzone_id,
            scan_id=scan_id,
            width=width,
            height=height,
            frame_count=frame_count,
            version=version,
        )


@dataclass
class Bitstream:
    header: BitstreamHeader
    payloads: list[bytes] = field(default_factory=list)

    @property
    def frame_offsets(self) -> list[int]:
        """Byte offset of every frame's length prefix within :meth:`to_bytes`."""

        offsets = []
        position = HEADER_SIZE
        for payload in self.payloads:
            offsets.append(position)
            position += _LENGTH.size + len(payload)
        return offsets

    def to_bytes(self) -> bytes:
        if self.header.frame_count != len(self.payloads):
            raise MalformedStreamError(
                f"Header announces {self.header.frame_count} frame(s) but {len(self.payloads)} payload(s) are present"
            )
        parts = [self.header.pack()]
        for payload in self.payloads:
            parts.append(_LENGTH.pack(len(payload)))
            parts.append(payload)
        return b"".join(parts)

    @property
    def size_bits(self) -> int:
        return 8 * (HEADER_SIZE + sum(_LENGTH.size + len(payload) for payload in self.payloads))


def parse_bitstream(data: bytes) -> Bitstream:
    """Split a serialised bitstream into header and frame payloads."""

    header = BitstreamHeader.unpack(data)
    payloads: list[bytes] = []
    position = HEADER_SIZE
    for index in range(header.frame_count):
        if position + _LENGTH.size > len(data):
            raise TruncatedStreamError(f"Missing length prefix of frame {index}")
        (length,) = _LENGTH.unpack_from(data, position)
        position += _LENGTH.size
        if position + length > len(data):
            raise TruncatedStreamError(f"Frame {index} announces {length} bytes, {len(data) - position} available")
        payloads.append(bytes(data[position : position + length]))
        position += length
    if position != len(data):
        raise MalformedStreamError(f"{len(data) - position} trailing byte(s) after the last frame")
    return Bitstream(header, payloads)
