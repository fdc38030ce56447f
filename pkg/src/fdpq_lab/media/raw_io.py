"""Planar YCbCr raw video I/O, block extraction and plane reassembly."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator

from fdpq_lab.errors import BlockRangeError, ConfigurationError, MediaFormatError, UnsupportedBlockSizeError
from fdpq_lab.keyvalue import read_key_value_file

LOGGER = logging.getLogger(__name__)

SUPPORTED_BIT_DEPTHS: tuple[int, ...] = (8, 10)
SUPPORTED_BLOCK_SIZES: tuple[int, ...] = (4, 8, 16, 32)


class ChromaFormat(str, Enum):
    """Chroma sampling ratio of a sequence."""

    YUV420 = "4:2:0"
    YUV422 = "4:2:2"
    YUV444 = "4:4:4"

    @property
    def subsampling(self) -> tuple[int, int]:
        """Horizontal and vertical chroma subsampling factors ``(sx, sy)``."""

        return _SUBSAMPLING[self]

    @property
    def format_id(self) -> int:
        return _FORMAT_IDS[self]

    @classmethod
    def from_id(cls, format_id: int) -> "ChromaFormat":
        for member, member_id in _FORMAT_IDS.items():
            if member_id == format_id:
                return member
        raise MediaFormatError(f"Unknown chroma format id {format_id}")

    @classmethod
    def parse(cls, value: "str | ChromaFormat") -> "ChromaFormat":
        """Accept ``4:2:0``, ``420`` or ``yuv420`` style spellings."""

        if isinstance(value, ChromaFormat):
            return value
        digits = "".join(ch for ch in str(value) if ch.isdigit())
        for member in cls:
            if member.value.replace(":", "") == digits:
                return member
        raise MediaFormatError(f"Unsupported chroma format {value!r}; expected one of 4:2:0, 4:2:2, 4:4:4")


_SUBSAMPLING = {
    ChromaFormat.YUV420: (2, 2),
    ChromaFormat.YUV422: (2, 1),
    ChromaFormat.YUV444: (1, 1),
}
_FORMAT_IDS = {ChromaFormat.YUV420: 0, ChromaFormat.YUV422: 1, ChromaFormat.YUV444: 2}


def chroma_dimensions(width: int, height: int, chroma_format: ChromaFormat) -> tuple[int, int]:
    """Return the ``(width, height)`` of the Cb/Cr planes."""

    sx, sy = chroma_format.subsampling
    if width % sx or height % sy:
        raise MediaFormatError(
            f"Luma size {width}x{height} must be divisible by the {chroma_format.value} subsampling ({sx}, {sy})"
        )
    return width // sx, height // sy


@dataclass(frozen=True, eq=False)
class Plane:
    """One channel raster; ``samples`` is indexed ``[y, x]``."""

    samples: np.ndarray
    bit_depth: int

    def __post_init__(self) -> None:
        if self.bit_depth not in SUPPORTED_BIT_DEPTHS:
            raise MediaFormatError(f"Unsupported bit depth {self.bit_depth}")
        if self.samples.ndim != 2 or self.samples.size == 0:
            raise MediaFormatError(f"Plane samples must be a non-empty 2-D raster, got shape {self.samples.shape}")
        if int(self.samples.min()) < 0 or int(self.samples.max()) > self.max_value:
            raise MediaFormatError(f"Plane samples outside [0, {self.max_value}] for {self.bit_depth}-bit data")

    @property
    def width(self) -> int:
        return int(self.samples.shape[1])

    @property
    def height(self) -> int:
        return int(self.samples.shape[0])

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    @classmethod
    def filled(cls, width: int, height: int, bit_depth: int, value: int) -> "Plane":
        return cls(np.full((height, width), value, dtype=np.uint16), bit_depth)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Plane):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.samples, other.samples)


@dataclass(frozen=True)
class Frame:
    """The three planes of a single picture in Y, Cb, Cr order."""

    y: Plane
    cb: Plane
    cr: Plane

    @property
    def planes(self) -> tuple[Plane, Plane, Plane]:
        return (self.y, self.cb, self.cr)


@dataclass
class FrameSequence:
    """A run of frames sharing geometry, bit depth and chroma format."""

    width: int
    height: int
    bit_depth: int
    chroma_format: ChromaFormat
    frames: list[Frame] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.chroma_format = ChromaFormat.parse(self.chroma_format)
        if self.bit_depth not in SUPPORTED_BIT_DEPTHS:
            raise MediaFormatError(f"Unsupported bit depth {self.bit_depth}")
        chroma_w, chroma_h = chroma_dimensions(self.width, self.height, self.chroma_format)
        for index, frame in enumerate(self.frames):
            expected = ((self.width, self.height), (chroma_w, chroma_h), (chroma_w, chroma_h))
            for plane, (plane_w, plane_h) in zip(frame.planes, expected):
                if (plane.width, plane.height) != (plane_w, plane_h) or plane.bit_depth != self.bit_depth:
                    raise MediaFormatError(
                        f"Frame {index} plane is {plane.width}x{plane.height}@{plane.bit_depth}bit, "
                        f"expected {plane_w}x{plane_h}@{self.bit_depth}bit"
                    )

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def chroma_size(self) -> tuple[int, int]:
        return chroma_dimensions(self.width, self.height, self.chroma_format)

    @property
    def bytes_per_sample(self) -> int:
        return 1 if self.bit_depth == 8 else 2

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)


class SequenceDescriptor(BaseModel):
    """Geometry of a raw clip, supplied by flags or a descriptor file."""

    name: str = "clip"
    path: Optional[Path] = None
    width: int
    height: int
    bit_depth: int = 8
    chroma_format: ChromaFormat = ChromaFormat.YUV420
    frame_count: Optional[int] = None

    @field_validator("chroma_format", mode="before")
    @classmethod
    def _parse_chroma(cls, value: object) -> ChromaFormat:
        return ChromaFormat.parse(value)  # type: ignore[arg-type]

    @field_validator("bit_depth")
    @classmethod
    def _check_depth(cls, value: int) -> int:
        if value not in SUPPORTED_BIT_DEPTHS:
            raise ValueError(f"bit_depth must be one of {SUPPORTED_BIT_DEPTHS}")
        return value

    @field_validator("width", "height")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("dimensions must be positive")
        return value


def frame_byte_size(width: int, height: int, bit_depth: int, chroma_format: ChromaFormat) -> int:
    """Number of bytes one planar frame occupies on disk."""

    chroma_w, chroma_h = chroma_dimensions(width, height, chroma_format)
    samples = width * height + 2 * chroma_w * chroma_h
    return samples * (1 if bit_depth == 8 else 2)


def load_raw(
    path: str | Path,
    width: int,
    height: int,
    bit_depth: int,
    chroma_format: ChromaFormat | str,
) -> FrameSequence:
    """Load a frame-sequential planar raw file (8-bit bytes or 16-bit little-endian containers)."""

    chroma_format = ChromaFormat.parse(chroma_format)
    if bit_depth not in SUPPORTED_BIT_DEPTHS:
        raise MediaFormatError(f"Unsupported bit depth {bit_depth}")
    file_path = Path(path)
    data = file_path.read_bytes()
    frame_bytes = frame_byte_size(width, height, bit_depth, chroma_format)
    if len(data) % frame_bytes:
        raise MediaFormatError(
            f"{file_path} holds {len(data)} bytes, not a whole number of {frame_bytes}-byte "
            f"{width}x{height} {chroma_format.value} {bit_depth}-bit frames"
        )
    dtype = np.uint8 if bit_depth == 8 else np.dtype("<u2")
    samples = np.frombuffer(data, dtype=dtype).astype(np.uint16)
    max_value = (1 << bit_depth) - 1
    if samples.size and int(samples.max()) > max_value:
        offending = int(np.argmax(samples > max_value))
        raise MediaFormatError(
            f"{file_path}: sample {offending} has value {int(samples[offending])} above {max_value} for {bit_depth}-bit data"
        )

    chroma_w, chroma_h = chroma_dimensions(width, height, chroma_format)
    luma_count = width * height
    chroma_count = chroma_w * chroma_h
    per_frame = luma_count + 2 * chroma_count
    frames: list[Frame] = []
    for start in range(0, samples.size, per_frame):
        chunk = samples[start : start + per_frame]
        y = chunk[:luma_count].reshape(height, width)
        cb = chunk[luma_count : luma_count + chroma_count].reshape(chroma_h, chroma_w)
        cr = chunk[luma_count + chroma_count :].reshape(chroma_h, chroma_w)
        frames.append(Frame(Plane(y.copy(), bit_depth), Plane(cb.copy(), bit_depth), Plane(cr.copy(), bit_depth)))
    LOGGER.info("Loaded %d frame(s) of %dx%d %s %d-bit from %s", len(frames), width, height, chroma_format.value, bit_depth, file_path)
    return FrameSequence(width, height, bit_depth, chroma_format, frames)


def load_descriptor(descriptor: SequenceDescriptor) -> FrameSequence:
    """Load the clip a descriptor points at and check its declared frame count."""

    if descriptor.path is None:
        raise ConfigurationError(f"Descriptor '{descriptor.name}' has no path")
    sequence = load_raw(
        descriptor.path,
        descriptor.width,
        descriptor.height,
        descriptor.bit_depth,
        descriptor.chroma_format,
    )
    if descriptor.frame_count is not None:
        if sequence.frame_count < descriptor.frame_count:
            raise MediaFormatError(
                f"{descriptor.path} has {sequence.frame_count} frame(s), descriptor declares {descriptor.frame_count}"
            )
        sequence.frames = sequence.frames[: descriptor.frame_count]
    return sequence


def write_raw(sequence: FrameSequence, path: str | Path) -> None:
    """Write a sequence in the same layout :func:`load_raw` reads."""

    dtype = np.uint8 if sequence.bit_depth == 8 else np.dtype("<u2")
    file_path = Path(path)
    with file_path.open("wb") as handle:
        for frame in sequence.frames:
            for plane in frame.planes:
                handle.write(plane.samples.astype(dtype).tobytes())
    LOGGER.debug("Wrote %d frame(s) to %s", sequence.frame_count, file_path)


def read_sequence_descriptor(path: str | Path) -> SequenceDescriptor:
    """Read a ``key = value`` sequence descriptor file.

    Recognised keys: ``name``, ``path`` (relative to the descriptor), ``width``,
    ``height``, ``bit_depth``, ``chroma_format`` and ``frames``.
    """

    descriptor_path = Path(path)
    document = read_key_value_file(descriptor_path)
    return descriptor_from_mapping(document.values, base_dir=descriptor_path.parent)


def descriptor_from_mapping(values: dict[str, str], *, base_dir: Path | None = None) -> SequenceDescriptor:
    """Build a descriptor from parsed key-value pairs."""

    payload: dict[str, object] = dict(values)
    if "frames" in payload:
        payload["frame_count"] = payload.pop("frames")
    raw_path = payload.get("path")
    if raw_path:
        clip_path = Path(str(raw_path))
        if base_dir is not None and not clip_path.is_absolute():
            clip_path = base_dir / clip_path
        payload["path"] = clip_path
        payload.setdefault("name", clip_path.stem)
    try:
        return SequenceDescriptor(**payload)
    except (ValidationError, MediaFormatError) as exc:
        raise ConfigurationError(f"Invalid sequence descriptor: {exc}") from exc


def _check_block_args(width: int, height: int, x0: int, y0: int, size: int) -> None:
    if size not in SUPPORTED_BLOCK_SIZES:
        raise UnsupportedBlockSizeError(f"Block size {size} not in {SUPPORTED_BLOCK_SIZES}")
    grid_w = -(-width // size) * size
    grid_h = -(-height // size) * size
    if x0 % size or y0 % size or not (0 <= x0 < grid_w) or not (0 <= y0 < grid_h):
        raise BlockRangeError(f"Block ({x0}, {y0}) of size {size} outside the {grid_w}x{grid_h} block grid")


def extract_block(plane: Plane, x0: int, y0: int, size: int) -> np.ndarray:
    """Return the ``size``x``size`` block at ``(x0, y0)`` with edge replication past the border."""

    _check_block_args(plane.width, plane.height, x0, y0, size)
    cols = np.minimum(np.arange(x0, x0 + size), plane.width - 1)
    rows = np.minimum(np.arange(y0, y0 + size), plane.height - 1)
    return plane.samples[np.ix_(rows, cols)].astype(np.int64)


def block_origins(width: int, height: int, size: int) -> Iterable[tuple[int, int]]:
    """Raster-order block origins covering the padded grid."""

    for y0 in range(0, height, size):
        for x0 in range(0, width, size):
            yield x0, y0


class PlaneAssembler:
    """Collects reconstructed blocks and crops them back to the plane size."""

    def __init__(self, width: int, height: int, bit_depth: int) -> None:
        self.width = width
        self.height = height
        self.bit_depth = bit_depth
        self._buffer = np.zeros((height, width), dtype=np.uint16)

    def put_block(self, x0: int, y0: int, block: np.ndarray) -> None:
        size = block.shape[0]
        _check_block_args(self.width, self.height, x0, y0, size)
        visible_h = min(size, self.height - y0)
        visible_w = min(size, self.width - x0)
        self._buffer[y0 : y0 + visible_h, x0 : x0 + visible_w] = block[:visible_h, :visible_w]

    def to_plane(self) -> Plane:
        return Plane(self._buffer.copy(), self.bit_depth)


def assemble_blocks(
    blocks: Iterable[tuple[int, int, np.ndarray]],
    width: int,
    height: int,
    bit_depth: int,
) -> Plane:
    """Reassemble ``(x0, y0, block)`` triples into a plane, cropping at the right/bottom edge."""

    assembler = PlaneAssembler(width, height, bit_depth)
    for x0, y0, block in blocks:
        assembler.put_block(x0, y0, block)
    return assembler.to_plane()
