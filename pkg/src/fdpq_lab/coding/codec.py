"""Intra-only block codec tying prediction, transform, quantisation and entropy coding together."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from fdpq_lab.coding.bitstream import Bitstream, BitstreamHeader, parse_bitstream
from fdpq_lab.coding.intra import MODE_BITS, IntraMode, available_modes, choose_mode, predict
from fdpq_lab.coding.range_coder import RangeDecoder, RangeEncoder
from fdpq_lab.coding.residual import CoderState, ResidualContexts, decode_tb, encode_tb
from fdpq_lab.coding.scan import ScanKind, ScanOrder, scan_order
from fdpq_lab.errors import BitstreamError, ConfigurationError, LabError, MalformedStreamError
from fdpq_lab.media.raw_io import (
    SUPPORTED_BLOCK_SIZES,
    ChromaFormat,
    Frame,
    FrameSequence,
    Plane,
    block_origins,
    chroma_dimensions,
    extract_block,
)
from fdpq_lab.quantisation import Quantiser, dequantise, quantise
from fdpq_lab.quantisation.quant import DeadzoneMode, QuantConfig, count_nonzero, validate_qp
from fdpq_lab.quantisation.transform import BlockClass, Channel, CoeffBlock, forward_transform, inverse_transform

LOGGER = logging.getLogger(__name__)

_CHANNELS = (Channel.LUMA, Channel.CB, Channel.CR)


class CodecConfig(BaseModel):
    """Coding parameters shared by encoder and decoder; everything here is carried in the header."""

    model_config = ConfigDict(frozen=True)

    width: int
    height: int
    bit_depth: int = 8
    chroma_format: ChromaFormat = ChromaFormat.YUV420
    tb_size: int = 8
    quantiser: Quantiser = Quantiser.URQ
    qp: int = 22
    deadzone_mode: DeadzoneMode = DeadzoneMode.HALF
    scan_kind: ScanKind = ScanKind.DIAGONAL

    @field_validator("chroma_format", mode="before")
    @classmethod
    def _parse_chroma(cls, value: object) -> ChromaFormat:
        return ChromaFormat.parse(value)  # type: ignore[arg-type]

    @field_validator("tb_size")
    @classmethod
    def _check_tb_size(cls, value: int) -> int:
        if value not in SUPPORTED_BLOCK_SIZES:
            raise ValueError(f"tb_size must be one of {SUPPORTED_BLOCK_SIZES}")
        return value

    @field_validator("qp")
    @classmethod
    def _check_qp(cls, value: int) -> int:
        return validate_qp(value)

    @field_validator("bit_depth")
    @classmethod
    def _check_depth(cls, value: int) -> int:
        if value not in (8, 10):
            raise ValueError("bit_depth must be 8 or 10")
        return value

    @property
    def chroma_tb_size(self) -> int:
        sx, _ = self.chroma_format.subsampling
        return max(4, self.tb_size // sx)

    def tb_size_for(self, channel: Channel) -> int:
        return self.tb_size if channel is Channel.LUMA else self.chroma_tb_size

    def plane_size(self, channel: Channel) -> tuple[int, int]:
        if channel is Channel.LUMA:
            return self.width, self.height
        return chroma_dimensions(self.width, self.height, self.chroma_format)

    def quant_config(self, channel: Channel) -> QuantConfig:
        return QuantConfig(self.qp, self.tb_size_for(channel), self.bit_depth, self.deadzone_mode)

    def header(self, frame_count: int) -> BitstreamHeader:
        return BitstreamHeader(
            chroma_format_id=self.chroma_format.format_id,
            bit_depth=self.bit_depth,
            log2_tb_size=self.tb_size.bit_length() - 1,
            quantiser_id=self.quantiser.quantiser_id,
            qp=self.qp,
            deadzone_id=self.deadzone_mode.mode_id,
            scan_id=self.scan_kind.scan_id,
            width=self.width,
            height=self.height,
            frame_count=frame_count,
        )

    @classmethod
    def from_header(cls, header: BitstreamHeader) -> "CodecConfig":
        try:
            return cls(
                width=header.width,
                height=header.height,
                bit_depth=header.bit_depth,
                chroma_format=ChromaFormat.from_id(header.chroma_format_id),
                tb_size=1 << header.log2_tb_size,
                quantiser=Quantiser.from_id(header.quantiser_id),
                qp=header.qp,
                deadzone_mode=DeadzoneMode.from_id(header.deadzone_id),
                scan_kind=ScanKind.from_id(header.scan_id),
            )
        except (ValueError, LabError) as exc:
            raise BitstreamError(f"Header holds unsupported coding parameters: {exc}") from exc

    @classmethod
    def for_sequence(cls, sequence: FrameSequence, **overrides: object) -> "CodecConfig":
        return cls(
            width=sequence.width,
            height=sequence.height,
            bit_depth=sequence.bit_depth,
            chroma_format=sequence.chroma_format,
            **overrides,
        )


@dataclass
class FrameEncodeResult:
    payload: bytes
    reconstruction: Frame
    nonzero_levels: int
    bins_coded: int


@dataclass
class SequenceEncodeResult:
    bitstream: Bitstream
    reconstruction: FrameSequence
    nonzero_levels: int = 0
    frame_bits: list[int] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        return self.bitstream.to_bytes()


class _PlaneCoder:
    """Block loop shared by encoder and decoder so both reconstruct through the same path."""

    def __init__(self, config: CodecConfig, channel: Channel) -> None:
        self.config = config
        self.channel = channel
        self.size = config.tb_size_for(channel)
        self.width, self.height = config.plane_size(channel)
        self.block_class = BlockClass(channel, self.size)
        self.quant_config = config.quant_config(channel)
        self.scan: ScanOrder = scan_order(config.scan_kind, self.size)
        self.max_value = (1 << config.bit_depth) - 1
        padded_h = -(-self.height // self.size) * self.size
        padded_w = -(-self.width // self.size) * self.size
        # reconstruction keeps the padded area so neighbours past the crop line exist on both sides
        self.recon = np.zeros((padded_h, padded_w), dtype=np.int64)

    def neighbours(self, x0: int, y0: int) -> tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        top = self.recon[y0 - 1, x0 : x0 + self.size] if y0 > 0 else None
        left = self.recon[y0 : y0 + self.size, x0 - 1] if x0 > 0 else None
        return top, left

    def reconstruct(self, x0: int, y0: int, prediction: np.ndarray, levels: np.ndarray) -> None:
        coefficients = dequantise(self.config.quantiser, levels, self.quant_config)
        residual = inverse_transform(CoeffBlock(coefficients, self.block_class), self.config.bit_depth)
        block = np.clip(prediction + residual, 0, self.max_value)
        self.recon[y0 : y0 + self.size, x0 : x0 + self.size] = block

    def origins(self):
        return block_origins(self.width, self.height, self.size)

    def to_plane(self) -> Plane:
        return Plane(self.recon[: self.height, : self.width].astype(np.uint16), self.config.bit_depth)


def _encode_plane(plane: Plane, coder: _PlaneCoder, encoder: RangeEncoder, contexts: ResidualContexts) -> int:
    config = coder.config
    nonzero = 0
    for x0, y0 in coder.origins():
        source = extract_block(plane, x0, y0, coder.size)
        top, left = coder.neighbours(x0, y0)
        mode, prediction = choose_mode(source, top, left, config.bit_depth)
        encoder.encode_bypass_bits(int(mode), MODE_BITS)
        coeffs = forward_transform(source - prediction, coder.block_class, config.bit_depth)
        levels = quantise(config.quantiser, coeffs, coder.quant_config)
        encode_tb(levels, coder.scan, encoder, contexts)
        nonzero += count_nonzero(levels)
        coder.reconstruct(x0, y0, prediction, levels)
    return nonzero


def _decode_plane(coder: _PlaneCoder, decoder: RangeDecoder, contexts: ResidualContexts) -> None:
    config = coder.config
    for x0, y0 in coder.origins():
        top, left = coder.neighbours(x0, y0)
        mode_id = decoder.decode_bypass_bits(MODE_BITS)
        if mode_id not in {int(mode) for mode in available_modes(top, left)}:
            raise MalformedStreamError(f"Intra mode {mode_id} unavailable for block ({x0}, {y0})")
        prediction = predict(IntraMode(mode_id), top, left, coder.size, config.bit_depth)
        levels = decode_tb(decoder, coder.scan, contexts)
        coder.reconstruct(x0, y0, prediction, levels)


def _check_frame(frame: Frame, config: CodecConfig) -> None:
    for channel, plane in zip(_CHANNELS, frame.planes):
        expected = config.plane_size(channel)
        if (plane.width, plane.height) != expected or plane.bit_depth != config.bit_depth:
            raise ConfigurationError(
                f"{channel.value} plane is {plane.width}x{plane.height}@{plane.bit_depth}bit, "
                f"config expects {expected[0]}x{expected[1]}@{config.bit_depth}bit"
            )


def encode_frame(frame: Frame, config: CodecConfig) -> FrameEncodeResult:
    """Code the Y, Cb and Cr planes of one frame into a self-contained range-coder payload."""

    _check_frame(frame, config)
    encoder = RangeEncoder()
    state = CoderState()
    planes: list[Plane] = []
    nonzero = 0
    for channel, plane in zip(_CHANNELS, frame.planes):
        coder = _PlaneCoder(config, channel)
        nonzero += _encode_plane(plane, coder, encoder, state.for_channel(channel is Channel.LUMA))
        planes.append(coder.to_plane())
    payload = encoder.finish()
    return FrameEncodeResult(payload, Frame(*planes), nonzero, encoder.bins_coded)


def decode_frame(payload: bytes, config: CodecConfig) -> Frame:
    """Rebuild a frame from its payload; matches the encoder's in-loop reconstruction bit-exactly."""

    decoder = RangeDecoder(payload)
    state = CoderState()
    planes: list[Plane] = []
    for channel in _CHANNELS:
        coder = _PlaneCoder(config, channel)
        _decode_plane(coder, decoder, state.for_channel(channel is Channel.LUMA))
        planes.append(coder.to_plane())
    # a valid payload is exactly the bytes the coder reads: five initial bytes plus one per renormalisation
    if decoder.bytes_consumed != len(payload):
        raise MalformedStreamError(
            f"Frame payload has {len(payload) - decoder.bytes_consumed} byte(s) after the last coded bin"
        )
    return Frame(*planes)


def encode_sequence(sequence: FrameSequence, config: CodecConfig) -> SequenceEncodeResult:
    """Encode every frame; the result keeps the encoder-side reconstruction for integrity checks."""

    if (sequence.width, sequence.height, sequence.bit_depth, sequence.chroma_format) != (
        config.width,
        config.height,
        config.bit_depth,
        config.chroma_format,
    ):
        raise ConfigurationError("Sequence geometry does not match the codec config")
    bitstream = Bitstream(config.header(sequence.frame_count))
    reconstruction = FrameSequence(sequence.width, sequence.height, sequence.bit_depth, sequence.chroma_format)
    result = SequenceEncodeResult(bitstream, reconstruction)
    for index, frame in enumerate(sequence.frames):
        frame_result = encode_frame(frame, config)
        bitstream.payloads.append(frame_result.payload)
        reconstruction.frames.append(frame_result.reconstruction)
        result.nonzero_levels += frame_result.nonzero_levels
        result.frame_bits.append(8 * len(frame_result.payload))
        LOGGER.debug(
            "Frame %d coded: %d bytes, %d bins, %d nonzero levels",
            index,
            len(frame_result.payload),
            frame_result.bins_coded,
            frame_result.nonzero_levels,
        )
    return result


def decode_sequence(data: bytes) -> tuple[CodecConfig, FrameSequence]:
    """Decode a serialised bitstream; no side information is needed."""

    bitstream = parse_bitstream(data)
    config = CodecConfig.from_header(bitstream.header)
    sequence = FrameSequence(config.width, config.height, config.bit_depth, config.chroma_format)
    for payload in bitstream.payloads:
        sequence.frames.append(decode_frame(payload, config))
    return config, sequence
