"""Transform-block residual syntax: coded-block flag, last position, significance, sign, magnitude."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from fdpq_lab.coding.range_coder import BinContext, RangeDecoder, RangeEncoder
from fdpq_lab.coding.scan import ScanOrder
from fdpq_lab.errors import MalformedStreamError
from fdpq_lab.quantisation.quant import LEVEL_MAX, LevelBlock

SIG_CONTEXT_BANDS = 4


def _new_contexts(count: int) -> list[BinContext]:
    return [BinContext() for _ in range(count)]


@dataclass
class ResidualContexts:
    """Adaptive contexts for one channel type; magnitude and sign bins are bypass coded."""

    cbf: BinContext = field(default_factory=BinContext)
    significance: list[BinContext] = field(default_factory=lambda: _new_contexts(SIG_CONTEXT_BANDS))


@dataclass
class CoderState:
    """Separate context sets for luma and chroma, reset at every frame."""

    luma: ResidualContexts = field(default_factory=ResidualContexts)
    chroma: ResidualContexts = field(default_factory=ResidualContexts)

    def for_channel(self, is_luma: bool) -> ResidualContexts:
        return self.luma if is_luma else self.chroma


def last_position_width(size: int) -> int:
    """Bits of the fixed-width last-significant index, ``ceil(log2(N*N))``."""

    return (size * size - 1).bit_length()


def _significance_band(x: int, y: int, size: int) -> int:
    radius = x + y
    if radius == 0:
        return 0
    if radius < 3:
        return 1
    if radius < size:
        return 2
    return 3


@lru_cache(maxsize=None)
def _forward_layout(scan: ScanOrder) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
    forward = scan.forward
    bands = tuple(_significance_band(x, y, scan.size) for x, y in forward)
    return forward, bands


def encode_tb(levels: LevelBlock, scan: ScanOrder, encoder: RangeEncoder, contexts: ResidualContexts) -> None:
    """Append the bins of one TB to ``encoder``."""

    forward, bands = _forward_layout(scan)
    rows = np.asarray(levels, dtype=np.int64).tolist()
    scanned = [rows[y][x] for x, y in forward]
    last = -1
    for index in range(len(scanned) - 1, -1, -1):
        if scanned[index]:
            last = index
            break
    if last < 0:
        encoder.encode_bin(contexts.cbf, 0)
        return
    encoder.encode_bin(contexts.cbf, 1)
    encoder.encode_bypass_bits(last, last_position_width(scan.size))
    for index in range(last, -1, -1):
        level = scanned[index]
        encoder.encode_bin(contexts.significance[bands[index]], 1 if level else 0)
        if level:
            encoder.encode_bypass(1 if level < 0 else 0)
            encoder.encode_exp_golomb(abs(level) - 1)


def decode_tb(decoder: RangeDecoder, scan: ScanOrder, contexts: ResidualContexts) -> LevelBlock:
    """Read one TB written by :func:`encode_tb`."""

    size = scan.size
    levels = np.zeros((size, size), dtype=np.int64)
    if not decoder.decode_bin(contexts.cbf):
        return levels
    forward, bands = _forward_layout(scan)
    last = decoder.decode_bypass_bits(last_position_width(size))
    if last >= size * size:
        raise MalformedStreamError(f"Last significant index {last} outside a {size}x{size} TB")
    for index in range(last, -1, -1):
        significant = decoder.decode_bin(contexts.significance[bands[index]])
        if not significant:
            if index == last:
                raise MalformedStreamError(f"Last significant position {last} decoded as zero")
            continue
        negative = decoder.decode_bypass()
        magnitude = decoder.decode_exp_golomb() + 1
        if magnitude > LEVEL_MAX + 1:
            raise MalformedStreamError(f"Level magnitude {magnitude} outside the 16-bit level range")
        x, y = forward[index]
        levels[y, x] = -magnitude if negative else magnitude
    return levels
