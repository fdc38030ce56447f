"""Coefficient scan orders built from 4x4 sub-blocks."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from fdpq_lab.errors import UnsupportedBlockSizeError
from fdpq_lab.quantisation.transform import SUPPORTED_SIZES

SUB_BLOCK = 4


class ScanKind(str, Enum):
    DIAGONAL = "diagonal"
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"

    @property
    def scan_id(self) -> int:
        return list(ScanKind).index(self)

    @classmethod
    def from_id(cls, scan_id: int) -> "ScanKind":
        members = list(cls)
        if not 0 <= scan_id < len(members):
            raise ValueError(f"Unknown scan id {scan_id}")
        return members[scan_id]


@dataclass(frozen=True)
class ScanOrder:
    """Positions ``(x, y)`` in reverse scan order: highest frequency first, DC last."""

    kind: ScanKind
    size: int
    positions: tuple[tuple[int, int], ...]

    @property
    def forward(self) -> tuple[tuple[int, int], ...]:
        return self.positions[::-1]


def _grid_order(kind: ScanKind, side: int) -> list[tuple[int, int]]:
    if kind is ScanKind.HORIZONTAL:
        return [(x, y) for y in range(side) for x in range(side)]
    if kind is ScanKind.VERTICAL:
        return [(x, y) for x in range(side) for y in range(side)]
    order: list[tuple[int, int]] = []
    # up-right diagonals: bottom-left to top-right along each anti-diagonal
    for diagonal in range(2 * side - 1):
        for y in range(min(diagonal, side - 1), max(0, diagonal - side + 1) - 1, -1):
            order.append((diagonal - y, y))
    return order


@lru_cache(maxsize=None)
def scan_order(kind: ScanKind | str, size: int) -> ScanOrder:
    """Scan of an NxN TB: the 4x4 pattern inside every sub-block, sub-blocks visited in the same pattern."""

    kind = ScanKind(kind)
    if size not in SUPPORTED_SIZES:
        raise UnsupportedBlockSizeError(f"Scan size {size} not in {SUPPORTED_SIZES}")
    inner = _grid_order(kind, SUB_BLOCK)
    forward = [
        (sb_x * SUB_BLOCK + x, sb_y * SUB_BLOCK + y)
        for sb_x, sb_y in _grid_order(kind, size // SUB_BLOCK)
        for x, y in inner
    ]
    return ScanOrder(kind, size, tuple(reversed(forward)))
