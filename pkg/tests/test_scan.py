"""Tests for coefficient scan orders."""

from __future__ import annotations

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import pytest

from fdpq_lab.coding.scan import ScanKind, scan_order
from fdpq_lab.errors import UnsupportedBlockSizeError


@pytest.mark.parametrize("kind", list(ScanKind))
@pytest.mark.parametrize("size", [4, 8, 16, 32])
def test_scan_is_a_permutation_ending_at_dc(kind: ScanKind, size: int) -> None:
    order = scan_order(kind, size)
    assert len(order.positions) == size * size
    assert set(order.positions) == {(x, y) for x in range(size) for y in range(size)}
    assert order.positions[-1] == (0, 0)
    assert order.forward[0] == (0, 0)


def test_diagonal_4x4_forward_order() -> None:
    forward = scan_order(ScanKind.DIAGONAL, 4).forward
    assert forward[:6] == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))
    assert forward[-1] == (3, 3)


def test_diagonal_8x8_finishes_a_sub_block_before_the_next() -> None:
    forward = scan_order("diagonal", 8).forward
    assert set(forward[:16]) == {(x, y) for x in range(4) for y in range(4)}
    assert forward[16] == (0, 4)
    assert forward[32] == (4, 0)


def test_horizontal_8x8_walks_rows_of_each_sub_block() -> None:
    forward = scan_order(ScanKind.HORIZONTAL, 8).forward
    assert forward[:5] == ((0, 0), (1, 0), (2, 0), (3, 0), (0, 1))
    assert forward[16] == (4, 0)
    assert forward[32] == (0, 4)


def test_vertical_4x4_walks_columns() -> None:
    forward = scan_order(ScanKind.VERTICAL, 4).forward
    assert forward[:5] == ((0, 0), (0, 1), (0, 2), (0, 3), (1, 0))


@pytest.mark.parametrize("size", [2, 64])
def test_unsupported_scan_size(size: int) -> None:
    with pytest.raises(UnsupportedBlockSizeError):
        scan_order(ScanKind.DIAGONAL, size)


def test_unknown_scan_kind() -> None:
    with pytest.raises(ValueError):
        scan_order("zigzag", 4)


@pytest.mark.parametrize("kind", list(ScanKind))
def test_scan_id_round_trip(kind: ScanKind) -> None:
    assert ScanKind.from_id(kind.scan_id) is kind


def test_unknown_scan_id() -> None:
    with pytest.raises(ValueError):
        ScanKind.from_id(7)
