"""HEVC core integer transforms: DCT for 4x4..32x32 and the 4x4 intra-luma DST."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from fdpq_lab.errors import UnsupportedBlockSizeError

SUPPORTED_SIZES: tuple[int, ...] = (4, 8, 16, 32)
COEFF_MIN = -(1 << 15)
COEFF_MAX = (1 << 15) - 1

# Integer approximations of 64*sqrt(2)*cos(j*pi/64), grouped by the transform size that first uses them.
_COS_ODD_32 = (90, 90, 88, 85, 82, 78, 73, 67, 61, 54, 46, 38, 31, 22, 13, 4)
_COS_ODD_16 = (90, 87, 80, 70, 57, 43, 25, 9)
_COS_ODD_8 = (89, 75, 50, 18)
_COS_ODD_4 = (83, 36)

_DST_4 = (
    (29, 55, 74, 84),
    (74, 74, 0, -74),
    (84, -29, -74, 55),
    (55, -84, 74, -29),
)


class Channel(str, Enum):
    LUMA = "Y"
    CB = "Cb"
    CR = "Cr"


@dataclass(frozen=True)
class BlockClass:
    """Which transform a residual block gets. Only intra prediction exists in this codec."""

    channel: Channel
    size: int
    prediction: str = "intra"

    def __post_init__(self) -> None:
        if self.size not in SUPPORTED_SIZES:
            raise UnsupportedBlockSizeError(f"Transform size {self.size} not in {SUPPORTED_SIZES}")

    @property
    def uses_dst(self) -> bool:
        return self.channel is Channel.LUMA and self.prediction == "intra" and self.size == 4


@dataclass(frozen=True, eq=False)
class CoeffBlock:
    """An NxN block of transform coefficients indexed ``[y, x]`` (vertical, horizontal frequency)."""

    coefficients: np.ndarray
    block_class: BlockClass

    @property
    def size(self) -> int:
        return self.block_class.size


def _cosine_lookup() -> list[int]:
    table = [0] * 33
    table[0] = 64
    table[16] = 64
    for index, value in enumerate(_COS_ODD_32):
        table[2 * index + 1] = value
    for index, value in enumerate(_COS_ODD_16):
        table[4 * index + 2] = value
    for index, value in enumerate(_COS_ODD_8):
        table[8 * index + 4] = value
    table[8], table[24] = _COS_ODD_4
    return table


def _signed_cosine(table: list[int], angle: int) -> int:
    # angle in units of pi/64
    angle %= 128
    if angle <= 32:
        return table[angle]
    if angle <= 64:
        return -table[64 - angle]
    if angle <= 96:
        return -table[angle - 64]
    return table[128 - angle]


@lru_cache(maxsize=None)
def _dct32() -> np.ndarray:
    table = _cosine_lookup()
    matrix = np.array(
        [[_signed_cosine(table, (2 * n + 1) * k) for n in range(32)] for k in range(32)],
        dtype=np.int64,
    )
    matrix.setflags(write=False)
    return matrix


def _check_size(size: int) -> None:
    if size not in SUPPORTED_SIZES:
        raise UnsupportedBlockSizeError(f"Transform size {size} not in {SUPPORTED_SIZES}")


@lru_cache(maxsize=None)
def core_matrix(size: int) -> np.ndarray:
    """The HEVC NxN DCT matrix, taken as every (32/N)-th row of the 32-point matrix."""

    _check_size(size)
    step = 32 // size
    matrix = np.ascontiguousarray(_dct32()[::step, :size])
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=None)
def dst_matrix() -> np.ndarray:
    matrix = np.array(_DST_4, dtype=np.int64)
    matrix.setflags(write=False)
    return matrix


def select_matrix(block_class: BlockClass) -> np.ndarray:
    return dst_matrix() if block_class.uses_dst else core_matrix(block_class.size)


def transform_shift(size: int, bit_depth: int) -> int:
    """Scale of the integer coefficients relative to an orthonormal transform, as a power of two."""

    return 15 - bit_depth - (size.bit_length() - 1)


def _rounding_shift(values: np.ndarray, shift: int) -> np.ndarray:
    return (values + (1 << (shift - 1))) >> shift


def forward_core(residual: np.ndarray, matrix: np.ndarray, bit_depth: int) -> np.ndarray:
    """Separable forward pass on one block or a stack of blocks shaped ``(..., N, N)``."""

    size = matrix.shape[0]
    log2_size = size.bit_length() - 1
    first_shift = log2_size + bit_depth - 9
    second_shift = log2_size + 6
    residual = np.asarray(residual, dtype=np.int64)
    rows = _rounding_shift(residual @ matrix.T, first_shift)
    coefficients = _rounding_shift(matrix @ rows, second_shift)
    return np.clip(coefficients, COEFF_MIN, COEFF_MAX)


def inverse_core(coefficients: np.ndarray, matrix: np.ndarray, bit_depth: int) -> np.ndarray:
    """Separable inverse pass; the intermediate is clipped to signed 16 bit."""

    coefficients = np.asarray(coefficients, dtype=np.int64)
    columns = np.clip(_rounding_shift(matrix.T @ coefficients, 7), COEFF_MIN, COEFF_MAX)
    return _rounding_shift(columns @ matrix, 20 - bit_depth)


def forward_transform(residual: np.ndarray, block_class: BlockClass, bit_depth: int) -> CoeffBlock:
    """Map an NxN residual to its coefficient block."""

    residual = np.asarray(residual, dtype=np.int64)
    if residual.shape != (block_class.size, block_class.size):
        raise UnsupportedBlockSizeError(
            f"Residual shape {residual.shape} does not match block size {block_class.size}"
        )
    return CoeffBlock(forward_core(residual, select_matrix(block_class), bit_depth), block_class)


def inverse_transform(coeffs: CoeffBlock, bit_depth: int) -> np.ndarray:
    """Map a coefficient block back to an NxN residual."""

    coefficients = np.asarray(coeffs.coefficients, dtype=np.int64)
    if coefficients.shape != (coeffs.size, coeffs.size):
        raise UnsupportedBlockSizeError(
            f"Coefficient shape {coefficients.shape} does not match block size {coeffs.size}"
        )
    return inverse_core(coefficients, select_matrix(coeffs.block_class), bit_depth)
