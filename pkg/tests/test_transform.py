"""Tests for the HEVC integer transforms."""

from __future__ import annotations

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdpq_lab.errors import UnsupportedBlockSizeError
from fdpq_lab.quantisation.transform import (
    BlockClass,
    Channel,
    CoeffBlock,
    core_matrix,
    dst_matrix,
    forward_transform,
    inverse_transform,
    select_matrix,
)

SIZES = [4, 8, 16, 32]


def _random_residual(rng: np.random.Generator, size: int, bit_depth: int) -> np.ndarray:
    limit = (1 << bit_depth) - 1
    return rng.integers(-limit, limit + 1, size=(size, size))


def test_core_matrix_4_matches_hevc() -> None:
    expected = [
        [64, 64, 64, 64],
        [83, 36, -36, -83],
        [64, -64, -64, 64],
        [36, -83, 83, -36],
    ]
    assert core_matrix(4).tolist() == expected


@pytest.mark.parametrize("size", SIZES)
def test_core_matrix_rows_are_nearly_orthogonal(size: int) -> None:
    matrix = core_matrix(size).astype(np.float64)
    gram = matrix @ matrix.T
    diagonal = np.diag(gram)
    assert np.allclose(diagonal, 64 * 64 * size, rtol=0.02)
    off_diagonal = gram - np.diag(diagonal)
    assert np.abs(off_diagonal).max() < 0.02 * 64 * 64 * size


def test_core_matrix_8_first_odd_row() -> None:
    assert core_matrix(8)[1].tolist() == [89, 75, 50, 18, -18, -50, -75, -89]


def test_dst_used_only_for_4x4_intra_luma() -> None:
    assert select_matrix(BlockClass(Channel.LUMA, 4)) is dst_matrix()
    assert select_matrix(BlockClass(Channel.CB, 4)) is core_matrix(4)
    assert select_matrix(BlockClass(Channel.LUMA, 8)) is core_matrix(8)


@pytest.mark.parametrize("size", [2, 3, 64])
def test_unsupported_sizes_are_rejected(size: int) -> None:
    with pytest.raises(UnsupportedBlockSizeError):
        BlockClass(Channel.LUMA, size)
    with pytest.raises(UnsupportedBlockSizeError):
        core_matrix(size)


def test_residual_shape_must_match_block_class() -> None:
    with pytest.raises(UnsupportedBlockSizeError):
        forward_transform(np.zeros((4, 4)), BlockClass(Channel.CB, 8), 8)


@pytest.mark.parametrize("size", SIZES)
@pytest.mark.parametrize("channel", [Channel.LUMA, Channel.CR])
def test_zero_residual_gives_zero_coefficients(size: int, channel: Channel) -> None:
    coeffs = forward_transform(np.zeros((size, size), dtype=np.int64), BlockClass(channel, size), 8)
    assert not coeffs.coefficients.any()
    assert not inverse_transform(coeffs, 8).any()


@pytest.mark.parametrize("size", SIZES)
def test_constant_residual_has_only_dc(size: int) -> None:
    coeffs = forward_transform(np.full((size, size), 37), BlockClass(Channel.CB, size), 8).coefficients
    assert coeffs[0, 0] != 0
    rest = coeffs.copy()
    rest[0, 0] = 0
    assert not rest.any()


@pytest.mark.parametrize(
    "size, bit_depth, bound",
    [(4, 8, 1), (8, 8, 1), (16, 8, 1), (32, 8, 1), (4, 10, 1), (8, 10, 1), (16, 10, 2), (32, 10, 2)],
)
@pytest.mark.parametrize("channel", [Channel.LUMA, Channel.CB])
def test_forward_inverse_round_trip_error(size: int, bit_depth: int, bound: int, channel: Channel, trials) -> None:
    # 10-bit 16x16 and 32x32 keep only unit coefficient precision, so one extra LSB is allowed there
    rng = np.random.default_rng(size * 100 + bit_depth)
    block_class = BlockClass(channel, size)
    for _ in range(trials(20, 200)):
        residual = _random_residual(rng, size, bit_depth)
        restored = inverse_transform(forward_transform(residual, block_class, bit_depth), bit_depth)
        assert np.abs(restored - residual).max() <= bound


@pytest.mark.parametrize("bit_depth", [8, 10])
def test_dst_matches_float_reference(bit_depth: int) -> None:
    rng = np.random.default_rng(7)
    matrix = dst_matrix().astype(np.float64)
    first_shift = 2 + bit_depth - 9
    second_shift = 2 + 6
    for _ in range(50):
        residual = _random_residual(rng, 4, bit_depth)
        expected = matrix @ residual @ matrix.T / 2.0 ** (first_shift + second_shift)
        actual = forward_transform(residual, BlockClass(Channel.LUMA, 4), bit_depth).coefficients
        assert np.abs(actual - expected).max() <= 1.0


@settings(max_examples=40, deadline=None)
@given(
    size=st.sampled_from(SIZES),
    seed=st.integers(min_value=0, max_value=2**16),
)
def test_forward_transform_is_linear_up_to_rounding(size: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    block_class = BlockClass(Channel.CB, size)
    first = rng.integers(-100, 101, size=(size, size))
    second = rng.integers(-100, 101, size=(size, size))
    combined = forward_transform(first + second, block_class, 8).coefficients
    separate = forward_transform(first, block_class, 8).coefficients + forward_transform(second, block_class, 8).coefficients
    assert np.abs(combined - separate).max() <= 3


@pytest.mark.parametrize("size", [8, 16])
def test_ramp_energy_concentrates_in_low_frequencies(size: int) -> None:
    ramp = np.tile(np.arange(size) * 8, (size, 1))
    coeffs = forward_transform(ramp - ramp.mean().astype(np.int64), BlockClass(Channel.CB, size), 8).coefficients
    energy = coeffs.astype(np.float64) ** 2
    low = energy[:2, :2].sum()
    assert low / energy.sum() > 0.9


def test_coefficients_are_clipped_to_16_bit() -> None:
    block_class = BlockClass(Channel.CB, 32)
    coeffs = forward_transform(np.full((32, 32), 1023), block_class, 10).coefficients
    assert coeffs.max() <= (1 << 15) - 1


def test_inverse_rejects_wrong_coefficient_shape() -> None:
    coeffs = CoeffBlock(np.zeros((4, 4), dtype=np.int64), BlockClass(Channel.CB, 8))
    with pytest.raises(UnsupportedBlockSizeError):
        inverse_transform(coeffs, 8)
