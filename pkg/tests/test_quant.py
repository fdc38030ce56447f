"""Tests for QP mapping, the MF/SF tables and uniform quantisation."""

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

from fdpq_lab.errors import QuantisationError
from fdpq_lab.quantisation import Quantiser, dequantise, quantise
from fdpq_lab.quantisation.quant import (
    MF_TABLE,
    SF_TABLE,
    DeadzoneMode,
    InvalidQpError,
    QuantConfig,
    mf_closed_form,
    mf_sf,
    qp_from_qstep,
    qstep_from_qp,
    sf_closed_form,
    urq_dequantise,
    urq_quantise,
)
from fdpq_lab.quantisation.transform import BlockClass, Channel, CoeffBlock, forward_transform, inverse_transform


@pytest.mark.parametrize(
    "qp, expected",
    [(0, 0.6300), (1, 0.7071), (2, 0.7937), (3, 0.8909), (4, 1.0000), (5, 1.1225), (22, 8.0), (28, 16.0)],
)
def test_qstep_from_qp(qp: int, expected: float) -> None:
    assert qstep_from_qp(qp) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize(
    "qstep, expected",
    [(8.0, 22), (1.0, 4), (1.1225, 5), (0.63, 0), (0.001, 0), (1e6, 51), (9.0, 24)],
)
def test_qp_from_qstep(qstep: float, expected: int) -> None:
    assert qp_from_qstep(qstep) == expected


@pytest.mark.parametrize("qstep", [0.0, -1.0])
def test_qp_from_qstep_rejects_non_positive(qstep: float) -> None:
    with pytest.raises(ValueError):
        qp_from_qstep(qstep)


@pytest.mark.parametrize("qp", range(52))
def test_qp_qstep_round_trip(qp: int) -> None:
    assert qp_from_qstep(qstep_from_qp(qp)) == qp


@pytest.mark.parametrize("qp, expected", [(0, (26214, 40)), (22, (16384, 64)), (11, (14564, 72)), (51, (18396, 57))])
def test_mf_sf_lookup(qp: int, expected: tuple[int, int]) -> None:
    assert mf_sf(qp) == expected


@pytest.mark.parametrize("qp", range(6))
def test_table_entries_track_closed_forms(qp: int) -> None:
    assert MF_TABLE[qp] == pytest.approx(mf_closed_form(qp), rel=0.01)
    assert SF_TABLE[qp] == pytest.approx(sf_closed_form(qp), rel=0.01)
    assert MF_TABLE[qp] * SF_TABLE[qp] / 2**20 == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("qp", [-1, 52, 2.5])
def test_invalid_qp_is_rejected(qp) -> None:
    with pytest.raises(InvalidQpError):
        QuantConfig(qp, 4)
    with pytest.raises(InvalidQpError):
        qstep_from_qp(qp)


@pytest.mark.parametrize("qp", [0, 5, 22, 37, 51])
@pytest.mark.parametrize("size", [4, 8, 16, 32])
@pytest.mark.parametrize("bit_depth", [8, 10])
def test_qbits_and_dequant_shift(qp: int, size: int, bit_depth: int) -> None:
    cfg = QuantConfig(qp, size, bit_depth, DeadzoneMode.INTRA_THIRD)
    log2_size = size.bit_length() - 1
    assert cfg.qbits == 14 + qp // 6 + 15 - bit_depth - log2_size
    assert cfg.dequant_shift == log2_size - 1 + bit_depth - 8
    assert cfg.offset == (1 << cfg.qbits) // 3
    assert QuantConfig(qp, size, bit_depth, DeadzoneMode.HALF).offset == 1 << (cfg.qbits - 1)


def test_half_rounding_is_the_default_deadzone() -> None:
    assert QuantConfig(27, 8).deadzone_mode is DeadzoneMode.HALF
    assert QuantConfig.for_block(27, 8).deadzone_mode is DeadzoneMode.HALF
    assert QuantConfig(27, 8).offset == 1 << (QuantConfig(27, 8).qbits - 1)


def test_unsupported_block_size_is_rejected() -> None:
    with pytest.raises(QuantisationError):
        QuantConfig(22, 64)


def test_urq_worked_example() -> None:
    cfg = QuantConfig(22, 32, 8, DeadzoneMode.HALF)
    assert cfg.qbits == 19
    levels = urq_quantise(np.array([[100]]), cfg)
    assert levels.tolist() == [[(100 * 16384 + 262144) >> 19]]
    assert levels.tolist() == [[3]]
    assert urq_dequantise(levels, cfg).tolist() == [[96]]


def test_urq_deadzone_modes_differ_only_in_rounding() -> None:
    coefficients = np.arange(-2000, 2001, 7).reshape(1, -1)
    third = urq_quantise(coefficients, QuantConfig(27, 8, deadzone_mode="intra_third"))
    half = urq_quantise(coefficients, QuantConfig(27, 8, deadzone_mode="half"))
    assert np.all(np.abs(half) >= np.abs(third))
    assert np.all(np.abs(half) - np.abs(third) <= 1)


@settings(max_examples=60, deadline=None)
@given(
    coefficient=st.integers(min_value=-20000, max_value=20000),
    qp=st.integers(min_value=0, max_value=51),
    size=st.sampled_from([4, 8, 16, 32]),
    quantiser=st.sampled_from(list(Quantiser)),
)
def test_quantisers_are_sign_symmetric(coefficient: int, qp: int, size: int, quantiser: Quantiser) -> None:
    cfg = QuantConfig(qp, size)
    block = np.full((size, size), coefficient, dtype=np.int64)
    positive = quantise(quantiser, block, cfg)
    negative = quantise(quantiser, -block, cfg)
    assert np.array_equal(negative, -positive)
    assert np.array_equal(dequantise(quantiser, -positive, cfg), -dequantise(quantiser, positive, cfg))


def test_urq_uses_one_step_for_every_position() -> None:
    cfg = QuantConfig(30, 8)
    block = np.full((8, 8), 1234, dtype=np.int64)
    levels = urq_quantise(block, cfg)
    assert np.all(levels == levels[0, 0])


def test_coefficients_outside_16_bit_raise() -> None:
    with pytest.raises(QuantisationError):
        urq_quantise(np.array([[40000]]), QuantConfig(22, 4))


def _pipeline_mse(qp: int, residuals: list[np.ndarray]) -> float:
    size = residuals[0].shape[0]
    cfg = QuantConfig(qp, size)
    block_class = BlockClass(Channel.CB, size)
    errors = []
    for residual in residuals:
        coeffs = forward_transform(residual, block_class, 8)
        restored_coeffs = urq_dequantise(urq_quantise(coeffs, cfg), cfg)
        restored = inverse_transform(CoeffBlock(restored_coeffs, block_class), 8)
        errors.append(np.mean((restored - residual).astype(np.float64) ** 2))
    return float(np.mean(errors))


@pytest.mark.parametrize("size", [4, 8, 16])
def test_reconstruction_error_grows_with_qp(size: int, trials) -> None:
    rng = np.random.default_rng(size)
    residuals = [rng.integers(-255, 256, size=(size, size)) for _ in range(trials(20, 200))]
    errors = [_pipeline_mse(qp, residuals) for qp in range(12, 43, 6)]
    assert errors == sorted(errors)
    assert errors[-1] > errors[0]
