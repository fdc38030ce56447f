"""QP/QStep mapping, MF/SF tables and uniform reconstruction quantisation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from fdpq_lab.errors import QuantisationError
from fdpq_lab.quantisation.transform import COEFF_MAX, COEFF_MIN, SUPPORTED_SIZES, CoeffBlock

QP_MIN = 0
QP_MAX = 51
LEVEL_MIN = -(1 << 15)
LEVEL_MAX = (1 << 15) - 1

MF_TABLE: tuple[int, ...] = (26214, 23302, 20560, 18396, 16384, 14564)
SF_TABLE: tuple[int, ...] = (40, 45, 51, 57, 64, 72)

# Slack, in QP units, so that table-rounded step sizes (e.g. 1.1225) land on their own QP.
_QP_CEIL_TOLERANCE = 1e-2

LevelBlock = np.ndarray
CoefficientsLike = Union[CoeffBlock, np.ndarray]


class InvalidQpError(ValueError):
    """Raised for QP values outside [0, 51]."""


class DeadzoneMode(str, Enum):
    """Rounding offset of the forward quantiser as a fraction of ``2**qbits``."""

    INTRA_THIRD = "intra_third"
    HALF = "half"

    @property
    def mode_id(self) -> int:
        return 0 if self is DeadzoneMode.INTRA_THIRD else 1

    @classmethod
    def from_id(cls, mode_id: int) -> "DeadzoneMode":
        if mode_id == 0:
            return cls.INTRA_THIRD
        if mode_id == 1:
            return cls.HALF
        raise ValueError(f"Unknown deadzone mode id {mode_id}")


def validate_qp(qp: int) -> int:
    if isinstance(qp, bool) or int(qp) != qp or not QP_MIN <= qp <= QP_MAX:
        raise InvalidQpError(f"QP must be an integer in [{QP_MIN}, {QP_MAX}], got {qp!r}")
    return int(qp)


def qstep_from_qp(qp: int) -> float:
    """Quantisation step size ``2 ** ((QP - 4) / 6)``."""

    return 2.0 ** ((validate_qp(qp) - 4) / 6.0)


def qp_from_qstep(qstep: float) -> int:
    """Smallest QP whose step is not below ``qstep``, clamped to [0, 51]."""

    if not qstep > 0:
        raise ValueError(f"qstep must be positive, got {qstep!r}")
    qp = math.ceil(6.0 * math.log2(qstep) - _QP_CEIL_TOLERANCE) + 4
    return min(max(qp, QP_MIN), QP_MAX)


def mf_sf(qp: int) -> tuple[int, int]:
    """Multiplication and scaling factor for ``QP mod 6``."""

    index = validate_qp(qp) % 6
    return MF_TABLE[index], SF_TABLE[index]


def mf_closed_form(qp: int) -> float:
    """Unrounded ``2**14 / QStep``; the table entry for ``QP mod 6`` tracks it within 1%."""

    return 2.0**14 / qstep_from_qp(validate_qp(qp) % 6)


def sf_closed_form(qp: int) -> float:
    """Unrounded ``2**6 * QStep`` for ``QP mod 6``."""

    return 2.0**6 * qstep_from_qp(validate_qp(qp) % 6)


@dataclass(frozen=True)
class QuantConfig:
    """Everything the forward and inverse quantisers need for one TB size."""

    qp: int
    size: int
    bit_depth: int = 8
    deadzone_mode: DeadzoneMode = DeadzoneMode.HALF

    def __post_init__(self) -> None:
        validate_qp(self.qp)
        if self.size not in SUPPORTED_SIZES:
            raise QuantisationError(f"Block size {self.size} not in {SUPPORTED_SIZES}")
        if self.bit_depth not in (8, 10):
            raise QuantisationError(f"Bit depth {self.bit_depth} not supported")
        object.__setattr__(self, "deadzone_mode", DeadzoneMode(self.deadzone_mode))

    @classmethod
    def for_block(
        cls,
        qp: int,
        size: int,
        bit_depth: int = 8,
        deadzone_mode: DeadzoneMode | str = DeadzoneMode.HALF,
    ) -> "QuantConfig":
        return cls(qp, size, bit_depth, DeadzoneMode(deadzone_mode))

    @property
    def log2_size(self) -> int:
        return self.size.bit_length() - 1

    @property
    def qbits(self) -> int:
        return 14 + self.qp // 6 + (15 - self.bit_depth - self.log2_size)

    @property
    def offset(self) -> int:
        if self.deadzone_mode is DeadzoneMode.HALF:
            return 1 << (self.qbits - 1)
        return (1 << self.qbits) // 3

    @property
    def dequant_shift(self) -> int:
        return self.log2_size - 1 + (self.bit_depth - 8)

    @property
    def mf(self) -> int:
        return MF_TABLE[self.qp % 6]

    @property
    def sf(self) -> int:
        return SF_TABLE[self.qp % 6]

    @property
    def qstep(self) -> float:
        return qstep_from_qp(self.qp)

    def with_size(self, size: int) -> "QuantConfig":
        return QuantConfig(self.qp, size, self.bit_depth, self.deadzone_mode)


def coefficient_array(coeffs: CoefficientsLike) -> np.ndarray:
    values = coeffs.coefficients if isinstance(coeffs, CoeffBlock) else coeffs
    return np.asarray(values, dtype=np.int64)


def scale_to_levels(coefficients: np.ndarray, multiplier: np.ndarray | int, cfg: QuantConfig) -> LevelBlock:
    """``sign(C) * ((|C| * m + o) >> qbits)`` with a scalar or per-position ``m``."""

    if coefficients.size and (coefficients.min() < COEFF_MIN or coefficients.max() > COEFF_MAX):
        raise QuantisationError("Transform coefficients exceed the signed 16-bit dynamic range")
    magnitude = (np.abs(coefficients) * multiplier + cfg.offset) >> cfg.qbits
    return np.sign(coefficients) * np.minimum(magnitude, LEVEL_MAX)


def scale_to_coefficients(levels: np.ndarray, scale: np.ndarray | int, cfg: QuantConfig) -> np.ndarray:
    """Apply ``(|t| * s * 2**(QP//6) + 2**(shift-1)) >> shift`` and reattach the sign."""

    levels = np.asarray(levels, dtype=np.int64)
    shift = cfg.dequant_shift
    magnitude = ((np.abs(levels) * scale) << (cfg.qp // 6)) + (1 << (shift - 1))
    return np.clip(np.sign(levels) * (magnitude >> shift), COEFF_MIN, COEFF_MAX)


def urq_quantise(coeffs: CoefficientsLike, cfg: QuantConfig) -> LevelBlock:
    """Uniform quantisation: one (m, o, qbits) triple for every coefficient position."""

    return scale_to_levels(coefficient_array(coeffs), cfg.mf, cfg)


def urq_dequantise(levels: LevelBlock, cfg: QuantConfig) -> np.ndarray:
    """Uniform inverse quantisation with the table SF."""

    return scale_to_coefficients(levels, cfg.sf, cfg)


def count_nonzero(levels: LevelBlock) -> int:
    return int(np.count_nonzero(levels))
