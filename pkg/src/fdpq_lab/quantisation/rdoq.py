"""Rate-distortion optimised quantisation over the candidates {0, l1, l1 + 1}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fdpq_lab.quantisation.quant import (
    LEVEL_MAX,
    CoefficientsLike,
    LevelBlock,
    QuantConfig,
    coefficient_array,
    urq_dequantise,
    validate_qp,
)
from fdpq_lab.quantisation.transform import transform_shift

BIT_MODEL_EXP_GOLOMB = "exp_golomb0"


@dataclass(frozen=True)
class RdoqParams:
    """Lagrange multiplier in the coefficient domain plus the rate model it is paired with."""

    lam: float
    bit_model: str = BIT_MODEL_EXP_GOLOMB

    def __post_init__(self) -> None:
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam!r}")
        if self.bit_model != BIT_MODEL_EXP_GOLOMB:
            raise ValueError(f"Unknown bit model '{self.bit_model}'")

    @classmethod
    def for_block(cls, cfg: QuantConfig) -> "RdoqParams":
        """Scale the pixel-domain schedule by the squared coefficient gain of the TB size."""

        gain = 2.0 ** (2 * transform_shift(cfg.size, cfg.bit_depth))
        return cls(lambda_for_qp(cfg.qp) * gain)


def lambda_for_qp(qp: int) -> float:
    """Intra Lagrange multiplier ``0.57 * 2 ** ((QP - 12) / 3)`` for squared sample error."""

    return 0.57 * 2.0 ** ((validate_qp(qp) - 12) / 3.0)


def exp_golomb_length(values: np.ndarray | int) -> np.ndarray:
    """Order-0 exp-Golomb codeword length of non-negative integers."""

    values = np.asarray(values, dtype=np.int64)
    prefix = np.floor(np.log2(values + 1.0)).astype(np.int64)
    return 2 * prefix + 1


def level_bits(levels: np.ndarray | int) -> np.ndarray:
    """Bits for a level magnitude: 1 for zero, else significance + sign + EG0(l - 1)."""

    levels = np.asarray(levels, dtype=np.int64)
    coded = 2 + exp_golomb_length(np.maximum(levels - 1, 0))
    return np.where(levels == 0, 1, coded)


def candidate_levels(coefficient: np.ndarray | int, cfg: QuantConfig) -> tuple[np.ndarray, np.ndarray]:
    """Floor level ``(|C| * m) >> qbits`` and the next level up."""

    magnitude = np.abs(np.asarray(coefficient, dtype=np.int64))
    l1 = np.minimum((magnitude * cfg.mf) >> cfg.qbits, LEVEL_MAX - 1)
    return l1, l1 + 1


def level_cost(
    coefficient: np.ndarray | int,
    level: np.ndarray | int,
    cfg: QuantConfig,
    params: RdoqParams,
) -> np.ndarray:
    """Lagrangian ``(|C| - C'(l))**2 + lambda * b(l)`` for level magnitudes ``l >= 0``."""

    magnitude = np.abs(np.asarray(coefficient, dtype=np.int64))
    level = np.asarray(level, dtype=np.int64)
    if np.any(level < 0):
        raise ValueError("level_cost expects non-negative level magnitudes")
    error = (magnitude - urq_dequantise(level, cfg)).astype(np.float64)
    return error * error + params.lam * level_bits(level)


def rdoq_quantise(coeffs: CoefficientsLike, cfg: QuantConfig, params: RdoqParams | None = None) -> LevelBlock:
    """Pick the cheapest of {0, l1, l2} per coefficient, ties going to the smaller level."""

    params = params or RdoqParams.for_block(cfg)
    coefficients = coefficient_array(coeffs)
    l1, l2 = candidate_levels(coefficients, cfg)
    zero = np.zeros_like(l1)
    candidates = np.stack([zero, l1, l2])
    costs = np.stack([level_cost(coefficients, candidate, cfg, params) for candidate in candidates])
    choice = np.argmin(costs, axis=0)
    chosen = np.take_along_axis(candidates, choice[np.newaxis], axis=0)[0]
    return np.sign(coefficients) * chosen
