"""Frequency-dependent perceptual quantisation.

Every AC position of an NxN TB gets a weight ``w = exp(-d**2)`` where ``d`` is the
Euclidean distance of the position from DC, normalised by the distance of the
farthest AC position. The weight shrinks the forward multiplication factor (so
high frequencies are quantised more coarsely) and, as published, the inverse
scaling factor as well. DC keeps ``w = 1`` and therefore the URQ behaviour.

Weights are held at four decimals, the precision of the published weight table,
before they are folded into integer MF/SF tables per ``QP mod 6`` and N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from fdpq_lab.errors import UnsupportedBlockSizeError
from fdpq_lab.quantisation.quant import (
    CoefficientsLike,
    LevelBlock,
    QuantConfig,
    coefficient_array,
    mf_sf,
    scale_to_coefficients,
    scale_to_levels,
    validate_qp,
)
from fdpq_lab.quantisation.transform import SUPPORTED_SIZES

WEIGHT_DECIMALS = 4


@dataclass(frozen=True, eq=False)
class WeightMap:
    """Distances and tabulated weights of one TB size, indexed ``[y, x]``."""

    size: int
    d: np.ndarray
    w: np.ndarray


def _round_half_up(values: np.ndarray | float) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5).astype(np.int64)


def _check_position(x: int, y: int, size: int) -> None:
    if size < 2:
        raise ValueError(f"Block size must be at least 2, got {size}")
    if not (0 <= x < size and 0 <= y < size):
        raise ValueError(f"Position ({x}, {y}) outside a {size}x{size} block")


def distance(x: int, y: int, size: int) -> float:
    """Normalised Euclidean distance of ``(x, y)`` from DC; the far corner is 1."""

    _check_position(x, y, size)
    return math.sqrt((x * x + y * y) / (2.0 * (size - 1) ** 2))


def weight(d: float) -> float:
    """Exponential decay ``exp(-d**2)`` of the perceptual weight."""

    if not 0.0 <= d <= 1.0:
        raise ValueError(f"Distance must lie in [0, 1], got {d!r}")
    return math.exp(-d * d)


@lru_cache(maxsize=None)
def weight_map(size: int) -> WeightMap:
    if size not in SUPPORTED_SIZES:
        raise UnsupportedBlockSizeError(f"Weight maps exist for sizes {SUPPORTED_SIZES}, got {size}")
    ys, xs = np.mgrid[0:size, 0:size]
    d = np.sqrt((xs * xs + ys * ys) / (2.0 * (size - 1) ** 2))
    w = np.round(np.exp(-d * d), WEIGHT_DECIMALS)
    d.setflags(write=False)
    w.setflags(write=False)
    return WeightMap(size, d, w)


def weight_curve(samples: int = 101) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spaced ``(d, w)`` samples of the decay over [0, 1]."""

    d = np.linspace(0.0, 1.0, samples)
    return d, np.exp(-d * d)


@lru_cache(maxsize=None)
def modified_mf_table(qp_class: int, size: int) -> np.ndarray:
    """Integer ``round(m * w)`` for every position; keyed by ``QP mod 6``."""

    m, _ = mf_sf(qp_class)
    table = _round_half_up(m * weight_map(size).w)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def modified_sf_table(qp_class: int, size: int) -> np.ndarray:
    """Integer ``round(2**20 / m * w)`` for every position; keyed by ``QP mod 6``."""

    m, _ = mf_sf(qp_class)
    table = _round_half_up((2.0**20 / m) * weight_map(size).w)
    table.setflags(write=False)
    return table


def modified_mf(qp: int, x: int, y: int, size: int) -> int:
    _check_position(x, y, size)
    return int(modified_mf_table(validate_qp(qp) % 6, size)[y, x])


def modified_sf(qp: int, x: int, y: int, size: int) -> int:
    _check_position(x, y, size)
    return int(modified_sf_table(validate_qp(qp) % 6, size)[y, x])


def fdpq_quantise(coeffs: CoefficientsLike, cfg: QuantConfig) -> LevelBlock:
    """URQ with the per-position modified MF; the DC level equals the URQ DC level."""

    return scale_to_levels(coefficient_array(coeffs), modified_mf_table(cfg.qp % 6, cfg.size), cfg)


def fdpq_dequantise(levels: LevelBlock, cfg: QuantConfig) -> np.ndarray:
    """URQ dequantisation with the per-position modified SF, identical on encoder and decoder."""

    return scale_to_coefficients(levels, modified_sf_table(cfg.qp % 6, cfg.size), cfg)
