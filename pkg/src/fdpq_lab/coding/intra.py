"""Three-mode intra predictor working from reconstructed neighbours only."""

from __future__ import annotations

from enum import IntEnum
from typing import Optional

import numpy as np

MODE_BITS = 2


class IntraMode(IntEnum):
    DC = 0
    HORIZONTAL = 1
    VERTICAL = 2


def available_modes(top: Optional[np.ndarray], left: Optional[np.ndarray]) -> list[IntraMode]:
    modes = [IntraMode.DC]
    if left is not None:
        modes.append(IntraMode.HORIZONTAL)
    if top is not None:
        modes.append(IntraMode.VERTICAL)
    return modes


def predict(
    mode: IntraMode,
    top: Optional[np.ndarray],
    left: Optional[np.ndarray],
    size: int,
    bit_depth: int,
) -> np.ndarray:
    """Prediction block for ``mode``; DC falls back to mid-grey without neighbours."""

    if mode is IntraMode.HORIZONTAL:
        if left is None:
            raise ValueError("Horizontal prediction needs a left neighbour column")
        return np.repeat(np.asarray(left, dtype=np.int64)[:, np.newaxis], size, axis=1)
    if mode is IntraMode.VERTICAL:
        if top is None:
            raise ValueError("Vertical prediction needs a top neighbour row")
        return np.repeat(np.asarray(top, dtype=np.int64)[np.newaxis, :], size, axis=0)

    neighbours = [edge for edge in (top, left) if edge is not None]
    if not neighbours:
        dc_value = 1 << (bit_depth - 1)
    else:
        total = sum(int(edge.sum()) for edge in neighbours)
        count = size * len(neighbours)
        dc_value = (total + count // 2) // count
    return np.full((size, size), dc_value, dtype=np.int64)


def choose_mode(
    block: np.ndarray,
    top: Optional[np.ndarray],
    left: Optional[np.ndarray],
    bit_depth: int,
) -> tuple[IntraMode, np.ndarray]:
    """Mode with the smallest sum of squared residuals; ties keep the lower mode id."""

    size = block.shape[0]
    best: tuple[IntraMode, np.ndarray] | None = None
    best_cost = None
    for mode in available_modes(top, left):
        prediction = predict(mode, top, left, size, bit_depth)
        diff = block - prediction
        cost = int(np.sum(diff * diff))
        if best_cost is None or cost < best_cost:
            best, best_cost = (mode, prediction), cost
    assert best is not None
    return best
