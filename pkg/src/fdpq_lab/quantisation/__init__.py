"""Transforms and the three coefficient-level quantisers."""

from __future__ import annotations

from enum import Enum
from typing import Callable

import numpy as np

from .fdpq import WeightMap, fdpq_dequantise, fdpq_quantise, modified_mf, modified_sf, weight_map
from .quant import DeadzoneMode, LevelBlock, QuantConfig, urq_dequantise, urq_quantise
from .rdoq import RdoqParams, rdoq_quantise
from .transform import BlockClass, Channel, CoeffBlock, forward_transform, inverse_transform


class Quantiser(str, Enum):
    """Quantiser identities; the integer ids are written to the bitstream header."""

    URQ = "urq"
    RDOQ = "rdoq"
    FDPQ = "fdpq"

    @property
    def quantiser_id(self) -> int:
        return _QUANTISER_IDS[self]

    @classmethod
    def from_id(cls, quantiser_id: int) -> "Quantiser":
        for member, member_id in _QUANTISER_IDS.items():
            if member_id == quantiser_id:
                return member
        raise ValueError(f"Unknown quantiser id {quantiser_id}")


_QUANTISER_IDS = {Quantiser.URQ: 0, Quantiser.RDOQ: 1, Quantiser.FDPQ: 2}

# RDOQ only changes the level decision; its levels use the uniform scaling factor.
_QUANTISE_HANDLERS: dict[Quantiser, Callable[[CoeffBlock | np.ndarray, QuantConfig], LevelBlock]] = {
    Quantiser.URQ: urq_quantise,
    Quantiser.RDOQ: rdoq_quantise,
    Quantiser.FDPQ: fdpq_quantise,
}
_DEQUANTISE_HANDLERS: dict[Quantiser, Callable[[LevelBlock, QuantConfig], np.ndarray]] = {
    Quantiser.URQ: urq_dequantise,
    Quantiser.RDOQ: urq_dequantise,
    Quantiser.FDPQ: fdpq_dequantise,
}


def quantise(quantiser: Quantiser, coeffs: CoeffBlock | np.ndarray, cfg: QuantConfig) -> LevelBlock:
    """Forward quantisation with the selected quantiser."""

    return _QUANTISE_HANDLERS[quantiser](coeffs, cfg)


def dequantise(quantiser: Quantiser, levels: LevelBlock, cfg: QuantConfig) -> np.ndarray:
    return _DEQUANTISE_HANDLERS[quantiser](levels, cfg)


__all__ = [
    "BlockClass",
    "Channel",
    "CoeffBlock",
    "DeadzoneMode",
    "LevelBlock",
    "QuantConfig",
    "Quantiser",
    "RdoqParams",
    "WeightMap",
    "dequantise",
    "fdpq_dequantise",
    "fdpq_quantise",
    "forward_transform",
    "inverse_transform",
    "modified_mf",
    "modified_sf",
    "quantise",
    "rdoq_quantise",
    "urq_dequantise",
    "urq_quantise",
    "weight_map",
]
