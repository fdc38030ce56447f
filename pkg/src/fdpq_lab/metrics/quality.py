"""Per-channel PSNR and SSIM between source and reconstructed planes."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy import ndimage

from fdpq_lab.errors import MediaFormatError
from fdpq_lab.media.raw_io import Frame, FrameSequence, Plane

LOGGER = logging.getLogger(__name__)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PSNR_IDENTICAL = math.inf
CHANNEL_NAMES = ("y", "cb", "cr")


class QualityRecord(BaseModel):
    """PSNR (dB) and SSIM per channel plus the unweighted YCbCr mean of each."""

    psnr_y: float
    psnr_cb: float
    psnr_cr: float
    ssim_y: float
    ssim_cb: float
    ssim_cr: float

    @property
    def psnr_ycbcr(self) -> float:
        return (self.psnr_y + self.psnr_cb + self.psnr_cr) / 3.0

    @property
    def ssim_ycbcr(self) -> float:
        return (self.ssim_y + self.ssim_cb + self.ssim_cr) / 3.0

    def as_row(self) -> dict[str, float]:
        row = self.model_dump()
        row["psnr_ycbcr"] = self.psnr_ycbcr
        row["ssim_ycbcr"] = self.ssim_ycbcr
        return row


def _check_pair(ref: Plane, test: Plane) -> None:
    if ref.samples.shape != test.samples.shape:
        raise MediaFormatError(f"Plane shapes differ: {ref.samples.shape} vs {test.samples.shape}")
    if ref.bit_depth != test.bit_depth:
        raise MediaFormatError(f"Bit depths differ: {ref.bit_depth} vs {test.bit_depth}")


def psnr(ref: Plane, test: Plane) -> float:
    """``10 log10(MAX^2 / MSE)``; identical planes return ``inf``."""

    _check_pair(ref, test)
    diff = ref.samples.astype(np.float64) - test.samples.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_IDENTICAL
    peak = float(ref.max_value)
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    profile = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    window = np.outer(profile, profile)
    return window / window.sum()


def _local_mean(values: np.ndarray, window: np.ndarray) -> np.ndarray:
    # keep only positions where the whole window lies inside the plane
    half = window.shape[0] // 2
    filtered = ndimage.correlate(values, window, mode="reflect")
    return filtered[half : values.shape[0] - half, half : values.shape[1] - half]


def ssim(ref: Plane, test: Plane, *, return_map: bool = False) -> float | tuple[float, np.ndarray]:
    """Mean SSIM over all valid 11x11 Gaussian window positions.

    With ``return_map`` the per-position index map is returned as well; it is
    ``(H - 10) x (W - 10)`` for an ``H x W`` plane.
    """

    _check_pair(ref, test)
    if ref.width < SSIM_WINDOW or ref.height < SSIM_WINDOW:
        raise MediaFormatError(
            f"SSIM needs planes of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {ref.width}x{ref.height}"
        )
    peak = float(ref.max_value)
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    window = _gaussian_window()
    x = ref.samples.astype(np.float64)
    y = test.samples.astype(np.float64)

    mu_x = _local_mean(x, window)
    mu_y = _local_mean(y, window)
    sigma_xx = _local_mean(x * x, window) - mu_x * mu_x
    sigma_yy = _local_mean(y * y, window) - mu_y * mu_y
    sigma_xy = _local_mean(x * y, window) - mu_x * mu_y

    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (sigma_xx + sigma_yy + c2)
    index_map = numerator / denominator
    value = float(np.mean(index_map))
    if return_map:
        return value, index_map
    return value


def quality_record(ref: Frame, test: Frame) -> QualityRecord:
    """Per-channel metrics of one frame pair."""

    values: dict[str, float] = {}
    for name, ref_plane, test_plane in zip(CHANNEL_NAMES, ref.planes, test.planes):
        values[f"psnr_{name}"] = psnr(ref_plane, test_plane)
        values[f"ssim_{name}"] = ssim(ref_plane, test_plane)  # type: ignore[assignment]
    return QualityRecord(**values)


def sequence_quality(ref: FrameSequence, test: FrameSequence) -> QualityRecord:
    """Average per-frame records over the sequence."""

    if ref.frame_count != test.frame_count:
        raise MediaFormatError(f"Frame counts differ: {ref.frame_count} vs {test.frame_count}")
    if ref.frame_count == 0:
        raise MediaFormatError("Cannot measure quality of an empty sequence")
    records = [quality_record(a, b) for a, b in zip(ref.frames, test.frames)]
    averaged = {
        field_name: float(np.mean([getattr(record, field_name) for record in records]))
        for field_name in QualityRecord.model_fields
    }
    return QualityRecord(**averaged)


def ssim_map_to_pgm(index_map: np.ndarray, path: str | Path, *, floor: Optional[float] = 0.0) -> Path:
    """Write an SSIM index map as a binary 8-bit PGM; ``floor`` maps to black, 1.0 to white."""

    low = float(np.min(index_map)) if floor is None else floor
    span = max(1.0 - low, 1e-12)
    scaled = np.clip((index_map - low) / span, 0.0, 1.0)
    pixels = np.rint(scaled * 255.0).astype(np.uint8)
    height, width = pixels.shape
    target = Path(path)
    with target.open("wb") as handle:
        handle.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        handle.write(pixels.tobytes())
    LOGGER.debug("Wrote %dx%d SSIM map to %s", width, height, target)
    return target
