"""Tests for PSNR, SSIM and the SSIM map export."""

from __future__ import annotations

import math
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import numpy as np
import pytest

from fdpq_lab.errors import MediaFormatError
from fdpq_lab.media import FrameSequence, Plane, synthetic_clip
from fdpq_lab.metrics import psnr, quality_record, sequence_quality, ssim, ssim_map_to_pgm


def _noise(seed: int = 0, size: int = 32, bit_depth: int = 8) -> Plane:
    rng = np.random.default_rng(seed)
    return Plane(rng.integers(0, 1 << bit_depth, size=(size, size)).astype(np.uint16), bit_depth)


def test_psnr_identical_planes_is_infinite() -> None:
    plane = _noise()
    assert psnr(plane, plane) == math.inf


def test_psnr_full_scale_error_is_zero_db() -> None:
    assert psnr(Plane.filled(16, 16, 8, 0), Plane.filled(16, 16, 8, 255)) == pytest.approx(0.0)
    assert psnr(Plane.filled(16, 16, 10, 0), Plane.filled(16, 16, 10, 1023)) == pytest.approx(0.0)


def test_psnr_constant_offset() -> None:
    value = psnr(Plane.filled(16, 16, 8, 100), Plane.filled(16, 16, 8, 110))
    assert value == pytest.approx(28.13, abs=0.01)


def test_psnr_rejects_mismatched_planes() -> None:
    with pytest.raises(MediaFormatError):
        psnr(Plane.filled(16, 16, 8, 0), Plane.filled(16, 8, 8, 0))
    with pytest.raises(MediaFormatError):
        psnr(Plane.filled(16, 16, 8, 0), Plane.filled(16, 16, 10, 0))


def test_ssim_identical_planes_is_one() -> None:
    plane = _noise(3)
    assert ssim(plane, plane) == pytest.approx(1.0)


def test_ssim_of_inverted_noise_is_negative() -> None:
    ref = _noise(4)
    inverted = Plane((255 - ref.samples.astype(np.int64)).astype(np.uint16), 8)
    assert ssim(ref, inverted) < 0.0


def test_ssim_small_offset_stays_close_to_one() -> None:
    clip = synthetic_clip("texture", width=32, height=32, frames=1)
    ref = clip.frames[0].y
    shifted = Plane(np.clip(ref.samples.astype(np.int64) + 1, 0, 255).astype(np.uint16), 8)
    value = ssim(ref, shifted)
    assert 0.99 < value < 1.0


def test_ssim_is_symmetric() -> None:
    a, b = _noise(5), _noise(6)
    assert ssim(a, b) == pytest.approx(ssim(b, a))


def test_ssim_map_shape() -> None:
    value, index_map = ssim(_noise(7, size=20), _noise(8, size=20), return_map=True)
    assert index_map.shape == (10, 10)
    assert value == pytest.approx(float(index_map.mean()))


def test_ssim_rejects_planes_smaller_than_window() -> None:
    with pytest.raises(MediaFormatError):
        ssim(Plane.filled(10, 32, 8, 1), Plane.filled(10, 32, 8, 1))


def test_ssim_map_to_pgm(tmp_path: Path) -> None:
    index_map = np.array([[1.0, 0.5], [0.0, -0.3], [0.25, 0.75]])
    target = ssim_map_to_pgm(index_map, tmp_path / "map.pgm")
    data = target.read_bytes()
    header = b"P5\n2 3\n255\n"
    assert data.startswith(header)
    assert list(data[len(header) :]) == [255, 128, 0, 0, 64, 191]


def test_quality_record_averages_channels() -> None:
    clip = synthetic_clip("gradient", width=32, height=32, frames=1)
    record = quality_record(clip.frames[0], clip.frames[0])
    assert record.ssim_ycbcr == pytest.approx(1.0)
    assert record.psnr_ycbcr == math.inf
    row = record.as_row()
    assert set(row) >= {"psnr_y", "psnr_cb", "psnr_cr", "ssim_y", "ssim_cb", "ssim_cr", "psnr_ycbcr", "ssim_ycbcr"}


def test_sequence_quality_averages_frames() -> None:
    ref = synthetic_clip("band_noise", width=32, height=32, frames=2, chroma_format="4:4:4")
    test = synthetic_clip("band_noise", width=32, height=32, frames=2, chroma_format="4:4:4", seed=1)
    per_frame = [quality_record(a, b) for a, b in zip(ref.frames, test.frames)]
    record = sequence_quality(ref, test)
    assert record.psnr_y == pytest.approx((per_frame[0].psnr_y + per_frame[1].psnr_y) / 2)
    assert record.ssim_cr == pytest.approx((per_frame[0].ssim_cr + per_frame[1].ssim_cr) / 2)


def test_sequence_quality_rejects_count_mismatch() -> None:
    ref = synthetic_clip("gradient", width=32, height=32, frames=2)
    short = FrameSequence(32, 32, 8, ref.chroma_format, ref.frames[:1])
    with pytest.raises(MediaFormatError):
        sequence_quality(ref, short)
    with pytest.raises(MediaFormatError):
        sequence_quality(FrameSequence(32, 32, 8, "4:2:0"), FrameSequence(32, 32, 8, "4:2:0"))
