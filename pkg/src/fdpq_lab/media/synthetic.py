"""Deterministic synthetic clips so experiments run without external footage."""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from scipy import ndimage

from fdpq_lab.errors import ConfigurationError
from fdpq_lab.media.raw_io import ChromaFormat, Frame, FrameSequence, Plane, chroma_dimensions

LOGGER = logging.getLogger(__name__)

# Each pattern maps (width, height, frame_index, rng) to a float field in [0, 1].
PatternFn = Callable[[int, int, int, np.random.Generator], np.ndarray]


def _grid(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:height, 0:width]
    return xs.astype(np.float64), ys.astype(np.float64)


def _gradient(width: int, height: int, frame_index: int, rng: np.random.Generator) -> np.ndarray:
    xs, ys = _grid(width, height)
    shift = 2.0 * frame_index
    field = 0.15 + 0.7 * ((xs + shift) / max(width, 1) * 0.6 + ys / max(height, 1) * 0.4)
    return field


def _band_noise(width: int, height: int, frame_index: int, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal((height, width))
    low = ndimage.gaussian_filter(noise, sigma=3.0, mode="wrap")
    high = ndimage.gaussian_filter(noise, sigma=0.8, mode="wrap")
    band = high - low
    band /= max(float(np.abs(band).max()), 1e-9)
    return 0.5 + 0.3 * band


def _texture(width: int, height: int, frame_index: int, rng: np.random.Generator) -> np.ndarray:
    xs, ys = _grid(width, height)
    phase = 0.7 * frame_index
    gratings = (
        np.sin(xs * 1.9 + phase) * np.cos(ys * 2.3)
        + 0.6 * np.sin((xs + ys) * 0.9 + phase)
        + 0.5 * np.sign(np.sin(xs * 0.7) * np.sin(ys * 0.55))
    )
    gratings /= max(float(np.abs(gratings).max()), 1e-9)
    grain = rng.uniform(-1.0, 1.0, size=(height, width))
    return 0.5 + 0.32 * gratings + 0.12 * grain


def _moving_edge(width: int, height: int, frame_index: int, rng: np.random.Generator) -> np.ndarray:
    xs, ys = _grid(width, height)
    position = width * 0.3 + 3.0 * frame_index
    edge = np.where(xs + 0.25 * ys < position, 0.2, 0.8)
    return ndimage.gaussian_filter(edge, sigma=0.6) + 0.02 * rng.standard_normal((height, width))


PATTERNS: dict[str, PatternFn] = {
    "gradient": _gradient,
    "band_noise": _band_noise,
    "texture": _texture,
    "moving_edge": _moving_edge,
}

DEFAULT_SUITE: tuple[str, ...] = ("gradient", "band_noise", "texture", "moving_edge")


def _quantise_field(field: np.ndarray, bit_depth: int) -> np.ndarray:
    max_value = (1 << bit_depth) - 1
    return np.clip(np.rint(field * max_value), 0, max_value).astype(np.uint16)


def synthetic_clip(
    pattern: str,
    *,
    width: int = 64,
    height: int = 64,
    frames: int = 2,
    bit_depth: int = 8,
    chroma_format: ChromaFormat | str = ChromaFormat.YUV420,
    seed: int = 0,
) -> FrameSequence:
    """Render ``frames`` frames of a named pattern; identical arguments give identical samples."""

    try:
        pattern_fn = PATTERNS[pattern]
    except KeyError as exc:
        raise ConfigurationError(
            f"Unknown synthetic pattern '{pattern}'. Supported values: {', '.join(sorted(PATTERNS))}"
        ) from exc
    chroma_format = ChromaFormat.parse(chroma_format)
    chroma_w, chroma_h = chroma_dimensions(width, height, chroma_format)
    rng = np.random.default_rng(seed)
    sequence_frames: list[Frame] = []
    for index in range(frames):
        luma = _quantise_field(pattern_fn(width, height, index, rng), bit_depth)
        # chroma is a damped version of the pattern at chroma resolution
        cb_field = 0.5 + 0.5 * (pattern_fn(chroma_w, chroma_h, index, rng) - 0.5)
        cr_field = 0.5 - 0.35 * (pattern_fn(chroma_w, chroma_h, index + 1, rng) - 0.5)
        sequence_frames.append(
            Frame(
                Plane(luma, bit_depth),
                Plane(_quantise_field(cb_field, bit_depth), bit_depth),
                Plane(_quantise_field(cr_field, bit_depth), bit_depth),
            )
        )
    LOGGER.debug("Rendered synthetic '%s' clip %dx%d x%d (%s, %d-bit)", pattern, width, height, frames, chroma_format.value, bit_depth)
    return FrameSequence(width, height, bit_depth, chroma_format, sequence_frames)


def synthetic_suite(
    *,
    width: int = 64,
    height: int = 64,
    frames: int = 2,
    bit_depth: int = 8,
    chroma_format: ChromaFormat | str = ChromaFormat.YUV420,
    patterns: tuple[str, ...] = DEFAULT_SUITE,
) -> dict[str, FrameSequence]:
    """Render every pattern of the suite with a per-pattern seed."""

    return {
        name: synthetic_clip(
            name,
            width=width,
            height=height,
            frames=frames,
            bit_depth=bit_depth,
            chroma_format=chroma_format,
            seed=seed,
        )
        for seed, name in enumerate(patterns)
    }
