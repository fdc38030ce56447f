"""CSV tables and SVG line plots for a :class:`RateReport`."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import pandas as pd

from fdpq_lab.errors import ReportError
from fdpq_lab.experiments.pipeline import RateReport, RateRow

LOGGER = logging.getLogger(__name__)

REPORT_FORMATS: tuple[str, ...] = ("csv", "svg")

RATE_COLUMNS: tuple[str, ...] = (
    "clip",
    "chroma_format",
    "bit_depth",
    "tb_size",
    "quantiser",
    "qp",
    "deadzone_mode",
    "frames",
    "bits",
    "bits_per_frame",
    "nonzero_levels",
    "psnr_y",
    "psnr_cb",
    "psnr_cr",
    "psnr_ycbcr",
    "ssim_y",
    "ssim_cb",
    "ssim_cr",
    "ssim_ycbcr",
)
TIMING_COLUMNS: tuple[str, ...] = ("clip", "quantiser", "qp", "encode_seconds", "decode_seconds")
COMPARISON_COLUMNS: tuple[str, ...] = (
    "clip",
    "quantiser",
    "reference",
    "qp_count",
    "bits_delta_percent",
    "psnr_delta_db",
    "ssim_delta",
    "max_psnr_drop_db",
    "psnr_drop_flagged",
)

# (series key, x axis, y axis) of every plotted panel
PLOT_METRICS: tuple[tuple[str, str, str], ...] = (
    ("bits", "qp", "bits_per_frame"),
    ("psnr", "bits_per_frame", "psnr_ycbcr"),
    ("ssim", "bits_per_frame", "ssim_ycbcr"),
)
SERIES_COLOURS = {"urq": "#1f77b4", "rdoq": "#ff7f0e", "fdpq": "#2ca02c"}

_PANEL_WIDTH = 320
_PANEL_HEIGHT = 220
_MARGIN = 40


def _flat_row(row: RateRow) -> dict[str, object]:
    values: dict[str, object] = {
        "clip": row.clip,
        "chroma_format": row.chroma_format,
        "bit_depth": row.bit_depth,
        "tb_size": row.tb_size,
        "quantiser": row.quantiser,
        "qp": row.qp,
        "deadzone_mode": row.deadzone_mode,
        "frames": row.frames,
        "bits": row.bits,
        "bits_per_frame": row.bits_per_frame,
        "nonzero_levels": row.nonzero_levels,
        "encode_seconds": row.encode_seconds,
        "decode_seconds": row.decode_seconds,
    }
    values.update(row.quality.as_row())
    return values


def rate_frame(report: RateReport) -> pd.DataFrame:
    """Data rows with the documented column order."""

    return pd.DataFrame([_flat_row(row) for row in report.rows], columns=list(RATE_COLUMNS))


def timing_frame(report: RateReport) -> pd.DataFrame:
    return pd.DataFrame([_flat_row(row) for row in report.rows], columns=list(TIMING_COLUMNS))


def comparison_frame(report: RateReport) -> pd.DataFrame:
    rows = [vars(comparison) for comparison in report.comparisons]
    return pd.DataFrame(rows, columns=list(COMPARISON_COLUMNS))


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    return path


def _scale(values: Sequence[float], low_px: float, high_px: float) -> list[float]:
    finite = [value for value in values if math.isfinite(value)]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    span = hi - lo or 1.0
    return [low_px + (min(max(value, lo), hi) - lo) / span * (high_px - low_px) if math.isfinite(value) else high_px for value in values]


def _panel(rows: list[RateRow], clip: str, metric: str, x_key: str, y_key: str, x0: int, y0: int) -> list[str]:
    flat = [_flat_row(row) for row in rows]
    xs_all = [float(item[x_key]) for item in flat]  # type: ignore[arg-type]
    ys_all = [float(item[y_key]) for item in flat]  # type: ignore[arg-type]
    left, right = x0 + _MARGIN, x0 + _PANEL_WIDTH - 10
    top, bottom = y0 + 20, y0 + _PANEL_HEIGHT - _MARGIN
    xs_px = _scale(xs_all, left, right)
    ys_px = _scale(ys_all, bottom, top)
    parts = [
        f'<g class="panel" data-clip="{escape(clip)}" data-metric="{metric}">',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="#999"/>',
        f'<text x="{x0 + _PANEL_WIDTH // 2}" y="{y0 + 14}" text-anchor="middle" font-size="12">'
        f"{escape(clip)}: {y_key} vs {x_key}</text>",
    ]
    quantisers: list[str] = []
    for row in rows:
        if row.quantiser not in quantisers:
            quantisers.append(row.quantiser)
    for quantiser in quantisers:
        points = sorted(
            (xs_px[index], ys_px[index], xs_all[index])
            for index, row in enumerate(rows)
            if row.quantiser == quantiser
        )
        coordinates = " ".join(f"{x:.2f},{y:.2f}" for x, y, _ in points)
        colour = SERIES_COLOURS.get(quantiser, "#333333")
        parts.append(
            f'<polyline class="series" data-clip="{escape(clip)}" data-quantiser="{escape(quantiser)}" '
            f'data-metric="{metric}" fill="none" stroke="{colour}" stroke-width="1.5" points="{coordinates}"/>'
        )
    parts.append("</g>")
    return parts


def render_svg(report: RateReport) -> str:
    """One panel per (clip, metric); one polyline per (clip, quantiser, metric) series."""

    clips: list[str] = []
    for row in report.rows:
        if row.clip not in clips:
            clips.append(row.clip)
    width = _PANEL_WIDTH * len(PLOT_METRICS)
    height = _PANEL_HEIGHT * len(clips) + 30
    body: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for clip_index, clip in enumerate(clips):
        clip_rows = [row for row in report.rows if row.clip == clip]
        for metric_index, (metric, x_key, y_key) in enumerate(PLOT_METRICS):
            body.extend(
                _panel(clip_rows, clip, metric, x_key, y_key, metric_index * _PANEL_WIDTH, clip_index * _PANEL_HEIGHT)
            )
    legend_y = height - 10
    for index, (quantiser, colour) in enumerate(SERIES_COLOURS.items()):
        body.append(
            f'<text x="{10 + index * 80}" y="{legend_y}" fill="{colour}" font-size="12">{quantiser}</text>'
        )
    body.append("</svg>")
    return "\n".join(body) + "\n"


def emit_report(
    report: RateReport,
    output_dir: str | Path,
    formats: Iterable[str] = REPORT_FORMATS,
) -> list[Path]:
    """Write the report under ``output_dir`` and return the written paths.

    CSV output is ``rate_report.csv`` (data rows), ``comparisons.csv``,
    ``timings.csv`` (wall times, kept apart so the other tables are
    reproducible byte for byte) and ``metadata.json``. SVG output is
    ``rate_quality.svg``.
    """

    requested = [fmt.lower() for fmt in formats]
    unknown = sorted(set(requested) - set(REPORT_FORMATS))
    if unknown:
        raise ReportError(f"Unsupported report format(s): {', '.join(unknown)}")
    if not report.rows:
        raise ReportError("Refusing to emit an empty report")

    target = Path(output_dir)
    written: list[Path] = []
    try:
        target.mkdir(parents=True, exist_ok=True)
        if "csv" in requested:
            written.append(_write_csv(rate_frame(report), target / "rate_report.csv"))
            written.append(_write_csv(comparison_frame(report), target / "comparisons.csv"))
            written.append(_write_csv(timing_frame(report), target / "timings.csv"))
            if report.metadata is not None:
                metadata_path = target / "metadata.json"
                metadata_path.write_text(report.metadata.model_dump_json(indent=2) + "\n", encoding="utf-8")
                written.append(metadata_path)
        if "svg" in requested:
            svg_path = target / "rate_quality.svg"
            svg_path.write_text(render_svg(report), encoding="utf-8")
            written.append(svg_path)
    except OSError as exc:
        raise ReportError(f"Cannot write report to {target}: {exc}") from exc
    LOGGER.info("Wrote %d report file(s) to %s", len(written), target)
    return written
