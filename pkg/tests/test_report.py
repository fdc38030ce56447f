"""Tests for CSV and SVG report emission."""

from __future__ import annotations

import json
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import pandas as pd
import pytest

from fdpq_lab.config import LabSettings, SyntheticClipSettings, build_experiment_config
from fdpq_lab.errors import ReportError
from fdpq_lab.experiments.pipeline import RateReport, run_experiment
from fdpq_lab.experiments.report import COMPARISON_COLUMNS, RATE_COLUMNS, emit_report, render_svg


@pytest.fixture(scope="module")
def report(tmp_path_factory) -> RateReport:
    output_dir = tmp_path_factory.mktemp("sweep")
    config = build_experiment_config(
        LabSettings(),
        synthetic=SyntheticClipSettings(patterns=["gradient", "texture"], width=32, height=32, frames=1),
        qp_list=[22, 27, 32, 37, 42],
        quantisers=["rdoq", "fdpq"],
        output_dir=output_dir,
        write_bitstreams=False,
    )
    return run_experiment(config).report


def test_empty_report_writes_nothing(tmp_path: Path) -> None:
    target = tmp_path / "out"
    with pytest.raises(ReportError):
        emit_report(RateReport(), target)
    assert not target.exists()


def test_unknown_format_is_rejected(tmp_path: Path, report: RateReport) -> None:
    with pytest.raises(ReportError):
        emit_report(report, tmp_path, ["pdf"])


def test_csv_tables(tmp_path: Path, report: RateReport) -> None:
    written = emit_report(report, tmp_path, ["csv"])
    assert [path.name for path in written] == ["rate_report.csv", "comparisons.csv", "timings.csv", "metadata.json"]

    lines = (tmp_path / "rate_report.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == list(RATE_COLUMNS)
    assert len(lines) == 1 + 20

    frame = pd.read_csv(tmp_path / "rate_report.csv")
    first_clip = frame[frame["clip"] == "gradient"]
    assert len(first_clip) == 10
    assert list(first_clip["quantiser"].iloc[:5]) == ["rdoq"] * 5

    comparisons = pd.read_csv(tmp_path / "comparisons.csv")
    assert list(comparisons.columns) == list(COMPARISON_COLUMNS)
    assert list(comparisons["clip"]) == ["gradient", "texture"]

    metadata = json.loads((tmp_path / "metadata.json").read_text(encoding="utf-8"))
    assert metadata["qp_list"] == [22, 27, 32, 37, 42]
    assert metadata["quantisers"] == ["rdoq", "fdpq"]


def test_svg_has_one_polyline_per_series(tmp_path: Path, report: RateReport) -> None:
    (svg_path,) = emit_report(report, tmp_path, ["svg"])
    text = svg_path.read_text(encoding="utf-8")
    assert text.startswith("<svg")
    assert text.count('<polyline class="series"') == 2 * 2 * 3
    assert 'data-clip="texture" data-quantiser="fdpq" data-metric="psnr"' in text
    assert text == render_svg(report)
