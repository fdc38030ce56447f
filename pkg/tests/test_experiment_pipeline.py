"""Tests for the experiment orchestration."""

from __future__ import annotations

import logging
import math
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import pytest

from fdpq_lab.config import LabSettings, SyntheticClipSettings, build_experiment_config
from fdpq_lab.errors import CodecIntegrityError
from fdpq_lab.experiments import pipeline
from fdpq_lab.experiments.pipeline import ExperimentError, RateRow, compare_rows, log_quality_drops, run_experiment
from fdpq_lab.experiments.report import emit_report
from fdpq_lab.media import Frame, Plane
from fdpq_lab.metrics.quality import QualityRecord


def _config(tmp_path: Path, **values):
    defaults = {
        "synthetic": SyntheticClipSettings(patterns=["gradient"], width=32, height=32, frames=1),
        "qp_list": [22],
        "quantisers": ["fdpq"],
        "output_dir": tmp_path,
    }
    defaults.update(values)
    return build_experiment_config(LabSettings(), **defaults)


def _quality(psnr: float, ssim: float) -> QualityRecord:
    return QualityRecord(psnr_y=psnr, psnr_cb=psnr, psnr_cr=psnr, ssim_y=ssim, ssim_cb=ssim, ssim_cr=ssim)


def _row(quantiser: str, qp: int, bits: int, psnr: float, ssim: float, clip: str = "clip") -> RateRow:
    return RateRow(
        clip=clip,
        chroma_format="4:2:0",
        bit_depth=8,
        tb_size=8,
        quantiser=quantiser,
        qp=qp,
        deadzone_mode="intra_third",
        frames=1,
        bits=bits,
        nonzero_levels=0,
        quality=_quality(psnr, ssim),
    )


def test_single_job_run(tmp_path: Path) -> None:
    config = _config(tmp_path)
    progress: list[tuple[int, int, str]] = []
    run = run_experiment(config, progress_callback=lambda done, total, label: progress.append((done, total, label)))
    assert run
    assert len(run.report) == 1
    row = run.report.rows[0]
    assert (row.clip, row.quantiser, row.qp, row.frames) == ("gradient", "fdpq", 22, 1)
    assert row.bits == 8 * len(run.results[0].bitstream)
    assert progress == [(1, 1, "gradient/fdpq/qp22")]
    bitstream_path = tmp_path / "bitstreams" / "gradient_fdpq_qp22.fdpq"
    assert bitstream_path.read_bytes() == run.results[0].bitstream
    assert run.artifacts == [bitstream_path]
    assert run.report.comparisons == []


def test_two_quantisers_five_qps(tmp_path: Path) -> None:
    config = _config(tmp_path, quantisers=["rdoq", "fdpq"], qp_list=[17, 22, 27, 32, 37], write_bitstreams=False)
    run = run_experiment(config)
    assert len(run.report) == 10
    assert [row.quantiser for row in run.report.rows[:5]] == ["rdoq"] * 5
    assert [row.qp for row in run.report.rows[5:]] == [17, 22, 27, 32, 37]
    comparisons = run.report.comparisons
    assert len(comparisons) == 1
    assert (comparisons[0].quantiser, comparisons[0].reference, comparisons[0].qp_count) == ("fdpq", "rdoq", 5)
    assert run.artifacts == []
    assert not (tmp_path / "bitstreams").exists()


def test_reconstructions_are_written_on_request(tmp_path: Path) -> None:
    config = _config(tmp_path, write_reconstructions=True)
    run = run_experiment(config)
    recon = tmp_path / "reconstructions" / "gradient_fdpq_qp22.yuv"
    assert recon in run.artifacts
    assert recon.stat().st_size == 32 * 32 * 3 // 2


def test_runs_are_reproducible(tmp_path: Path) -> None:
    outputs = []
    for name in ("first", "second"):
        config = _config(tmp_path / name, quantisers=["urq", "fdpq"], qp_list=[22, 32])
        run = run_experiment(config)
        emit_report(run.report, config.output_dir, ["csv"])
        outputs.append(config.output_dir)
    for file_name in ("rate_report.csv", "comparisons.csv"):
        assert (outputs[0] / file_name).read_bytes() == (outputs[1] / file_name).read_bytes()
    first_streams = sorted(path.name for path in (outputs[0] / "bitstreams").iterdir())
    assert first_streams
    for name in first_streams:
        assert (outputs[0] / "bitstreams" / name).read_bytes() == (outputs[1] / "bitstreams" / name).read_bytes()


def test_worker_pool_keeps_row_order(tmp_path: Path) -> None:
    serial = run_experiment(_config(tmp_path / "serial", quantisers=["urq", "rdoq"], qp_list=[22, 37]))
    parallel = run_experiment(_config(tmp_path / "parallel", quantisers=["urq", "rdoq"], qp_list=[22, 37], workers=2))

    def _key(row: RateRow):
        return (row.clip, row.quantiser, row.qp, row.bits, row.nonzero_levels, row.quality)

    assert [_key(row) for row in parallel.report.rows] == [_key(row) for row in serial.report.rows]


def test_compare_rows_averages_per_qp_deltas() -> None:
    rows = [
        _row("rdoq", 22, 1000, 40.0, 0.95),
        _row("rdoq", 27, 500, 36.0, 0.90),
        _row("fdpq", 22, 900, 39.0, 0.94),
        _row("fdpq", 27, 400, 35.0, 0.88),
        _row("urq", 22, 1200, 40.5, 0.96),
    ]
    comparisons = {(c.quantiser, c.reference): c for c in compare_rows(rows)}
    fdpq_rdoq = comparisons[("fdpq", "rdoq")]
    assert fdpq_rdoq.qp_count == 2
    assert fdpq_rdoq.bits_delta_percent == pytest.approx((-10.0 + -20.0) / 2)
    assert fdpq_rdoq.psnr_delta_db == pytest.approx(-1.0)
    assert fdpq_rdoq.ssim_delta == pytest.approx(-0.015)
    assert comparisons[("fdpq", "urq")].qp_count == 1
    assert comparisons[("fdpq", "urq")].bits_delta_percent == pytest.approx(-25.0)
    assert comparisons[("rdoq", "urq")].psnr_delta_db == pytest.approx(-0.5)


def test_compare_rows_skips_infinite_psnr() -> None:
    rows = [
        _row("rdoq", 22, 1000, math.inf, 1.0),
        _row("fdpq", 22, 800, math.inf, 1.0),
        _row("rdoq", 27, 500, 36.0, 0.9),
        _row("fdpq", 27, 400, 35.0, 0.9),
    ]
    (comparison,) = compare_rows(rows)
    assert comparison.psnr_delta_db == pytest.approx(-1.0)
    assert comparison.max_psnr_drop_db == pytest.approx(1.0)
    assert not comparison.psnr_drop_flagged


def test_compare_rows_flags_large_psnr_drops() -> None:
    rows = [
        _row("rdoq", 17, 3000, 45.0, 0.99),
        _row("rdoq", 22, 2000, 41.0, 0.97),
        _row("rdoq", 27, 1000, 37.0, 0.93),
        _row("fdpq", 17, 2000, 38.5, 0.96),
        _row("fdpq", 22, 1500, 36.0, 0.95),
        _row("fdpq", 27, 900, 36.5, 0.92),
    ]
    (comparison,) = compare_rows(rows)
    assert comparison.max_psnr_drop_db == pytest.approx(6.5)
    assert comparison.psnr_drop_flagged
    # exactly the limit is not a drop beyond it
    assert comparison.flagged_qps == [17]


def test_quality_drop_warning(caplog) -> None:
    rows = [_row("rdoq", 22, 1000, 44.0, 0.98), _row("fdpq", 22, 700, 30.0, 0.9), _row("urq", 22, 1100, 44.5, 0.98)]
    with caplog.at_level(logging.WARNING, logger="fdpq_lab.experiments.pipeline"):
        flagged = log_quality_drops(compare_rows(rows))
    assert [(c.quantiser, c.reference) for c in flagged] == [("fdpq", "rdoq"), ("fdpq", "urq")]
    messages = [record.getMessage() for record in caplog.records]
    assert len(messages) == 2
    assert "fdpq loses up to 14.00 dB YCbCr PSNR against rdoq" in messages[0]
    assert "QP 22" in messages[0]


def _corrupting_decoder(real_decode):
    def _decode(data: bytes):
        config, sequence = real_decode(data)
        frame = sequence.frames[0]
        samples = frame.y.samples.copy()
        samples[0, 0] ^= 1
        sequence.frames[0] = Frame(Plane(samples, frame.y.bit_depth), frame.cb, frame.cr)
        return config, sequence

    return _decode


def test_integrity_failure_raises(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(pipeline, "decode_sequence", _corrupting_decoder(pipeline.decode_sequence))
    with pytest.raises(ExperimentError) as excinfo:
        run_experiment(_config(tmp_path))
    assert isinstance(excinfo.value.original, CodecIntegrityError)
    assert excinfo.value.code == "integrity"
    assert excinfo.value.entity == "gradient/fdpq/qp22"


def test_integrity_failure_can_return_partial_run(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(pipeline, "decode_sequence", _corrupting_decoder(pipeline.decode_sequence))
    run = run_experiment(_config(tmp_path, qp_list=[22, 27]), raise_on_error=False)
    assert not run
    assert run.failed_job == "gradient/fdpq/qp22"
    assert "differs" in (run.error_message or "")
    assert len(run.report) == 0
