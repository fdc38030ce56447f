"""Orchestration of quantiser x QP sweeps over a set of clips."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

from pydantic import BaseModel

from fdpq_lab import __version__
from fdpq_lab.coding.codec import CodecConfig, decode_sequence, encode_sequence
from fdpq_lab.config import ExperimentConfig
from fdpq_lab.errors import CodecIntegrityError, LabError
from fdpq_lab.media.raw_io import FrameSequence, load_descriptor, write_raw
from fdpq_lab.media.synthetic import synthetic_clip
from fdpq_lab.metrics.quality import SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW, QualityRecord, sequence_quality
from fdpq_lab.quantisation import Quantiser
from fdpq_lab.quantisation.rdoq import BIT_MODEL_EXP_GOLOMB

LOGGER = logging.getLogger(__name__)

JobProgressCallback = Callable[[int, int, str], None]

# Ordered (quantiser, reference) pairs reported as comparisons; fdpq-vs-rdoq leads.
COMPARISON_PAIRS: tuple[tuple[Quantiser, Quantiser], ...] = (
    (Quantiser.FDPQ, Quantiser.RDOQ),
    (Quantiser.FDPQ, Quantiser.URQ),
    (Quantiser.RDOQ, Quantiser.URQ),
)

# A shared QP whose YCbCr PSNR falls this far below the reference is flagged.
PSNR_DROP_LIMIT_DB = 5.0


class ExperimentError(LabError):
    """Raised when a sweep fails on a specific job; keeps the category of the underlying error."""

    def __init__(self, entity: str, original: Exception) -> None:
        code = original.code if isinstance(original, LabError) else "lab"
        super().__init__(f"Experiment job '{entity}' failed: {original}", code=code)
        self.entity = entity
        self.original = original


@dataclass(frozen=True)
class ExperimentJob:
    clip: str
    sequence: FrameSequence
    codec: CodecConfig

    @property
    def label(self) -> str:
        return f"{self.clip}/{self.codec.quantiser.value}/qp{self.codec.qp}"


@dataclass
class RateRow:
    """One operating point: a clip coded with one quantiser at one QP."""

    clip: str
    chroma_format: str
    bit_depth: int
    tb_size: int
    quantiser: str
    qp: int
    deadzone_mode: str
    frames: int
    bits: int
    nonzero_levels: int
    quality: QualityRecord
    encode_seconds: float = 0.0
    decode_seconds: float = 0.0

    @property
    def bits_per_frame(self) -> float:
        return self.bits / self.frames if self.frames else 0.0


@dataclass
class ComparisonRow:
    """Bit and quality deltas of ``quantiser`` against ``reference``, averaged over shared QPs."""

    clip: str
    quantiser: str
    reference: str
    qp_count: int
    bits_delta_percent: float
    psnr_delta_db: float
    ssim_delta: float
    max_psnr_drop_db: float = math.nan
    psnr_drop_flagged: bool = False
    flagged_qps: list[int] = field(default_factory=list)


class ReportMetadata(BaseModel):
    """Settings needed to interpret a report's numbers."""

    tool_version: str = __version__
    tb_size: int
    qp_list: list[int]
    quantisers: list[str]
    deadzone_mode: str
    scan_kind: str
    rdoq_lambda: str = "0.57*2^((QP-12)/3) scaled by 2^(2*(15-B-log2N))"
    rdoq_bit_model: str = BIT_MODEL_EXP_GOLOMB
    ssim: str = f"gaussian {SSIM_WINDOW}x{SSIM_WINDOW} sigma={SSIM_SIGMA} K1={SSIM_K1} K2={SSIM_K2}"
    bitrate_unit: str = "bits per frame"

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "ReportMetadata":
        return cls(
            tb_size=config.tb_size,
            qp_list=list(config.qp_list),
            quantisers=[quantiser.value for quantiser in config.quantisers],
            deadzone_mode=config.deadzone_mode.value,
            scan_kind=config.scan_kind.value,
        )


def _mean_delta(values: list[float]) -> float:
    finite = [value for value in values if math.isfinite(value)]
    return sum(finite) / len(finite) if finite else math.nan


def compare_rows(rows: Iterable[RateRow]) -> list[ComparisonRow]:
    """Derive comparison rows from data rows; pairs missing either quantiser are skipped."""

    indexed: dict[tuple[str, str, int], RateRow] = {}
    clips: list[str] = []
    for row in rows:
        indexed[(row.clip, row.quantiser, row.qp)] = row
        if row.clip not in clips:
            clips.append(row.clip)

    comparisons: list[ComparisonRow] = []
    for clip in clips:
        for quantiser, reference in COMPARISON_PAIRS:
            shared = sorted(
                qp
                for (row_clip, row_quantiser, qp) in indexed
                if row_clip == clip
                and row_quantiser == quantiser.value
                and (clip, reference.value, qp) in indexed
            )
            if not shared:
                continue
            bit_deltas: list[float] = []
            psnr_deltas: list[float] = []
            ssim_deltas: list[float] = []
            flagged_qps: list[int] = []
            for qp in shared:
                candidate = indexed[(clip, quantiser.value, qp)]
                baseline = indexed[(clip, reference.value, qp)]
                bit_deltas.append(100.0 * (candidate.bits - baseline.bits) / baseline.bits)
                psnr_delta = candidate.quality.psnr_ycbcr - baseline.quality.psnr_ycbcr
                psnr_deltas.append(psnr_delta)
                ssim_deltas.append(candidate.quality.ssim_ycbcr - baseline.quality.ssim_ycbcr)
                if math.isfinite(psnr_delta) and -psnr_delta > PSNR_DROP_LIMIT_DB:
                    flagged_qps.append(qp)
            finite_drops = [-delta for delta in psnr_deltas if math.isfinite(delta)]
            comparisons.append(
                ComparisonRow(
                    clip=clip,
                    quantiser=quantiser.value,
                    reference=reference.value,
                    qp_count=len(shared),
                    bits_delta_percent=sum(bit_deltas) / len(bit_deltas),
                    psnr_delta_db=_mean_delta(psnr_deltas),
                    ssim_delta=_mean_delta(ssim_deltas),
                    max_psnr_drop_db=max(finite_drops) if finite_drops else math.nan,
                    psnr_drop_flagged=bool(flagged_qps),
                    flagged_qps=flagged_qps,
                )
            )
    return comparisons


def log_quality_drops(comparisons: Iterable[ComparisonRow]) -> list[ComparisonRow]:
    """Warn once per flagged comparison and return the flagged rows."""

    flagged = [comparison for comparison in comparisons if comparison.psnr_drop_flagged]
    for comparison in flagged:
        LOGGER.warning(
            "%s: %s loses up to %.2f dB YCbCr PSNR against %s (more than %.1f dB at QP %s)",
            comparison.clip,
            comparison.quantiser,
            comparison.max_psnr_drop_db,
            comparison.reference,
            PSNR_DROP_LIMIT_DB,
            ",".join(str(qp) for qp in comparison.flagged_qps),
        )
    return flagged


@dataclass
class RateReport:
    """Data rows in config order; comparison rows are recomputed on every access."""

    rows: list[RateRow] = field(default_factory=list)
    metadata: Optional[ReportMetadata] = None

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def comparisons(self) -> list[ComparisonRow]:
        return compare_rows(self.rows)


@dataclass
class JobResult:
    job_label: str
    row: RateRow
    bitstream: bytes
    reconstruction: Optional[FrameSequence] = None


@dataclass
class ExperimentRun:
    """Outcome of :func:`run_experiment`, including the partial report when a job failed."""

    started_at: datetime
    completed_at: datetime
    succeeded: bool
    report: RateReport
    results: list[JobResult] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)
    failed_job: str | None = None
    error_message: str | None = None

    def __bool__(self) -> bool:
        return self.succeeded

    @property
    def total_duration_seconds(self) -> float:
        return (self.completed_at - self.started_at).total_seconds()


def load_clips(config: ExperimentConfig) -> list[tuple[str, FrameSequence]]:
    """Descriptor clips first, then synthetic patterns, each in config order."""

    clips: list[tuple[str, FrameSequence]] = []
    for descriptor in config.clips:
        clips.append((descriptor.name, load_descriptor(descriptor)))
    synthetic = config.synthetic
    for seed, pattern in enumerate(synthetic.patterns):
        clips.append(
            (
                pattern,
                synthetic_clip(
                    pattern,
                    width=synthetic.width,
                    height=synthetic.height,
                    frames=synthetic.frames,
                    bit_depth=synthetic.bit_depth,
                    chroma_format=synthetic.chroma_format,
                    seed=seed,
                ),
            )
        )
    return clips


def build_jobs(config: ExperimentConfig, clips: list[tuple[str, FrameSequence]]) -> list[ExperimentJob]:
    jobs: list[ExperimentJob] = []
    for clip_name, sequence in clips:
        for quantiser in config.quantisers:
            for qp in config.qp_list:
                codec = CodecConfig.for_sequence(
                    sequence,
                    tb_size=config.tb_size,
                    quantiser=quantiser,
                    qp=qp,
                    deadzone_mode=config.deadzone_mode,
                    scan_kind=config.scan_kind,
                )
                jobs.append(ExperimentJob(clip_name, sequence, codec))
    return jobs


def run_job(job: ExperimentJob, *, keep_reconstruction: bool = False) -> JobResult:
    """Encode, decode, check the closed loop and measure one operating point."""

    encode_started = time.perf_counter()
    encoded = encode_sequence(job.sequence, job.codec)
    data = encoded.to_bytes()
    encode_seconds = time.perf_counter() - encode_started

    decode_started = time.perf_counter()
    decoded_config, decoded = decode_sequence(data)
    decode_seconds = time.perf_counter() - decode_started

    if decoded_config != job.codec:
        raise CodecIntegrityError(f"{job.label}: decoded header does not reproduce the coding parameters")
    for index, (expected, actual) in enumerate(zip(encoded.reconstruction.frames, decoded.frames)):
        if expected != actual:
            raise CodecIntegrityError(f"{job.label}: frame {index} differs from the encoder reconstruction")
    if decoded.frame_count != encoded.reconstruction.frame_count:
        raise CodecIntegrityError(f"{job.label}: decoded {decoded.frame_count} frame(s), encoded {encoded.reconstruction.frame_count}")

    quality = sequence_quality(job.sequence, decoded)
    sequence = job.sequence
    row = RateRow(
        clip=job.clip,
        chroma_format=sequence.chroma_format.value,
        bit_depth=sequence.bit_depth,
        tb_size=job.codec.tb_size,
        quantiser=job.codec.quantiser.value,
        qp=job.codec.qp,
        deadzone_mode=job.codec.deadzone_mode.value,
        frames=sequence.frame_count,
        bits=8 * len(data),
        nonzero_levels=encoded.nonzero_levels,
        quality=quality,
        encode_seconds=encode_seconds,
        decode_seconds=decode_seconds,
    )
    LOGGER.debug(
        "%s: %d bits, %d nonzero levels, PSNR %.2f dB, SSIM %.4f",
        job.label,
        row.bits,
        row.nonzero_levels,
        quality.psnr_ycbcr,
        quality.ssim_ycbcr,
    )
    return JobResult(job.label, row, data, decoded if keep_reconstruction else None)


def _run_job_keeping(job: ExperimentJob) -> JobResult:
    return run_job(job, keep_reconstruction=True)


def _iterate_results(jobs: list[ExperimentJob], workers: int, keep_reconstruction: bool) -> Iterator[JobResult]:
    runner = _run_job_keeping if keep_reconstruction else run_job
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            yield runner(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as executor:
        # map yields in submission order, so the report order never depends on completion order
        yield from executor.map(runner, jobs)


def _artifact_stem(row: RateRow) -> str:
    return f"{row.clip}_{row.quantiser}_qp{row.qp:02d}"


def _write_artifacts(result: JobResult, config: ExperimentConfig) -> list[Path]:
    written: list[Path] = []
    stem = _artifact_stem(result.row)
    if config.write_bitstreams:
        bitstream_dir = config.output_dir / "bitstreams"
        bitstream_dir.mkdir(parents=True, exist_ok=True)
        path = bitstream_dir / f"{stem}.fdpq"
        path.write_bytes(result.bitstream)
        written.append(path)
    if config.write_reconstructions and result.reconstruction is not None:
        recon_dir = config.output_dir / "reconstructions"
        recon_dir.mkdir(parents=True, exist_ok=True)
        path = recon_dir / f"{stem}.yuv"
        write_raw(result.reconstruction, path)
        written.append(path)
    return written


def run_experiment(
    config: ExperimentConfig,
    *,
    progress_callback: Optional[JobProgressCallback] = None,
    raise_on_error: bool = True,
    clips: Optional[list[tuple[str, FrameSequence]]] = None,
) -> ExperimentRun:
    """Run every (clip, quantiser, QP) job of ``config``.

    Args:
        config: Validated experiment configuration.
        progress_callback: Optional callable receiving ``(completed_jobs, total_jobs, job_label)``.
        raise_on_error: When ``True`` a failing job raises :class:`ExperimentError`; otherwise the
            run stops and returns the partial report with the failure recorded.
        clips: Pre-loaded ``(name, sequence)`` pairs replacing the clips named by ``config``.

    Returns:
        :class:`ExperimentRun` whose report rows follow config order.
    """

    run_started_at = datetime.utcnow()
    loaded = clips if clips is not None else load_clips(config)
    jobs = build_jobs(config, loaded)
    report = RateReport(metadata=ReportMetadata.from_config(config))
    results: list[JobResult] = []
    artifacts: list[Path] = []
    failed_job: str | None = None
    failure: Exception | None = None

    LOGGER.info(
        "Starting experiment (clips=%d, quantisers=%s, qps=%s, tb_size=%d, workers=%d)",
        len(loaded),
        ",".join(quantiser.value for quantiser in config.quantisers),
        ",".join(str(qp) for qp in config.qp_list),
        config.tb_size,
        config.workers,
    )

    iterator = _iterate_results(jobs, config.workers, config.write_reconstructions)
    completed = 0
    while completed < len(jobs):
        job = jobs[completed]
        try:
            result = next(iterator)
            artifacts.extend(_write_artifacts(result, config))
        except Exception as exc:
            LOGGER.exception("Experiment job '%s' failed", job.label)
            failed_job = job.label
            failure = exc
            break
        results.append(result)
        report.rows.append(result.row)
        completed += 1
        if progress_callback:
            progress_callback(completed, len(jobs), job.label)
    if hasattr(iterator, "close"):
        iterator.close()

    run = ExperimentRun(
        started_at=run_started_at,
        completed_at=datetime.utcnow(),
        succeeded=failure is None,
        report=report,
        results=results,
        artifacts=artifacts,
        failed_job=failed_job,
        error_message=str(failure) if failure else None,
    )
    if failure is not None and raise_on_error:
        raise ExperimentError(failed_job or "unknown", failure) from failure
    if run.succeeded:
        LOGGER.info("Experiment completed %d job(s) in %.2f seconds", len(results), run.total_duration_seconds)
        log_quality_drops(report.comparisons)
    else:
        LOGGER.warning("Experiment stopped at '%s' after %.2f seconds", failed_job, run.total_duration_seconds)
    return run
