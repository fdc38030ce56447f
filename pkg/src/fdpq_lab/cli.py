"""Command-line interface: encode, decode, metrics, experiment and table dumps."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from tqdm import tqdm

from fdpq_lab import __version__
from fdpq_lab.coding.codec import CodecConfig, decode_sequence, encode_sequence
from fdpq_lab.coding.scan import ScanKind
from fdpq_lab.config import (
    ExperimentConfig,
    build_experiment_config,
    get_settings,
    load_experiment_config,
    override_experiment_config,
)
from fdpq_lab.errors import ConfigurationError, LabError, exit_code_for
from fdpq_lab.experiments.pipeline import run_experiment
from fdpq_lab.experiments.report import REPORT_FORMATS, emit_report
from fdpq_lab.experiments.tables import dump_tables, dump_weights
from fdpq_lab.media.raw_io import (
    SequenceDescriptor,
    descriptor_from_mapping,
    load_descriptor,
    read_sequence_descriptor,
    write_raw,
)
from fdpq_lab.media.synthetic import DEFAULT_SUITE, PATTERNS
from fdpq_lab.metrics.quality import CHANNEL_NAMES, psnr, sequence_quality, ssim, ssim_map_to_pgm
from fdpq_lab.quantisation import Quantiser
from fdpq_lab.quantisation.quant import DeadzoneMode

LOGGER = logging.getLogger(__name__)

USAGE_EXIT_CODE = 2


def _add_geometry(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("clip geometry")
    group.add_argument("--descriptor", type=Path, help="Sequence descriptor file (key = value).")
    group.add_argument("--width", type=int, help="Luma width in samples.")
    group.add_argument("--height", type=int, help="Luma height in samples.")
    group.add_argument("--bit-depth", type=int, choices=(8, 10), help="Bits per sample (default 8).")
    group.add_argument("--chroma-format", help="4:2:0, 4:2:2 or 4:4:4 (default 4:2:0).")
    group.add_argument("--frames", type=int, help="Number of frames to read (default: all).")


def _descriptor(args: argparse.Namespace, path: Optional[Path]) -> SequenceDescriptor:
    """Merge a descriptor file with explicit flags; flags win."""

    values: dict[str, str] = {}
    if args.descriptor is not None:
        descriptor = read_sequence_descriptor(args.descriptor)
        values = {key: str(value) for key, value in descriptor.model_dump(mode="json").items() if value is not None}
        if "frame_count" in values:
            values["frames"] = values.pop("frame_count")
    overrides = {
        "width": args.width,
        "height": args.height,
        "bit_depth": args.bit_depth,
        "chroma_format": args.chroma_format,
        "frames": args.frames,
        "path": path,
    }
    values.update({key: str(value) for key, value in overrides.items() if value is not None})
    if "width" not in values or "height" not in values:
        raise ConfigurationError("Clip geometry needs --width and --height or a --descriptor")
    return descriptor_from_mapping(values)


def cmd_encode(args: argparse.Namespace) -> int:
    descriptor = _descriptor(args, args.input)
    sequence = load_descriptor(descriptor)
    settings = get_settings()
    config = CodecConfig.for_sequence(
        sequence,
        tb_size=args.tb_size or settings.tb_size,
        quantiser=Quantiser(args.quantiser),
        qp=args.qp,
        deadzone_mode=DeadzoneMode(args.deadzone or settings.deadzone_mode.value),
        scan_kind=ScanKind(args.scan),
    )
    result = encode_sequence(sequence, config)
    data = result.to_bytes()
    args.output.write_bytes(data)
    if args.recon is not None:
        write_raw(result.reconstruction, args.recon)
    print(
        f"{args.output}: {sequence.frame_count} frame(s), {8 * len(data)} bits, "
        f"{8 * len(data) / max(sequence.frame_count, 1):.1f} bits/frame, {result.nonzero_levels} nonzero levels"
    )
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    data = args.input.read_bytes()
    config, sequence = decode_sequence(data)
    write_raw(sequence, args.output)
    print(
        f"{args.output}: {sequence.frame_count} frame(s) {config.width}x{config.height} "
        f"{config.chroma_format.value} {config.bit_depth}-bit ({config.quantiser.value}, QP {config.qp})"
    )
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    reference = load_descriptor(_descriptor(args, args.reference))
    test = load_descriptor(_descriptor(args, args.test))
    if args.ssim_map_dir is not None:
        args.ssim_map_dir.mkdir(parents=True, exist_ok=True)
    for index, (ref_frame, test_frame) in enumerate(zip(reference.frames, test.frames)):
        cells = []
        for name, ref_plane, test_plane in zip(CHANNEL_NAMES, ref_frame.planes, test_frame.planes):
            value, index_map = ssim(ref_plane, test_plane, return_map=True)  # type: ignore[misc]
            cells.append(f"{name.upper()} psnr={psnr(ref_plane, test_plane):.4f} ssim={value:.6f}")
            if args.ssim_map_dir is not None:
                ssim_map_to_pgm(index_map, args.ssim_map_dir / f"ssim_f{index:03d}_{name}.pgm")
        print(f"frame {index}: " + "  ".join(cells))
    record = sequence_quality(reference, test)
    print(
        f"mean: psnr_ycbcr={record.psnr_ycbcr:.4f} ssim_ycbcr={record.ssim_ycbcr:.6f} "
        f"(Y {record.psnr_y:.4f}/{record.ssim_y:.6f}, Cb {record.psnr_cb:.4f}/{record.ssim_cb:.6f}, "
        f"Cr {record.psnr_cr:.4f}/{record.ssim_cr:.6f})"
    )
    return 0


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        config = load_experiment_config(args.config)
        return override_experiment_config(config, output_dir=args.output_dir, workers=args.workers)

    clips = [read_sequence_descriptor(path) for path in args.clip or []]
    synthetic: dict[str, object] = {}
    if args.synthetic is not None:
        synthetic["patterns"] = list(args.synthetic) or list(DEFAULT_SUITE)
        for key in ("width", "height", "frames", "bit_depth", "chroma_format"):
            value = getattr(args, f"synthetic_{key}")
            if value is not None:
                synthetic[key] = value
    return build_experiment_config(
        clips=clips,
        synthetic=synthetic or None,
        tb_size=args.tb_size,
        qp_list=args.qp,
        quantisers=args.quantiser,
        deadzone_mode=args.deadzone,
        scan_kind=args.scan,
        output_dir=args.output_dir,
        workers=args.workers,
        write_bitstreams=False if args.no_bitstreams else None,
        write_reconstructions=True if args.reconstructions else None,
    )


def cmd_experiment(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    disable_progress = not sys.stdout.isatty()
    job_bar = tqdm(total=config.job_count, unit="job", desc="Jobs", dynamic_ncols=True, disable=disable_progress)

    def _progress_callback(completed: int, total: int, label: str) -> None:
        job_bar.set_postfix_str(label, refresh=False)
        job_bar.update(completed - job_bar.n)

    try:
        run = run_experiment(config, progress_callback=_progress_callback)
    finally:
        job_bar.close()
    written = emit_report(run.report, config.output_dir, args.format or REPORT_FORMATS)
    for comparison in run.report.comparisons:
        print(
            f"{comparison.clip}: {comparison.quantiser} vs {comparison.reference} "
            f"bits {comparison.bits_delta_percent:+.2f}%  PSNR {comparison.psnr_delta_db:+.3f} dB  "
            f"SSIM {comparison.ssim_delta:+.4f}  ({comparison.qp_count} QPs)"
            + (f"  PSNR drop {comparison.max_psnr_drop_db:.2f} dB at QP {','.join(map(str, comparison.flagged_qps))}"
               if comparison.psnr_drop_flagged else "")
        )
    for path in written:
        print(path)
    return 0


def cmd_dump_tables(args: argparse.Namespace) -> int:
    sys.stdout.write(dump_tables())
    return 0


def cmd_dump_weights(args: argparse.Namespace) -> int:
    text = dump_weights(args.size, curve=args.curve, samples=args.samples, path=args.output)
    if args.output is None:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdpq_lab", description="Perceptual quantisation lab for an intra block codec.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="Override LAB_LOG_LEVEL (DEBUG, INFO, WARNING, ...).")
    subparsers = parser.add_subparsers(dest="command", required=True)

    quantisers = [quantiser.value for quantiser in Quantiser]
    deadzones = [mode.value for mode in DeadzoneMode]
    scans = [kind.value for kind in ScanKind]

    encode_cmd = subparsers.add_parser("encode", help="Encode a raw clip into a bitstream.")
    encode_cmd.add_argument("input", type=Path, nargs="?", help="Raw planar YCbCr file (or the descriptor's path).")
    encode_cmd.add_argument("-o", "--output", type=Path, required=True, help="Bitstream file to write.")
    encode_cmd.add_argument("--recon", type=Path, help="Also write the encoder reconstruction as raw video.")
    _add_geometry(encode_cmd)
    encode_cmd.add_argument("--quantiser", choices=quantisers, default=Quantiser.FDPQ.value)
    encode_cmd.add_argument("--qp", type=int, default=22)
    encode_cmd.add_argument("--tb-size", type=int, choices=(4, 8, 16, 32))
    encode_cmd.add_argument("--deadzone", choices=deadzones)
    encode_cmd.add_argument("--scan", choices=scans, default=ScanKind.DIAGONAL.value)
    encode_cmd.set_defaults(func=cmd_encode)

    decode_cmd = subparsers.add_parser("decode", help="Decode a bitstream into raw video.")
    decode_cmd.add_argument("input", type=Path, help="Bitstream file.")
    decode_cmd.add_argument("-o", "--output", type=Path, required=True, help="Raw file to write.")
    decode_cmd.set_defaults(func=cmd_decode)

    metrics_cmd = subparsers.add_parser("metrics", help="PSNR and SSIM between two raw clips.")
    metrics_cmd.add_argument("reference", type=Path)
    metrics_cmd.add_argument("test", type=Path)
    _add_geometry(metrics_cmd)
    metrics_cmd.add_argument("--ssim-map-dir", type=Path, help="Write per-frame, per-channel SSIM maps as PGM.")
    metrics_cmd.set_defaults(func=cmd_metrics)

    experiment_cmd = subparsers.add_parser("experiment", help="Sweep quantisers and QPs, then write reports.")
    experiment_cmd.add_argument("--config", type=Path, help="Experiment config file (key = value).")
    experiment_cmd.add_argument("--clip", type=Path, action="append", help="Sequence descriptor (repeatable).")
    experiment_cmd.add_argument(
        "--synthetic",
        nargs="*",
        choices=sorted(PATTERNS),
        help="Add synthetic clips; without names the whole built-in suite is used.",
    )
    experiment_cmd.add_argument("--synthetic-width", type=int)
    experiment_cmd.add_argument("--synthetic-height", type=int)
    experiment_cmd.add_argument("--synthetic-frames", type=int)
    experiment_cmd.add_argument("--synthetic-bit-depth", type=int, choices=(8, 10))
    experiment_cmd.add_argument("--synthetic-chroma-format")
    experiment_cmd.add_argument("--qp", type=int, action="append", help="QP to test (repeatable).")
    experiment_cmd.add_argument("--quantiser", choices=quantisers, action="append", help="Quantiser (repeatable).")
    experiment_cmd.add_argument("--tb-size", type=int, choices=(4, 8, 16, 32))
    experiment_cmd.add_argument("--deadzone", choices=deadzones)
    experiment_cmd.add_argument("--scan", choices=scans)
    experiment_cmd.add_argument("--output-dir", type=Path)
    experiment_cmd.add_argument("--workers", type=int)
    experiment_cmd.add_argument("--format", choices=REPORT_FORMATS, action="append", help="Report format (repeatable).")
    experiment_cmd.add_argument("--no-bitstreams", action="store_true", help="Do not keep .fdpq files.")
    experiment_cmd.add_argument("--reconstructions", action="store_true", help="Keep decoded clips as raw video.")
    experiment_cmd.set_defaults(func=cmd_experiment)

    tables_cmd = subparsers.add_parser("dump-tables", help="Print MF/SF tables and the 4x4/8x8 weight maps.")
    tables_cmd.set_defaults(func=cmd_dump_tables)

    weights_cmd = subparsers.add_parser("dump-weights", help="Write a weight map or the decay curve as CSV.")
    weights_cmd.add_argument("--size", type=int, choices=(4, 8, 16, 32), default=4)
    weights_cmd.add_argument("--curve", action="store_true", help="Dump the (d, w) decay curve instead.")
    weights_cmd.add_argument("--samples", type=int, default=101)
    weights_cmd.add_argument("-o", "--output", type=Path)
    weights_cmd.set_defaults(func=cmd_dump_weights)
    return parser


def _configure_logging(level_override: Optional[str]) -> None:
    level_name = level_override.upper() if level_override else get_settings().log_level
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        raise ConfigurationError(f"Unknown log level '{level_override}'")
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        _configure_logging(args.log_level)
        return handler(args)
    except LabError as exc:
        LOGGER.debug("Command failed", exc_info=True)
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except ValueError as exc:
        print(f"error [usage]: {exc}", file=sys.stderr)
        return USAGE_EXIT_CODE
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
