"""Objective quality metrics."""

from .quality import QualityRecord, psnr, quality_record, sequence_quality, ssim, ssim_map_to_pgm

__all__ = ["QualityRecord", "psnr", "quality_record", "sequence_quality", "ssim", "ssim_map_to_pgm"]
