"""Desk-scale laboratory for HEVC-style uniform, RD-optimised and frequency-dependent perceptual quantisation."""

__all__ = ["__version__"]

__version__ = "0.1.0"
