"""Quantization, analysis and design of multi-mode superconducting circuits."""

__version__ = "0.1.0"
