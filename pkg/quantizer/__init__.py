"""Quantization scaling: the corruption primitive of the forward process."""
from .scaling import desymbolize, quantize_scaled, simulate_quantize, symbolize

__all__ = ["quantize_scaled", "symbolize", "desymbolize", "simulate_quantize"]
