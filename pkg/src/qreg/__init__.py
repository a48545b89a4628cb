"""Quantized-weight linear regression: replica theory, state evolution and AMP."""

from .codebook import Codebook, QuantScheme, build, build_nonuniform, build_uniform, quantize, quantize_vec
from .replica import ModelParams, Phase, solve

__version__ = "0.1.0"

__all__ = [
    "Codebook", "QuantScheme", "build", "build_uniform", "build_nonuniform", "quantize", "quantize_vec",
    "ModelParams", "Phase", "solve", "__version__",
]
