"""Two-timescale gradient dynamics and spectral stability classification
for smooth minimax problems."""

from . import cli, dynamics, problems, spectral, stability

__all__ = ["cli", "dynamics", "problems", "spectral", "stability"]
__version__ = "0.1.0"
