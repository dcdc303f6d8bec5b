"""Exact and numerical tools for coupled KdV systems on periodic domains."""

from .errors import CkdvError

__version__ = "0.1.0"
__all__ = ["CkdvError", "__version__"]
