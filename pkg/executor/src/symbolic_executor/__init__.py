"""Symbolic math toolkit served over the line-delimited JSON wire protocol."""

from .toolkit import ENVELOPE_SHAPES, TOOL_NAMES, SymPyToolkit, dispatch

__version__ = "0.1.0"

__all__ = ["ENVELOPE_SHAPES", "TOOL_NAMES", "SymPyToolkit", "dispatch"]
