"""Utility modules for Mini VTN."""

from .terminal_utils import calculate_display_width, pad_to_width, render_table, strip_ansi

__all__ = [
    "calculate_display_width",
    "pad_to_width",
    "render_table",
    "strip_ansi",
]
