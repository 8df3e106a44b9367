"""Column-aligned terminal tables.

Widths are measured in terminal columns: ANSI color codes take none, wide and emoji
characters take two, combining marks take zero.
"""

import re
import unicodedata
from collections.abc import Sequence

ANSI_ESCAPE_RE = re.compile(r"\x1b\[[0-9;]*m")

EMOJI_START = 0x1F300
EMOJI_END = 0x1FAFF


def strip_ansi(text: str) -> str:
    return ANSI_ESCAPE_RE.sub("", text)


def calculate_display_width(text: str) -> int:
    """Number of terminal columns ``text`` occupies.

    Examples:
        >>> calculate_display_width("acc")
        3
        >>> calculate_display_width("\\033[32m✓\\033[0m")
        1
        >>> calculate_display_width("✅")
        2
    """
    width = 0
    for char in strip_ansi(text):
        if unicodedata.combining(char):
            continue
        if EMOJI_START <= ord(char) <= EMOJI_END or unicodedata.east_asian_width(char) in ("W", "F"):
            width += 2
        else:
            width += 1
    return width


def pad_to_width(text: str, target_width: int, align: str = "left", fill_char: str = " ") -> str:
    """Pad ``text`` to ``target_width`` columns; longer text is returned unchanged.

    Raises:
        ValueError: ``align`` is not left, right or center
    """
    missing = target_width - calculate_display_width(text)
    if align not in ("left", "right", "center"):
        raise ValueError(f"Invalid align value: {align}. Must be 'left', 'right', or 'center'")
    if missing <= 0:
        return text
    if align == "left":
        return text + fill_char * missing
    if align == "right":
        return fill_char * missing + text
    left = missing // 2
    return fill_char * left + text + fill_char * (missing - left)


def render_table(
    headers: Sequence[str],
    rows: Sequence[Sequence[str]],
    align: Sequence[str] | None = None,
    separator: str = "  ",
) -> list[str]:
    """Lines of a plain table: header, a rule of dashes, then one line per row.

    Args:
        headers: Column titles
        rows: Cells as already-formatted strings (may carry ANSI colors)
        align: Per-column alignment, left by default

    Raises:
        ValueError: a row has a different number of cells than ``headers``
    """
    align = list(align) if align is not None else ["left"] * len(headers)
    if len(align) != len(headers):
        raise ValueError(f"{len(align)} alignments for {len(headers)} columns")
    for index, row in enumerate(rows):
        if len(row) != len(headers):
            raise ValueError(f"Row {index} has {len(row)} cells, expected {len(headers)}")

    widths = [
        max([calculate_display_width(h)] + [calculate_display_width(row[i]) for row in rows])
        for i, h in enumerate(headers)
    ]

    def _line(cells: Sequence[str]) -> str:
        return separator.join(pad_to_width(c, w, a) for c, w, a in zip(cells, widths, align)).rstrip()

    rule = separator.join("-" * w for w in widths)
    return [_line(headers), rule] + [_line(row) for row in rows]
