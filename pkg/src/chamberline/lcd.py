"""16x2 character LCD buffer model shared by both corners."""

from __future__ import annotations

from typing import NamedTuple

COLS = 16
ROWS = 2


class LcdBuffer(NamedTuple):
    row1: str
    row2: str


def pad(text: str) -> str:
    """Clip to the panel width and pad with spaces; ASCII only."""
    if not text.isascii() or not all(" " <= c <= "~" for c in text):
        raise ValueError(f"LCD text must be printable ASCII, got {text!r}")
    return text[:COLS].ljust(COLS)


def lcd(row1: str = "", row2: str = "") -> LcdBuffer:
    return LcdBuffer(pad(row1), pad(row2))
