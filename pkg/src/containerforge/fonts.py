"""Tiny embedded 5x7 bitmap font for container ids, brands and marker codes.

Each glyph is five bits per row, seven rows, most significant bit on the
left. Public-domain classic LCD/ROM shapes. Rendering works on integer
scales so glyph pixels stay crisp for mask extraction.
"""

from __future__ import annotations

import numpy as np

GLYPH_W = 5
GLYPH_H = 7

_GLYPHS = {
    "A": (0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "B": (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    "C": (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    "D": (0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C),
    "E": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    "F": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    "G": (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    "H": (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "I": (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "J": (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    "K": (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    "L": (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    "M": (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    "N": (0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11),
    "O": (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "P": (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    "Q": (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    "R": (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    "S": (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    "T": (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    "U": (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "V": (0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04),
    "W": (0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11),
    "X": (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    "Y": (0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04),
    "Z": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
    "0": (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    "1": (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "2": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    "3": (0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E),
    "4": (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    "5": (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    "6": (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    "7": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    "8": (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    "9": (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
    ".": (0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C),
    "-": (0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00),
    " ": (0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00),
}

_UNKNOWN = (0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F)


def glyph_bitmap(ch: str) -> np.ndarray:
    """(7, 5) boolean bitmap for one character."""
    rows = _GLYPHS.get(ch.upper(), _UNKNOWN)
    out = np.zeros((GLYPH_H, GLYPH_W), dtype=bool)
    for r, bits in enumerate(rows):
        for c in range(GLYPH_W):
            out[r, c] = bool(bits & (1 << (GLYPH_W - 1 - c)))
    return out


def text_size(text: str, scale: int = 1, tracking: int = 1) -> tuple[int, int]:
    """Pixel (width, height) of a horizontal run of glyphs."""
    n = len(text)
    if n == 0:
        return (0, 0)
    w = n * GLYPH_W * scale + (n - 1) * tracking * scale
    return (w, GLYPH_H * scale)


def render_text(text: str, scale: int = 1, tracking: int = 1) -> np.ndarray:
    """Boolean raster of the text, shape (h, w), True on glyph pixels."""
    w, h = text_size(text, scale, tracking)
    out = np.zeros((max(h, 1), max(w, 1)), dtype=bool)
    x = 0
    for ch in text:
        bm = glyph_bitmap(ch)
        big = np.kron(bm, np.ones((scale, scale), dtype=bool))
        out[: GLYPH_H * scale, x: x + GLYPH_W * scale] = big
        x += (GLYPH_W + tracking) * scale
    return out


def render_text_vertical(text: str, scale: int = 1, leading: int = 2) -> np.ndarray:
    """Characters stacked top to bottom, as on container corner posts."""
    if not text:
        return np.zeros((1, 1), dtype=bool)
    gh = GLYPH_H * scale
    gw = GLYPH_W * scale
    step = gh + leading * scale
    out = np.zeros((len(text) * step - leading * scale, gw), dtype=bool)
    for i, ch in enumerate(text):
        bm = np.kron(glyph_bitmap(ch), np.ones((scale, scale), dtype=bool))
        out[i * step: i * step + gh, :] = bm
    return out
