"""Canonical dangerous-goods placard art, generated in-process.

Real placards are diamonds with a class-specific color scheme, a hazard
symbol and the class number. We ship self-contained stand-ins: diamond
shapes with the family color split, a border, and the subclass code printed
across the middle. Each catalog entry can be overridden by dropping a PNG
named after its code (e.g. ``C4.2.png``) into a user directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import fonts

# 26 subclasses across the 9 dangerous-goods families.
MARKER_CODES = (
    "C1.1", "C1.2", "C1.3", "C1.4",
    "C2.1", "C2.2", "C2.3", "C2.4", "C2.5",
    "C3.1", "C3.2",
    "C4.1", "C4.2", "C4.3", "C4.4",
    "C5.1", "C5.2", "C5.3",
    "C6.1", "C6.2",
    "C7.1", "C7.2", "C7.3", "C7.4",
    "C8.1", "C9.1",
)

# family -> (upper half RGB, lower half RGB, text RGB)
_FAMILY_COLORS = {
    1: ((244, 136, 31), (244, 136, 31), (0, 0, 0)),      # explosives: orange
    2: ((0, 134, 81), (0, 134, 81), (255, 255, 255)),    # gases: green
    3: ((200, 16, 46), (200, 16, 46), (255, 255, 255)),  # flammable liquids: red
    4: ((200, 16, 46), (255, 255, 255), (0, 0, 0)),      # flammable solids
    5: ((255, 205, 0), (255, 205, 0), (0, 0, 0)),        # oxidizers: yellow
    6: ((255, 255, 255), (255, 255, 255), (0, 0, 0)),    # toxics: white
    7: ((255, 205, 0), (255, 255, 255), (0, 0, 0)),      # radioactive
    8: ((255, 255, 255), (30, 30, 30), (0, 0, 0)),       # corrosives
    9: ((255, 255, 255), (255, 255, 255), (0, 0, 0)),    # miscellaneous
}

_CANONICAL_SIZE = 96


@dataclass(frozen=True)
class MarkerEntry:
    code: str
    class_id: int           # 1-based, stable: position in MARKER_CODES + 1
    image: np.ndarray       # (S, S, 4) uint8 RGBA, alpha 0 outside the diamond


def _diamond_mask(size: int) -> np.ndarray:
    c = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    return (np.abs(xx - c) + np.abs(yy - c)) <= c + 0.5


def _make_marker_image(code: str, size: int = _CANONICAL_SIZE) -> np.ndarray:
    family = int(code[1])
    upper, lower, text_rgb = _FAMILY_COLORS[family]
    img = np.zeros((size, size, 4), dtype=np.uint8)
    mask = _diamond_mask(size)
    half = np.arange(size)[:, None] < size // 2
    img[..., :3] = np.where(half[..., None], upper, lower)

    # black border following the diamond edge
    c = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    ring = np.abs(np.abs(xx - c) + np.abs(yy - c) - c) <= max(1.5, size / 32.0)
    img[..., :3][ring & mask] = (20, 20, 20)

    # subclass code across the middle; family digit near the bottom tip
    scale = max(1, size // 32)
    label = fonts.render_text(code, scale=scale)
    lh, lw = label.shape
    y0 = (size - lh) // 2
    x0 = (size - lw) // 2
    region = img[y0:y0 + lh, x0:x0 + lw, :3]
    region[label] = text_rgb
    digit = fonts.render_text(code[1], scale=scale)
    dh, dw = digit.shape
    y1 = size - dh - max(2, size // 10)
    x1 = (size - dw) // 2
    region = img[y1:y1 + dh, x1:x1 + dw, :3]
    region[digit] = text_rgb

    img[..., 3] = np.where(mask, 255, 0)
    img[~mask, :3] = 0
    return img


class MarkerCatalog:
    """All 26 placards keyed by code, with stable class ids."""

    def __init__(self, art_dir: str | Path | None = None):
        self._entries: dict[str, MarkerEntry] = {}
        for idx, code in enumerate(MARKER_CODES):
            image = None
            if art_dir is not None:
                candidate = Path(art_dir) / f"{code}.png"
                if candidate.exists():
                    image = np.asarray(
                        Image.open(candidate).convert("RGBA"), dtype=np.uint8)
            if image is None:
                image = _make_marker_image(code)
            self._entries[code] = MarkerEntry(code, idx + 1, image)

    def __len__(self) -> int:
        return len(self._entries)

    def codes(self) -> tuple[str, ...]:
        return MARKER_CODES

    def entry(self, code: str) -> MarkerEntry:
        return self._entries[code]

    def class_id(self, code: str) -> int:
        return self._entries[code].class_id

    def scaled_image(self, code: str, size_px: int) -> np.ndarray:
        """Nearest-neighbor resize so the alpha channel stays binary."""
        src = self._entries[code].image
        im = Image.fromarray(src, "RGBA").resize(
            (size_px, size_px), Image.Resampling.NEAREST)
        return np.asarray(im, dtype=np.uint8)
