"""UV texture compositing and decal placement.

The container albedo is assembled from independent layers (base paint, tone
noise, corner aging, edge dirt, rust) plus an RGBA decal layer holding
hazard placards, identification text and brand lettering. Every annotatable
decal also writes a private binary mask aligned to the atlas; those masks
drive the per-entity renders downstream.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field

import numpy as np

from . import fonts
from .geometry import ANNOTATED_SIDES, ContainerMesh
from .markers import MarkerCatalog

LIGHT_GREY = np.array([0.80, 0.80, 0.78])
OCHRE = np.array([0.55, 0.33, 0.12])

DEFAULT_PALETTE = (
    (0.66, 0.13, 0.12),   # red
    (0.13, 0.32, 0.56),   # blue
    (0.16, 0.42, 0.24),   # green
    (0.78, 0.46, 0.10),   # orange
    (0.52, 0.53, 0.55),   # grey
    (0.42, 0.18, 0.14),   # maroon
    (0.72, 0.64, 0.22),   # mustard
)

BRAND_NAMES = ("OCEANIC", "SEABRIDGE", "NORDWAVE", "TRITON", "HARBORLINE",
               "MERID", "KARGO")

_PLACEMENT_RETRIES = 40


class TextureError(ValueError):
    pass


@dataclass(frozen=True)
class TextureConfig:
    atlas_size: tuple[int, int] = (2304, 768)
    palette: tuple = DEFAULT_PALETTE
    marker_count_range: tuple[int, int] = (1, 6)
    marker_size_m: float = 0.25
    th_brand_door: float = 0.5
    th_brand_nodoor: float = 0.5
    th_text_door: float = 0.9
    th_text_nodoor: float = 0.9
    th_text_front: float = 0.9
    th_text_back: float = 0.9
    aging_range: tuple[float, float] = (0.2, 0.7)
    dirt_range: tuple[float, float] = (0.1, 0.5)
    rust_range: tuple[float, float] = (0.0, 0.6)
    tone_noise_range: tuple[float, float] = (0.05, 0.25)
    roughness_base: float = 0.55

    def validate(self) -> None:
        if len(self.palette) == 0:
            raise TextureError("palette must not be empty")
        probs = (self.th_brand_door, self.th_brand_nodoor, self.th_text_door,
                 self.th_text_nodoor, self.th_text_front, self.th_text_back)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise TextureError(f"decal probabilities must be in [0, 1], got {probs}")
        lo, hi = self.marker_count_range
        if lo < 0 or hi < lo:
            raise TextureError(f"bad marker_count_range {self.marker_count_range}")
        for rng_pair in (self.aging_range, self.dirt_range, self.rust_range,
                         self.tone_noise_range):
            if rng_pair[0] > rng_pair[1] or rng_pair[0] < 0:
                raise TextureError(f"bad intensity range {rng_pair}")

    def th_brand(self, side: str) -> float:
        return {"door": self.th_brand_door, "no_door": self.th_brand_nodoor}[side]

    def th_text(self, side: str) -> float:
        return {"door": self.th_text_door, "no_door": self.th_text_nodoor,
                "front": self.th_text_front, "back": self.th_text_back}[side]


@dataclass
class Placement:
    entity_kind: str                      # imdg | text | brand
    class_label: str                      # marker code, "text", or brand name
    uv_rect: tuple[int, int, int, int]    # x, y, w, h in atlas pixels
    side: str
    payload: str                          # marker code or the drawn string
    orientation: str = "horizontal"


@dataclass
class UvMask:
    placement: Placement
    mask: np.ndarray                      # (H, W) bool, atlas-aligned


@dataclass
class UvLayerStack:
    base_color: np.ndarray                # (3,) float in [0, 1]
    tone_noise: np.ndarray                # (H, W) float
    aging: np.ndarray                     # (H, W) float
    dirt: np.ndarray                      # (H, W) float
    rust: np.ndarray                      # (H, W) float
    decal: np.ndarray                     # (H, W, 4) uint8
    roughness: np.ndarray                 # (H, W) float
    tone_amp: float = 0.0

    @property
    def atlas_size(self) -> tuple[int, int]:
        h, w = self.tone_noise.shape
        return (w, h)

    def composite(self) -> np.ndarray:
        """Resolve the stack into a linear-light RGB albedo, (H, W, 3) float32."""
        h, w = self.tone_noise.shape
        color = np.empty((h, w, 3), dtype=np.float64)
        color[:] = self.base_color
        color *= (1.0 + self.tone_amp * (self.tone_noise[..., None] - 0.5))
        color *= (1.0 - 0.6 * self.aging[..., None])
        color += (LIGHT_GREY - color) * self.dirt[..., None]
        color += (OCHRE - color) * self.rust[..., None]
        alpha = self.decal[..., 3:4].astype(np.float64) / 255.0
        color = color * (1.0 - alpha) + (self.decal[..., :3] / 255.0) * alpha
        return np.clip(color, 0.0, 1.0).astype(np.float32)


def value_noise(rng: np.random.Generator, h: int, w: int, cell_px: int) -> np.ndarray:
    """Bilinear value noise in [0, 1] from a seeded coarse grid."""
    gh = max(2, h // cell_px + 2)
    gw = max(2, w // cell_px + 2)
    grid = rng.random((gh, gw))
    ys = np.linspace(0.0, gh - 1.001, h)
    xs = np.linspace(0.0, gw - 1.001, w)
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = grid[y0][:, x0]
    b = grid[y0][:, x0 + 1]
    c = grid[y0 + 1][:, x0]
    d = grid[y0 + 1][:, x0 + 1]
    return a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx + c * fy * (1 - fx) + d * fy * fx


def _island_ramps(mesh: ContainerMesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel corner ramp and edge ramp over all islands, each (H, W)."""
    w, h = mesh.atlas_size
    corner = np.zeros((h, w))
    edge = np.zeros((h, w))
    for name, (ix, iy, iw, ih) in mesh.islands.items():
        yy, xx = np.mgrid[0:ih, 0:iw]
        r_corner = 0.35 * min(iw, ih)
        best = np.full((ih, iw), np.inf)
        for cx, cy in ((0, 0), (iw - 1, 0), (0, ih - 1), (iw - 1, ih - 1)):
            np.minimum(best, np.hypot(xx - cx, yy - cy), out=best)
        corner[iy:iy + ih, ix:ix + iw] = np.clip(1.0 - best / r_corner, 0.0, 1.0)
        d_edge = np.minimum(np.minimum(xx, iw - 1 - xx), np.minimum(yy, ih - 1 - yy))
        r_edge = 0.10 * min(iw, ih)
        edge[iy:iy + ih, ix:ix + iw] = np.clip(1.0 - d_edge / r_edge, 0.0, 1.0)
    return corner, edge


def compose_material(rng: np.random.Generator, cfg: TextureConfig,
                     mesh: ContainerMesh,
                     aged_mask: np.ndarray | None = None) -> UvLayerStack:
    """Draw material parameters and build the defect layer stack.

    Base paint comes uniformly from the palette; aging darkens island
    corners, dirt grays out island edges, rust is thresholded ochre noise,
    and the roughness map picks up noise near island borders. ``aged_mask``
    (from sunken damage areas) feeds extra aging where damage transferred
    old material.
    """
    cfg.validate()
    w, h = mesh.atlas_size
    base = np.asarray(cfg.palette[int(rng.integers(0, len(cfg.palette)))], float)

    tone_amp = float(rng.uniform(*cfg.tone_noise_range))
    aging_int = float(rng.uniform(*cfg.aging_range))
    dirt_int = float(rng.uniform(*cfg.dirt_range))
    rust_int = float(rng.uniform(*cfg.rust_range))

    tone = value_noise(rng, h, w, 24)
    corner, edge = _island_ramps(mesh)
    aging = aging_int * corner
    if aged_mask is not None:
        aging = np.clip(aging + 0.6 * aged_mask, 0.0, 1.0)
    dirt = dirt_int * edge
    rust_noise = value_noise(rng, h, w, 10)
    rust = rust_int * np.clip((rust_noise - 0.62) / 0.38, 0.0, 1.0)

    rough_noise = value_noise(rng, h, w, 16)
    roughness = np.clip(
        cfg.roughness_base + 0.35 * edge * (rough_noise - 0.5) * 2.0, 0.05, 1.0)

    return UvLayerStack(
        base_color=base,
        tone_noise=tone,
        aging=aging,
        dirt=dirt,
        rust=rust,
        decal=np.zeros((h, w, 4), dtype=np.uint8),
        roughness=roughness,
        tone_amp=tone_amp,
    )


def marker_positions(x: float, y: float, n: int,
                     sizes: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Top-left pixel anchors for n markers in two staggered rows.

    Markers are indexed by the n consecutive integers ending at floor(n/2):
    even indices sit on the upper row at ceil(y), odd ones drop half a
    marker height; each index steps half a marker width sideways.
    """
    if n < 1:
        raise TextureError("need at least one marker")
    if len(sizes) != n:
        raise TextureError(f"expected {n} sizes, got {len(sizes)}")
    i_end = n // 2 + 1
    i_begin = i_end - n
    out = []
    for k, i in enumerate(range(i_begin, i_end)):
        mw, mh = sizes[k]
        xi = math.ceil(x + i * mw / 2.0)
        yi = math.ceil(y) if abs(i) % 2 == 0 else math.ceil(y + mh / 2.0)
        out.append((xi, yi))
    return out


def _staggered_extent(n: int, w: int, h: int) -> tuple[int, int, int, int]:
    """(min_dx, max_dx_plus_w, min_dy, max_dy_plus_h) of the pattern around
    anchor (0, 0), uniform marker size."""
    anchors = marker_positions(0, 0, n, [(w, h)] * n)
    xs = [a[0] for a in anchors]
    ys = [a[1] for a in anchors]
    return (min(xs), max(xs) + w, min(ys), max(ys) + h)


def _rects_overlap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    return not (a[0] + a[2] <= b[0] or b[0] + b[2] <= a[0]
                or a[1] + a[3] <= b[1] or b[1] + b[3] <= a[1])


def _blit_rgba(dst: np.ndarray, src: np.ndarray, x: int, y: int) -> None:
    h, w = src.shape[:2]
    region = dst[y:y + h, x:x + w]
    on = src[..., 3] > 0
    region[on] = src[on]


def _tight_alpha_rect(src: np.ndarray) -> tuple[int, int, int, int]:
    on = src[..., 3] > 0
    rows = np.nonzero(on.any(axis=1))[0]
    cols = np.nonzero(on.any(axis=0))[0]
    return (int(cols[0]), int(rows[0]),
            int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))


def place_imdg_markers(i_uv: np.ndarray, rng: np.random.Generator,
                       catalog: MarkerCatalog, cfg: TextureConfig,
                       mesh: ContainerMesh, side: str,
                       count: int | None = None,
                       avoid: list[tuple[int, int, int, int]] | None = None,
                       ) -> tuple[np.ndarray, list[Placement], list[UvMask]]:
    """Stamp randomly drawn placards onto one side's island.

    Draws count ~ U{marker_count_range} codes with replacement, anchors the
    staggered pattern uniformly inside the island's feasible region, and
    writes each placard both into the decal image and into its own fresh
    mask. Raises if no anchor keeps the pattern inside the island.
    """
    if side not in ANNOTATED_SIDES:
        raise TextureError(f"side {side!r} carries no markers")
    cfg.validate()
    out = i_uv.copy()
    lo, hi = cfg.marker_count_range
    n = int(rng.integers(lo, hi + 1)) if count is None else int(count)
    if n == 0:
        return out, [], []

    size_px = max(4, int(round(cfg.marker_size_m * mesh.px_per_m)))
    ix, iy, iw, ih = mesh.islands[side]
    min_dx, max_dxw, min_dy, max_dyh = _staggered_extent(n, size_px, size_px)
    x_lo = ix - min_dx
    x_hi = ix + iw - max_dxw
    y_lo = iy - min_dy
    y_hi = iy + ih - max_dyh
    if x_hi < x_lo or y_hi < y_lo:
        raise TextureError(
            f"{n} markers of {size_px}px cannot fit the {side} island")

    avoid = list(avoid or [])
    anchor = None
    for attempt in range(_PLACEMENT_RETRIES):
        cand = (int(rng.integers(x_lo, x_hi + 1)), int(rng.integers(y_lo, y_hi + 1)))
        pattern = marker_positions(cand[0], cand[1], n, [(size_px, size_px)] * n)
        rects = [(px, py, size_px, size_px) for px, py in pattern]
        if not any(_rects_overlap(r, a) for r in rects for a in avoid):
            anchor = cand
            break
        anchor = anchor or cand   # fall back to an overlapping spot
    assert anchor is not None
    pattern = marker_positions(anchor[0], anchor[1], n, [(size_px, size_px)] * n)

    h_atlas, w_atlas = out.shape[:2]
    placements: list[Placement] = []
    masks: list[UvMask] = []
    for px, py in pattern:
        code = catalog.codes()[int(rng.integers(0, len(catalog)))]
        art = catalog.scaled_image(code, size_px)
        _blit_rgba(out, art, px, py)
        tx, ty, tw, th = _tight_alpha_rect(art)
        mask = np.zeros((h_atlas, w_atlas), dtype=bool)
        mask[py:py + size_px, px:px + size_px] = art[..., 3] > 0
        rect = (px + tx, py + ty, tw, th)
        placements.append(Placement("imdg", code, rect, side, code))
        masks.append(UvMask(placements[-1], mask))
    return out, placements, masks


def _text_rgba(raster: np.ndarray, color: tuple[int, int, int]) -> np.ndarray:
    h, w = raster.shape
    out = np.zeros((h, w, 4), dtype=np.uint8)
    out[raster, 0] = color[0]
    out[raster, 1] = color[1]
    out[raster, 2] = color[2]
    out[raster, 3] = 255
    return out


def _place_decal(out: np.ndarray, rng: np.random.Generator, island, rgba,
                 avoid: list[tuple[int, int, int, int]]) -> tuple[int, int, int, int] | None:
    """Find a spot for an RGBA stamp inside the island, blit it, return its
    tight rect. None when the stamp cannot fit at all."""
    ix, iy, iw, ih = island
    h, w = rgba.shape[:2]
    if w > iw or h > ih:
        return None
    pos = None
    for attempt in range(_PLACEMENT_RETRIES):
        cand = (int(rng.integers(ix, ix + iw - w + 1)),
                int(rng.integers(iy, iy + ih - h + 1)))
        rect = (cand[0], cand[1], w, h)
        if not any(_rects_overlap(rect, a) for a in avoid):
            pos = cand
            break
        pos = pos or cand
    _blit_rgba(out, rgba, pos[0], pos[1])
    tx, ty, tw, th = _tight_alpha_rect(rgba)
    return (pos[0] + tx, pos[1] + ty, tw, th)


def place_texts(i_uv: np.ndarray, rng: np.random.Generator, cfg: TextureConfig,
                mesh: ContainerMesh, side: str, id_text: str,
                avoid: list[tuple[int, int, int, int]] | None = None,
                ) -> tuple[np.ndarray, list[Placement], list[UvMask]]:
    """Stamp the container identifier (and a brand, on the two ends).

    With probability th_text the id is drawn twice, once horizontal and once
    vertical, each with its own mask. Brands only exist on the door and
    no-door ends, drawn large with probability th_brand and never masked or
    annotated.
    """
    if side not in ANNOTATED_SIDES:
        raise TextureError(f"side {side!r} carries no text")
    cfg.validate()
    out = i_uv.copy()
    island = mesh.islands[side]
    h_atlas, w_atlas = out.shape[:2]
    avoid = list(avoid or [])
    placements: list[Placement] = []
    masks: list[UvMask] = []

    dark = bool(rng.random() < 0.5)
    color = (25, 25, 28) if dark else (235, 235, 232)

    if side in ("door", "no_door") and rng.random() < cfg.th_brand(side):
        brand = BRAND_NAMES[int(rng.integers(0, len(BRAND_NAMES)))]
        scale = max(1, int(island[2] * 0.55 / max(1, fonts.text_size(brand)[0])))
        rgba = _text_rgba(fonts.render_text(brand, scale=scale), color)
        rect = _place_decal(out, rng, island, rgba, avoid)
        if rect is not None:
            placements.append(Placement("brand", brand, rect, side, brand))
            avoid.append(rect)

    if rng.random() < cfg.th_text(side):
        scale = max(1, int(round(mesh.px_per_m * 0.065 / fonts.GLYPH_H)))
        for orientation in ("horizontal", "vertical"):
            if orientation == "horizontal":
                raster = fonts.render_text(id_text, scale=scale)
            else:
                raster = fonts.render_text_vertical(id_text, scale=scale)
            rgba = _text_rgba(raster, color)
            rect = _place_decal(out, rng, island, rgba, avoid)
            if rect is None:
                continue
            avoid.append(rect)
            mask = np.zeros((h_atlas, w_atlas), dtype=bool)
            x, y, tw, th = rect
            # rect is tight on the raster, recover its offset inside the blit
            tx, ty, _, _ = _tight_alpha_rect(rgba)
            mask[y:y + th, x:x + tw] = raster[ty:ty + th, tx:tx + tw]
            placements.append(
                Placement("text", "text", rect, side, id_text, orientation))
            masks.append(UvMask(placements[-1], mask))
    return out, placements, masks


def draw_door_detail(i_uv: np.ndarray, mesh: ContainerMesh) -> np.ndarray:
    """Paint door bars and hinges on the door island (visual cue only)."""
    out = i_uv.copy()
    ix, iy, iw, ih = mesh.islands["door"]
    bar = np.zeros((ih, iw, 4), dtype=np.uint8)
    bar_color = (40, 42, 45, 255)
    n_bars = 4
    for k in range(n_bars):
        cx = int((k + 0.5) / n_bars * iw)
        bw = max(2, iw // 60)
        bar[:, cx - bw // 2: cx - bw // 2 + bw] = bar_color
        for fy in (0.12, 0.5, 0.88):
            cy = int(fy * ih)
            hh = max(2, ih // 40)
            hw = max(4, iw // 24)
            bar[cy - hh // 2: cy - hh // 2 + hh,
                cx - hw // 2: cx - hw // 2 + hw] = (25, 25, 28, 255)
    # central seam between the two door leaves
    seam_x = iw // 2
    bar[:, seam_x - 1: seam_x + 1] = (20, 20, 22, 255)
    _blit_rgba(out, bar, ix, iy)
    return out


# --- container identification codes (ISO 6346 style) -----------------------

_LETTER_VALUES: dict[str, int] = {}
_v = 10
for _ch in string.ascii_uppercase:
    while _v % 11 == 0:
        _v += 1
    _LETTER_VALUES[_ch] = _v
    _v += 1


def iso6346_check_digit(code10: str) -> int:
    """Check digit for an owner code + serial (10 characters)."""
    if len(code10) != 10:
        raise TextureError(f"expected 10 characters, got {code10!r}")
    total = 0
    for pos, ch in enumerate(code10.upper()):
        value = _LETTER_VALUES[ch] if ch.isalpha() else int(ch)
        total += value * (2 ** pos)
    return (total % 11) % 10


def gen_container_id(rng: np.random.Generator) -> str:
    """Owner code, category 'U', six serial digits, and the check digit."""
    letters = string.ascii_uppercase
    owner = "".join(letters[int(rng.integers(0, 26))] for _ in range(3))
    serial = "".join(str(int(rng.integers(0, 10))) for _ in range(6))
    body = owner + "U" + serial
    return body + str(iso6346_check_digit(body))
