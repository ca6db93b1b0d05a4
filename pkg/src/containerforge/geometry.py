"""Container mesh construction and UV atlas layout.

The container is a box of six independently gridded sides. Each side is a
regular quad grid dense enough for the damage operators to sculpt, with a
trapezoidal corrugation profile displaced along the wall normal. Sides do
not share vertices, but their boundary loops coincide exactly (corrugation
tapers to zero at every wall border), so the surface is geometrically
watertight until a perforation carves a hole.

UV layout is a fixed 3x2 grid of cells, one side per cell. Inside its cell
each side gets a rectangle sized by a single pixels-per-meter scale applied
to the side's true (developed) surface area, so texel density is uniform
across the whole container and island area stays proportional to 3D area.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

SIDE_NAMES = ("door", "no_door", "front", "back", "top", "bottom")
DOOR, NO_DOOR, FRONT, BACK, TOP, BOTTOM = range(6)

# Sides that carry markers / text annotations.
ANNOTATED_SIDES = ("door", "no_door", "front", "back")

# Vertical walls receive the corrugation profile; the two container ends are
# corrugated inward so the bounding box is set by the long walls alone.
_WALL_SIDES = (FRONT, BACK, DOOR, NO_DOOR)
_OUTWARD_CORRUGATED = (FRONT, BACK)

DEFAULT_ATLAS_SIZE = (2304, 768)
_ISLAND_PAD_PX = 2

# Fraction of the corrugation period spent rising / on the crest / falling.
_PROFILE_RISE = 0.25
_PROFILE_CREST = 0.25
_PROFILE_FALL = 0.25


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ContainerSpec:
    """Parametric description of a general-purpose container."""

    length_m: float = 6.058
    width_m: float = 2.438
    height_m: float = 2.591
    corrugation_depth_m: float = 0.036
    corrugation_pitch_m: float = 0.209
    subdivisions_per_meter: int = 8
    has_door_geometry: bool = True

    def validate(self) -> None:
        dims = (self.length_m, self.width_m, self.height_m)
        if any(d <= 0 for d in dims):
            raise GeometryError(f"container dimensions must be positive, got {dims}")
        if self.corrugation_depth_m < 0:
            raise GeometryError("corrugation depth must be >= 0")
        if self.corrugation_depth_m >= self.width_m / 10.0:
            raise GeometryError(
                f"corrugation depth {self.corrugation_depth_m} must be < width/10"
            )
        if self.corrugation_pitch_m <= 0:
            raise GeometryError("corrugation pitch must be positive")
        if self.subdivisions_per_meter < 4:
            raise GeometryError("subdivisions_per_meter must be >= 4")


@dataclass(frozen=True)
class SideFrame:
    """Local chart of one box side: p = origin + s*e_s + t*e_t + disp*n_out."""

    side: int
    origin: np.ndarray      # (3,) corner at (s, t) = (0, 0)
    e_s: np.ndarray         # (3,) unit, horizontal axis (corrugation axis on walls)
    e_t: np.ndarray         # (3,) unit, second axis
    n_out: np.ndarray       # (3,) unit outward normal
    width_m: float          # extent along e_s
    height_m: float         # extent along e_t
    ncols: int
    nrows: int
    vertex_offset: int      # index of grid vertex (0, 0) in the mesh arrays
    face_offset: int

    @property
    def name(self) -> str:
        return SIDE_NAMES[self.side]

    def vertex_index(self, i: int, j: int) -> int:
        return self.vertex_offset + j * (self.ncols + 1) + i

    def local_coords(self, points: np.ndarray) -> np.ndarray:
        """Project 3D points into (s, t) chart coordinates, shape (n, 2)."""
        rel = np.atleast_2d(points) - self.origin
        return np.stack([rel @ self.e_s, rel @ self.e_t], axis=1)


@dataclass
class ContainerMesh:
    """Quad-grid container surface with UVs and per-face side tags."""

    vertices: np.ndarray            # (n, 3) float64, meters
    faces: np.ndarray               # (m, 4) int32 vertex indices, outward winding
    uv: np.ndarray                  # (n, 2) float64 in [0, 1]^2
    side_tag: np.ndarray            # (m,) uint8 index into SIDE_NAMES
    vertex_side: np.ndarray         # (n,) uint8
    face_ids: np.ndarray            # (m,) int32 stable ids, survive face removal
    rest_vertices: np.ndarray       # (n, 3) undeformed positions
    frames: dict[str, SideFrame]
    spec: ContainerSpec
    islands: dict[str, tuple[int, int, int, int]] = field(default_factory=dict)
    atlas_size: tuple[int, int] = DEFAULT_ATLAS_SIZE
    px_per_m: float = 0.0           # common UV scale, atlas pixels per meter
    pristine_copy_ref: str = ""

    def copy(self) -> "ContainerMesh":
        return replace(
            self,
            vertices=self.vertices.copy(),
            faces=self.faces.copy(),
            uv=self.uv.copy(),
            side_tag=self.side_tag.copy(),
            vertex_side=self.vertex_side.copy(),
            face_ids=self.face_ids.copy(),
            rest_vertices=self.rest_vertices.copy(),
            islands=dict(self.islands),
        )

    def faces_of_side(self, side: str) -> np.ndarray:
        return np.nonzero(self.side_tag == SIDE_NAMES.index(side))[0]

    def vertices_of_side(self, side: str) -> np.ndarray:
        return np.nonzero(self.vertex_side == SIDE_NAMES.index(side))[0]

    def face_normals(self) -> np.ndarray:
        a, b, c, d = (self.vertices[self.faces[:, k]] for k in range(4))
        n = np.cross(c - a, d - b)
        length = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.maximum(length, 1e-30)

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted smooth normals, averaged within each side."""
        a, b, c, d = (self.vertices[self.faces[:, k]] for k in range(4))
        fn = np.cross(c - a, d - b)  # length ~ 2x area, keeps area weighting
        out = np.zeros_like(self.vertices)
        for k in range(4):
            np.add.at(out, self.faces[:, k], fn)
        length = np.linalg.norm(out, axis=1, keepdims=True)
        ok = length[:, 0] > 1e-30
        out[ok] /= length[ok]
        return out

    def surface_area_by_side(self) -> dict[str, float]:
        a, b, c, d = (self.vertices[self.faces[:, k]] for k in range(4))
        area = 0.5 * (
            np.linalg.norm(np.cross(b - a, c - a), axis=1)
            + np.linalg.norm(np.cross(c - a, d - a), axis=1)
        )
        return {
            name: float(area[self.side_tag == idx].sum())
            for idx, name in enumerate(SIDE_NAMES)
        }


def _trapezoid_profile(phase: np.ndarray) -> np.ndarray:
    """Periodic trapezoid in [0, 1]: rise, crest plateau, fall, floor."""
    t = np.mod(phase, 1.0)
    out = np.zeros_like(t)
    rising = t < _PROFILE_RISE
    out[rising] = t[rising] / _PROFILE_RISE
    crest = (t >= _PROFILE_RISE) & (t < _PROFILE_RISE + _PROFILE_CREST)
    out[crest] = 1.0
    f0 = _PROFILE_RISE + _PROFILE_CREST
    falling = (t >= f0) & (t < f0 + _PROFILE_FALL)
    out[falling] = 1.0 - (t[falling] - f0) / _PROFILE_FALL
    return out


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _border_envelope(s: np.ndarray, t: np.ndarray, w: float, h: float) -> np.ndarray:
    """1 in the wall interior, smoothly 0 at the border so side loops stay stitched."""
    margin = min(0.15, 0.25 * min(w, h))
    d = np.minimum(np.minimum(s, w - s), np.minimum(t, h - t))
    return _smoothstep(d / margin)


def _corrugation(spec: ContainerSpec, side: int, s: np.ndarray, t: np.ndarray,
                 w: float, h: float) -> np.ndarray:
    if side not in _WALL_SIDES or spec.corrugation_depth_m == 0.0:
        return np.zeros_like(s)
    # Phase-shift so a crest plateau is centered on the middle vertex column:
    # the nominal depth is then attained exactly at interior grid vertices.
    mid = (round(w * spec.subdivisions_per_meter) // 2) * (
        w / max(1, int(np.ceil(w * spec.subdivisions_per_meter)))
    )
    phase = (s - mid) / spec.corrugation_pitch_m + _PROFILE_RISE + 0.5 * _PROFILE_CREST
    prof = _trapezoid_profile(phase) * _border_envelope(s, t, w, h)
    depth = spec.corrugation_depth_m * prof
    return depth if side in _OUTWARD_CORRUGATED else -depth


def _side_frames(spec: ContainerSpec) -> list[SideFrame]:
    L, W, H = spec.length_m, spec.width_m, spec.height_m
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    hx, hy, hz = L / 2.0, W / 2.0, H / 2.0
    # side, origin, e_s, e_t, n_out, width (along e_s), height (along e_t)
    raw = [
        (DOOR, np.array([hx, -hy, -hz]), ey, ez, ex, W, H),
        (NO_DOOR, np.array([-hx, -hy, -hz]), ey, ez, -ex, W, H),
        (FRONT, np.array([-hx, -hy, -hz]), ex, ez, -ey, L, H),
        (BACK, np.array([-hx, hy, -hz]), ex, ez, ey, L, H),
        (TOP, np.array([-hx, -hy, hz]), ex, ey, ez, L, W),
        (BOTTOM, np.array([-hx, -hy, -hz]), ex, ey, -ez, L, W),
    ]
    frames = []
    v_off = 0
    f_off = 0
    for side, origin, e_s, e_t, n_out, w, h in raw:
        ncols = int(np.ceil(w * spec.subdivisions_per_meter))
        nrows = int(np.ceil(h * spec.subdivisions_per_meter))
        frames.append(SideFrame(side, origin, e_s, e_t, n_out, w, h,
                                ncols, nrows, v_off, f_off))
        v_off += (ncols + 1) * (nrows + 1)
        f_off += ncols * nrows
    return frames


def build_container(spec: ContainerSpec) -> ContainerMesh:
    """Build the subdivided, corrugated container box centered at the origin.

    Pure function of the spec: same spec, identical mesh. Each side has
    ceil(extent * subdivisions_per_meter) quad cells per axis.
    """
    spec.validate()
    frames = _side_frames(spec)
    n_verts = sum((f.ncols + 1) * (f.nrows + 1) for f in frames)
    n_faces = sum(f.ncols * f.nrows for f in frames)

    vertices = np.zeros((n_verts, 3))
    vertex_side = np.zeros(n_verts, dtype=np.uint8)
    faces = np.zeros((n_faces, 4), dtype=np.int32)
    side_tag = np.zeros(n_faces, dtype=np.uint8)

    for f in frames:
        si = np.linspace(0.0, f.width_m, f.ncols + 1)
        ti = np.linspace(0.0, f.height_m, f.nrows + 1)
        ss, tt = np.meshgrid(si, ti)            # (nrows+1, ncols+1)
        disp = _corrugation(spec, f.side, ss.ravel(), tt.ravel(), f.width_m, f.height_m)
        pts = (f.origin
               + ss.ravel()[:, None] * f.e_s
               + tt.ravel()[:, None] * f.e_t
               + disp[:, None] * f.n_out)
        v0, v1 = f.vertex_offset, f.vertex_offset + (f.ncols + 1) * (f.nrows + 1)
        vertices[v0:v1] = pts
        vertex_side[v0:v1] = f.side

        ii, jj = np.meshgrid(np.arange(f.ncols), np.arange(f.nrows))
        ii, jj = ii.ravel(), jj.ravel()
        q00 = f.vertex_offset + jj * (f.ncols + 1) + ii
        q10 = q00 + 1
        q01 = q00 + (f.ncols + 1)
        q11 = q01 + 1
        flip = float(np.dot(np.cross(f.e_s, f.e_t), f.n_out)) < 0.0
        quad = np.stack([q00, q01, q11, q10], axis=1) if flip else \
            np.stack([q00, q10, q11, q01], axis=1)
        f0, f1 = f.face_offset, f.face_offset + f.ncols * f.nrows
        faces[f0:f1] = quad
        side_tag[f0:f1] = f.side

    ref = hashlib.sha256(repr(spec).encode()).hexdigest()[:16]
    mesh = ContainerMesh(
        vertices=vertices,
        faces=faces,
        uv=np.zeros((n_verts, 2)),
        side_tag=side_tag,
        vertex_side=vertex_side,
        face_ids=np.arange(n_faces, dtype=np.int32),
        rest_vertices=vertices.copy(),
        frames={f.name: f for f in frames},
        spec=spec,
        pristine_copy_ref=ref,
    )
    return layout_uv(mesh, *DEFAULT_ATLAS_SIZE)


def layout_uv(mesh: ContainerMesh, atlas_w: int, atlas_h: int) -> ContainerMesh:
    """Assign UVs: one fixed rectangle per side inside a 3x2 cell grid.

    A single pixels-per-meter scale is chosen so every island fits its cell;
    each island's horizontal extent is stretched by the side's developed
    (corrugated) to flat area ratio, keeping island area proportional to the
    side's true surface area. Deterministic for a given mesh and atlas size.
    """
    cell_w = atlas_w / 3.0
    cell_h = atlas_h / 2.0
    cells = {"front": (0, 0), "back": (1, 0), "top": (2, 0),
             "door": (0, 1), "no_door": (1, 1), "bottom": (2, 1)}

    areas = mesh.surface_area_by_side()
    dev_w = {}
    for name, frame in mesh.frames.items():
        flat = frame.width_m * frame.height_m
        stretch = areas[name] / flat if flat > 0 else 1.0
        dev_w[name] = frame.width_m * stretch

    k = min(
        min((cell_w - 2 * _ISLAND_PAD_PX) / dev_w[n] for n in SIDE_NAMES),
        min((cell_h - 2 * _ISLAND_PAD_PX) / mesh.frames[n].height_m for n in SIDE_NAMES),
    )

    out = mesh.copy()
    out.atlas_size = (int(atlas_w), int(atlas_h))
    out.px_per_m = float(k)
    out.islands = {}
    for name, frame in mesh.frames.items():
        cx, cy = cells[name]
        iw = int(round(k * dev_w[name]))
        ih = int(round(k * frame.height_m))
        ix = int(round(cx * cell_w)) + _ISLAND_PAD_PX
        iy = int(round(cy * cell_h)) + _ISLAND_PAD_PX
        out.islands[name] = (ix, iy, iw, ih)

        si = np.linspace(0.0, 1.0, frame.ncols + 1)
        ti = np.linspace(0.0, 1.0, frame.nrows + 1)
        ss, tt = np.meshgrid(si, ti)
        u = (ix + ss.ravel() * iw) / atlas_w
        v = (iy + (1.0 - tt.ravel()) * ih) / atlas_h   # t up -> image row up
        v0, v1 = frame.vertex_offset, frame.vertex_offset + (frame.ncols + 1) * (frame.nrows + 1)
        out.uv[v0:v1, 0] = u
        out.uv[v0:v1, 1] = v
    return out


def island_rect(mesh: ContainerMesh, side: str) -> tuple[int, int, int, int]:
    return mesh.islands[side]


def is_watertight(mesh: ContainerMesh, tol: float = 1e-9) -> bool:
    """True when every boundary edge segment is shared by exactly two sides."""
    edges: dict[tuple, int] = {}
    for face in mesh.faces:
        for k in range(4):
            a, b = int(face[k]), int(face[(k + 1) % 4])
            pa = tuple(np.round(mesh.vertices[a] / tol).astype(np.int64))
            pb = tuple(np.round(mesh.vertices[b] / tol).astype(np.int64))
            key = (min(pa, pb), max(pa, pb))
            edges[key] = edges.get(key, 0) + 1
    return all(count == 2 for count in edges.values())


def export_obj(mesh: ContainerMesh, path) -> None:
    """Write the mesh as ASCII OBJ (v/vt/f records) for debug inspection."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# containerforge mesh: {len(mesh.vertices)} vertices, "
                 f"{len(mesh.faces)} quads\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}\n")
        for uv in mesh.uv:
            fh.write(f"vt {uv[0]:.6f} {1.0 - uv[1]:.6f}\n")
        for face in mesh.faces:
            idx = " ".join(f"{i + 1}/{i + 1}" for i in face)
            fh.write(f"f {idx}\n")
