"""Damage operators: edge sinking, face bowing, elongated folds, and holes.

Every operator is a pure transform: it evaluates a displacement field on the
mesh's rest positions and returns a new mesh, so damages with disjoint
supports commute exactly. Ground-truth regions come from diffing the mesh
against its state before the damage was applied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .geometry import ContainerMesh, SIDE_NAMES

# Sanity bounds on how deep each operator may push, meters.
MAX_DEPTH = {"axis": 0.15, "concave": 0.10, "dented": 0.03, "perforation": 0.05}

DEFAULT_REGION_EPS_M = 0.001


class DeformError(ValueError):
    pass


class DamageKind(enum.Enum):
    AXIS = "axis"
    CONCAVE = "concave"
    DENTED = "dented"
    PERFORATION = "perforation"


ALL_KINDS = (DamageKind.AXIS, DamageKind.CONCAVE, DamageKind.DENTED,
             DamageKind.PERFORATION)


@dataclass
class DamagePlan:
    """Outcome of the per-container damage lottery, before application."""

    damaged: bool
    kinds: list[DamageKind] = field(default_factory=list)


@dataclass
class RegionMesh:
    """Compact submesh of the damaged area, used for annotation rendering."""

    vertices: np.ndarray
    faces: np.ndarray
    uv: np.ndarray
    face_ids: np.ndarray    # stable ids into the container mesh

    @property
    def empty(self) -> bool:
        return len(self.faces) == 0


@dataclass
class DamageInstance:
    """One applied damage with everything annotation needs."""

    kind: DamageKind
    side: str
    seed_params: dict
    affected_vertices: np.ndarray
    region: RegionMesh
    instance_id: int        # unique among damages in a scene, 1..99
    aged_transfer: bool = False


def plan_damages(rng: np.random.Generator, p_damage: float,
                 max_per_container: int) -> DamagePlan:
    """Bernoulli(p_damage) gate; if damaged, count ~ U{1..max}, kinds ~ U(4)."""
    if not 0.0 <= p_damage <= 1.0:
        raise DeformError(f"p_damage must be in [0, 1], got {p_damage}")
    if max_per_container < 1:
        raise DeformError("max_per_container must be >= 1")
    if rng.random() >= p_damage:
        return DamagePlan(damaged=False)
    count = int(rng.integers(1, max_per_container + 1))
    kinds = [ALL_KINDS[int(rng.integers(0, 4))] for _ in range(count)]
    return DamagePlan(damaged=True, kinds=kinds)


def _cos_falloff(d: np.ndarray, radius: float) -> np.ndarray:
    """C1 bump: 1 at d=0, 0 at d>=radius, zero slope at both ends."""
    w = np.zeros_like(d)
    inside = d < radius
    w[inside] = 0.5 * (1.0 + np.cos(np.pi * d[inside] / radius))
    return w


def box_edges(mesh: ContainerMesh) -> list[tuple[np.ndarray, np.ndarray, str, str]]:
    """The 12 box edges as (endpoint_a, endpoint_b, side_a, side_b)."""
    L, W, H = mesh.spec.length_m, mesh.spec.width_m, mesh.spec.height_m
    hx, hy, hz = L / 2, W / 2, H / 2
    e = []
    # 4 vertical edges
    e.append(((hx, -hy, -hz), (hx, -hy, hz), "door", "front"))
    e.append(((hx, hy, -hz), (hx, hy, hz), "door", "back"))
    e.append(((-hx, -hy, -hz), (-hx, -hy, hz), "no_door", "front"))
    e.append(((-hx, hy, -hz), (-hx, hy, hz), "no_door", "back"))
    # 4 top edges
    e.append(((-hx, -hy, hz), (hx, -hy, hz), "front", "top"))
    e.append(((-hx, hy, hz), (hx, hy, hz), "back", "top"))
    e.append(((hx, -hy, hz), (hx, hy, hz), "door", "top"))
    e.append(((-hx, -hy, hz), (-hx, hy, hz), "no_door", "top"))
    # 4 bottom edges
    e.append(((-hx, -hy, -hz), (hx, -hy, -hz), "front", "bottom"))
    e.append(((-hx, hy, -hz), (hx, hy, -hz), "back", "bottom"))
    e.append(((hx, -hy, -hz), (hx, hy, -hz), "door", "bottom"))
    e.append(((-hx, -hy, -hz), (-hx, hy, -hz), "no_door", "bottom"))
    return [(np.array(a, float), np.array(b, float), sa, sb) for a, b, sa, sb in e]


def _edge_inward_dir(mesh: ContainerMesh, side_a: str, side_b: str) -> np.ndarray:
    na = mesh.frames[side_a].n_out
    nb = mesh.frames[side_b].n_out
    d = -(na + nb)
    return d / np.linalg.norm(d)


def apply_axis(mesh: ContainerMesh, edge_index: int, depth_m: float,
               extent_m: float, rng: np.random.Generator | None = None) -> ContainerMesh:
    """Sink the surface around a point on one of the 12 box edges.

    The hit point defaults to the edge midpoint; with an rng it slides
    uniformly along the middle half of the edge. Displacement is a cosine
    bump of the 3D distance to the hit point, directed along the inward
    bisector of the two adjacent sides.
    """
    if not 0 <= edge_index < 12:
        raise DeformError(f"edge_index must be in [0, 12), got {edge_index}")
    if depth_m < 0 or depth_m > MAX_DEPTH["axis"]:
        raise DeformError(f"axis depth {depth_m} outside [0, {MAX_DEPTH['axis']}]")
    if extent_m <= 0:
        raise DeformError("extent_m must be positive")

    a, b, side_a, side_b = box_edges(mesh)[edge_index]
    t = 0.5 if rng is None else float(rng.uniform(0.25, 0.75))
    center = a + t * (b - a)
    direction = _edge_inward_dir(mesh, side_a, side_b)

    out = mesh.copy()
    if depth_m == 0.0:
        return out
    d = np.linalg.norm(out.rest_vertices - center, axis=1)
    w = _cos_falloff(d, extent_m)
    out.vertices = out.vertices + depth_m * w[:, None] * direction
    return out


def apply_concave(mesh: ContainerMesh, side: str, center_uv: tuple[float, float],
                  radius_m: float, depth_m: float) -> ContainerMesh:
    """Bow one wall inward: radial cosine bump around a point on the side.

    center_uv is in the side's normalized (s, t) chart. The bump must fit
    inside the side; placements crossing the border are rejected.
    """
    if side not in SIDE_NAMES:
        raise DeformError(f"unknown side {side!r}")
    if depth_m < 0 or depth_m > MAX_DEPTH["concave"]:
        raise DeformError(f"concave depth {depth_m} outside [0, {MAX_DEPTH['concave']}]")
    frame = mesh.frames[side]
    cs = center_uv[0] * frame.width_m
    ct = center_uv[1] * frame.height_m
    tol = 0.01
    if (cs - radius_m < -tol or cs + radius_m > frame.width_m + tol
            or ct - radius_m < -tol or ct + radius_m > frame.height_m + tol):
        raise DeformError(
            f"concave of radius {radius_m} at uv {center_uv} overlaps the "
            f"{side} boundary")

    out = mesh.copy()
    if depth_m == 0.0:
        return out
    vidx = out.vertices_of_side(side)
    st = frame.local_coords(out.rest_vertices[vidx])
    r = np.hypot(st[:, 0] - cs, st[:, 1] - ct)
    w = _cos_falloff(r, radius_m)
    out.vertices[vidx] -= depth_m * w[:, None] * frame.n_out
    return out


def dent_spline_path(frame, spline_params: dict, samples: int = 256) -> np.ndarray:
    """Polyline of the fold path in side-local meters, alternating straight
    and sinusoidal stretches."""
    su, sv = spline_params["start_uv"]
    angle = float(spline_params["angle_rad"])
    length = float(spline_params["length_m"])
    segments = max(1, int(spline_params.get("segments", 4)))
    wobble = float(spline_params.get("wobble_m", 0.05))

    t = np.linspace(0.0, 1.0, samples)
    seg = np.minimum((t * segments).astype(int), segments - 1)
    local = t * segments - seg
    # odd segments wobble laterally with a full sine arc, even ones run straight
    lateral = np.where(seg % 2 == 1, wobble * np.sin(np.pi * local), 0.0)

    along = np.array([np.cos(angle), np.sin(angle)])
    across = np.array([-np.sin(angle), np.cos(angle)])
    start = np.array([su * frame.width_m, sv * frame.height_m])
    return start + t[:, None] * length * along + lateral[:, None] * across


def _point_polyline_dist(points: np.ndarray, path: np.ndarray) -> np.ndarray:
    """Min distance from each 2D point to a polyline, vectorized over segments."""
    a = path[:-1]
    b = path[1:]
    ab = b - a
    ab_len2 = np.maximum((ab * ab).sum(axis=1), 1e-30)
    best = np.full(len(points), np.inf)
    for k in range(len(a)):
        ap = points - a[k]
        t = np.clip(ap @ ab[k] / ab_len2[k], 0.0, 1.0)
        proj = a[k] + t[:, None] * ab[k]
        d = np.linalg.norm(points - proj, axis=1)
        np.minimum(best, d, out=best)
    return best


def apply_dented(mesh: ContainerMesh, side: str, spline_params: dict,
                 fold_depth_m: float) -> ContainerMesh:
    """Sink a narrow elongated band along a wobbly path on one wall."""
    if side not in SIDE_NAMES:
        raise DeformError(f"unknown side {side!r}")
    if fold_depth_m < 0 or fold_depth_m > MAX_DEPTH["dented"]:
        raise DeformError(f"dented depth {fold_depth_m} outside [0, {MAX_DEPTH['dented']}]")
    frame = mesh.frames[side]
    path = dent_spline_path(frame, spline_params)
    band = float(spline_params.get(
        "band_m", max(0.06, 1.0 / mesh.spec.subdivisions_per_meter)))
    lo = path.min(axis=0) - band
    hi = path.max(axis=0) + band
    if lo[0] < 0 or lo[1] < 0 or hi[0] > frame.width_m or hi[1] > frame.height_m:
        raise DeformError(f"dent path escapes the {side} side")

    out = mesh.copy()
    if fold_depth_m == 0.0:
        return out
    vidx = out.vertices_of_side(side)
    st = frame.local_coords(out.rest_vertices[vidx])
    d = _point_polyline_dist(st, path)
    w = _cos_falloff(d, band)
    out.vertices[vidx] -= fold_depth_m * w[:, None] * frame.n_out
    return out


def point_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd crossing test, vectorized over points. poly is (k, 2) closed
    implicitly."""
    x = points[:, 0]
    y = points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    k = len(poly)
    for i in range(k):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % k]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    return inside


def _dist_to_polygon_edges(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    closed = np.vstack([poly, poly[:1]])
    return _point_polyline_dist(points, closed)


def apply_perforation(mesh: ContainerMesh, side: str, blob_outline_uv: np.ndarray,
                      depth_m: float) -> ContainerMesh:
    """Carve a hole: remove faces inside the blob, drag the rim inward.

    blob_outline_uv is a closed polygon in the side's normalized chart. Faces
    with every corner and the centroid inside the blob are deleted; vertices
    on or near the new rim sink by up to depth_m with a smooth falloff. An
    empty outline is a no-op; a non-empty blob that removes no faces is an
    error (the hole would not exist).
    """
    if side not in SIDE_NAMES:
        raise DeformError(f"unknown side {side!r}")
    if depth_m < 0 or depth_m > MAX_DEPTH["perforation"]:
        raise DeformError(
            f"perforation depth {depth_m} outside [0, {MAX_DEPTH['perforation']}]")
    blob = np.asarray(blob_outline_uv, dtype=float)
    if blob.size == 0 or len(blob) < 3:
        return mesh.copy()
    frame = mesh.frames[side]
    poly = blob * np.array([frame.width_m, frame.height_m])

    out = mesh.copy()
    fidx = out.faces_of_side(side)
    quads = out.faces[fidx]
    st_all = frame.local_coords(out.rest_vertices[out.vertices_of_side(side)])
    # map global vertex index -> row in st_all
    vmap = np.full(len(out.vertices), -1, dtype=np.int64)
    vmap[out.vertices_of_side(side)] = np.arange(len(st_all))
    corner_st = st_all[vmap[quads.ravel()]].reshape(len(quads), 4, 2)
    corners_in = point_in_polygon(
        corner_st.reshape(-1, 2), poly).reshape(len(quads), 4)
    centroid_in = point_in_polygon(corner_st.mean(axis=1), poly)
    removed_local = corners_in.all(axis=1) & centroid_in
    removed = fidx[removed_local]
    if len(removed) == 0:
        raise DeformError("perforation blob too small: no faces inside the outline")

    keep = np.ones(len(out.faces), dtype=bool)
    keep[removed] = False
    removed_verts = np.unique(out.faces[removed].ravel())
    out.faces = out.faces[keep]
    out.side_tag = out.side_tag[keep]
    out.face_ids = out.face_ids[keep]

    if depth_m > 0.0:
        vidx = out.vertices_of_side(side)
        st = frame.local_coords(out.rest_vertices[vidx])
        inside = point_in_polygon(st, poly)
        d = _dist_to_polygon_edges(st, poly)
        band = float(3.0 / mesh.spec.subdivisions_per_meter)
        w = np.where(inside, 1.0, _cos_falloff(d, band))
        out.vertices[vidx] -= depth_m * w[:, None] * frame.n_out
    # rim vertices belong to removed faces too; they were displaced above
    _ = removed_verts
    return out


def extract_damage_region(pristine: ContainerMesh, deformed: ContainerMesh,
                          kind: DamageKind,
                          eps_m: float = DEFAULT_REGION_EPS_M) -> RegionMesh:
    """Faces touched by the damage, found by diffing vertex positions.

    The two meshes must share vertices; the deformed mesh may only be missing
    faces (hole carving). For perforations the faces ringing the hole are
    included even when barely displaced.
    """
    if len(pristine.vertices) != len(deformed.vertices):
        raise DeformError("meshes do not share a vertex set")
    pristine_ids = set(pristine.face_ids.tolist())
    deformed_ids = set(deformed.face_ids.tolist())
    if not deformed_ids <= pristine_ids:
        raise DeformError("deformed mesh has faces the pristine mesh lacks")
    if kind != DamageKind.PERFORATION and deformed_ids != pristine_ids:
        raise DeformError(f"faces were removed but damage kind is {kind.value}")

    disp = np.linalg.norm(deformed.vertices - pristine.vertices, axis=1)
    moved = disp > eps_m
    face_moved = moved[deformed.faces].any(axis=1)

    if kind == DamageKind.PERFORATION:
        removed_ids = pristine_ids - deformed_ids
        id_rows = {int(fid): i for i, fid in enumerate(pristine.face_ids)}
        removed_rows = [id_rows[fid] for fid in removed_ids]
        rim_verts = np.unique(pristine.faces[removed_rows].ravel()) \
            if removed_rows else np.array([], dtype=np.int64)
        rim_set = np.zeros(len(deformed.vertices), dtype=bool)
        rim_set[rim_verts] = True
        face_moved |= rim_set[deformed.faces].any(axis=1)

    rows = np.nonzero(face_moved)[0]
    return _submesh(deformed, rows)


def _submesh(mesh: ContainerMesh, face_rows: np.ndarray) -> RegionMesh:
    faces = mesh.faces[face_rows]
    used = np.unique(faces.ravel())
    remap = np.full(len(mesh.vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return RegionMesh(
        vertices=mesh.vertices[used].copy(),
        faces=remap[faces].astype(np.int32),
        uv=mesh.uv[used].copy(),
        face_ids=mesh.face_ids[face_rows].copy(),
    )


def affected_vertex_set(before: ContainerMesh, after: ContainerMesh,
                        eps_m: float = 1e-12) -> np.ndarray:
    disp = np.linalg.norm(after.vertices - before.vertices, axis=1)
    return np.nonzero(disp > eps_m)[0]
