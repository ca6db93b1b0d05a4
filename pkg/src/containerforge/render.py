"""Deterministic software renderer.

One rasterization per (scene, camera) produces depth, face, UV and normal
buffers; every output pass (shaded beauty, per-entity binary masks, 16-bit
label image) is derived from those buffers, so the passes are mutually
consistent by construction. Lighting is an equirectangular environment map:
cosine-weighted irradiance for the diffuse term, a single mirror lookup
scaled by (1 - roughness) for the specular term, and the map itself as
background. No anti-aliasing: one primary sample per pixel keeps label
images exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .geometry import ContainerMesh

_SPECULAR_STRENGTH = 0.5
_NEAR_PLANE = 1e-4

VOID_CODE = 0


class RenderError(ValueError):
    pass


# --- cameras ----------------------------------------------------------------

@dataclass
class Camera:
    position: np.ndarray            # (3,) meters
    rotation: np.ndarray            # (3, 3) world->camera, rows right/down/forward
    focal_length_mm: float
    sensor_width_mm: float
    resolution: tuple[int, int]     # (W, H)
    name: str

    def __post_init__(self):
        if self.focal_length_mm <= 0:
            raise RenderError("focal length must be positive")
        if self.resolution[0] <= 0 or self.resolution[1] <= 0:
            raise RenderError("resolution must be positive")
        self.position = np.asarray(self.position, dtype=float)
        self.rotation = np.asarray(self.rotation, dtype=float)

    @property
    def pixel_scale(self) -> float:
        return self.focal_length_mm / self.sensor_width_mm * self.resolution[0]


def look_at(position, target, up=(0.0, 0.0, 1.0), *, focal_length_mm: float,
            sensor_width_mm: float = 36.0, resolution=(1280, 960),
            name: str = "") -> Camera:
    position = np.asarray(position, dtype=float)
    forward = np.asarray(target, dtype=float) - position
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=float))
    right = right / np.linalg.norm(right)
    down = np.cross(forward, right)
    rot = np.stack([right, down, forward])
    return Camera(position, rot, focal_length_mm, sensor_width_mm,
                  tuple(resolution), name)


def project(camera: Camera, point3) -> tuple[float, float] | None:
    """Pinhole projection to pixel coordinates; None when behind the camera."""
    pc = camera.rotation @ (np.asarray(point3, dtype=float) - camera.position)
    if pc[2] <= _NEAR_PLANE:
        return None
    w, h = camera.resolution
    s = camera.pixel_scale
    return (w / 2.0 + pc[0] / pc[2] * s, h / 2.0 + pc[1] / pc[2] * s)


def pixel_ray_dirs(camera: Camera) -> np.ndarray:
    """World-space unit direction through every pixel center, (H, W, 3)."""
    w, h = camera.resolution
    s = camera.pixel_scale
    xs = (np.arange(w) + 0.5 - w / 2.0) / s
    ys = (np.arange(h) + 0.5 - h / 2.0) / s
    dx, dy = np.meshgrid(xs, ys)
    d = np.stack([dx, dy, np.ones_like(dx)], axis=-1)
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    return d @ camera.rotation   # row vectors times R == R^T applied


# --- environment maps -------------------------------------------------------

@dataclass
class EnvironmentMap:
    pixels: np.ndarray              # (H, W, 3) float32 linear radiance, >= 0
    exposure: float = 1.0
    name: str = ""
    _irradiance: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise RenderError("environment map must be (H, W, 3)")
        if np.any(self.pixels < 0):
            raise RenderError("environment radiance must be non-negative")

    def sample(self, dirs: np.ndarray) -> np.ndarray:
        """Bilinear equirectangular lookup, azimuth-seam continuous."""
        d = np.asarray(dirs, dtype=np.float64)
        norm = np.linalg.norm(d, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise RenderError("cannot sample the environment along a zero vector")
        d = d / norm
        return self._lookup(self.pixels, d) * self.exposure

    @staticmethod
    def _lookup(img: np.ndarray, d: np.ndarray) -> np.ndarray:
        h, w = img.shape[:2]
        u = np.arctan2(d[..., 1], d[..., 0]) / (2.0 * np.pi) + 0.5
        v = np.arccos(np.clip(d[..., 2], -1.0, 1.0)) / np.pi
        px = u * w - 0.5
        py = np.clip(v * h - 0.5, 0.0, h - 1.0)
        x0 = np.floor(px).astype(np.int64)
        y0 = np.floor(py).astype(np.int64)
        fx = (px - x0)[..., None]
        fy = (py - y0)[..., None]
        x0 %= w
        x1 = (x0 + 1) % w
        y1 = np.minimum(y0 + 1, h - 1)
        a = img[y0, x0]
        b = img[y0, x1]
        c = img[y1, x0]
        e = img[y1, x1]
        return (a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx
                + c * fy * (1 - fx) + e * fy * fx).astype(np.float64)

    def irradiance(self, normals: np.ndarray) -> np.ndarray:
        """Cosine-weighted hemisphere integral per normal (bilinear from a
        precomputed low-resolution irradiance map)."""
        if self._irradiance is None:
            self._irradiance = self._build_irradiance()
        d = np.asarray(normals, dtype=np.float64)
        d = d / np.maximum(np.linalg.norm(d, axis=-1, keepdims=True), 1e-30)
        return self._lookup(self._irradiance, d) * self.exposure

    def _build_irradiance(self, out_h: int = 16, env_h: int = 32) -> np.ndarray:
        src = self._downsample(self.pixels, env_h, env_h * 2)
        sh, sw = src.shape[:2]
        dirs_src, weights = _equirect_dirs(sh, sw)
        th = out_h
        tw = out_h * 2
        dirs_out, _ = _equirect_dirs(th, tw)
        cosine = np.maximum(dirs_out.reshape(-1, 3) @ dirs_src.reshape(-1, 3).T, 0.0)
        radiance = src.reshape(-1, 3) * weights.reshape(-1, 1)
        out = (cosine @ radiance) / np.pi
        return out.reshape(th, tw, 3).astype(np.float32)

    @staticmethod
    def _downsample(img: np.ndarray, th: int, tw: int) -> np.ndarray:
        h, w = img.shape[:2]
        if h <= th and w <= tw:
            return img
        ys = np.linspace(0, h, th + 1).astype(int)
        xs = np.linspace(0, w, tw + 1).astype(int)
        out = np.empty((th, tw, 3), dtype=np.float64)
        for j in range(th):
            for i in range(tw):
                out[j, i] = img[ys[j]:max(ys[j] + 1, ys[j + 1]),
                                xs[i]:max(xs[i] + 1, xs[i + 1])].mean(axis=(0, 1))
        return out


def _equirect_dirs(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and solid-angle weights of equirect texel centers."""
    theta = (np.arange(h) + 0.5) / h * np.pi
    phi = ((np.arange(w) + 0.5) / w - 0.5) * 2.0 * np.pi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp),
                     np.cos(tt)], axis=-1)
    weights = np.sin(tt) * (np.pi / h) * (2.0 * np.pi / w)
    return dirs, weights


def builtin_environment(name: str, exposure: float = 1.0,
                        resolution: tuple[int, int] = (128, 64)) -> EnvironmentMap:
    """Procedural sky gradients shipped with the generator."""
    w, h = resolution
    v = (np.arange(h) + 0.5) / h          # 0 zenith .. 1 nadir
    u = (np.arange(w) + 0.5) / w
    vv, uu = np.meshgrid(v, u, indexing="ij")
    img = np.zeros((h, w, 3), dtype=np.float32)

    def vertical(c_top, c_horizon, c_ground):
        sky = vv < 0.5
        t = (vv / 0.5)[..., None]
        img[:] = np.where(sky[..., None],
                          np.asarray(c_top) * (1 - t) + np.asarray(c_horizon) * t,
                          0.0)
        g = ((vv - 0.5) / 0.5)[..., None]
        ground = np.asarray(c_horizon) * (1 - g) + np.asarray(c_ground) * g
        img[~sky] = ground[~sky]

    if name == "day":
        vertical((0.30, 0.47, 0.95), (0.85, 0.88, 0.95), (0.23, 0.22, 0.21))
        sun = np.exp(-(((uu - 0.65) * 16) ** 2 + ((vv - 0.22) * 16) ** 2))
        img += (sun[..., None] * np.array([5.0, 4.6, 4.0])).astype(np.float32)
    elif name == "sunset":
        vertical((0.18, 0.16, 0.38), (1.05, 0.55, 0.25), (0.16, 0.13, 0.12))
        sun = np.exp(-(((uu - 0.5) * 20) ** 2 + ((vv - 0.46) * 20) ** 2))
        img += (sun[..., None] * np.array([4.0, 2.0, 0.8])).astype(np.float32)
    elif name == "overcast":
        vertical((0.55, 0.57, 0.60), (0.70, 0.71, 0.72), (0.20, 0.20, 0.20))
    else:
        raise RenderError(f"unknown builtin environment {name!r}")
    return EnvironmentMap(np.clip(img, 0.0, None), exposure, f"builtin:{name}")


def load_environment(source: str, exposure: float = 1.0) -> EnvironmentMap:
    """Load 'builtin:<name>', a Radiance .hdr file, or an 8/16-bit PNG."""
    if source.startswith("builtin:"):
        return builtin_environment(source.split(":", 1)[1], exposure)
    lower = source.lower()
    if lower.endswith(".hdr"):
        return EnvironmentMap(read_radiance_hdr(source), exposure, source)
    img = Image.open(source)
    arr = np.asarray(img)
    if arr.dtype == np.uint16 or str(img.mode).startswith("I;16"):
        pixels = np.asarray(img, dtype=np.float32) / 65535.0
        if pixels.ndim == 2:
            pixels = np.repeat(pixels[..., None], 3, axis=2)
    else:
        pixels = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    return EnvironmentMap(pixels, exposure, source)


def read_radiance_hdr(path: str) -> np.ndarray:
    """Minimal Radiance RGBE reader (new-style RLE and flat scanlines)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"#?"):
        raise RenderError(f"{path} is not a Radiance file")
    pos = 0
    while True:
        end = data.index(b"\n", pos)
        line = data[pos:end]
        pos = end + 1
        if line == b"":
            break
    end = data.index(b"\n", pos)
    res = data[pos:end].split()
    pos = end + 1
    if res[0] != b"-Y" or res[2] != b"+X":
        raise RenderError(f"unsupported Radiance orientation {res!r}")
    h, w = int(res[1]), int(res[3])

    rgbe = np.zeros((h, w, 4), dtype=np.uint8)
    for row in range(h):
        if (pos + 4 <= len(data) and data[pos] == 2 and data[pos + 1] == 2
                and (data[pos + 2] << 8 | data[pos + 3]) == w and w >= 8):
            pos += 4
            for c in range(4):
                x = 0
                while x < w:
                    count = data[pos]
                    pos += 1
                    if count > 128:
                        rgbe[row, x:x + count - 128, c] = data[pos]
                        pos += 1
                        x += count - 128
                    else:
                        rgbe[row, x:x + count, c] = np.frombuffer(
                            data, np.uint8, count, pos)
                        pos += count
                        x += count
        else:
            flat = np.frombuffer(data, np.uint8, w * 4, pos).reshape(w, 4)
            rgbe[row] = flat
            pos += w * 4
    mant = rgbe[..., :3].astype(np.float32)
    exp = rgbe[..., 3].astype(np.int32)
    scale = np.where(exp == 0, 0.0, np.ldexp(1.0, exp - 136)).astype(np.float32)
    return (mant + 0.5) * scale[..., None] * np.where(exp[..., None] == 0, 0.0, 1.0)


# --- scene ------------------------------------------------------------------

@dataclass
class Entity:
    entity_id: int
    kind: str                       # container | damage | marker | text
    label: str                      # damage kind, marker code, or "text"
    instance_id: int | None = None  # 1..99 for container/damages
    seg_class_id: int | None = None
    uv_mask: np.ndarray | None = None
    face_ids: np.ndarray | None = None
    payload: str = ""


@dataclass
class PropMesh:
    """Untextured occluder (e.g. a crane clamp loaded from file)."""

    vertices: np.ndarray            # (n, 3)
    faces: np.ndarray               # (m, 3) triangles
    color: tuple[float, float, float] = (0.45, 0.45, 0.48)


@dataclass
class Scene:
    mesh: ContainerMesh
    albedo: np.ndarray              # (H, W, 3) float32 atlas
    roughness: np.ndarray           # (H, W) float atlas
    env: EnvironmentMap
    entities: list[Entity]
    cameras: list[Camera]
    prop: PropMesh | None = None

    def __post_init__(self):
        ids = [e.entity_id for e in self.entities]
        if len(ids) != len(set(ids)):
            raise RenderError("entity ids must be unique")
        for e in self.entities:
            if e.instance_id is not None and not 1 <= e.instance_id <= 99:
                raise RenderError(f"instance id {e.instance_id} outside [1, 99]")
            if e.seg_class_id is not None and not 1 <= e.seg_class_id <= 99:
                raise RenderError(f"class id {e.seg_class_id} outside [1, 99]")

    def entity(self, entity_id: int) -> Entity:
        for e in self.entities:
            if e.entity_id == entity_id:
                return e
        raise RenderError(f"unknown entity id {entity_id}")


@dataclass
class RenderPasses:
    beauty: np.ndarray              # (H, W, 3) uint8
    id_pass: np.ndarray             # (H, W) uint16
    entity_masks: dict[int, np.ndarray]


def encode_label(class_id: int, instance_id: int) -> int:
    if not (1 <= class_id <= 99 and 1 <= instance_id <= 99):
        raise RenderError(f"label ({class_id}, {instance_id}) outside [1, 99]")
    return 100 * class_id + instance_id


def decode_label(value: int) -> tuple[int, int]:
    return (value // 100, value % 100)


# --- rasterization core -----------------------------------------------------

@dataclass
class RasterBuffers:
    depth: np.ndarray               # (H, W) float64, +inf where empty
    face: np.ndarray                # (H, W) int32 row into mesh.faces, -1 none, -2 prop
    uv: np.ndarray                  # (H, W, 2)
    normal: np.ndarray              # (H, W, 3)

    @property
    def covered(self) -> np.ndarray:
        return self.face >= 0


def _triangle_rows(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split quads (n, 4) into triangles (2n, 3) plus source-row lookup."""
    if faces.shape[1] == 4:
        tris = np.concatenate([faces[:, [0, 1, 2]], faces[:, [0, 2, 3]]])
        rows = np.concatenate([np.arange(len(faces))] * 2)
    else:
        tris = faces
        rows = np.arange(len(faces))
    return tris.astype(np.int64), rows


def rasterize(scene: Scene, camera: Camera) -> RasterBuffers:
    w, h = camera.resolution
    depth = np.full((h, w), np.inf)
    face = np.full((h, w), -1, dtype=np.int32)
    uv_buf = np.zeros((h, w, 2))
    nrm_buf = np.zeros((h, w, 3))

    mesh = scene.mesh
    vnormals = mesh.vertex_normals()
    _raster_batch(mesh.vertices, mesh.faces, mesh.uv, vnormals, None,
                  camera, depth, face, uv_buf, nrm_buf)
    if scene.prop is not None:
        _raster_batch(scene.prop.vertices, scene.prop.faces, None, None, -2,
                      camera, depth, face, uv_buf, nrm_buf)
    return RasterBuffers(depth, face, uv_buf, nrm_buf)


def _raster_batch(vertices, faces, uv, vnormals, face_tag, camera,
                  depth, face_buf, uv_buf, nrm_buf) -> None:
    w, h = camera.resolution
    pc = (vertices - camera.position) @ camera.rotation.T
    z = pc[:, 2]
    s = camera.pixel_scale
    safe_z = np.where(z > _NEAR_PLANE, z, 1.0)
    sx = w / 2.0 + pc[:, 0] / safe_z * s
    sy = h / 2.0 + pc[:, 1] / safe_z * s

    tris, rows = _triangle_rows(faces)

    # front-face test in world space against the viewpoint
    a3 = vertices[tris[:, 0]]
    b3 = vertices[tris[:, 1]]
    c3 = vertices[tris[:, 2]]
    n3 = np.cross(b3 - a3, c3 - a3)
    centroid = (a3 + b3 + c3) / 3.0
    facing = np.einsum("ij,ij->i", n3, centroid - camera.position) < 0.0
    in_front = (z[tris] > _NEAR_PLANE).all(axis=1)
    keep = np.nonzero(facing & in_front)[0]

    if uv is None:
        uv = np.zeros((len(vertices), 2))
    if vnormals is None:
        n_unit = n3 / np.maximum(np.linalg.norm(n3, axis=1, keepdims=True), 1e-30)

    for t in keep:
        ia, ib, ic = tris[t]
        ax, ay, az = sx[ia], sy[ia], z[ia]
        bx, by, bz = sx[ib], sy[ib], z[ib]
        cx, cy, cz = sx[ic], sy[ic], z[ic]
        x0 = max(0, int(np.floor(min(ax, bx, cx))))
        x1 = min(w - 1, int(np.ceil(max(ax, bx, cx))))
        y0 = max(0, int(np.floor(min(ay, by, cy))))
        y1 = min(h - 1, int(np.ceil(max(ay, by, cy))))
        if x1 < x0 or y1 < y0:
            continue
        denom = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
        if abs(denom) < 1e-12:
            continue
        px = np.arange(x0, x1 + 1) + 0.5
        py = (np.arange(y0, y1 + 1) + 0.5)[:, None]
        la = ((by - cy) * (px - cx) + (cx - bx) * (py - cy)) / denom
        lb = ((cy - ay) * (px - cx) + (ax - cx) * (py - cy)) / denom
        lc = 1.0 - la - lb
        inside = (la >= 0.0) & (lb >= 0.0) & (lc >= 0.0)
        if not inside.any():
            continue
        inv_z = la / az + lb / bz + lc / cz
        z_px = 1.0 / inv_z
        tile = depth[y0:y1 + 1, x0:x1 + 1]
        closer = inside & (z_px < tile)
        if not closer.any():
            continue
        tile[closer] = z_px[closer]
        face_buf[y0:y1 + 1, x0:x1 + 1][closer] = \
            rows[t] if face_tag is None else face_tag
        upx = (la * uv[ia, 0] / az + lb * uv[ib, 0] / bz + lc * uv[ic, 0] / cz) / inv_z
        vpx = (la * uv[ia, 1] / az + lb * uv[ib, 1] / bz + lc * uv[ic, 1] / cz) / inv_z
        uv_tile = uv_buf[y0:y1 + 1, x0:x1 + 1]
        uv_tile[closer, 0] = upx[closer]
        uv_tile[closer, 1] = vpx[closer]
        if vnormals is not None:
            for k in range(3):
                npx = (la * vnormals[ia, k] / az + lb * vnormals[ib, k] / bz
                       + lc * vnormals[ic, k] / cz) / inv_z
                nrm_buf[y0:y1 + 1, x0:x1 + 1][closer, k] = npx[closer]
        else:
            nrm_buf[y0:y1 + 1, x0:x1 + 1][closer] = n_unit[t]


def sample_bilinear(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Clamped bilinear fetch from an atlas image by normalized UV."""
    h, w = img.shape[:2]
    px = np.clip(u * w - 0.5, 0.0, w - 1.0)
    py = np.clip(v * h - 0.5, 0.0, h - 1.0)
    x0 = np.floor(px).astype(np.int64)
    y0 = np.floor(py).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = px - x0
    fy = py - y0
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    return (img[y0, x0] * (1 - fy) * (1 - fx) + img[y0, x1] * (1 - fy) * fx
            + img[y1, x0] * fy * (1 - fx) + img[y1, x1] * fy * fx)


# --- passes -----------------------------------------------------------------

def render_beauty(scene: Scene, camera: Camera,
                  buffers: RasterBuffers | None = None) -> np.ndarray:
    """Environment-lit shaded image, 8-bit RGB, background = environment."""
    buf = buffers if buffers is not None else rasterize(scene, camera)
    w, h = camera.resolution
    rays = pixel_ray_dirs(camera)
    out = scene.env.sample(rays)

    cov = buf.covered
    if cov.any():
        u = buf.uv[cov, 0]
        v = buf.uv[cov, 1]
        albedo = sample_bilinear(scene.albedo, u, v).astype(np.float64)
        rough = sample_bilinear(scene.roughness, u, v)
        n = buf.normal[cov]
        n = n / np.maximum(np.linalg.norm(n, axis=1, keepdims=True), 1e-30)
        irr = scene.env.irradiance(n)
        d = rays[cov]
        refl = d - 2.0 * np.einsum("ij,ij->i", d, n)[:, None] * n
        spec = scene.env.sample(refl)
        shade = albedo * (irr + _SPECULAR_STRENGTH * (1.0 - rough[:, None]) * spec)
        out[cov] = shade
    if scene.prop is not None:
        prop_px = buf.face == -2
        if prop_px.any():
            n = buf.normal[prop_px]
            irr = scene.env.irradiance(n)
            out[prop_px] = np.asarray(scene.prop.color) * irr
    return np.clip(np.rint(out * 255.0), 0, 255).astype(np.uint8)


def _face_rows_of(mesh: ContainerMesh, face_ids: np.ndarray) -> np.ndarray:
    lut = {int(fid): row for row, fid in enumerate(mesh.face_ids)}
    return np.array([lut[int(f)] for f in face_ids if int(f) in lut],
                    dtype=np.int64)


def render_id_pass(scene: Scene, camera: Camera,
                   buffers: RasterBuffers | None = None) -> np.ndarray:
    """Per-pixel 100*class + instance image, uint16, 0 where no label."""
    buf = buffers if buffers is not None else rasterize(scene, camera)
    code_of_face = np.zeros(len(scene.mesh.faces) + 1, dtype=np.uint16)
    container = [e for e in scene.entities if e.kind == "container"]
    if container:
        e = container[0]
        code_of_face[:-1] = encode_label(e.seg_class_id, e.instance_id)
    for e in scene.entities:
        if e.kind != "damage" or e.face_ids is None:
            continue
        rows = _face_rows_of(scene.mesh, e.face_ids)
        code_of_face[rows] = encode_label(e.seg_class_id, e.instance_id)
    idx = np.where(buf.face >= 0, buf.face, len(scene.mesh.faces))
    out = code_of_face[idx]
    out[buf.face == -2] = VOID_CODE   # props carry no labels
    return out


def render_entity_mask(scene: Scene, camera: Camera, entity_id: int,
                       buffers: RasterBuffers | None = None) -> np.ndarray:
    """Binary visibility mask: pixel set iff the front-most surface belongs
    to the entity (its faces, or container pixels whose texel is in its UV
    mask)."""
    buf = buffers if buffers is not None else rasterize(scene, camera)
    return _entity_mask(scene, buf, scene.entity(entity_id))


def _entity_mask(scene: Scene, buf: RasterBuffers, e: Entity) -> np.ndarray:
    cov = buf.covered
    if e.kind == "container":
        return cov.copy()
    if e.kind == "damage":
        rows = _face_rows_of(scene.mesh, e.face_ids)
        hit = np.zeros(len(scene.mesh.faces) + 1, dtype=bool)
        hit[rows] = True
        idx = np.where(cov, buf.face, len(scene.mesh.faces))
        return hit[idx] & cov
    if e.uv_mask is None:
        raise RenderError(f"entity {e.entity_id} has no mask source")
    mh, mw = e.uv_mask.shape
    out = np.zeros_like(cov)
    if cov.any():
        tx = np.clip((buf.uv[cov, 0] * mw).astype(np.int64), 0, mw - 1)
        ty = np.clip((buf.uv[cov, 1] * mh).astype(np.int64), 0, mh - 1)
        out[cov] = e.uv_mask[ty, tx]
    return out


def render_passes(scene: Scene, camera: Camera) -> RenderPasses:
    """Everything derived from one rasterization: beauty, labels, all masks."""
    buf = rasterize(scene, camera)
    beauty = render_beauty(scene, camera, buf)
    id_pass = render_id_pass(scene, camera, buf)
    masks = {e.entity_id: _entity_mask(scene, buf, e) for e in scene.entities}
    return RenderPasses(beauty, id_pass, masks)


# --- default camera rig -----------------------------------------------------

RIG_FOCALS = {"A": 14.5, "B": 28.0, "Cl": 45.0, "Cr": 45.0}
_RIG_SIDES = {"A": "front", "B": "back", "Cl": "no_door", "Cr": "door"}


def build_camera_rig(mesh: ContainerMesh, resolution=(1280, 960),
                     sensor_width_mm: float = 36.0, fill_fraction: float = 0.75,
                     jitter_m: float = 0.3,
                     rng: np.random.Generator | None = None,
                     focals: dict[str, float] | None = None) -> list[Camera]:
    """Four cameras, one per vertical side, each framing the container so it
    fills roughly ``fill_fraction`` of the image before jitter."""
    spec = mesh.spec
    w, h = resolution
    focals = dict(RIG_FOCALS if focals is None else focals)
    extents = {
        "front": (spec.length_m, spec.height_m, spec.width_m),
        "back": (spec.length_m, spec.height_m, spec.width_m),
        "door": (spec.width_m, spec.height_m, spec.length_m),
        "no_door": (spec.width_m, spec.height_m, spec.length_m),
    }
    cams = []
    for name in ("A", "B", "Cl", "Cr"):
        side = _RIG_SIDES[name]
        face_w, face_h, depth = extents[side]
        f = focals[name]
        ratio = f / sensor_width_mm
        d = max(face_w * ratio / fill_fraction,
                face_h * ratio * (w / h) / fill_fraction) + depth / 2.0
        n_out = mesh.frames[side].n_out
        pos = n_out * d
        if rng is not None and jitter_m > 0:
            pos = pos + rng.uniform(-jitter_m, jitter_m, size=3)
        cams.append(look_at(pos, (0.0, 0.0, 0.0), focal_length_mm=f,
                            sensor_width_mm=sensor_width_mm,
                            resolution=resolution, name=name))
    return cams
