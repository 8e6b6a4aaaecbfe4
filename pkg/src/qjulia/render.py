"""Orthographic first-hit rendering of the plotted set.

Each pixel casts an axis-aligned ray through the scan region, sampling
at the region's grid step.  The first plotted sample is bracketed with
its unplotted predecessor and refined by bisection, giving a sub-voxel
depth map.  Surface normals come from the depth-map gradient (the
classifier is boolean, there is no smooth scalar field to differentiate)
and pixels are shaded with a simple Lambertian, Lambertian, or Phong
model.  Everything is a pure function of the scene description, so
repeated renders are byte-identical whatever the worker count.

Camera space: +x is image right, +y image up, +z toward the viewer.
Light directions and normals live in that frame regardless of which
region axis the camera looks along.
"""

from __future__ import annotations

import colorsys
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from qjulia import field as fld
from qjulia.dynamics import ClassifierParams, QRationalMap

_ROW_CHUNK = 8

_VIEW_AXES = {"+x": (0, 1), "-x": (0, -1), "+y": (1, 1), "-y": (1, -1), "+z": (2, 1), "-z": (2, -1)}


class LightModel(enum.Enum):
    SIMPLE_LAMBERTIAN = "simple"
    LAMBERTIAN = "lambertian"
    PHONG = "phong"


def normalize3(v: tuple[float, float, float]) -> tuple[float, float, float]:
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    # idempotent on unit vectors so serialized directions reload bit-equal
    if abs(n - 1.0) < 1e-12:
        return (v[0], v[1], v[2])
    return (v[0] / n, v[1] / n, v[2] / n)


@dataclass(frozen=True)
class Camera:
    view_axis: str = "+z"
    image_size: tuple[int, int] = (128, 128)

    def __post_init__(self):
        if self.view_axis not in _VIEW_AXES:
            raise ValueError(f"view_axis must be one of {sorted(_VIEW_AXES)}")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise ValueError("image_size components must be >= 1")


@dataclass(frozen=True)
class LightingParams:
    model: LightModel = LightModel.PHONG
    light_dir: tuple[float, float, float] = (0.0, 0.0, 1.0)
    ambient: float = 0.1
    diffuse: float = 0.7
    specular: float = 0.3
    shininess: float = 16.0

    def __post_init__(self):
        n = math.sqrt(sum(c * c for c in self.light_dir))
        if abs(n - 1.0) > 1e-9:
            raise ValueError("light_dir must be a unit vector")
        for name in ("ambient", "diffuse", "specular"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.shininess < 1.0:
            raise ValueError("shininess must be >= 1")


@dataclass
class DepthMap:
    """Per-pixel first-hit data; row 0 is the top image row."""

    hit: np.ndarray
    depth: np.ndarray
    points: np.ndarray
    steps: np.ndarray
    du: float
    dv: float


def _frame_axes(view_axis: str) -> tuple[int, int, int, int]:
    """(march axis, sign, u axis, v axis) for a view direction."""
    axis, sign = _VIEW_AXES[view_axis]
    u_axis, v_axis = [a for a in (0, 1, 2) if a != axis]
    return axis, sign, u_axis, v_axis


def cast_rays(
    F: QRationalMap,
    region: fld.Region3,
    emb: fld.Embedding,
    params: ClassifierParams,
    camera: Camera,
    k_refine: int = 20,
    workers: int = 1,
) -> DepthMap:
    """March every pixel's ray and record the refined first hit.

    Sampling runs entrance face to exit face at the region's grid step
    along the view axis.  A hit on the very first sample is reported at
    depth zero (the surface starts on or before the entrance face, there
    is no bracket to refine).  Basin interiors behind the first hit are
    never revisited.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    axis, sign, u_axis, v_axis = _frame_axes(camera.view_axis)
    w, h = camera.image_size
    na = region.resolution[axis]
    da = region.step(axis)
    t0 = region.min[axis] if sign > 0 else region.max[axis]
    du = (region.max[u_axis] - region.min[u_axis]) / w
    dv = (region.max[v_axis] - region.min[v_axis]) / h

    us = region.min[u_axis] + (np.arange(w, dtype=np.float64) + 0.5) * du
    vs = region.min[v_axis] + (np.arange(h, dtype=np.float64)[::-1] + 0.5) * dv

    hit = np.zeros((h, w), dtype=bool)
    depth = np.full((h, w), np.inf)
    points = np.zeros((h, w, 4))
    steps_at_hit = np.zeros((h, w), dtype=np.uint32)

    def embed_layer(u, v, t):
        coords = [None, None, None]
        coords[axis] = t
        coords[u_axis] = u
        coords[v_axis] = v
        return fld._embed_batch(emb, coords[0], coords[1], coords[2])

    def run_rows(r0: int, r1: int) -> None:
        rows = r1 - r0
        count = rows * w
        u_flat = np.tile(us, rows)
        v_flat = np.repeat(vs[r0:r1], w)
        alive = np.arange(count)
        bis_idx: list[np.ndarray] = []
        bis_a: list[np.ndarray] = []
        bis_b: list[np.ndarray] = []
        c_hit = np.zeros(count, dtype=bool)
        c_depth = np.full(count, np.inf)
        c_points = np.zeros((count, 4))
        c_steps = np.zeros(count, dtype=np.uint32)

        prev_t = t0
        for j in range(na):
            if alive.size == 0:
                break
            t = region.min[axis] + j * da if sign > 0 else region.max[axis] - j * da
            ts = np.full(alive.size, t)
            hr, hm, hn, hp = embed_layer(u_flat[alive], v_flat[alive], ts)
            tags, steps = fld._classify_batch(F, params, hr, hm, hn, hp)
            plotted = fld.plotted_bits(tags, steps, params)
            if plotted.any():
                g = alive[plotted]
                c_hit[g] = True
                if j == 0:
                    c_depth[g] = 0.0
                    c_points[g] = np.stack(
                        [hr[plotted], hm[plotted], hn[plotted], hp[plotted]], axis=1
                    )
                    c_steps[g] = steps[plotted]
                else:
                    bis_idx.append(g)
                    bis_a.append(np.full(g.size, prev_t))
                    bis_b.append(np.full(g.size, t))
                alive = alive[~plotted]
            prev_t = t

        if bis_idx:
            g = np.concatenate(bis_idx)
            a_t = np.concatenate(bis_a)
            b_t = np.concatenate(bis_b)
            for _ in range(k_refine):
                mid = (a_t + b_t) * 0.5
                hr, hm, hn, hp = embed_layer(u_flat[g], v_flat[g], mid)
                tags, steps = fld._classify_batch(F, params, hr, hm, hn, hp)
                plotted = fld.plotted_bits(tags, steps, params)
                b_t = np.where(plotted, mid, b_t)
                a_t = np.where(plotted, a_t, mid)
            final = (a_t + b_t) * 0.5
            hr, hm, hn, hp = embed_layer(u_flat[g], v_flat[g], final)
            tags, steps = fld._classify_batch(F, params, hr, hm, hn, hp)
            c_depth[g] = (final - t0) * sign
            c_points[g] = np.stack([hr, hm, hn, hp], axis=1)
            c_steps[g] = steps

        sl = slice(r0, r1)
        hit[sl] = c_hit.reshape(rows, w)
        depth[sl] = c_depth.reshape(rows, w)
        points[sl] = c_points.reshape(rows, w, 4)
        steps_at_hit[sl] = c_steps.reshape(rows, w)

    chunks = [(r, min(r + _ROW_CHUNK, h)) for r in range(0, h, _ROW_CHUNK)]
    if workers == 1:
        for r0, r1 in chunks:
            run_rows(r0, r1)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(run_rows, r0, r1) for r0, r1 in chunks]:
                fut.result()

    return DepthMap(hit, depth, points, steps_at_hit, du, dv)


def estimate_normal(dm: DepthMap, row: int, col: int) -> tuple[float, float, float]:
    """Camera-space unit normal from depth differences at a hit pixel.

    Central differences where both neighbors hit, one-sided at the
    silhouette or image edge, flat facing the camera when isolated.
    """
    h, w = dm.hit.shape
    t = dm.depth

    def ok(r: int, c: int) -> bool:
        return 0 <= r < h and 0 <= c < w and bool(dm.hit[r, c])

    if ok(row, col - 1) and ok(row, col + 1):
        dtdx = (t[row, col + 1] - t[row, col - 1]) / (2.0 * dm.du)
    elif ok(row, col + 1):
        dtdx = (t[row, col + 1] - t[row, col]) / dm.du
    elif ok(row, col - 1):
        dtdx = (t[row, col] - t[row, col - 1]) / dm.du
    else:
        dtdx = 0.0

    # image rows grow downward while v grows upward
    if ok(row - 1, col) and ok(row + 1, col):
        dtdy = (t[row - 1, col] - t[row + 1, col]) / (2.0 * dm.dv)
    elif ok(row - 1, col):
        dtdy = (t[row - 1, col] - t[row, col]) / dm.dv
    elif ok(row + 1, col):
        dtdy = (t[row, col] - t[row + 1, col]) / dm.dv
    else:
        dtdy = 0.0

    return normalize3((-dtdx, -dtdy, 1.0))


def shade(normal: tuple[float, float, float], lighting: LightingParams) -> float:
    """Intensity in [0, 1] for a unit camera-space normal."""
    lx, ly, lz = lighting.light_dir
    nx, ny, nz = normal
    nl = nx * lx + ny * ly + nz * lz
    diff = max(0.0, nl)
    if lighting.model is LightModel.SIMPLE_LAMBERTIAN:
        return min(1.0, diff)
    value = lighting.ambient + lighting.diffuse * diff
    if lighting.model is LightModel.PHONG:
        rx = 2.0 * nl * nx - lx
        ry = 2.0 * nl * ny - ly
        rz = 2.0 * nl * nz - lz
        # V = (0,0,1): the camera looks down +z of its own frame
        value += lighting.specular * max(0.0, rz) ** lighting.shininess
    return min(1.0, max(0.0, value))


def render_image(
    F: QRationalMap,
    region: fld.Region3,
    emb: fld.Embedding,
    params: ClassifierParams,
    camera: Camera,
    lighting: LightingParams,
    k_refine: int = 20,
    workers: int = 1,
    palette: str = "gray",
) -> np.ndarray:
    """First-hit render; uint8 grayscale (h, w), or RGB (h, w, 3) for the
    steps palette, which colors hits by convergence step count."""
    if palette not in ("gray", "steps"):
        raise ValueError("palette must be 'gray' or 'steps'")
    dm = cast_rays(F, region, emb, params, camera, k_refine, workers)
    h, w = dm.hit.shape
    if palette == "gray":
        img = np.zeros((h, w), dtype=np.uint8)
    else:
        img = np.zeros((h, w, 3), dtype=np.uint8)
    for row in range(h):
        for col in range(w):
            if not dm.hit[row, col]:
                continue
            intensity = shade(estimate_normal(dm, row, col), lighting)
            if palette == "gray":
                img[row, col] = int(intensity * 255.0 + 0.5)
            else:
                hue = (int(dm.steps[row, col]) % 32) / 32.0
                r, g, b = colorsys.hsv_to_rgb(hue, 1.0, intensity)
                img[row, col] = (
                    int(r * 255.0 + 0.5),
                    int(g * 255.0 + 0.5),
                    int(b * 255.0 + 0.5),
                )
    return img


def write_ppm(path, image: np.ndarray) -> None:
    """Binary P6; grayscale input is replicated into the three channels."""
    if image.dtype != np.uint8:
        raise ValueError("image must be uint8")
    if image.ndim == 2:
        image = np.repeat(image[:, :, None], 3, axis=2)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("image must be (h, w) or (h, w, 3)")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image).tobytes())
