"""Top-down orthographic id/depth rasterizer.

Each pixel casts a vertical ray from the camera plane straight down and keeps
the nearest analytic intersection among sphere / box / cylinder primitives;
depth is the distance from the camera plane to that surface. The manipulator
and the container are never rasterized: the measurement protocol parks the
hand out of view, and the box floor/walls cannot occlude anything from above.

Image axes: row v maps to world x, column u to world y, both through the
camera center and meters_per_pixel. The id buffer holds body ids (0 =
background); the depth buffer holds +inf where nothing was hit.

The restricted-window path rasterizes only the target's projected footprint.
Any pixel showing the target lies inside that footprint, so statistics taken
on the window equal statistics on the full frame; a test pins that equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .geom import quat_to_matrix
from .physics.world import WorldBatch


@dataclass(frozen=True)
class CameraModel:
    """Orthographic top-down camera."""

    center: tuple = (0.0, 0.0, 0.80)
    width: int = 1024
    height: int = 512
    meters_per_pixel: float = 7.6e-4

    def pixel_origin(self):
        """World (x, y) of pixel (v=0, u=0) center."""
        cx, cy, _ = self.center
        x0 = cx + (0.5 - self.height / 2.0) * self.meters_per_pixel
        y0 = cy + (0.5 - self.width / 2.0) * self.meters_per_pixel
        return x0, y0

    def covers(self, half_x: float, half_y: float, margin: float = 1.1) -> bool:
        ext_x = self.height * self.meters_per_pixel / 2.0
        ext_y = self.width * self.meters_per_pixel / 2.0
        return ext_x >= margin * half_x and ext_y >= margin * half_y


@dataclass
class SegDepthImage:
    id_buffer: np.ndarray     # (H, W) int32, 0 = background
    depth_buffer: np.ndarray  # (H, W) float64, +inf = background


@dataclass
class PixelStats:
    """Target statistics on one image; all-zero sentinel when count == 0."""

    bbox: tuple = (0, 0, 0, 0)  # (x, y, w, h) = (min col, min row, width, height)
    area: int = 0               # w * h
    center_depth: float = 0.0   # depth at bbox center pixel; 0 if not the target
    count: int = 0              # exact visible pixel count


@njit(cache=True, fastmath=False)
def _raster(v0, v1, u0, u1, x0, y0, cam_z, mpp,
            pos, rot, kind, dims, consider,
            body_ids, out_id, out_depth, hit_count, target_row):
    """Rasterize rows [v0, v1) x cols [u0, u1); out buffers are (v1-v0, u1-u0).

    hit_count[0] accumulates pixels where body `target_row` itself intersects
    the ray (ignoring occluders), which equals its isolated-render count.
    """
    nb = pos.shape[0]
    for v in range(v0, v1):
        x = x0 + v * mpp
        for u in range(u0, u1):
            y = y0 + u * mpp
            best_t = np.inf
            best_id = 0
            for b in range(nb):
                if consider[b] == 0:
                    continue
                t = -1.0
                k = kind[b]
                if k == 0:  # sphere
                    dx = x - pos[b, 0]
                    dy = y - pos[b, 1]
                    rr = dims[b, 0] * dims[b, 0] - dx * dx - dy * dy
                    if rr >= 0.0:
                        zs = pos[b, 2] + np.sqrt(rr)
                        if zs <= cam_z:
                            t = cam_z - zs
                else:
                    # local-frame ray: origin o, direction d (unit, downward)
                    rx = x - pos[b, 0]
                    ry = y - pos[b, 1]
                    rz = cam_z - pos[b, 2]
                    ox = rot[b, 0, 0] * rx + rot[b, 1, 0] * ry + rot[b, 2, 0] * rz
                    oy = rot[b, 0, 1] * rx + rot[b, 1, 1] * ry + rot[b, 2, 1] * rz
                    oz = rot[b, 0, 2] * rx + rot[b, 1, 2] * ry + rot[b, 2, 2] * rz
                    dxl = -rot[b, 2, 0]
                    dyl = -rot[b, 2, 1]
                    dzl = -rot[b, 2, 2]
                    if k == 1:  # box slab test
                        tmin = -np.inf
                        tmax = np.inf
                        ok = True
                        o3 = (ox, oy, oz)
                        d3 = (dxl, dyl, dzl)
                        for ax in range(3):
                            h = dims[b, ax]
                            dv = d3[ax]
                            ov = o3[ax]
                            if dv > 1e-12 or dv < -1e-12:
                                t1 = (-h - ov) / dv
                                t2 = (h - ov) / dv
                                if t1 > t2:
                                    t1, t2 = t2, t1
                                if t1 > tmin:
                                    tmin = t1
                                if t2 < tmax:
                                    tmax = t2
                            elif ov < -h or ov > h:
                                ok = False
                                break
                        if ok and tmax >= tmin and tmax >= 0.0:
                            t = tmin if tmin > 0.0 else 0.0
                    else:  # cylinder: radial shell + caps, axis local z
                        r = dims[b, 0]
                        hh = dims[b, 1]
                        tbest = np.inf
                        a = dxl * dxl + dyl * dyl
                        if a > 1e-14:
                            bq = 2.0 * (ox * dxl + oy * dyl)
                            cq = ox * ox + oy * oy - r * r
                            disc = bq * bq - 4.0 * a * cq
                            if disc >= 0.0:
                                sq = np.sqrt(disc)
                                for sgn in range(2):
                                    tc = (-bq - sq) / (2.0 * a) if sgn == 0 else (-bq + sq) / (2.0 * a)
                                    if tc >= 0.0 and tc < tbest:
                                        zl = oz + tc * dzl
                                        if -hh <= zl <= hh:
                                            tbest = tc
                        if dzl > 1e-12 or dzl < -1e-12:
                            for sgn in range(2):
                                zcap = hh if sgn == 0 else -hh
                                tc = (zcap - oz) / dzl
                                if 0.0 <= tc < tbest:
                                    xl = ox + tc * dxl
                                    yl = oy + tc * dyl
                                    if xl * xl + yl * yl <= r * r:
                                        tbest = tc
                        if np.isfinite(tbest):
                            t = tbest
                if t >= 0.0:
                    if b == target_row:
                        hit_count[0] += 1
                    if t < best_t:
                        best_t = t
                        best_id = body_ids[b]
            out_id[v - v0, u - u0] = best_id
            out_depth[v - v0, u - u0] = best_t


def _consider_mask(world: WorldBatch, env: int, only: np.ndarray | None = None) -> np.ndarray:
    mask = (world.active[env] != 0).astype(np.uint8)
    if only is not None:
        mask &= only.astype(np.uint8)
    return mask


def render_topdown(world: WorldBatch, camera: CameraModel, env: int = 0,
                   body_filter: np.ndarray | None = None) -> SegDepthImage:
    """Full-frame render of env `env`. Pure function of (world, camera)."""
    H, W = camera.height, camera.width
    x0, y0 = camera.pixel_origin()
    out_id = np.zeros((H, W), dtype=np.int32)
    out_depth = np.full((H, W), np.inf)
    rot = quat_to_matrix(world.quat[env])
    consider = _consider_mask(world, env, body_filter)
    hits = np.zeros(1, dtype=np.int64)
    _raster(0, H, 0, W, x0, y0, camera.center[2], camera.meters_per_pixel,
            world.pos[env], rot, world.shape_kind[env], world.shape_dims[env], consider,
            world.body_ids, out_id, out_depth, hits, -1)
    return SegDepthImage(out_id, out_depth)


def target_pixel_stats(img: SegDepthImage, target_id: int) -> PixelStats:
    """Tight bbox, area, center-pixel depth, and exact count for target_id."""
    vs, us = np.nonzero(img.id_buffer == target_id)
    if vs.size == 0:
        return PixelStats()
    x = int(us.min())
    y = int(vs.min())
    w = int(us.max()) - x + 1
    h = int(vs.max()) - y + 1
    cu = x + w // 2
    cv = y + h // 2
    d = float(img.depth_buffer[cv, cu]) if img.id_buffer[cv, cu] == target_id else 0.0
    return PixelStats(bbox=(x, y, w, h), area=w * h, center_depth=d, count=int(vs.size))


@dataclass
class WindowStats:
    """Target statistics from a footprint-restricted render."""

    stats: PixelStats
    p_curr: int
    p_all: int

    @property
    def exposure(self) -> float:
        return self.p_curr / self.p_all if self.p_all > 0 else 0.0


def target_window_stats(world: WorldBatch, camera: CameraModel, env: int = 0) -> WindowStats:
    """PixelStats plus (p_curr, p_all) from the target's projected window.

    p_all counts pixels the isolated target would cover at its current pose,
    identical to deleting every other body and re-rendering.
    """
    ti = world.target_index(env)
    H, W = camera.height, camera.width
    mpp = camera.meters_per_pixel
    x0, y0 = camera.pixel_origin()
    cx, cy = world.pos[env, ti, 0], world.pos[env, ti, 1]
    r = world.wall_r[env, ti]  # horizontal circumradius bounds the projection
    v0 = max(0, int(np.floor((cx - r - x0) / mpp)))
    v1 = min(H, int(np.ceil((cx + r - x0) / mpp)) + 1)
    u0 = max(0, int(np.floor((cy - r - y0) / mpp)))
    u1 = min(W, int(np.ceil((cy + r - y0) / mpp)) + 1)
    if v0 >= v1 or u0 >= u1:
        return WindowStats(PixelStats(), 0, 0)

    # cull bodies whose projected footprint cannot reach the window
    wx0, wx1 = x0 + v0 * mpp - mpp, x0 + (v1 - 1) * mpp + mpp
    wy0, wy1 = y0 + u0 * mpp - mpp, y0 + (u1 - 1) * mpp + mpp
    px, py = world.pos[env, :, 0], world.pos[env, :, 1]
    rr = world.wall_r[env]
    near = (px + rr >= wx0) & (px - rr <= wx1) & (py + rr >= wy0) & (py - rr <= wy1)
    consider = _consider_mask(world, env, near)

    h, w = v1 - v0, u1 - u0
    out_id = np.zeros((h, w), dtype=np.int32)
    out_depth = np.full((h, w), np.inf)
    rot = quat_to_matrix(world.quat[env])
    hits = np.zeros(1, dtype=np.int64)
    _raster(v0, v1, u0, u1, x0, y0, camera.center[2], mpp,
            world.pos[env], rot, world.shape_kind[env], world.shape_dims[env], consider,
            world.body_ids, out_id, out_depth, hits, ti)

    tid = int(world.body_ids[ti])
    vs, us = np.nonzero(out_id == tid)
    if vs.size == 0:
        return WindowStats(PixelStats(), 0, int(hits[0]))
    x = int(us.min()) + u0
    y = int(vs.min()) + v0
    bw = int(us.max()) + u0 - x + 1
    bh = int(vs.max()) + v0 - y + 1
    cu = x + bw // 2 - u0
    cv = y + bh // 2 - v0
    d = float(out_depth[cv, cu]) if out_id[cv, cu] == tid else 0.0
    stats = PixelStats(bbox=(x, y, bw, bh), area=bw * bh, center_depth=d, count=int(vs.size))
    return WindowStats(stats, int(vs.size), int(hits[0]))


def write_pgm(path, array: np.ndarray, maxval: int = 65535):
    """Plain-text PGM dump of an integer-scaled buffer (debug aid)."""
    arr = np.asarray(array)
    if arr.dtype.kind == "f":
        finite = np.isfinite(arr)
        top = arr[finite].max() if finite.any() else 1.0
        arr = np.where(finite, arr / max(top, 1e-12) * maxval, 0).astype(np.int64)
    arr = np.clip(arr.astype(np.int64), 0, maxval)
    with open(path, "w") as f:
        f.write(f"P2\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n")
        for row in arr:
            f.write(" ".join(str(v) for v in row) + "\n")
