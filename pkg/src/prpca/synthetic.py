"""Synthetic panning scenes with exact ground truth.

A textured static panorama is cropped by a translating window (one pure
translation per frame, known exactly) and a smooth-intensity blob moves
through the scene. The generator returns everything an evaluation needs:
clean frames, per-frame foreground masks, the true background panorama, and
the true frame-to-anchor homographies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .homography import translation_homography


@dataclass(frozen=True)
class SceneConfig:
    frame_height: int = 48
    frame_width: int = 48
    num_frames: int = 12
    pan_x: float = 3.0  # window shift per frame, integer values keep truth exact
    pan_y: float = 0.0
    blob_radius: float = 6.0
    blob_aspect: float = 1.0  # vertical stretch; > 1 gives a tall ellipse
    blob_start: tuple[float, float] | None = None  # panorama (x, y); defaults to center
    blob_velocity: tuple[float, float] = (1.5, 0.5)
    blob_intensity: float = 0.95
    texture_sigma: float = 2.0
    seed: int = 0


@dataclass
class GroundTruth:
    clean: np.ndarray  # (a, b, p) frames in [0, 1]
    fg_masks: np.ndarray  # (a, b, p) binary foreground support
    homographies: list[np.ndarray] = field(default_factory=list)  # frame -> anchor
    background: np.ndarray | None = None  # (pano_h, pano_w) static panorama
    anchor: int = 0


def smooth_texture(rng, shape, sigma: float) -> np.ndarray:
    tex = ndimage.gaussian_filter(rng.standard_normal(shape), sigma)
    tex -= tex.min()
    peak = tex.max()
    if peak > 0:
        tex /= peak
    # darker band leaves headroom for a bright foreground
    return 0.08 + 0.4 * tex


def make_synthetic_scene(cfg: SceneConfig | None = None) -> GroundTruth:
    cfg = cfg or SceneConfig()
    a, b, p = cfg.frame_height, cfg.frame_width, cfg.num_frames
    rng = np.random.default_rng(cfg.seed)

    span_x = abs(cfg.pan_x) * (p - 1)
    span_y = abs(cfg.pan_y) * (p - 1)
    pano_h = int(np.ceil(a + span_y))
    pano_w = int(np.ceil(b + span_x))
    pano = smooth_texture(rng, (pano_h, pano_w), cfg.texture_sigma)

    # window origin of frame k in panorama coordinates
    x_origin = np.array([cfg.pan_x * k for k in range(p)])
    y_origin = np.array([cfg.pan_y * k for k in range(p)])
    x_origin -= x_origin.min()
    y_origin -= y_origin.min()

    anchor = p // 2
    start = cfg.blob_start
    if start is None:
        # center the blob in the middle frame's window so the default
        # trajectory stays visible on long pans
        start = (
            x_origin[anchor] + b / 2.0 - cfg.blob_velocity[0] * anchor,
            y_origin[anchor] + a / 2.0 - cfg.blob_velocity[1] * anchor,
        )

    yy, xx = np.mgrid[0:a, 0:b]
    clean = np.zeros((a, b, p))
    fg = np.zeros((a, b, p))
    for k in range(p):
        ox, oy = x_origin[k], y_origin[k]
        window = _crop(pano, oy, ox, a, b)
        bx = start[0] + cfg.blob_velocity[0] * k - ox
        by = start[1] + cfg.blob_velocity[1] * k - oy
        rx = cfg.blob_radius
        ry = cfg.blob_radius * cfg.blob_aspect
        r2 = ((xx - bx) / rx) ** 2 + ((yy - by) / ry) ** 2
        # flat-top profile: smooth edges, object-like interior
        profile = np.exp(-2.0 * r2**2)
        support = profile > 0.5
        if bx < rx or bx > b - 1 - rx or by < ry or by > a - 1 - ry:
            raise ConfigError(f"blob leaves the view of frame {k}")
        clean[:, :, k] = (1.0 - profile) * window + profile * cfg.blob_intensity
        fg[:, :, k] = support.astype(float)

    homs = [
        translation_homography(x_origin[k] - x_origin[anchor], y_origin[k] - y_origin[anchor])
        for k in range(p)
    ]
    return GroundTruth(
        clean=clean, fg_masks=fg, homographies=homs, background=pano, anchor=anchor
    )


def _crop(pano: np.ndarray, oy: float, ox: float, a: int, b: int) -> np.ndarray:
    iy, ix = int(round(oy)), int(round(ox))
    if abs(oy - iy) < 1e-9 and abs(ox - ix) < 1e-9:
        return pano[iy : iy + a, ix : ix + b]
    # fractional pan: bilinear sample the window
    yy, xx = np.mgrid[0:a, 0:b]
    return ndimage.map_coordinates(pano, [yy + oy, xx + ox], order=1, mode="nearest")
