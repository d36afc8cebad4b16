"""Frame registration onto a panoramic canvas.

Pairwise homographies between consecutive frames are composed onto the
middle anchor frame, the canvas is the bounding box of all warped frame
extents, and each frame is inverse-warped onto the canvas with a binary
observation mask. Components estimated on the canvas can be mapped back to
the original per-frame perspective with the inverse transforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import CanvasBudgetError, ShapeError
from .features import detect_and_match
from .homography import (
    apply_homography,
    compose,
    compose_to_anchor,
    invert_homography,
    normalize_homography,
    ransac_homography,
    translation_homography,
)

# Slack absorbing homography round-off at frame borders so that e.g. exact
# identity registration keeps full-frame masks and an a x b canvas.
_GEOM_EPS = 1e-6
# Canvas extents snap to the pixel grid at this distance; pixels whose
# coverage would be a sub-centipixel sliver are unobserved anyway.
_SNAP = 1e-2


@dataclass
class RegistrationConfig:
    max_features: int = 500
    match_ratio: float = 0.9
    ransac_threshold: float = 2.0
    ransac_iters: int = 2000
    seed: int = 0
    max_canvas_pixels: int = 50_000_000
    median_prefilter: int = 0  # odd kernel size; 0 disables


@dataclass
class RegisteredVideo:
    """Registered frames, their observation mask, and the transforms used."""

    frames: np.ndarray  # (m, n, p) canvas-sized tensor
    mask: np.ndarray  # (m, n, p) binary
    composite_homographies: list[np.ndarray]  # frame k -> canvas (offset included)
    anchored_homographies: list[np.ndarray]  # frame k -> anchor coords (pre-offset)
    anchor: int
    offset: tuple[float, float]
    frame_shape: tuple[int, int]

    @property
    def canvas_shape(self) -> tuple[int, int]:
        return self.frames.shape[:2]


def frame_corners(a: int, b: int) -> np.ndarray:
    """Pixel-center corners of an a x b frame as (x, y) rows."""
    return np.array(
        [[0.0, 0.0], [b - 1.0, 0.0], [0.0, a - 1.0], [b - 1.0, a - 1.0]]
    )


def compute_canvas(
    frame_shapes: list[tuple[int, int]],
    anchored: list[np.ndarray],
    max_pixels: int = 50_000_000,
) -> tuple[int, int, tuple[float, float]]:
    """Bounding box of all warped frame extents.

    Returns (m, n, offset) where the offset translation moves the top-left
    of the union to pixel (0, 0).
    """
    pts = np.vstack(
        [apply_homography(h, frame_corners(a, b)) for (a, b), h in zip(frame_shapes, anchored)]
    )
    if not np.all(np.isfinite(pts)):
        raise CanvasBudgetError("warped frame corners are not finite")
    x0 = np.floor(pts[:, 0].min() + _SNAP)
    y0 = np.floor(pts[:, 1].min() + _SNAP)
    x1 = np.ceil(pts[:, 0].max() - _SNAP)
    y1 = np.ceil(pts[:, 1].max() - _SNAP)
    m = int(y1 - y0) + 1
    n = int(x1 - x0) + 1
    if m * n > max_pixels:
        raise CanvasBudgetError(
            f"canvas {m}x{n} exceeds the budget of {max_pixels} pixels"
        )
    return m, n, (-float(x0), -float(y0))


def warp_frame(
    frame: np.ndarray, h: np.ndarray, canvas_shape: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-mapping warp of a frame onto the canvas.

    Every canvas pixel is pulled back through the inverse transform and
    bilinearly interpolated; the mask is 1 only where all four interpolation
    neighbors fall inside the source frame. Unobserved pixels are 0.
    """
    a, b = frame.shape
    m, n = canvas_shape
    h_inv = invert_homography(h)
    xs, ys = np.meshgrid(np.arange(n, dtype=float), np.arange(m, dtype=float))
    src = apply_homography(h_inv, np.column_stack([xs.ravel(), ys.ravel()]))
    x = src[:, 0].reshape(m, n)
    y = src[:, 1].reshape(m, n)

    valid = (
        (x >= -_GEOM_EPS)
        & (x <= b - 1 + _GEOM_EPS)
        & (y >= -_GEOM_EPS)
        & (y <= a - 1 + _GEOM_EPS)
        & np.isfinite(x)
        & np.isfinite(y)
    )
    x = np.clip(x, 0.0, b - 1.0)
    y = np.clip(y, 0.0, a - 1.0)
    x0 = np.clip(np.floor(x).astype(int), 0, max(b - 2, 0))
    y0 = np.clip(np.floor(y).astype(int), 0, max(a - 2, 0))
    x1 = np.minimum(x0 + 1, b - 1)
    y1 = np.minimum(y0 + 1, a - 1)
    fx = x - x0
    fy = y - y0
    warped = (
        frame[y0, x0] * (1 - fy) * (1 - fx)
        + frame[y0, x1] * (1 - fy) * fx
        + frame[y1, x0] * fy * (1 - fx)
        + frame[y1, x1] * fy * fx
    )
    warped[~valid] = 0.0
    return warped, valid.astype(float)


def estimate_pairwise_homographies(
    frames: np.ndarray, config: RegistrationConfig
) -> list[np.ndarray]:
    """RANSAC-fit homographies between consecutive frames of an (a, b, p)
    stack, optionally detecting features on median-filtered copies."""
    p = frames.shape[2]
    detection = frames
    if config.median_prefilter >= 3:
        # median kills impulsive outliers; the light blur removes surviving
        # speckle clusters that would otherwise dominate the corner response
        k = config.median_prefilter
        detection = np.stack(
            [
                ndimage.gaussian_filter(
                    ndimage.median_filter(frames[:, :, i], size=k), 1.0
                )
                for i in range(p)
            ],
            axis=2,
        )
    pairwise = []
    for k in range(p - 1):
        try:
            src, dst = detect_and_match(
                detection[:, :, k],
                detection[:, :, k + 1],
                max_features=config.max_features,
                ratio=config.match_ratio,
            )
            h, inliers = ransac_homography(
                src,
                dst,
                inlier_threshold=config.ransac_threshold,
                max_iters=config.ransac_iters,
                seed=config.seed + k,
            )
            h = _refine_fit(h, src, dst, inliers)
        except Exception as exc:
            exc.args = (f"frame pair ({k}, {k + 1}): {exc}",) + exc.args[1:]
            raise
        pairwise.append(h)
    return pairwise


def _refine_fit(h, src, dst, inliers, rounds: int = 3):
    """Tighten the consensus fit: points dragged in near the RANSAC
    threshold (e.g. pixels blended with moving foreground) are shed by
    refitting on errors within a multiple of the median inlier error."""
    from .homography import estimate_homography_dlt, symmetric_reprojection_errors

    for _ in range(rounds):
        errs = symmetric_reprojection_errors(h, src, dst)
        cutoff = 4.0 * np.median(errs[inliers]) + 1e-9
        keep = np.nonzero(errs <= cutoff)[0]
        if keep.size < 6 or keep.size == inliers.size:
            break
        try:
            h = estimate_homography_dlt(src[keep], dst[keep])
        except Exception:
            break
        inliers = keep
    return h


def register_with_homographies(
    frames: np.ndarray,
    anchored: list[np.ndarray],
    anchor: int,
    config: RegistrationConfig | None = None,
) -> RegisteredVideo:
    """Warp frames onto the canvas defined by precomputed anchored maps."""
    config = config or RegistrationConfig()
    a, b, p = frames.shape
    if len(anchored) != p:
        raise ShapeError(f"expected {p} homographies, got {len(anchored)}")
    anchored = [normalize_homography(h) for h in anchored]
    m, n, offset = compute_canvas([(a, b)] * p, anchored, config.max_canvas_pixels)
    shift = translation_homography(*offset)
    composite = [normalize_homography(compose(h, shift)) for h in anchored]
    warped = np.zeros((m, n, p))
    mask = np.zeros((m, n, p))
    for k in range(p):
        warped[:, :, k], mask[:, :, k] = warp_frame(frames[:, :, k], composite[k], (m, n))
    return RegisteredVideo(
        frames=warped,
        mask=mask,
        composite_homographies=composite,
        anchored_homographies=anchored,
        anchor=anchor,
        offset=offset,
        frame_shape=(a, b),
    )


def register_video(
    frames: np.ndarray, config: RegistrationConfig | None = None
) -> RegisteredVideo:
    """Full registration: match consecutive frames, compose onto the middle
    anchor, and warp everything onto the union canvas."""
    config = config or RegistrationConfig()
    if frames.ndim != 3:
        raise ShapeError(f"expected an (a, b, p) frame stack, got {frames.shape}")
    p = frames.shape[2]
    anchor = p // 2
    if p == 1:
        anchored = [np.eye(3)]
    else:
        pairwise = estimate_pairwise_homographies(frames, config)
        anchored = compose_to_anchor(pairwise, anchor)
    return register_with_homographies(frames, anchored, anchor, config)


def unregister(
    components: list[np.ndarray], reg: RegisteredVideo
) -> list[np.ndarray]:
    """Map canvas-sized component tensors back to the original per-frame
    perspective by warping through the inverse composite transforms."""
    a, b = reg.frame_shape
    m, n = reg.canvas_shape
    out = []
    for comp in components:
        if comp.shape != reg.frames.shape:
            raise ShapeError(
                f"component shape {comp.shape} does not match canvas {reg.frames.shape}"
            )
        p = comp.shape[2]
        restored = np.zeros((a, b, p))
        for k in range(p):
            inv = invert_homography(reg.composite_homographies[k])
            restored[:, :, k], _ = warp_frame(comp[:, :, k], inv, (a, b))
        out.append(restored)
    return out


def median_composite(reg: RegisteredVideo) -> np.ndarray:
    """Per-pixel median over observed frames; never-observed pixels are 0."""
    stack = np.where(reg.mask > 0, reg.frames, np.nan)
    with np.errstate(invalid="ignore"):
        med = np.nanmedian(stack, axis=2)
    return np.nan_to_num(med, nan=0.0)


def write_homography_file(path, homographies: list[np.ndarray]) -> None:
    """One transform per line: 9 whitespace-separated reals, row-major,
    bottom-right entry exactly 1."""
    lines = []
    for h in homographies:
        h = normalize_homography(h)
        lines.append(" ".join(f"{v:.17g}" for v in h.reshape(-1)))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_homography_file(path) -> list[np.ndarray]:
    homographies = []
    with open(path) as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            vals = line.split()
            if len(vals) != 9:
                raise ValueError(f"{path}:{ln}: expected 9 values, got {len(vals)}")
            h = np.array([float(v) for v in vals]).reshape(3, 3)
            if abs(h[2, 2] - 1.0) > 1e-9:
                raise ValueError(f"{path}:{ln}: bottom-right entry must be 1")
            h[2, 2] = 1.0
            homographies.append(h)
    if not homographies:
        raise ValueError(f"{path}: no homographies found")
    return homographies
