"""Self-contained corner detection and patch matching.

A Harris detector with normalized intensity-patch descriptors and mutual
nearest-neighbor matching with a ratio test. The matcher is deliberately
permissive; the robust fit downstream is expected to reject outliers.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import InsufficientFeaturesError, ShapeError

PATCH_RADIUS = 5
_HARRIS_K = 0.05


def harris_response(frame: np.ndarray, sigma: float = 1.5) -> np.ndarray:
    """Harris corner response det(A) - k*tr(A)^2 of the smoothed structure
    tensor A."""
    f = np.asarray(frame, dtype=float)
    ix = ndimage.gaussian_filter(f, 1.0, order=(0, 1))
    iy = ndimage.gaussian_filter(f, 1.0, order=(1, 0))
    axx = ndimage.gaussian_filter(ix * ix, sigma)
    ayy = ndimage.gaussian_filter(iy * iy, sigma)
    axy = ndimage.gaussian_filter(ix * iy, sigma)
    det = axx * ayy - axy * axy
    tr = axx + ayy
    return det - _HARRIS_K * tr * tr


def detect_corners(
    frame: np.ndarray,
    max_features: int = 500,
    min_distance: int = 2,
    rel_threshold: float = 0.002,
) -> np.ndarray:
    """Strongest Harris corners as an (n, 2) array of (x, y) coordinates.

    Local maxima within ``min_distance`` are suppressed and a margin wide
    enough for descriptor patches is excluded. Returns an empty array for
    featureless frames.
    """
    response = harris_response(frame)
    peak = response.max()
    if peak <= 0:
        return np.zeros((0, 2))
    local_max = response == ndimage.maximum_filter(response, size=2 * min_distance + 1)
    candidates = local_max & (response > rel_threshold * peak)
    margin = PATCH_RADIUS
    candidates[:margin, :] = False
    candidates[-margin:, :] = False
    candidates[:, :margin] = False
    candidates[:, -margin:] = False
    rows, cols = np.nonzero(candidates)
    if rows.size == 0:
        return np.zeros((0, 2))
    order = np.argsort(response[rows, cols])[::-1][:max_features]
    rows, cols = rows[order], cols[order]
    return np.stack(
        [cols + _subpixel_offset(response, rows, cols, axis=1),
         rows + _subpixel_offset(response, rows, cols, axis=0)],
        axis=1,
    )


def _subpixel_offset(response: np.ndarray, rows, cols, axis: int) -> np.ndarray:
    """Parabolic peak refinement of the response along one axis."""
    if axis == 0:
        lo, hi = response[rows - 1, cols], response[rows + 1, cols]
    else:
        lo, hi = response[rows, cols - 1], response[rows, cols + 1]
    center = response[rows, cols]
    denom = lo - 2.0 * center + hi
    with np.errstate(divide="ignore", invalid="ignore"):
        offset = 0.5 * (lo - hi) / denom
    offset[~np.isfinite(offset)] = 0.0
    return np.clip(offset, -0.5, 0.5)


def describe_patches(frame: np.ndarray, corners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Zero-mean, unit-norm intensity patches around each corner.

    Returns (descriptors, kept_corners); corners whose patch is flat are
    dropped since they cannot be matched discriminatively.
    """
    f = np.asarray(frame, dtype=float)
    r = PATCH_RADIUS
    descs, kept = [], []
    for x, y in corners:
        ix, iy = int(round(x)), int(round(y))
        patch = f[iy - r : iy + r + 1, ix - r : ix + r + 1].ravel()
        patch = patch - patch.mean()
        norm = np.linalg.norm(patch)
        if norm < 1e-12:
            continue
        descs.append(patch / norm)
        kept.append((x, y))
    if not descs:
        return np.zeros((0, (2 * r + 1) ** 2)), np.zeros((0, 2))
    return np.asarray(descs), np.asarray(kept)


def match_descriptors(d1: np.ndarray, d2: np.ndarray, ratio: float = 0.9) -> np.ndarray:
    """Mutual nearest neighbors passing Lowe's ratio test.

    Returns an (k, 2) array of index pairs into the two descriptor sets.
    """
    if d1.shape[0] == 0 or d2.shape[0] == 0:
        return np.zeros((0, 2), dtype=int)
    # descriptors are unit-norm, so squared distance = 2 - 2 * correlation
    dist = np.maximum(2.0 - 2.0 * (d1 @ d2.T), 0.0)
    nn12 = np.argmin(dist, axis=1)
    nn21 = np.argmin(dist, axis=0)
    pairs = []
    for i, j in enumerate(nn12):
        if nn21[j] != i:
            continue
        row = dist[i]
        best = row[j]
        rest = np.delete(row, j)
        if rest.size and best > (ratio**2) * rest.min():
            continue
        pairs.append((i, j))
    return np.asarray(pairs, dtype=int).reshape(-1, 2)


def detect_and_match(
    frame_a: np.ndarray,
    frame_b: np.ndarray,
    max_features: int = 500,
    ratio: float = 0.9,
) -> tuple[np.ndarray, np.ndarray]:
    """Putative correspondences between two frames.

    Returns (points_a, points_b) as (k, 2) arrays of (x, y) coordinates.
    May contain outliers; raises :class:`InsufficientFeaturesError` when
    fewer than 4 matches are found.
    """
    if frame_a.size == 0 or frame_b.size == 0:
        raise ShapeError("frames must be nonempty")
    da, ca = describe_patches(frame_a, detect_corners(frame_a, max_features))
    db, cb = describe_patches(frame_b, detect_corners(frame_b, max_features))
    pairs = match_descriptors(da, db, ratio)
    if pairs.shape[0] < 4:
        raise InsufficientFeaturesError(
            f"only {pairs.shape[0]} putative matches found (need at least 4)"
        )
    return ca[pairs[:, 0]], cb[pairs[:, 1]]
