"""Homography estimation: least-squares fit and robust consensus fitting.

A homography is a 3x3 matrix ``H`` with ``H[2, 2] == 1`` mapping points by
``p_out ~ H^T p_in`` in homogeneous coordinates (equivalently, row vectors
map by ``p_out = p_in @ H``).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InsufficientDataError,
    RegistrationError,
)

_H33_TOL = 1e-12


def normalize_homography(h: np.ndarray) -> np.ndarray:
    """Rescale so the bottom-right entry is exactly 1."""
    h = np.asarray(h, dtype=float)
    if h.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {h.shape}")
    scale = h[2, 2]
    if abs(scale) <= _H33_TOL * max(np.abs(h).max(), 1e-300):
        raise DegenerateGeometryError("homography has vanishing H_33")
    return h / scale


def apply_homography(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Map (k, 2) points through the projective transform."""
    pts = np.atleast_2d(pts)
    hom = np.column_stack([pts, np.ones(len(pts))]) @ h
    return hom[:, :2] / hom[:, 2:3]


def compose(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Transform applying ``first`` then ``second``."""
    return first @ second


def invert_homography(h: np.ndarray) -> np.ndarray:
    if abs(np.linalg.det(h)) < 1e-12:
        raise DegenerateGeometryError("homography is not invertible")
    return normalize_homography(np.linalg.inv(h))


def translation_homography(dx: float, dy: float) -> np.ndarray:
    """Pure translation by (dx, dy)."""
    h = np.eye(3)
    h[2, 0] = dx
    h[2, 1] = dy
    return h


def _normalizer(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin with mean distance
    sqrt(2); conditions the DLT system."""
    centroid = pts.mean(axis=0)
    dist = np.linalg.norm(pts - centroid, axis=1).mean()
    if dist < 1e-12:
        raise DegenerateGeometryError("correspondence points are coincident")
    s = np.sqrt(2.0) / dist
    t = np.eye(3)
    t[0, 0] = t[1, 1] = s
    t[:2, 2] = -s * centroid
    return t


def estimate_homography_dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares homography from point correspondences.

    Stacks the two linear constraints per correspondence and takes the
    smallest right singular vector, with both point sets conditioned by a
    similarity normalization first.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("correspondences must be matching (k, 2) arrays")
    d = src.shape[0]
    if d < 4:
        raise InsufficientDataError(f"need at least 4 correspondences, got {d}")
    if not (np.all(np.isfinite(src)) and np.all(np.isfinite(dst))):
        raise ValueError("correspondences contain non-finite coordinates")

    t_src = _normalizer(src)
    t_dst = _normalizer(dst)
    sn = (np.column_stack([src, np.ones(d)]) @ t_src.T)[:, :2]
    dn = (np.column_stack([dst, np.ones(d)]) @ t_dst.T)[:, :2]

    a = np.zeros((2 * d, 9))
    p = np.column_stack([sn, np.ones(d)])
    a[0::2, 3:6] = p
    a[0::2, 6:9] = -dn[:, 1:2] * p
    a[1::2, 0:3] = p
    a[1::2, 6:9] = -dn[:, 0:1] * p

    sing = np.linalg.svd(a, compute_uv=False)
    if sing[7] < 1e-9 * sing[0]:
        raise DegenerateGeometryError(
            "correspondences are degenerate (rank-deficient constraint matrix)"
        )
    _, _, vt = np.linalg.svd(a)
    h_norm = vt[-1].reshape(3, 3, order="F")
    h = t_src.T @ h_norm @ np.linalg.inv(t_dst).T
    return normalize_homography(h)


def symmetric_reprojection_errors(
    h: np.ndarray, src: np.ndarray, dst: np.ndarray
) -> np.ndarray:
    """Per-correspondence max of forward and backward reprojection error."""
    h_inv = invert_homography(h)
    fwd = np.linalg.norm(apply_homography(h, src) - dst, axis=1)
    bwd = np.linalg.norm(apply_homography(h_inv, dst) - src, axis=1)
    return np.maximum(fwd, bwd)


def ransac_homography(
    src: np.ndarray,
    dst: np.ndarray,
    inlier_threshold: float = 2.0,
    max_iters: int = 2000,
    seed: int = 0,
    confidence: float = 0.999,
) -> tuple[np.ndarray, np.ndarray]:
    """Robust homography via random 4-point consensus.

    Returns the least-squares fit on the largest consensus set together with
    the indices of the inliers under that final fit (all within the
    symmetric reprojection threshold). Deterministic for a fixed seed.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    d = src.shape[0]
    if d < 4:
        raise InsufficientDataError(f"need at least 4 correspondences, got {d}")

    rng = np.random.default_rng(seed)
    best_inliers = np.zeros(0, dtype=int)
    needed = max_iters
    it = 0
    while it < min(needed, max_iters):
        it += 1
        sample = rng.choice(d, size=4, replace=False)
        try:
            h = estimate_homography_dlt(src[sample], dst[sample])
            errs = symmetric_reprojection_errors(h, src, dst)
        except DegenerateGeometryError:
            continue
        inliers = np.nonzero(errs <= inlier_threshold)[0]
        if inliers.size > best_inliers.size:
            best_inliers = inliers
            w = inliers.size / d
            if w >= 1.0:
                break
            # standard adaptive stopping rule on the all-inlier sample odds
            needed = int(np.ceil(np.log1p(-confidence) / np.log1p(-(w**4))))
    if best_inliers.size < 4:
        raise RegistrationError(
            f"no consensus set of size >= 4 found in {it} iterations"
        )
    h = estimate_homography_dlt(src[best_inliers], dst[best_inliers])
    errs = symmetric_reprojection_errors(h, src, dst)
    final_inliers = np.nonzero(errs <= inlier_threshold)[0]
    if final_inliers.size < 4:
        final_inliers = best_inliers
    return h, final_inliers


def compose_to_anchor(pairwise: list[np.ndarray], anchor: int) -> list[np.ndarray]:
    """Compose consecutive-frame homographies into per-frame maps onto the
    anchor frame.

    ``pairwise[k]`` maps frame k into frame k+1 coordinates (0-based). The
    anchor's map is the exact identity; earlier frames chain forward, later
    frames chain the inverses.
    """
    p = len(pairwise) + 1
    if not 0 <= anchor < p:
        raise ValueError(f"anchor {anchor} out of range for {p} frames")
    for k, h in enumerate(pairwise):
        if abs(np.linalg.det(h)) < 1e-12:
            raise DegenerateGeometryError(f"pairwise homography {k} is singular")
    out: list[np.ndarray] = [None] * p
    out[anchor] = np.eye(3)
    for k in range(anchor - 1, -1, -1):
        out[k] = normalize_homography(compose(pairwise[k], out[k + 1]))
    for k in range(anchor + 1, p):
        out[k] = normalize_homography(compose(invert_homography(pairwise[k - 1]), out[k - 1]))
    return out
