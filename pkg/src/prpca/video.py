"""Video tensors, the vectorization convention, and masked projections.

A video is an ``m x n x p`` array of ``p`` grayscale frames. Its matrix form
stacks the columns of each frame into a length-``mn`` vector (column-major)
and places frame ``k`` in column ``k`` of an ``mn x p`` matrix, so pixel
``(i, j)`` of frame ``k`` lands at entry ``(i + m*j, k)``. All solvers operate
on the matrix form; all imaging code operates on the tensor form.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

# ITU-R BT.601 luma coefficients.
_LUMA = np.array([0.299, 0.587, 0.114])


def vec_video(video: np.ndarray) -> np.ndarray:
    """Flatten an (m, n, p) video tensor to its (m*n, p) matrix form."""
    if video.ndim != 3:
        raise ShapeError(f"expected an (m, n, p) tensor, got shape {video.shape}")
    m, n, p = video.shape
    return video.reshape(m * n, p, order="F")


def unvec_video(mat: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`vec_video` for the given (m, n, p) shape."""
    m, n, p = shape
    if mat.shape != (m * n, p):
        raise ShapeError(f"matrix shape {mat.shape} does not match {(m * n, p)}")
    return mat.reshape(m, n, p, order="F")


def project_mask(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero out the entries of ``x`` where ``mask`` is 0."""
    if x.shape != mask.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {mask.shape}")
    return np.where(mask != 0, x, 0.0)


def complement_project(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero out the entries of ``x`` where ``mask`` is 1.

    ``project_mask(x, m) + complement_project(x, m) == x`` exactly.
    """
    if x.shape != mask.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {mask.shape}")
    return np.where(mask != 0, 0.0, x)


def to_luminance(rgb: np.ndarray) -> np.ndarray:
    """Reduce an (..., 3) RGB array to BT.601 luminance."""
    if rgb.shape[-1] != 3:
        raise ShapeError(f"expected trailing RGB axis of size 3, got {rgb.shape}")
    return rgb @ _LUMA


def clamp_intensities(frame: np.ndarray) -> np.ndarray:
    """Clamp intensities into [0, 1]; applied once at ingestion."""
    if not np.all(np.isfinite(frame)):
        raise ShapeError("frame contains non-finite intensities")
    return np.clip(frame, 0.0, 1.0)


def check_binary(mask: np.ndarray, name: str = "mask") -> np.ndarray:
    """Validate that an array is exactly {0, 1}-valued; returns it as float."""
    m = np.asarray(mask, dtype=float)
    if not np.all((m == 0.0) | (m == 1.0)):
        raise ValueError(f"{name} must be binary (0/1) valued")
    return m
