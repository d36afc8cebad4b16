import numpy as np
import pytest

from prpca.errors import InsufficientFeaturesError
from prpca.features import detect_and_match, detect_corners


def shaded_checkerboard(rng, size=96, cell=8):
    """Checkerboard with per-square random shades, so patches are locally
    distinctive and matching is unambiguous."""
    cells = rng.random((size // cell, size // cell)) * 0.6
    cells[::2, ::2] += 0.4
    cells[1::2, 1::2] += 0.4
    return np.kron(cells, np.ones((cell, cell)))


def test_identical_frames_match_in_place():
    rng = np.random.default_rng(0)
    frame = shaded_checkerboard(rng)
    src, dst = detect_and_match(frame, frame)
    assert len(src) >= 4
    disp = np.linalg.norm(src - dst, axis=1)
    assert disp.max() <= 0.5


def test_shifted_checkerboard_displacement():
    rng = np.random.default_rng(1)
    frame = shaded_checkerboard(rng)
    shifted = np.roll(frame, 5, axis=1)  # shift 5 px right
    src, dst = detect_and_match(frame[:, :-8], shifted[:, :-8])
    disp = dst - src
    median_dx = np.median(disp[:, 0])
    assert abs(median_dx - 5.0) <= 1.0
    assert abs(np.median(disp[:, 1])) <= 1.0


def test_flat_frames_raise():
    flat = np.full((40, 40), 0.5)
    with pytest.raises(InsufficientFeaturesError):
        detect_and_match(flat, flat)


def test_detect_corners_on_flat_frame_empty():
    assert detect_corners(np.zeros((30, 30))).shape == (0, 2)


def test_detect_corners_respects_cap():
    rng = np.random.default_rng(2)
    frame = shaded_checkerboard(rng, size=128)
    corners = detect_corners(frame, max_features=10)
    assert 0 < len(corners) <= 10


def test_corner_coordinates_are_xy():
    # single bright square in the upper-left region: corners cluster there
    frame = np.zeros((60, 90))
    frame[10:20, 30:40] = 1.0
    corners = detect_corners(frame)
    assert len(corners) >= 1
    assert np.all(corners[:, 0] >= 25) and np.all(corners[:, 0] <= 45)  # x = column
    assert np.all(corners[:, 1] >= 5) and np.all(corners[:, 1] <= 25)  # y = row
