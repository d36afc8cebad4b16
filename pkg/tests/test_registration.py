import numpy as np
import pytest

from prpca.errors import CanvasBudgetError, ShapeError
from prpca.homography import apply_homography, translation_homography
from prpca.registration import (
    RegistrationConfig,
    compute_canvas,
    frame_corners,
    median_composite,
    read_homography_file,
    register_video,
    register_with_homographies,
    unregister,
    warp_frame,
    write_homography_file,
)


def smooth_texture(rng, shape, sigma=2.0):
    from scipy import ndimage

    noise = rng.standard_normal(shape)
    tex = ndimage.gaussian_filter(noise, sigma)
    tex -= tex.min()
    tex /= tex.max()
    return 0.15 + 0.7 * tex


def panning_frames(rng, a=48, b=48, p=6, pan=4):
    pano = smooth_texture(rng, (a, b + pan * (p - 1)))
    frames = np.stack([pano[:, k * pan : k * pan + b] for k in range(p)], axis=2)
    return frames, pano


# ---------------------------------------------------------------- canvas


def test_canvas_identity():
    m, n, offset = compute_canvas([(10, 14)] * 3, [np.eye(3)] * 3)
    assert (m, n) == (10, 14)
    assert offset == (0.0, 0.0)


def test_canvas_translation_union():
    homs = [np.eye(3), translation_homography(10.0, 0.0)]
    m, n, offset = compute_canvas([(10, 14)] * 2, homs)
    assert (m, n) == (10, 24)
    assert offset == (0.0, 0.0)


def test_canvas_offset_shifts_to_origin():
    homs = [translation_homography(-3.0, -2.0), np.eye(3)]
    m, n, offset = compute_canvas([(10, 14)] * 2, homs)
    assert (m, n) == (12, 17)
    assert offset == (3.0, 2.0)


def test_canvas_corners_contained():
    rng = np.random.default_rng(0)
    shapes = [(20, 30)] * 4
    homs = []
    for _ in range(4):
        h = np.eye(3)
        ang = rng.uniform(-0.1, 0.1)
        h[:2, :2] = [[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]]
        h[2, :2] = rng.uniform(-5, 5, size=2)
        homs.append(h)
    m, n, offset = compute_canvas(shapes, homs)
    shift = translation_homography(*offset)
    for (a, b), h in zip(shapes, homs):
        pts = apply_homography(h @ shift, frame_corners(a, b))
        assert np.all(pts[:, 0] >= -1e-6) and np.all(pts[:, 0] <= n - 1 + 1e-6)
        assert np.all(pts[:, 1] >= -1e-6) and np.all(pts[:, 1] <= m - 1 + 1e-6)


def test_canvas_budget():
    homs = [np.eye(3), translation_homography(1e6, 0.0)]
    with pytest.raises(CanvasBudgetError):
        compute_canvas([(100, 100)] * 2, homs, max_pixels=1_000_000)


# ---------------------------------------------------------------- warping


def test_warp_identity():
    rng = np.random.default_rng(1)
    frame = rng.random((12, 9))
    warped, mask = warp_frame(frame, np.eye(3), (12, 9))
    np.testing.assert_allclose(warped, frame, atol=1e-12)
    assert np.all(mask == 1.0)


def test_warp_integer_translation_exact():
    rng = np.random.default_rng(2)
    frame = rng.random((10, 10))
    h = translation_homography(3.0, 2.0)
    warped, mask = warp_frame(frame, h, (14, 15))
    np.testing.assert_allclose(warped[2:12, 3:13], frame, atol=1e-12)
    assert mask[2:12, 3:13].min() == 1.0
    assert warped[:2].max() == 0.0 and mask[:2].max() == 0.0


def test_warp_round_trip_smooth():
    rng = np.random.default_rng(3)
    frame = smooth_texture(rng, (40, 40))
    h = np.eye(3)
    h[2, :2] = [1.7, -2.3]
    h[:2, :2] = [[1.02, 0.03], [-0.01, 0.99]]
    m, n, offset = compute_canvas([(40, 40)], [h])
    comp = h @ translation_homography(*offset)
    warped, _ = warp_frame(frame, comp, (m, n))
    back, _ = warp_frame(warped, np.linalg.inv(comp), (40, 40))
    interior = (slice(4, 36), slice(4, 36))
    assert np.abs(back[interior] - frame[interior]).max() <= 0.02


def test_warp_mask_matches_geometric_pullback():
    h = np.eye(3)
    h[2, :2] = [2.5, 1.5]
    frame = np.ones((8, 8))
    warped, mask = warp_frame(frame, h, (12, 12))
    xs, ys = np.meshgrid(np.arange(12.0), np.arange(12.0))
    src = apply_homography(np.linalg.inv(h), np.column_stack([xs.ravel(), ys.ravel()]))
    inside = (
        (src[:, 0] >= -1e-6)
        & (src[:, 0] <= 7 + 1e-6)
        & (src[:, 1] >= -1e-6)
        & (src[:, 1] <= 7 + 1e-6)
    ).reshape(12, 12)
    np.testing.assert_array_equal(mask == 1.0, inside)


# ---------------------------------------------------------------- registration


def test_register_static_video():
    rng = np.random.default_rng(4)
    frame = smooth_texture(rng, (40, 40))
    frames = np.repeat(frame[:, :, None], 4, axis=2)
    reg = register_video(frames, RegistrationConfig(seed=0))
    assert reg.canvas_shape == (40, 40)
    assert np.all(reg.mask == 1.0)
    for h in reg.composite_homographies:
        np.testing.assert_allclose(h, np.eye(3), atol=1e-6)
    np.testing.assert_allclose(reg.frames, frames, atol=1e-4)


def test_register_single_frame():
    frame = np.random.default_rng(5).random((20, 25))
    reg = register_video(frame[:, :, None])
    assert reg.canvas_shape == (20, 25)
    assert reg.anchor == 0
    np.testing.assert_allclose(reg.frames[:, :, 0], frame, atol=1e-12)


def test_register_synthetic_pan():
    rng = np.random.default_rng(6)
    frames, pano = panning_frames(rng, a=48, b=48, p=6, pan=4)
    reg = register_video(frames, RegistrationConfig(seed=1))
    total_pan = 4 * 5
    assert abs(reg.canvas_shape[1] - (48 + total_pan)) <= 1
    assert abs(reg.canvas_shape[0] - 48) <= 1
    assert reg.anchor == 3


def test_register_mask_matches_geometry():
    rng = np.random.default_rng(7)
    frames, _ = panning_frames(rng, p=4)
    reg = register_video(frames, RegistrationConfig(seed=2))
    m, n = reg.canvas_shape
    xs, ys = np.meshgrid(np.arange(float(n)), np.arange(float(m)))
    grid = np.column_stack([xs.ravel(), ys.ravel()])
    for k in range(4):
        src = apply_homography(
            np.linalg.inv(reg.composite_homographies[k]), grid
        )
        inside = (
            (src[:, 0] >= -1e-6)
            & (src[:, 0] <= 47 + 1e-6)
            & (src[:, 1] >= -1e-6)
            & (src[:, 1] <= 47 + 1e-6)
        ).reshape(m, n)
        np.testing.assert_array_equal(reg.mask[:, :, k] == 1.0, inside)


def test_unregister_round_trip():
    rng = np.random.default_rng(8)
    frames, _ = panning_frames(rng, p=5)
    reg = register_video(frames, RegistrationConfig(seed=3))
    (restored,) = unregister([reg.frames], reg)
    interior = (slice(3, 45), slice(3, 45))
    for k in range(5):
        err = np.abs(restored[:, :, k][interior] - frames[:, :, k][interior])
        assert err.max() <= 0.02


def test_unregister_identity_and_zero():
    rng = np.random.default_rng(9)
    frames = np.repeat(smooth_texture(rng, (30, 30))[:, :, None], 3, axis=2)
    reg = register_with_homographies(frames, [np.eye(3)] * 3, anchor=1)
    restored, zeros = unregister([reg.frames, np.zeros_like(reg.frames)], reg)
    np.testing.assert_allclose(restored, frames, atol=1e-10)
    assert np.all(zeros == 0.0)


def test_unregister_shape_check():
    frames = np.zeros((10, 10, 2))
    reg = register_with_homographies(frames, [np.eye(3)] * 2, anchor=1)
    with pytest.raises(ShapeError):
        unregister([np.zeros((5, 5, 2))], reg)


def test_median_composite_recovers_background():
    rng = np.random.default_rng(10)
    frames, pano = panning_frames(rng, p=6, pan=4)
    homs = [translation_homography(4.0 * (k - 3), 0.0) for k in range(6)]
    reg = register_with_homographies(frames, homs, anchor=3)
    comp = median_composite(reg)
    observed = reg.mask.max(axis=2) > 0
    assert comp.shape == pano.shape
    assert np.abs(comp[observed] - pano[observed]).max() <= 1e-10


# ---------------------------------------------------------------- wire format


def test_homography_file_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    homs = []
    for _ in range(4):
        h = np.eye(3)
        h[2, :2] = rng.uniform(-20, 20, 2)
        h[:2, :2] += 0.05 * rng.standard_normal((2, 2))
        homs.append(h)
    path = tmp_path / "homs.txt"
    write_homography_file(path, homs)
    loaded = read_homography_file(path)
    assert len(loaded) == 4
    for h, l in zip(homs, loaded):
        np.testing.assert_allclose(l, h, atol=1e-12)
        assert l[2, 2] == 1.0


def test_homography_file_rejects_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 0 0 0 1 0 0 0\n")
    with pytest.raises(ValueError):
        read_homography_file(path)
    path.write_text("1 0 0 0 1 0 0 0 2\n")
    with pytest.raises(ValueError):
        read_homography_file(path)
