import numpy as np
import pytest

from prpca.errors import (
    DegenerateGeometryError,
    InsufficientDataError,
    RegistrationError,
)
from prpca.homography import (
    apply_homography,
    compose_to_anchor,
    estimate_homography_dlt,
    invert_homography,
    normalize_homography,
    ransac_homography,
    symmetric_reprojection_errors,
    translation_homography,
)


def random_homography(rng):
    """Identity plus a small random perturbation; always invertible and
    well-conditioned on frame-scale coordinates."""
    h = np.eye(3)
    h[:2, :2] += 0.1 * rng.standard_normal((2, 2))
    h[2, :2] = 10.0 * rng.standard_normal(2)  # translation (storage row)
    h[:2, 2] = 1e-4 * rng.standard_normal(2)  # mild perspective
    return normalize_homography(h)


def test_dlt_identity():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])
    h = estimate_homography_dlt(pts, pts)
    np.testing.assert_allclose(h, np.eye(3), atol=1e-10)


def test_dlt_pure_translation():
    rng = np.random.default_rng(0)
    pts = rng.random((6, 2)) * 20
    h = estimate_homography_dlt(pts, pts + [2.0, 0.0])
    expected = np.eye(3)
    expected[2, 0] = 2.0  # transposed-action storage: p_out = p_in @ H
    np.testing.assert_allclose(h, expected, atol=1e-9)
    np.testing.assert_allclose(apply_homography(h, pts), pts + [2.0, 0.0], atol=1e-9)


def test_dlt_recovers_random_homography():
    rng = np.random.default_rng(1)
    for _ in range(5):
        h_true = random_homography(rng)
        src = rng.random((8, 2)) * 50
        dst = apply_homography(h_true, src)
        h = estimate_homography_dlt(src, dst)
        assert np.linalg.norm(h - h_true) / np.linalg.norm(h_true) <= 1e-8


def test_dlt_insufficient_points():
    pts = np.random.default_rng(2).random((3, 2))
    with pytest.raises(InsufficientDataError):
        estimate_homography_dlt(pts, pts)


def test_dlt_degenerate_collinear():
    t = np.linspace(0, 1, 6)
    pts = np.column_stack([t, 2 * t])  # all on one line
    with pytest.raises(DegenerateGeometryError):
        estimate_homography_dlt(pts, pts + [1.0, 0.0])


def test_normalize_fixes_h33():
    h = normalize_homography(2.0 * np.eye(3))
    assert h[2, 2] == 1.0
    with pytest.raises(DegenerateGeometryError):
        normalize_homography(np.diag([1.0, 1.0, 0.0]))


def test_invert_round_trip():
    rng = np.random.default_rng(3)
    h = random_homography(rng)
    np.testing.assert_allclose(invert_homography(invert_homography(h)), h, atol=1e-10)


# ---------------------------------------------------------------- RANSAC


def test_ransac_all_inliers_equals_dlt():
    rng = np.random.default_rng(4)
    h_true = random_homography(rng)
    src = rng.random((30, 2)) * 40
    dst = apply_homography(h_true, src)
    h_r, inliers = ransac_homography(src, dst, inlier_threshold=2.0, seed=7)
    h_d = estimate_homography_dlt(src, dst)
    np.testing.assert_allclose(h_r, h_d, atol=1e-9)
    assert inliers.size == 30


def test_ransac_contaminated_recovery():
    rng = np.random.default_rng(5)
    h_true = random_homography(rng)
    n_in, n_out = 140, 60
    src_in = rng.random((n_in, 2)) * 40
    dst_in = apply_homography(h_true, src_in)
    src_out = rng.random((n_out, 2)) * 40
    dst_out = rng.random((n_out, 2)) * 40
    src = np.vstack([src_in, src_out])
    dst = np.vstack([dst_in, dst_out])
    h, inliers = ransac_homography(src, dst, inlier_threshold=2.0, max_iters=2000, seed=11)
    errs = np.linalg.norm(apply_homography(h, src_in) - dst_in, axis=1)
    assert errs.max() <= 1e-3
    contamination = np.mean(inliers >= n_in)
    assert contamination <= 0.05


def test_ransac_deterministic():
    rng = np.random.default_rng(6)
    src = rng.random((50, 2)) * 30
    dst = apply_homography(random_homography(rng), src)
    dst[:10] += rng.random((10, 2)) * 20
    h1, in1 = ransac_homography(src, dst, seed=42)
    h2, in2 = ransac_homography(src, dst, seed=42)
    np.testing.assert_array_equal(h1, h2)
    np.testing.assert_array_equal(in1, in2)


def test_ransac_insufficient_points():
    pts = np.random.default_rng(7).random((3, 2))
    with pytest.raises(InsufficientDataError):
        ransac_homography(pts, pts)


def test_ransac_no_consensus():
    # coincident points make every minimal sample degenerate
    src = np.ones((20, 2))
    dst = np.ones((20, 2)) * 2.0
    with pytest.raises(RegistrationError):
        ransac_homography(src, dst, inlier_threshold=2.0, max_iters=50, seed=0)


def test_ransac_inliers_satisfy_threshold():
    rng = np.random.default_rng(9)
    h_true = random_homography(rng)
    src = rng.random((80, 2)) * 40
    dst = apply_homography(h_true, src) + 0.3 * rng.standard_normal((80, 2))
    dst[:20] += 30 * rng.random((20, 2))
    h, inliers = ransac_homography(src, dst, inlier_threshold=2.0, seed=3)
    errs = symmetric_reprojection_errors(h, src, dst)
    assert np.all(errs[inliers] <= 2.0)


# ---------------------------------------------------------------- composition


def test_compose_anchor_is_identity():
    rng = np.random.default_rng(10)
    pairwise = [random_homography(rng) for _ in range(4)]
    out = compose_to_anchor(pairwise, 2)
    np.testing.assert_array_equal(out[2], np.eye(3))


def test_compose_translations():
    step = translation_homography(1.0, 0.0)
    out = compose_to_anchor([step, step], 1)
    np.testing.assert_allclose(out[0], translation_homography(1.0, 0.0), atol=1e-12)
    np.testing.assert_allclose(out[2], translation_homography(-1.0, 0.0), atol=1e-12)


def test_compose_matches_sequential_application():
    rng = np.random.default_rng(11)
    p = 5
    anchor = 2
    pairwise = [random_homography(rng) for _ in range(p - 1)]
    out = compose_to_anchor(pairwise, anchor)
    pts = rng.random((10, 2)) * 20
    for k in range(p):
        expected = pts.copy()
        if k < anchor:
            for j in range(k, anchor):
                expected = apply_homography(pairwise[j], expected)
        else:
            for j in range(k - 1, anchor - 1, -1):
                expected = apply_homography(invert_homography(pairwise[j]), expected)
        got = apply_homography(out[k], pts)
        assert np.abs(got - expected).max() <= 1e-8


def test_compose_normalized():
    rng = np.random.default_rng(12)
    out = compose_to_anchor([random_homography(rng) for _ in range(5)], 3)
    for h in out:
        assert h[2, 2] == 1.0


def test_compose_rejects_singular():
    singular = np.eye(3)
    singular[0, 0] = 0.0
    singular[0, 1] = 0.0  # rank deficient
    singular = np.array([[0.0, 0, 0], [0, 1, 0], [0, 0, 1.0]])
    with pytest.raises(DegenerateGeometryError):
        compose_to_anchor([singular], 1)
