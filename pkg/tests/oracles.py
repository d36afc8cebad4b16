"""Independent brute-force constructions used as test oracles.

Everything here builds the operators densely from their definitions
(Kronecker products of circulant stencils, explicit SVDs) and never calls
the implementation paths it is checking.
"""

import numpy as np


def dense_diff_1d(n: int) -> np.ndarray:
    """Circulant first-difference matrix: -1 diagonal, +1 superdiagonal,
    +1 in the bottom-left corner."""
    d = -np.eye(n)
    for i in range(n):
        d[i, (i + 1) % n] += 1.0
    return d


def dense_diff_operator(m: int, n: int, p: int) -> np.ndarray:
    """Stacked 3mnp x mnp difference operator built from Kronecker products,
    matching the column-major tensor vectorization."""
    im, inn, ip = np.eye(m), np.eye(n), np.eye(p)
    dm, dn, dp = dense_diff_1d(m), dense_diff_1d(n), dense_diff_1d(p)
    cx = np.kron(ip, np.kron(inn, dm))
    cy = np.kron(ip, np.kron(dn, im))
    cz = np.kron(dp, np.kron(inn, im))
    return np.vstack([cx, cy, cz])


def planted_low_rank(a: int, b: int, theta, seed: int):
    """Random rank-r matrix with prescribed singular values plus iid
    Gaussian noise scaled by 1/sqrt(max(a, b)).

    Returns (L, u, v, observed)."""
    rng = np.random.default_rng(seed)
    theta = np.asarray(theta, dtype=float)
    r = theta.size
    u, _ = np.linalg.qr(rng.standard_normal((a, r)))
    v, _ = np.linalg.qr(rng.standard_normal((b, r)))
    low_rank = (u * theta) @ v.T
    noise = rng.standard_normal((a, b)) / np.sqrt(max(a, b))
    return low_rank, u, v, low_rank + noise


def tvdn_objective(z, s, lam, weights) -> float:
    """0.5*||z - s||^2 + lam*TV(s), recomputed from raw definitions."""
    diffs = 0.0
    m, n, p = z.shape
    for i in range(m - 1):
        diffs += np.sum(weights.wx[i] * np.abs(s[i + 1] - s[i]))
    for j in range(n - 1):
        diffs += np.sum(weights.wy[:, j] * np.abs(s[:, j + 1] - s[:, j]))
    for k in range(p - 1):
        diffs += np.sum(weights.wz[:, :, k] * np.abs(s[:, :, k + 1] - s[:, :, k]))
    return 0.5 * float(np.sum((z - s) ** 2)) + lam * diffs
