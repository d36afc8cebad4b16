"""Matrix shrinkage operators: SVT, soft thresholding, and OptShrink.

OptShrink applies a data-driven, nonlinear shrinkage to the leading ``r``
singular values of its input. The shrinkage weights are imputed from the
trailing (noise) singular values through the D-transform of their empirical
mass function, so larger (more informative) singular values are shrunk less.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankError


def svt(z: np.ndarray, lam: float) -> np.ndarray:
    """Singular value thresholding: subtract ``lam`` from each singular value
    and clip at zero.

    Solves ``argmin_L 0.5*||z - L||_F^2 + lam*||L||_*``.
    """
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    if not np.all(np.isfinite(z)):
        raise ValueError("svt input contains non-finite entries")
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    s_shr = np.maximum(s - lam, 0.0)
    return (u * s_shr) @ vt


def soft_threshold(z: np.ndarray, lam) -> np.ndarray:
    """Elementwise soft threshold ``sign(z) * max(|z| - lam, 0)``.

    ``lam`` may be a scalar or an array of per-entry thresholds.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("soft threshold must be nonnegative")
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


@dataclass(frozen=True)
class SpectralMass:
    """Empirical mass of the noise singular values of a matrix.

    ``noise_sigmas`` holds the trailing singular values (descending) and
    ``aspect`` is min(a, b)/max(a, b) of the originating matrix shape.
    """

    noise_sigmas: np.ndarray
    aspect: float

    def __post_init__(self):
        sig = np.asarray(self.noise_sigmas, dtype=float)
        if sig.ndim != 1 or sig.size == 0:
            raise ValueError("noise_sigmas must be a nonempty 1-D array")
        if np.any(sig < 0):
            raise ValueError("noise singular values must be nonnegative")
        if np.any(np.diff(sig) > 0):
            raise ValueError("noise singular values must be sorted descending")
        if not (0 < self.aspect <= 1):
            raise ValueError(f"aspect ratio must lie in (0, 1], got {self.aspect}")
        object.__setattr__(self, "noise_sigmas", sig)


def _d_sums(sigma: float, t: np.ndarray, c: float) -> tuple[float, float]:
    # psi(z) = mean_t z/(z^2 - t^2) and its analytic derivative; the
    # D-transform integrals reduce to these sums for an atomic mass.
    # An exact tie sigma == max(t) divides by zero; callers flag that case
    # and let the non-finite values propagate.
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = sigma**2 - t**2
        psi = np.mean(sigma / denom)
        dpsi = np.mean(-(sigma**2 + t**2) / denom**2)
        phi = c * psi + (1.0 - c) / sigma
        dphi = c * dpsi - (1.0 - c) / sigma**2
        d_val = psi * phi
        d_prime = dpsi * phi + psi * dphi
    return float(d_val), float(d_prime)


def d_transform(sigma: float, mass: SpectralMass) -> tuple[float, float]:
    """Evaluate the D-transform and its analytic derivative at ``sigma``.

    ``sigma`` must lie strictly above the support of the noise mass.
    """
    if sigma <= np.max(mass.noise_sigmas):
        raise ValueError(
            f"sigma={sigma} is inside the noise support "
            f"(max noise singular value {np.max(mass.noise_sigmas)})"
        )
    return _d_sums(float(sigma), mass.noise_sigmas, mass.aspect)


@dataclass(frozen=True)
class OptShrinkResult:
    """Low-rank estimate together with the applied shrinkage weights."""

    estimate: np.ndarray
    weights: np.ndarray
    ill_separated: bool


def optshrink(z: np.ndarray, r: int) -> OptShrinkResult:
    """Rank-``r`` low-rank estimate with data-driven singular value shrinkage.

    The trailing singular values ``sigma_{r+1..q}`` of ``z`` form the noise
    mass; each leading singular vector pair is weighted by -2*D/D' evaluated
    at its singular value. When the signal and noise spectra are not
    separated (``sigma_r == sigma_{r+1}``) the result is flagged
    ``ill_separated`` but still computed.
    """
    a, b = z.shape
    q = min(a, b)
    if not 1 <= r < q:
        raise RankError(f"rank must satisfy 1 <= r < min(a, b) = {q}, got {r}")
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    noise = s[r:]
    c = q / max(a, b)
    ill = s[r - 1] - s[r] <= 1e-12 * max(s[0], 1e-300)
    weights = np.zeros(r)
    for i in range(r):
        if s[i] == 0.0:
            continue  # continuous limit: zero weight for a zero singular value
        d_val, d_prime = _d_sums(s[i], noise, c)
        weights[i] = -2.0 * d_val / d_prime
    estimate = (u[:, :r] * weights) @ vt[:r]
    return OptShrinkResult(estimate=estimate, weights=weights, ill_separated=ill)


def oracle_weights(
    theta: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    u_obs: np.ndarray,
    v_obs: np.ndarray,
) -> np.ndarray:
    """Best weights for combining observed singular vector pairs to
    approximate a planted low-rank matrix (test-support operation).

    ``w*_i = sum_j theta_j * <u_obs_i, u_j> * <v_obs_i, v_j>`` where
    ``theta, u, v`` are the planted factors and ``u_obs, v_obs`` the singular
    vectors of the observed (noisy) matrix, one vector per column.
    """
    theta = np.asarray(theta, dtype=float)
    if u.shape[1] != theta.size or v.shape[1] != theta.size:
        raise ValueError("planted factor counts do not match theta")
    if u_obs.shape[0] != u.shape[0] or v_obs.shape[0] != v.shape[0]:
        raise ValueError("observed and planted vector lengths do not match")
    return ((u_obs.T @ u) * (v_obs.T @ v)) @ theta
