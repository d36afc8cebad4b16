"""Weighted anisotropic total variation and its ADMM denoiser.

The first-difference operator treats the video as an (m, n, p) tensor and
differences along each axis with circular wraparound, which keeps the
operator block-circulant so its normal equations diagonalize under the 3-D
FFT. The {0, 1} weight tensors zero the wraparound slots (and any difference
touching an unobserved pixel), so the penalty itself never sees the circular
terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .shrinkage import soft_threshold
from .video import check_binary


@dataclass(frozen=True)
class TVWeights:
    """Binary weights selecting which first differences the penalty counts."""

    wx: np.ndarray
    wy: np.ndarray
    wz: np.ndarray
    mode: str

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.wx.shape

    def stacked(self) -> np.ndarray:
        """Weights as a single (3, m, n, p) array (x, y, z order)."""
        return np.stack([self.wx, self.wy, self.wz])


def build_tv_weights(mask: np.ndarray, mode: str = "3d") -> TVWeights:
    """Derive TV weights from an observation mask.

    A difference is counted only when both pixels it touches are observed;
    wraparound slots are always zeroed. In 2-D mode the temporal weights are
    zeroed entirely.
    """
    if mode not in ("2d", "3d"):
        raise ValueError(f"mode must be '2d' or '3d', got {mode!r}")
    m = check_binary(np.asarray(mask), "mask")
    if m.ndim != 3:
        raise ShapeError(f"expected an (m, n, p) mask, got shape {m.shape}")
    wx = m * np.roll(m, -1, axis=0)
    wy = m * np.roll(m, -1, axis=1)
    wz = m * np.roll(m, -1, axis=2)
    wx[-1, :, :] = 0.0
    wy[:, -1, :] = 0.0
    wz[:, :, -1] = 0.0
    if mode == "2d":
        wz[:] = 0.0
    return TVWeights(wx=wx, wy=wy, wz=wz, mode=mode)


def _diff3(t: np.ndarray) -> np.ndarray:
    """Circular forward differences along each axis, stacked as (3, m, n, p)."""
    return np.stack([np.roll(t, -1, axis=a) - t for a in range(3)])


def _diff3_adjoint(d: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`_diff3`: circular backward differences, summed."""
    out = np.zeros(d.shape[1:])
    for a in range(3):
        out += np.roll(d[a], 1, axis=a) - d[a]
    return out


def apply_diff(x: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Apply the stacked circulant difference operator to a length-mnp vector.

    Returns the length-3mnp vector [dx; dy; dz] in the same column-major
    layout the weight diagonal uses.
    """
    m, n, p = shape
    if x.shape != (m * n * p,):
        raise ShapeError(f"vector length {x.shape} does not match {m * n * p}")
    d = _diff3(x.reshape(m, n, p, order="F"))
    return np.concatenate([d[a].reshape(-1, order="F") for a in range(3)])


def apply_diff_adjoint(y: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Adjoint of :func:`apply_diff` mapping 3mnp back to mnp."""
    m, n, p = shape
    if y.shape != (3 * m * n * p,):
        raise ShapeError(f"vector length {y.shape} does not match {3 * m * n * p}")
    d = np.stack([y[a * m * n * p : (a + 1) * m * n * p].reshape(m, n, p, order="F") for a in range(3)])
    return _diff3_adjoint(d).reshape(-1, order="F")


def tv_value(x: np.ndarray, weights: TVWeights) -> float:
    """Weighted anisotropic TV of an (m, n, p) tensor."""
    if x.shape != weights.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {weights.shape}")
    d = _diff3(x)
    return float(np.sum(weights.stacked() * np.abs(d)))


@dataclass(frozen=True)
class CirculantSpectrum:
    """Eigenvalues of the normal operator C^T C on the 3-D Fourier grid."""

    eigenvalues: np.ndarray
    rho: float


def precompute_spectrum(m: int, n: int, p: int, rho: float) -> CirculantSpectrum:
    """Eigenvalue tensor of C^T C: the tensor sum of the squared 1-D DFT
    magnitudes of the per-axis difference stencils.
    """
    if rho < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")

    def stencil_eigs(k: int) -> np.ndarray:
        d = np.zeros(k)
        d[0] = -1.0
        d[-1] += 1.0  # k == 1 collapses the stencil to a single zero entry
        return np.abs(np.fft.fft(d)) ** 2

    em, en, ep = stencil_eigs(m), stencil_eigs(n), stencil_eigs(p)
    eig = em[:, None, None] + en[None, :, None] + ep[None, None, :]
    return CirculantSpectrum(eigenvalues=eig, rho=float(rho))


def _solve3(rhs: np.ndarray, spec: CirculantSpectrum) -> np.ndarray:
    denom = 1.0 + spec.rho * spec.eigenvalues
    return np.fft.ifftn(np.fft.fftn(rhs) / denom).real


def circulant_solve(rhs: np.ndarray, spec: CirculantSpectrum) -> np.ndarray:
    """Exact solution of (I + rho*C^T C) s = rhs via 3-D FFT diagonalization."""
    m, n, p = spec.eigenvalues.shape
    if rhs.shape != (m * n * p,):
        raise ShapeError(f"rhs length {rhs.shape} does not match {m * n * p}")
    return _solve3(rhs.reshape(m, n, p, order="F"), spec).reshape(-1, order="F")


def tvdn(
    z: np.ndarray,
    lam: float,
    weights: TVWeights,
    rho: float = 1.0,
    iters: int = 10,
    spectrum: CirculantSpectrum | None = None,
) -> np.ndarray:
    """Weighted TV denoising of an (m, n, p) tensor by ADMM.

    Runs ``iters`` iterations of the split v = Cs: the s-update is an FFT
    circulant solve, the v-update is soft thresholding with per-entry
    thresholds (lam/rho) on weighted slots (zero threshold on unweighted
    slots), and u is the scaled dual.
    """
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if iters < 1:
        raise ValueError(f"iters must be at least 1, got {iters}")
    if z.shape != weights.shape:
        raise ShapeError(f"shape mismatch: {z.shape} vs {weights.shape}")
    if spectrum is None:
        spectrum = precompute_spectrum(*z.shape, rho)
    elif spectrum.eigenvalues.shape != z.shape or spectrum.rho != rho:
        raise ShapeError("spectrum was precomputed for different dims or rho")

    thresholds = (lam / rho) * weights.stacked()
    v = _diff3(z)
    u = np.zeros_like(v)
    s = z
    for _ in range(iters):
        rhs = z + rho * _diff3_adjoint(v - u)
        s = _solve3(rhs, spectrum)
        cs = _diff3(s)
        v = soft_threshold(cs + u, thresholds)
        u = u + cs - v
    return s
