"""Seeded corruption generators for experiments.

Every generator derives one child seed per frame from the master seed, so
outputs are reproducible even if frames are processed in parallel. The
returned mask is 1 where a pixel was left untouched (or observed, for
missing data) and 0 where it was corrupted or dropped; dense noise touches
everything, so its mask is all ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

KINDS = ("salt_pepper", "gaussian", "poisson", "missing")


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    level: float  # probability for salt_pepper/missing, target SNR (dB) otherwise
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown corruption kind {self.kind!r}")
        if self.kind in ("salt_pepper", "missing") and not 0 <= self.level <= 1:
            raise ConfigError(f"probability must lie in [0, 1], got {self.level}")
        if self.kind in ("gaussian", "poisson") and not np.isfinite(self.level):
            raise ConfigError(f"target SNR must be finite, got {self.level}")


def _frame_rngs(seed: int, p: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(p)]


def corrupt(video: np.ndarray, spec: CorruptionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Apply the corruption model to an (m, n, p) video in [0, 1].

    Returns (corrupted video, untouched-pixel mask).
    """
    if video.ndim != 3:
        raise ConfigError(f"expected an (m, n, p) video, got shape {video.shape}")
    out = video.astype(float).copy()
    mask = np.ones_like(out)
    p = video.shape[2]
    rngs = _frame_rngs(spec.seed, p)

    if spec.kind == "salt_pepper":
        for k, rng in enumerate(rngs):
            hit = rng.random(video.shape[:2]) < spec.level
            values = rng.integers(0, 2, size=video.shape[:2]).astype(float)
            out[:, :, k] = np.where(hit, values, out[:, :, k])
            mask[:, :, k] = (~hit).astype(float)
    elif spec.kind == "missing":
        for k, rng in enumerate(rngs):
            keep = rng.random(video.shape[:2]) >= spec.level
            out[:, :, k] *= keep
            mask[:, :, k] = keep.astype(float)
    elif spec.kind == "gaussian":
        noise = np.stack(
            [rng.standard_normal(video.shape[:2]) for rng in rngs], axis=2
        )
        out = out + _scale_to_snr(video, noise, spec.level)
    elif spec.kind == "poisson":
        out = _poisson_at_snr(video, spec)
    return out, mask


def _scale_to_snr(signal: np.ndarray, noise: np.ndarray, snr_db: float) -> np.ndarray:
    """Rescale a noise realization so the realized SNR hits the target."""
    sig_norm = np.linalg.norm(signal)
    noise_norm = np.linalg.norm(noise)
    if noise_norm == 0 or sig_norm == 0:
        return noise
    alpha = sig_norm / (noise_norm * 10.0 ** (snr_db / 20.0))
    return alpha * noise


def _poisson_at_snr(video: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    """Photon-limited noise at a target SNR.

    Counts are drawn at a photon budget per unit intensity; the budget is
    found by bisection on the realized SNR (the closed-form expectation
    seeds the bracket).
    """
    sig_power = float(np.sum(video**2))
    total_intensity = float(np.sum(video))
    if sig_power == 0:
        return video.copy()
    target = spec.level
    # E||out - video||^2 = sum(video)/budget, so this budget hits the target
    # in expectation; bisection tightens the realized value.
    budget0 = 10.0 ** (target / 10.0) * total_intensity / sig_power

    def realized_snr(budget: float) -> tuple[float, np.ndarray]:
        rngs = _frame_rngs(spec.seed, video.shape[2])
        out = np.stack(
            [rngs[k].poisson(budget * video[:, :, k]) / budget for k in range(video.shape[2])],
            axis=2,
        )
        noise_power = float(np.sum((out - video) ** 2))
        if noise_power == 0:
            return np.inf, out
        return 10.0 * np.log10(sig_power / noise_power), out

    lo, hi = budget0 / 16.0, budget0 * 16.0
    budget = budget0
    snr, out = realized_snr(budget)
    for _ in range(40):
        if abs(snr - target) <= 0.2:
            break
        if snr > target:
            hi = budget
        else:
            lo = budget
        budget = np.sqrt(lo * hi)
        snr, out = realized_snr(budget)
    return out
