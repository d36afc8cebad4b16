"""Evaluation metrics: masked PSNRs and foreground F-measure."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ShapeError, UndefinedMetricError

PSNR_CAP_DB = 99.0


@dataclass(frozen=True)
class MetricsReport:
    f_psnr: float
    b_psnr: float
    f_measure: float
    threshold: float

    def to_flat_text(self) -> str:
        lines = [f"{k} = {v!r}" for k, v in asdict(self).items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_flat_text(cls, text: str) -> "MetricsReport":
        values = {}
        for line in text.strip().splitlines():
            key, _, raw = line.partition("=")
            values[key.strip()] = float(raw.strip())
        return cls(**values)


def _psnr(err2_sum: float, count: int) -> float:
    if count == 0:
        raise UndefinedMetricError("empty pixel region")
    mse = err2_sum / count
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB)


def fb_psnr(
    estimate: np.ndarray, truth: np.ndarray, fg_mask: np.ndarray
) -> tuple[float, float]:
    """Peak signal-to-noise ratio over foreground and background pixels.

    Intensities are assumed normalized to [0, 1] (peak 1). The foreground
    mask selects the pixels for f-PSNR; its complement gives b-PSNR. Both
    regions must be nonempty.
    """
    if not (estimate.shape == truth.shape == fg_mask.shape):
        raise ShapeError("estimate, truth, and mask must share one shape")
    fg = fg_mask != 0
    err2 = (estimate - truth) ** 2
    f_psnr = _psnr(float(err2[fg].sum()), int(fg.sum()))
    b_psnr = _psnr(float(err2[~fg].sum()), int((~fg).sum()))
    return f_psnr, b_psnr


def f_measure(
    smooth: np.ndarray,
    fg_mask: np.ndarray,
    threshold: float | None = None,
    num_thresholds: int = 64,
) -> tuple[float, float]:
    """F-measure of the thresholded foreground magnitude against labels.

    With ``threshold=None`` the best score over ``num_thresholds`` evenly
    spaced thresholds of ``|smooth|`` is returned (scale-invariant);
    otherwise the fixed threshold is used. Returns (score, threshold).
    """
    if smooth.shape != fg_mask.shape:
        raise ShapeError(f"shape mismatch: {smooth.shape} vs {fg_mask.shape}")
    labels = fg_mask != 0
    if not labels.any():
        raise UndefinedMetricError("no positive labels present")
    mag = np.abs(smooth)
    if threshold is not None:
        return _f1(mag >= threshold, labels), float(threshold)
    vmax = mag.max()
    if vmax == 0.0:
        return 0.0, 0.0
    best_f, best_t = 0.0, 0.0
    for t in np.linspace(0.0, vmax, num_thresholds, endpoint=False):
        score = _f1(mag > t, labels)
        if score > best_f:
            best_f, best_t = score, float(t)
    return best_f, best_t


def _f1(predicted: np.ndarray, labels: np.ndarray) -> float:
    tp = float(np.sum(predicted & labels))
    fp = float(np.sum(predicted & ~labels))
    fn = float(np.sum(~predicted & labels))
    if tp == 0.0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)
