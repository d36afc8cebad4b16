"""Frame-sequence ingestion and artifact emission.

Frames load from PNG/PGM/PPM files in natural filename order, scaled to
[0, 1] by the decoded bit depth. Signed components are written twice: a
rescaled 8-bit visualization and a lossless ``.npy`` dump (the
self-describing flat binary used for exact downstream evaluation).
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import IngestionError
from .video import clamp_intensities, to_luminance

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm")


def natural_key(name: str):
    """Sort key treating digit runs as numbers: frame2 < frame10."""
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]


def list_frame_files(path) -> list[Path]:
    """Image files under a directory, or a glob pattern's matches, in
    natural order."""
    p = Path(path)
    if p.is_dir():
        files = [f for f in p.iterdir() if f.suffix.lower() in IMAGE_SUFFIXES]
    else:
        files = [Path(f) for f in sorted(p.parent.glob(p.name))]
        files = [f for f in files if f.suffix.lower() in IMAGE_SUFFIXES]
    files.sort(key=lambda f: natural_key(f.name))
    if not files:
        raise IngestionError(f"no frame files found at {path}")
    return files


def _decode(path: Path) -> np.ndarray:
    """Decode one image to float intensities in [0, 1] (2-D or (h, w, 3))."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im)
    except Exception as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    if arr.dtype == np.uint8:
        scale = 255.0
    elif arr.dtype == np.uint16:
        scale = 65535.0
    elif arr.dtype == np.int32:  # Pillow "I" mode for 16-bit grayscale
        scale = 65535.0
    else:
        raise IngestionError(f"{path}: unsupported pixel type {arr.dtype}")
    out = arr.astype(float) / scale
    if out.ndim == 3 and out.shape[2] == 4:
        out = out[:, :, :3]  # drop alpha
    if out.ndim == 3 and out.shape[2] != 3:
        raise IngestionError(f"{path}: unsupported band count {out.shape[2]}")
    return out


def load_frames(path, color_mode: str = "luminance") -> np.ndarray:
    """Load a frame sequence as an (a, b, p) tensor (or (a, b, p, 3) in
    per-channel mode), intensities clamped to [0, 1].

    ``path`` may be a directory or a glob pattern; frames order by natural
    filename sort. Mixed frame dimensions raise an ingestion error naming
    the offending file.
    """
    if color_mode not in ("luminance", "per-channel"):
        raise IngestionError(f"unknown color mode {color_mode!r}")
    files = list_frame_files(path)
    frames = []
    shape = None
    for f in files:
        arr = _decode(f)
        if color_mode == "luminance" and arr.ndim == 3:
            arr = to_luminance(arr)
        if color_mode == "per-channel" and arr.ndim == 2:
            arr = np.repeat(arr[:, :, None], 3, axis=2)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise IngestionError(
                f"{f}: frame shape {arr.shape[:2]} differs from {shape[:2]}"
            )
        frames.append(clamp_intensities(arr))
    return np.stack(frames, axis=2 if frames[0].ndim == 2 else 3).transpose(
        *((0, 1, 2) if frames[0].ndim == 2 else (0, 1, 3, 2))
    )


def save_frame_png(path, frame: np.ndarray, bit_depth: int = 8) -> None:
    """Write a [0, 1] frame as 8- or 16-bit grayscale PNG (values clipped)."""
    arr = np.clip(frame, 0.0, 1.0)
    if bit_depth == 8:
        im = Image.fromarray((arr * 255.0).round().astype(np.uint8), mode="L")
    elif bit_depth == 16:
        im = Image.fromarray((arr * 65535.0).round().astype(np.uint16))
    else:
        raise ValueError(f"bit depth must be 8 or 16, got {bit_depth}")
    im.save(path)


def save_rgb_png(path, frame: np.ndarray) -> None:
    arr = (np.clip(frame, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)


def signed_visualization(component: np.ndarray) -> np.ndarray:
    """Symmetric rescale of a signed component into [0, 1] with zero at
    mid-gray."""
    peak = np.abs(component).max()
    if peak == 0.0:
        return np.full_like(component, 0.5)
    return 0.5 + component / (2.0 * peak)


def save_component_sequence(
    out_dir, name: str, tensor: np.ndarray, signed: bool = False
) -> None:
    """Write per-frame PNGs plus one lossless numeric dump for a component
    tensor of shape (h, w, p)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / f"{name}.npy", tensor)
    vis = signed_visualization(tensor) if signed else tensor
    for k in range(tensor.shape[2]):
        save_frame_png(out_dir / f"{name}_{k:04d}.png", vis[:, :, k])


def load_component(out_dir, name: str) -> np.ndarray:
    return np.load(Path(out_dir) / f"{name}.npy")


def save_mask_sequence(out_dir, name: str, mask: np.ndarray) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / f"{name}.npy", mask)
    for k in range(mask.shape[2]):
        save_frame_png(out_dir / f"{name}_{k:04d}.png", mask[:, :, k])


def write_json(path, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path) -> dict:
    with open(path) as f:
        return json.load(f)


def write_convergence_trace(path, records: list[dict]) -> None:
    """CSV trace, one row per outer iteration."""
    if not records:
        return
    cols = list(records[0].keys())
    lines = [",".join(cols)]
    for row in records:
        lines.append(",".join(repr(row[c]) for c in cols))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
