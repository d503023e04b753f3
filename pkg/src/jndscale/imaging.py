"""Deterministic image transforms for producing boosted test stimuli.

Images are numpy uint8 arrays of shape (height, width, 3). Artifact
amplification scales the source-vs-decoded difference per channel;
zooming crops the central half and upscales it back with a hand-rolled
separable Lanczos-3 resampler (clamped edges, weights normalized so
constant images survive exactly).
"""

import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from . import _kernels

LANCZOS_TAPS = 3


class ImageInputError(ValueError):
    """Raised when an input image violates the module's preconditions."""


def validate_image(image: np.ndarray) -> None:
    if not isinstance(image, np.ndarray):
        raise ImageInputError(f"expected numpy array, got {type(image).__name__}")
    if image.ndim != 3 or image.shape[2] != 3:
        raise ImageInputError(f"expected (height, width, 3) array, got shape {image.shape}")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise ImageInputError("image has zero height or width")
    if image.dtype != np.uint8:
        raise ImageInputError(f"expected uint8 samples, got {image.dtype}")


def load_png(path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    validate_image(arr)
    return arr


def save_png_atomic(image: np.ndarray, path) -> None:
    """Write a PNG via a temp file + rename so readers never see partials."""
    validate_image(image)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(suffix=".png", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            Image.fromarray(image, mode="RGB").save(fh, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def round_half_away_from_zero(values: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(values) + 0.5), values)


def amplify_artifacts(source: np.ndarray, distorted: np.ndarray, factor: float) -> np.ndarray:
    """Scale the per-channel difference between distorted and source by factor.

    out = clamp(source + factor * (distorted - source), 0, 255), rounded
    half away from zero.
    """
    validate_image(source)
    validate_image(distorted)
    if source.shape != distorted.shape:
        raise ImageInputError(
            f"dimension mismatch: source {source.shape} vs distorted {distorted.shape}"
        )
    if factor < 0:
        raise ImageInputError(f"amplification factor must be >= 0, got {factor}")
    boosted = source.astype(np.float64) + factor * (
        distorted.astype(np.float64) - source.astype(np.float64)
    )
    boosted = round_half_away_from_zero(boosted)
    return np.clip(boosted, 0, 255).astype(np.uint8)


def center_crop_half(image: np.ndarray) -> np.ndarray:
    """Central crop of half the size in both dimensions (even dims required)."""
    validate_image(image)
    h, w = image.shape[:2]
    if h % 2 or w % 2:
        raise ImageInputError(f"zooming needs even dimensions, got {h}x{w}")
    top = (h - h // 2) // 2
    left = (w - w // 2) // 2
    return image[top : top + h // 2, left : left + w // 2]


def lanczos_weights(n_in: int, n_out: int, taps: int = LANCZOS_TAPS):
    """Tap indices and normalized Lanczos weights for a 1-D upscale.

    Output pixel o samples the input at (o + 0.5) * n_in / n_out - 0.5
    (pixel-center alignment); out-of-range taps clamp to the edge.
    """
    scale = n_in / n_out
    centers = (np.arange(n_out) + 0.5) * scale - 0.5
    first = np.floor(centers).astype(np.int64) - taps + 1
    offsets = np.arange(2 * taps)
    idx = first[:, None] + offsets[None, :]
    t = centers[:, None] - idx
    with np.errstate(invalid="ignore", divide="ignore"):
        pit = np.pi * t
        w = taps * np.sin(pit) * np.sin(pit / taps) / (pit * pit)
    w[np.abs(t) < 1e-12] = 1.0
    w[np.abs(t) >= taps] = 0.0
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, n_in - 1)
    return idx.astype(np.int64), w


def upscale_lanczos(image: np.ndarray, out_h: int, out_w: int, taps: int = LANCZOS_TAPS) -> np.ndarray:
    """Separable Lanczos upscale of an RGB image to (out_h, out_w)."""
    validate_image(image)
    h, w = image.shape[:2]
    idx_x, w_x = lanczos_weights(w, out_w, taps)
    idx_y, w_y = lanczos_weights(h, out_h, taps)
    out = np.empty((out_h, out_w, 3), dtype=np.uint8)
    for c in range(3):
        plane = image[:, :, c].astype(np.float64)
        plane = _kernels.resample_axis(plane, idx_x, w_x)           # (h, out_w)
        plane = _kernels.resample_axis(plane.T.copy(), idx_y, w_y)  # (out_w, out_h)
        out[:, :, c] = np.clip(round_half_away_from_zero(plane.T), 0, 255).astype(np.uint8)
    return out


def zoom_boost(image: np.ndarray, taps: int = LANCZOS_TAPS) -> np.ndarray:
    """Crop the central half and Lanczos-upscale it back to the input size."""
    h, w = image.shape[:2]
    cropped = center_crop_half(image)
    return upscale_lanczos(cropped, h, w, taps)
