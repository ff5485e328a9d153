"""
Image resampling.
"""

import numpy as np

from ..core.errors import NumericError


def _axis_weights(src: int, dst: int):
    scale = src / dst
    centers = (np.arange(dst) + 0.5) * scale - 0.5
    centers = np.clip(centers, 0.0, src - 1)
    lo = np.floor(centers).astype(int)
    hi = np.minimum(lo + 1, src - 1)
    frac = centers - lo
    return lo, hi, frac


def resize_bilinear(image: np.ndarray, size: int = 32) -> np.ndarray:
    """Separable bilinear downsampling of a (C, H, W) image with half-pixel centers."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 3:
        raise NumericError(f"expected a (C, H, W) image, got shape {image.shape}")
    _, h, w = image.shape
    if h < size or w < size:
        raise NumericError(f"upscaling {h}x{w} to {size}x{size} is not supported")
    if h == size and w == size:
        return image.copy()
    lo, hi, frac = _axis_weights(h, size)
    rows = image[:, lo, :] * (1 - frac)[None, :, None] + image[:, hi, :] * frac[None, :, None]
    lo, hi, frac = _axis_weights(w, size)
    out = rows[:, :, lo] * (1 - frac)[None, None, :] + rows[:, :, hi] * frac[None, None, :]
    return np.clip(out, 0.0, 1.0)
