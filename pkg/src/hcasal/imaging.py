"""Image I/O, color conversion, and resizing shared by all other modules.

Conventions: RGB images are uint8 arrays of shape (H, W, 3); Lab images are
float64 (H, W, 3) with L in [0, 100]; saliency maps are float64 (H, W) with
values in [0, 1], row-major.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "ImageFormatError",
    "load_image",
    "load_gray_png",
    "rgb_to_lab",
    "resize_nearest",
    "write_gray_png",
]


class ImageFormatError(ValueError):
    """Raised for unreadable, truncated, or zero-dimension image files."""


def load_image(path) -> np.ndarray:
    """Decode a PNG or JPEG file into a uint8 (H, W, 3) RGB array."""
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            data = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageFormatError(f"cannot decode image {path!r}: {exc}") from exc
    if data.ndim != 3 or data.shape[0] < 1 or data.shape[1] < 1:
        raise ImageFormatError(f"zero-dimension image: {path!r}")
    return data


def load_gray_png(path) -> np.ndarray:
    """Load an 8-bit grayscale PNG as a float64 saliency map in [0, 1]."""
    try:
        with Image.open(path) as im:
            gray = np.asarray(im.convert("L"), dtype=np.float64)
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageFormatError(f"cannot decode image {path!r}: {exc}") from exc
    return gray / 255.0


# sRGB (D65, 2 degree observer) -> XYZ linear transform.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert a uint8 RGB image to CIELAB (sRGB primaries, D65 white)."""
    c = img.astype(np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T
    t = xyz / _WHITE
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = np.clip(116.0 * f[..., 1] - 16.0, 0.0, 100.0)
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def resize_nearest(arr: np.ndarray, new_w: int, new_h: int) -> np.ndarray:
    """Nearest-neighbor resize of an (H, W) or (H, W, C) array.

    The source index for output column x is floor((x + 0.5) * srcW / newW),
    likewise for rows.  Resizing to the source dimensions is the identity.
    """
    if new_w < 1 or new_h < 1:
        raise ValueError("target dimensions must be >= 1")
    src_h, src_w = arr.shape[:2]
    if (src_h, src_w) == (new_h, new_w):
        return arr.copy()
    cols = np.floor((np.arange(new_w) + 0.5) * src_w / new_w).astype(np.intp)
    rows = np.floor((np.arange(new_h) + 0.5) * src_h / new_h).astype(np.intp)
    return arr[rows[:, None], cols[None, :]]


def write_gray_png(saliency: np.ndarray, path) -> None:
    """Write a [0, 1] saliency map as an 8-bit grayscale PNG.

    Quantization is round-half-up: byte = floor(255 * s + 0.5).
    """
    bytes_ = np.floor(saliency * 255.0 + 0.5).astype(np.uint8)
    try:
        Image.fromarray(bytes_, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise ImageFormatError(f"cannot write {path!r}: {exc}") from exc
