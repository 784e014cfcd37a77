"""Per-superpixel feature descriptors and weighted feature-space distances.

A feature stack holds one or more per-pixel fields with convex layer
weights.  Descriptors are per-superpixel means; the weighted sum of
per-layer Euclidean distances between descriptors drives the impact factor
matrix of the propagation step.

Feature tensors are interchanged as HCAF files: magic ``HCAF``, then
little-endian u32 version=1, height, width, channels, then
height*width*channels little-endian float32 values, pixel-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .imaging import resize_nearest
from .slic import Segmentation

__all__ = [
    "FeatureFormatError",
    "FeatureStack",
    "Descriptors",
    "lab_feature_field",
    "load_feature_tensor",
    "save_feature_tensor",
    "pool_descriptors",
    "pair_distance",
    "distance_matrix",
]

_MAGIC = b"HCAF"
_VERSION = 1
_WEIGHT_TOL = 1e-9


class FeatureFormatError(ValueError):
    """Raised for malformed HCAF files."""


@dataclass(frozen=True)
class FeatureStack:
    """Ordered per-pixel feature fields with convex layer weights."""

    layers: tuple  # of float arrays (H, W, C_l), equal H and W
    weights: tuple  # of floats, nonnegative, summing to 1

    def __post_init__(self):
        if not self.layers or len(self.layers) != len(self.weights):
            raise ValueError("need one weight per layer")
        shape = self.layers[0].shape[:2]
        for layer in self.layers:
            if layer.shape[:2] != shape:
                raise ValueError("all layers must share height and width")
            if not np.all(np.isfinite(layer)):
                raise ValueError("feature values must be finite")
        if any(wt < 0 for wt in self.weights):
            raise ValueError("layer weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"layer weights must sum to 1, got {sum(self.weights)}")


@dataclass(frozen=True)
class Descriptors:
    """Per-superpixel, per-layer mean feature vectors."""

    layers: tuple  # of arrays (n, C_l)
    weights: tuple

    @property
    def count(self) -> int:
        return self.layers[0].shape[0]


def lab_feature_field(lab: np.ndarray) -> np.ndarray:
    """Scale a Lab image to a 3-channel field with each channel in ~[0, 1].

    Built-in low-level feature provider used when no external tensors are
    supplied: (L/100, (a+128)/255, (b+128)/255).
    """
    out = np.empty_like(lab)
    out[..., 0] = lab[..., 0] / 100.0
    out[..., 1] = (lab[..., 1] + 128.0) / 255.0
    out[..., 2] = (lab[..., 2] + 128.0) / 255.0
    return out


def save_feature_tensor(field: np.ndarray, path) -> None:
    """Write an (H, W, C) float field as an HCAF v1 file (bit-exact f32)."""
    h, w, c = field.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", _VERSION, h, w, c))
        fh.write(np.ascontiguousarray(field, dtype="<f4").tobytes())


def load_feature_tensor(path, target_w: int, target_h: int) -> np.ndarray:
    """Load an HCAF file, nearest-neighbor resized to the target dimensions."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise FeatureFormatError(f"bad magic in {path!r}")
    if len(raw) < 20:
        raise FeatureFormatError(f"truncated header in {path!r}")
    version, h, w, c = struct.unpack("<IIII", raw[4:20])
    if version != _VERSION:
        raise FeatureFormatError(f"unsupported HCAF version {version}")
    if c == 0 or h == 0 or w == 0:
        raise FeatureFormatError("zero-sized HCAF tensor")
    expected = 20 + h * w * c * 4
    if len(raw) != expected:
        raise FeatureFormatError(f"payload length {len(raw)} != expected {expected}")
    field = np.frombuffer(raw, dtype="<f4", offset=20).reshape(h, w, c).astype(np.float64)
    if not np.all(np.isfinite(field)):
        raise FeatureFormatError("non-finite values in HCAF tensor")
    return resize_nearest(field, target_w, target_h)


def pool_descriptors(stack: FeatureStack, seg: Segmentation) -> Descriptors:
    """Mean feature vector of every superpixel on every layer."""
    if stack.layers[0].shape[:2] != seg.labels.shape:
        raise ValueError("feature stack dimensions must match the segmentation")
    flat = seg.labels.ravel()
    pooled = []
    for layer in stack.layers:
        c = layer.shape[2]
        means = np.empty((seg.count, c))
        for ch in range(c):
            means[:, ch] = np.bincount(flat, layer[..., ch].ravel(), seg.count)
        means /= seg.sizes[:, None]
        pooled.append(means)
    return Descriptors(layers=tuple(pooled), weights=stack.weights)


def pair_distance(desc: Descriptors, i: int, j: int) -> float:
    """Weighted sum over layers of Euclidean descriptor distances."""
    return float(
        sum(
            wt * np.linalg.norm(layer[i] - layer[j])
            for wt, layer in zip(desc.weights, desc.layers)
        )
    )


def distance_matrix(desc: Descriptors) -> np.ndarray:
    """Full (n, n) matrix of pair_distance values."""
    n = desc.count
    total = np.zeros((n, n))
    for wt, layer in zip(desc.weights, desc.layers):
        diff = layer[:, None, :] - layer[None, :, :]
        total += wt * np.sqrt((diff**2).sum(axis=-1))
    return total
