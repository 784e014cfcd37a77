"""Cuboid cellular automaton: Bayesian log-odds fusion of saliency maps.

Each of the M input maps is binarized once with an Otsu threshold fixed at
t=0.  At every step each pixel gathers the signs of (state - threshold)
over its cuboid neighborhood: the same coordinate in every other layer plus
the 4-connected offsets in every layer (5M-1 positions for interior
pixels), and shifts its log-odds by that signed count times a fixed
increment.  After the final step the layers are averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CcaParams",
    "MapStack",
    "otsu_threshold",
    "logit",
    "sigmoid",
    "make_stack",
    "neighbor_sign_sum",
    "cca_step",
    "cca_fuse",
]


@dataclass(frozen=True)
class CcaParams:
    log_odds_step: float = 0.05  # evidence added per agreeing neighbor
    iterations: int = 3
    eps: float = 1e-4  # logit clamp, guards externally supplied hard 0/1 maps

    def __post_init__(self):
        if self.log_odds_step <= 0:
            raise ValueError("log_odds_step must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")


@dataclass(frozen=True)
class MapStack:
    """M same-sized saliency maps with their frozen binarization thresholds."""

    maps: np.ndarray  # (M, H, W)
    gammas: np.ndarray  # (M,), each in (0, 1)


def otsu_threshold(saliency: np.ndarray) -> float:
    """Threshold in [0, 1] maximizing between-class variance over 256 bins.

    The map is quantized to bins round(255*s); the returned value is the
    edge between the two classes, ties broken toward the lower threshold.
    A constant map degenerates to its own value.
    """
    lo, hi = saliency.min(), saliency.max()
    if hi - lo < 1e-12:
        return float(lo)
    q = np.floor(saliency * 255.0 + 0.5).astype(np.intp)
    hist = np.bincount(q.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    w0 = np.cumsum(hist)  # mass of bins <= t
    m0 = np.cumsum(hist * np.arange(256))
    w1 = total - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = m0 / w0
        mu1 = (m0[-1] - m0) / w1
        var_between = w0 * w1 * (mu0 - mu1) ** 2
    var_between[~np.isfinite(var_between)] = -1.0
    t = int(np.argmax(var_between[:255]))
    return (t + 0.5) / 255.0


def logit(s, eps: float = 1e-4):
    """ln(s / (1-s)) with s clamped to [eps, 1-eps] first."""
    s = np.clip(s, eps, 1.0 - eps)
    return np.log(s / (1.0 - s))


def sigmoid(l):
    """Exact inverse of logit on the clamped domain."""
    return 1.0 / (1.0 + np.exp(-l))


def make_stack(maps) -> MapStack:
    """Stack maps and fix each one's Otsu threshold (clamped into (0, 1))."""
    arr = np.stack([np.asarray(m, dtype=np.float64) for m in maps])
    gammas = np.array([otsu_threshold(m) for m in arr])
    # A constant all-0 or all-1 layer would otherwise yield a gamma on the
    # boundary of (0, 1).
    gammas = np.clip(gammas, 1.0 / 510.0, 1.0 - 1.0 / 510.0)
    return MapStack(maps=arr, gammas=gammas)


def neighbor_sign_sum(maps: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Signed neighbor-evidence count for every pixel of every layer.

    Out-of-bounds positions contribute 0; a pixel exactly at threshold
    contributes 0.  Values lie in [-(5M-1), 5M-1].
    """
    sg = np.sign(maps - gammas[:, None, None])
    same_coord = sg.sum(axis=0)
    shifted = np.zeros_like(same_coord)
    layer_sum = same_coord  # per-pixel sum of signs over all layers
    shifted[1:, :] += layer_sum[:-1, :]
    shifted[:-1, :] += layer_sum[1:, :]
    shifted[:, 1:] += layer_sum[:, :-1]
    shifted[:, :-1] += layer_sum[:, 1:]
    # same-coordinate neighbors exclude the layer's own pixel
    return (same_coord + shifted)[None, :, :] - sg


def cca_step(stack: MapStack, params: CcaParams) -> MapStack:
    """One synchronous update of every layer; thresholds stay fixed."""
    sigma = neighbor_sign_sum(stack.maps, stack.gammas)
    new = sigmoid(logit(stack.maps, params.eps) + sigma * params.log_odds_step)
    assert new.min() > 0.0 and new.max() < 1.0
    return MapStack(maps=new, gammas=stack.gammas)


def cca_fuse(stack: MapStack, params: CcaParams) -> np.ndarray:
    """Run the configured steps and average the layers into one map."""
    if stack.maps.ndim != 3:
        raise ValueError("expected a (M, H, W) stack")
    for _ in range(params.iterations):
        stack = cca_step(stack, params)
    fused = stack.maps.mean(axis=0)
    assert fused.min() >= 0.0 and fused.max() <= 1.0
    return fused
