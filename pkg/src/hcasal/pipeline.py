"""End-to-end saliency modes.

Three entry points built from the lower-level pieces:

* :func:`run_hca` - boundary-seeded multi-scale propagation fused at the
  pixel level (the from-scratch detector).
* :func:`optimize_map` - refine an externally supplied saliency map per
  scale, then fuse the refined scales.
* :func:`fuse_maps` - fuse several externally supplied maps directly.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cca, sca
from .cca import CcaParams
from .features import FeatureStack, lab_feature_field, pool_descriptors
from .imaging import rgb_to_lab
from .sca import ScaParams
from .slic import slic_segment

__all__ = ["PipelineConfig", "run_hca", "optimize_map", "fuse_maps"]

DEFAULT_SCALES = (120, 160, 200)


@dataclass(frozen=True)
class PipelineConfig:
    scales: tuple = DEFAULT_SCALES  # superpixel counts, strictly increasing
    sca: ScaParams = field(default_factory=ScaParams)
    cca: CcaParams = field(default_factory=CcaParams)
    compactness: float = 10.0

    def __post_init__(self):
        if not self.scales:
            raise ValueError("scales must be nonempty")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly increasing")


def _worker_count(n_tasks: int) -> int:
    try:
        cap = int(os.environ.get("HCA_THREADS", "1"))
    except ValueError:
        cap = 1
    return max(1, min(cap, n_tasks))


def _map_scales(fn, scales):
    workers = _worker_count(len(scales))
    if workers == 1:
        return [fn(n) for n in scales]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, scales))


def _scale_saliency(lab, stack, cfg: PipelineConfig, n_superpixels: int, prior_map=None):
    """One SCA pass at one scale, projected back to a pixel map."""
    seg = slic_segment(lab, n_superpixels, cfg.compactness)
    desc = pool_descriptors(stack, seg)
    graph = sca.build_graph(seg)
    mats = sca.impact_matrices(desc, graph, cfg.sca)
    if prior_map is None:
        prior = sca.boundary_prior(seg)
    else:
        prior = sca.prior_from_map(prior_map, seg)
    state = sca.evolve(prior, mats, cfg.sca)
    return state[seg.labels]  # constant within each superpixel


def _feature_stack(lab, features: FeatureStack | None) -> FeatureStack:
    if features is not None:
        if features.layers[0].shape[:2] != lab.shape[:2]:
            raise ValueError("feature stack dimensions must match the image")
        return features
    return FeatureStack(layers=(lab_feature_field(lab),), weights=(1.0,))


def run_hca(
    rgb: np.ndarray, cfg: PipelineConfig, features: FeatureStack | None = None
) -> np.ndarray:
    """Boundary prior -> per-scale propagation -> pixel-level fusion."""
    lab = rgb_to_lab(rgb)
    stack = _feature_stack(lab, features)
    maps = _map_scales(lambda n: _scale_saliency(lab, stack, cfg, n), cfg.scales)
    if len(maps) == 1:
        return maps[0]
    return cca.cca_fuse(cca.make_stack(maps), cfg.cca)


def optimize_map(
    rgb: np.ndarray,
    prior_map: np.ndarray,
    cfg: PipelineConfig,
    features: FeatureStack | None = None,
) -> np.ndarray:
    """Refine an external map per scale, then fuse the refined scales."""
    if prior_map.shape != rgb.shape[:2]:
        raise ValueError("prior dimensions must match the image")
    lab = rgb_to_lab(rgb)
    stack = _feature_stack(lab, features)
    maps = _map_scales(
        lambda n: _scale_saliency(lab, stack, cfg, n, prior_map=prior_map), cfg.scales
    )
    if len(maps) == 1:
        return maps[0]
    return cca.cca_fuse(cca.make_stack(maps), cfg.cca)


def fuse_maps(maps, cfg: PipelineConfig) -> np.ndarray:
    """Fuse two or more externally supplied maps with the cuboid automaton."""
    if len(maps) < 2:
        raise ValueError("need at least 2 maps to fuse")
    shape = np.asarray(maps[0]).shape
    for m in maps:
        if np.asarray(m).shape != shape:
            raise ValueError("all maps must share dimensions")
    return cca.cca_fuse(cca.make_stack(maps), cfg.cca)
