"""Single-layer cellular automaton over the superpixel graph.

Builds the boundary-seeded prior, the 2-hop neighborhood (with all
border superpixels forming a clique), the exponential-similarity impact
matrix with its row normalization, the diagonal coherence matrix, and runs
the synchronous update

    s(t+1) = C* s(t) + (I - C*) F* s(t)

for a fixed number of steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import Descriptors, distance_matrix
from .slic import Segmentation, adjacency

__all__ = [
    "ScaParams",
    "ImpactMatrices",
    "boundary_prior",
    "prior_from_map",
    "build_graph",
    "impact_matrices",
    "evolve",
]

BOUNDARY_PRIOR = 0.001
INTERIOR_PRIOR = 0.5
_PRIOR_CLAMP = (0.001, 0.999)


@dataclass(frozen=True)
class ScaParams:
    """Propagation parameters; defaults follow the reference setup."""

    sigma_f2: float = 0.1  # similarity bandwidth
    coherence_scale: float = 0.6  # range width of the coherence diagonal
    coherence_offset: float = 0.2  # lower bound of the coherence diagonal
    iterations: int = 20

    def __post_init__(self):
        if self.sigma_f2 <= 0:
            raise ValueError("sigma_f2 must be > 0")
        if self.coherence_scale <= 0 or self.coherence_offset < 0:
            raise ValueError("coherence parameters out of range")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class ImpactMatrices:
    """Raw impact factors F, row-normalized F*, and the coherence diagonal."""

    impact: np.ndarray  # (n, n), zero outside the neighborhood and diagonal
    row_normalized: np.ndarray  # (n, n), rows sum to 1
    coherence: np.ndarray  # (n,), entries in [offset, scale + offset]


def boundary_prior(seg: Segmentation) -> np.ndarray:
    """0.001 for border-touching superpixels, 0.5 for interior ones."""
    prior = np.full(seg.count, INTERIOR_PRIOR)
    prior[list(seg.boundary_ids)] = BOUNDARY_PRIOR
    return prior


def prior_from_map(saliency: np.ndarray, seg: Segmentation) -> np.ndarray:
    """Per-superpixel mean of a pixel map, clamped to [0.001, 0.999]."""
    if saliency.shape != seg.labels.shape:
        raise ValueError("map dimensions must match the segmentation")
    means = np.bincount(seg.labels.ravel(), saliency.ravel(), seg.count) / seg.sizes
    return np.clip(means, *_PRIOR_CLAMP)


def build_graph(seg: Segmentation) -> np.ndarray:
    """Boolean (n, n) neighborhood: adjacent superpixels plus their
    adjacents, with every pair of border superpixels connected."""
    adj = adjacency(seg)
    nb = adj | (adj @ adj)
    border = np.fromiter((i in seg.boundary_ids for i in range(seg.count)), bool)
    nb[np.ix_(border, border)] = True
    np.fill_diagonal(nb, False)
    return nb


def impact_matrices(desc: Descriptors, nb: np.ndarray, params: ScaParams) -> ImpactMatrices:
    """Exponential-similarity impact factors restricted to the neighborhood,
    their row normalization, and the coherence diagonal."""
    if desc.count != nb.shape[0]:
        raise ValueError("descriptor count must match the graph")
    if nb.shape[0] > 1 and not nb.any(axis=1).all():
        raise ValueError("graph contains an isolated node")

    dist = distance_matrix(desc)
    impact = np.where(nb, np.exp(-dist / params.sigma_f2), 0.0)
    degrees = impact.sum(axis=1)
    if np.any(degrees <= 0):
        raise ValueError("graph contains a node with zero total impact")
    row_normalized = impact / degrees[:, None]

    # Coherence uses the unnormalized row maxima: cells unlike all their
    # neighbors keep more of their own state.
    raw = 1.0 / impact.max(axis=1)
    lo, hi = raw.min(), raw.max()
    if hi - lo < 1e-12:
        coherence = np.full_like(raw, params.coherence_offset + params.coherence_scale / 2.0)
    else:
        coherence = params.coherence_scale * (raw - lo) / (hi - lo) + params.coherence_offset
    return ImpactMatrices(impact=impact, row_normalized=row_normalized, coherence=coherence)


def evolve(prior: np.ndarray, mats: ImpactMatrices, params: ScaParams) -> np.ndarray:
    """Run the synchronous update for the configured number of steps."""
    n = len(prior)
    if mats.row_normalized.shape != (n, n) or len(mats.coherence) != n:
        raise ValueError("inconsistent dimensions")
    lo, hi = prior.min(), prior.max()
    c = mats.coherence
    state = prior.astype(np.float64)
    for _ in range(params.iterations):
        state = c * state + (1.0 - c) * (mats.row_normalized @ state)
        assert state.min() >= lo - 1e-12 and state.max() <= hi + 1e-12, (
            "states escaped the prior's convex hull"
        )
    return state
