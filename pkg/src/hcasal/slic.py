"""Deterministic SLIC superpixel segmentation.

Grid-seeded k-means in (x, y, L, a, b) space with a fixed number of sweeps
and deterministic connectivity enforcement, so identical inputs always yield
identical label maps.  Superpixels are the cells of the single-layer
automaton; adjacency and border membership feed its neighborhood graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

__all__ = ["Segmentation", "slic_segment", "adjacency"]

_ITERATIONS = 10
_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class Segmentation:
    """Per-pixel superpixel labels plus region summaries.

    labels: int32 (H, W), values dense in [0, count).
    centroids: (count, 5) means of (x, y, L, a, b) per superpixel.
    sizes: pixel count per superpixel; sums to H * W.
    boundary_ids: ids of superpixels touching the image border.
    """

    labels: np.ndarray
    count: int
    centroids: np.ndarray
    sizes: np.ndarray
    boundary_ids: frozenset = field(default_factory=frozenset)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def slic_segment(lab: np.ndarray, n_target: int, compactness: float = 10.0) -> Segmentation:
    """Segment a Lab image into roughly ``n_target`` compact superpixels.

    Seeds are placed on a regular grid, then 10 assignment/update sweeps of
    the SLIC distance (Lab distance plus ``compactness``-weighted spatial
    distance) run with ties broken toward the lowest seed id.  Stray
    connected components are merged into their largest adjacent region.
    """
    h, w = lab.shape[:2]
    if n_target < 2 or n_target > h * w:
        raise ValueError(f"n_target must be in [2, {h * w}], got {n_target}")
    if compactness <= 0:
        raise ValueError("compactness must be > 0")

    step = np.sqrt(h * w / n_target)
    grid_w = max(1, int(round(w / step)))
    grid_h = max(1, int(round(h / step)))
    # A 1-wide grid can undershoot badly on extreme aspect ratios.
    while grid_w * grid_h < max(2, n_target // 2):
        if grid_w <= grid_h:
            grid_w += 1
        else:
            grid_h += 1

    cx = (np.arange(grid_w) + 0.5) * w / grid_w
    cy = (np.arange(grid_h) + 0.5) * h / grid_h
    centers_xy = np.array([(x, y) for y in cy for x in cx])
    seed_cols = np.minimum(centers_xy[:, 0].astype(np.intp), w - 1)
    seed_rows = np.minimum(centers_xy[:, 1].astype(np.intp), h - 1)
    centers_lab = lab[seed_rows, seed_cols].astype(np.float64)
    k = len(centers_xy)

    half = max(1, int(np.ceil(step)))
    spatial_weight = (compactness / step) ** 2
    ys, xs = np.indices((h, w))
    labels = np.zeros((h, w), dtype=np.int32)

    for _ in range(_ITERATIONS):
        best = np.full((h, w), np.inf)
        labels.fill(0)
        for idx in range(k):
            x0, y0 = centers_xy[idx]
            r0 = max(0, int(y0) - half)
            r1 = min(h, int(y0) + half + 1)
            c0 = max(0, int(x0) - half)
            c1 = min(w, int(x0) + half + 1)
            if r0 >= r1 or c0 >= c1:
                continue
            color = ((lab[r0:r1, c0:c1] - centers_lab[idx]) ** 2).sum(axis=-1)
            spatial = (xs[r0:r1, c0:c1] - x0) ** 2 + (ys[r0:r1, c0:c1] - y0) ** 2
            dist = color + spatial_weight * spatial
            win_best = best[r0:r1, c0:c1]
            better = dist < win_best  # strict: ties keep the lower id
            win_best[better] = dist[better]
            labels[r0:r1, c0:c1][better] = idx

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=k).astype(np.float64)
        occupied = counts > 0
        safe = np.maximum(counts, 1.0)
        centers_xy[occupied, 0] = (np.bincount(flat, xs.ravel(), k) / safe)[occupied]
        centers_xy[occupied, 1] = (np.bincount(flat, ys.ravel(), k) / safe)[occupied]
        for ch in range(3):
            sums = np.bincount(flat, lab[..., ch].ravel(), k)
            centers_lab[occupied, ch] = (sums / safe)[occupied]

    labels = _enforce_connectivity(labels, k)
    labels = _relabel_dense(labels)
    return _summarize(labels, lab)


def _find_orphans(labels: np.ndarray, ids):
    """Pixel lists (flat indices) of every non-dominant connected component
    among the given label ids, ordered by the component's first row-major
    pixel."""
    h, w = labels.shape
    orphans = []
    for lab_id in ids:
        mask = labels == lab_id
        comp, ncomp = ndimage.label(mask, structure=_FOUR_CONNECTED)
        if ncomp <= 1:
            continue
        members = np.flatnonzero(mask.ravel())
        comp_of = comp.ravel()[members]
        order = np.argsort(comp_of, kind="stable")  # stable keeps row-major order
        sorted_members = members[order]
        bounds = np.searchsorted(comp_of[order], np.arange(1, ncomp + 2))
        comps = [sorted_members[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        comps = [c for c in comps if len(c)]
        # Dominant component: largest, then earliest in row-major order.
        comps.sort(key=lambda c: (-len(c), c[0]))
        orphans.extend(comps[1:])
    orphans.sort(key=lambda c: c[0])
    return orphans


def _orphan_neighbor_labels(labels: np.ndarray, pixels: np.ndarray, own: int):
    """Distinct labels 4-adjacent to the component (excluding its own)."""
    h, w = labels.shape
    found = set()
    if len(pixels) <= 64:
        for p in pixels.tolist():
            r, c = divmod(p, w)
            if r > 0:
                found.add(int(labels[r - 1, c]))
            if r + 1 < h:
                found.add(int(labels[r + 1, c]))
            if c > 0:
                found.add(int(labels[r, c - 1]))
            if c + 1 < w:
                found.add(int(labels[r, c + 1]))
    else:
        rows, cols = np.unravel_index(pixels, (h, w))
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            rr, cc = rows + dr, cols + dc
            ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
            found.update(np.unique(labels[rr[ok], cc[ok]]).tolist())
    found.discard(own)
    return found


def _enforce_connectivity(labels: np.ndarray, k: int) -> np.ndarray:
    """Relabel every non-dominant connected component of a label into its
    largest 4-adjacent region (ties toward the lowest region id).

    Merging one orphan can strand another, so passes repeat until every
    label is a single component; later passes only revisit labels touched
    by a merge.
    """
    labels = labels.copy()
    flat = labels.ravel()
    suspect = range(k)
    while True:
        orphans = _find_orphans(labels, suspect)
        if not orphans:
            return labels
        sizes = np.bincount(flat, minlength=k)
        touched = set()
        for pixels in orphans:
            own = int(flat[pixels[0]])
            if not (flat[pixels] == own).all():
                continue  # already absorbed by an earlier merge this pass
            neighbor_ids = _orphan_neighbor_labels(labels, pixels, own)
            if not neighbor_ids:
                continue  # component fills the image; nothing to merge into
            target = max(sorted(neighbor_ids), key=lambda nid: (sizes[nid], -nid))
            sizes[own] -= len(pixels)
            sizes[target] += len(pixels)
            flat[pixels] = target
            touched.add(own)
            touched.add(target)
        suspect = sorted(touched)


def _relabel_dense(labels: np.ndarray) -> np.ndarray:
    """Remap labels to dense ids 0..count-1 in row-major first-seen order."""
    flat = labels.ravel()
    _, first = np.unique(flat, return_index=True)
    order = flat[np.sort(first)]
    remap = np.empty(order.max() + 1, dtype=np.int32)
    remap[order] = np.arange(len(order), dtype=np.int32)
    return remap[flat].reshape(labels.shape)


def _summarize(labels: np.ndarray, lab: np.ndarray) -> Segmentation:
    h, w = labels.shape
    count = int(labels.max()) + 1
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=count)
    ys, xs = np.indices((h, w))
    centroids = np.empty((count, 5))
    centroids[:, 0] = np.bincount(flat, xs.ravel(), count) / sizes
    centroids[:, 1] = np.bincount(flat, ys.ravel(), count) / sizes
    for ch in range(3):
        centroids[:, 2 + ch] = np.bincount(flat, lab[..., ch].ravel(), count) / sizes
    border = np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    return Segmentation(
        labels=labels,
        count=count,
        centroids=centroids,
        sizes=sizes,
        boundary_ids=frozenset(np.unique(border).tolist()),
    )


def adjacency(seg: Segmentation) -> np.ndarray:
    """Boolean (n, n) matrix: True where two superpixels share a 4-connected
    pixel boundary.  Symmetric with a False diagonal."""
    labels = seg.labels
    n = seg.count
    adj = np.zeros((n, n), dtype=bool)
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        diff = a != b
        adj[a[diff], b[diff]] = True
    adj |= adj.T
    np.fill_diagonal(adj, False)
    return adj
