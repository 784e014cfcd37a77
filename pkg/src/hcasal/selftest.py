"""Built-in oracle suite behind the ``selftest`` command.

Each check recomputes a core operation with an independent brute-force
reference and compares.  Checks return nothing on success and raise
``SelftestFailure`` naming the violated property.  The ``perturb`` hook
exists for fault-injection tests: it deliberately skews one internal
constant so the corresponding check must trip.
"""

from __future__ import annotations

import numpy as np

from . import cca, metrics, sca
from .features import Descriptors
from .sca import ScaParams

__all__ = ["SelftestFailure", "run_selftest"]

_SEED = 20210


class SelftestFailure(AssertionError):
    def __init__(self, prop: str, detail: str = ""):
        super().__init__(f"{prop}: {detail}" if detail else prop)
        self.prop = prop


def _random_instance(rng, n):
    """Random connected 2-hop neighborhood plus descriptors and a prior."""
    adj = np.zeros((n, n), dtype=bool)
    for i in range(1, n):  # random spanning tree keeps it connected
        j = rng.integers(0, i)
        adj[i, j] = adj[j, i] = True
    extra = rng.random((n, n)) < 3.0 / n
    adj |= extra | extra.T
    np.fill_diagonal(adj, False)
    nb = adj | (adj @ adj)
    np.fill_diagonal(nb, False)
    desc = Descriptors(layers=(rng.random((n, 3)),), weights=(1.0,))
    prior = rng.random(n)
    return nb, desc, prior


def _sca_loop_reference(prior, mats, iterations):
    """Naive per-cell, double-buffered evaluation of the update rule."""
    neighbors = [np.flatnonzero(mats.row_normalized[i]) for i in range(len(prior))]
    state = prior.astype(float).copy()
    for _ in range(iterations):
        nxt = np.empty_like(state)
        for i in range(len(state)):
            acc = 0.0
            for j in neighbors[i]:
                acc += mats.row_normalized[i, j] * state[j]
            nxt[i] = mats.coherence[i] * state[i] + (1.0 - mats.coherence[i]) * acc
        state = nxt
    return state


def check_sca_equivalence(instances: int = 10, perturb: str | None = None) -> None:
    rng = np.random.default_rng(_SEED)
    params = ScaParams()
    for _ in range(instances):
        n = int(rng.integers(10, 60))
        nb, desc, prior = _random_instance(rng, n)
        mats = sca.impact_matrices(desc, nb, params)
        got = sca.evolve(prior, mats, params)
        want = _sca_loop_reference(prior, mats, params.iterations)
        if np.abs(got - want).max() >= 1e-9:
            raise SelftestFailure("sca-matrix-loop-equivalence")
        rows = mats.row_normalized.sum(axis=1)
        if np.abs(rows - 1.0).max() >= 1e-9:
            raise SelftestFailure("sca-row-stochasticity")


def _cca_brute_force(maps, gammas, step):
    m_count, h, w = maps.shape
    out = np.empty_like(maps)
    for m in range(m_count):
        for r in range(h):
            for c in range(w):
                sigma = 0.0
                for k in range(m_count):
                    if k != m:
                        sigma += np.sign(maps[k, r, c] - gammas[k])
                    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < h and 0 <= cc < w:
                            sigma += np.sign(maps[k, rr, cc] - gammas[k])
                out[m, r, c] = cca.sigmoid(cca.logit(maps[m, r, c]) + sigma * step)
    return out


def check_cca_equivalence(instances: int = 5, perturb: str | None = None) -> None:
    rng = np.random.default_rng(_SEED + 1)
    params = cca.CcaParams()
    step = params.log_odds_step * (1.5 if perturb == "cca_lambda" else 1.0)
    for _ in range(instances):
        maps = rng.random((3, 8, 8))
        stack = cca.make_stack(list(maps))
        for _ in range(params.iterations):
            sigma = cca.neighbor_sign_sum(stack.maps, stack.gammas)
            if np.abs(sigma).max() > 14:
                raise SelftestFailure("cca-neighbor-count-bound")
            want = _cca_brute_force(stack.maps, stack.gammas, step)
            stack = cca.cca_step(stack, params)
            if np.abs(stack.maps - want).max() >= 1e-12:
                raise SelftestFailure("cca-brute-force-equivalence")


def check_otsu(instances: int = 50, perturb: str | None = None) -> None:
    rng = np.random.default_rng(_SEED + 2)
    for _ in range(instances):
        vals = rng.integers(0, 256, size=rng.integers(16, 200)) / 255.0
        got = cca.otsu_threshold(vals)
        q = np.floor(vals * 255.0 + 0.5).astype(int)
        best_t, best_v = 0, -1.0
        for t in range(255):
            lo, hi = q[q <= t], q[q > t]
            if len(lo) == 0 or len(hi) == 0:
                continue
            v = len(lo) * len(hi) * (lo.mean() - hi.mean()) ** 2
            if v > best_v + 1e-9:
                best_t, best_v = t, v
        want = float(vals.min()) if vals.min() == vals.max() else (best_t + 0.5) / 255.0
        if got != want:
            raise SelftestFailure("otsu-exhaustive-search", f"{got} != {want}")


def check_metrics(perturb: str | None = None) -> None:
    if abs(metrics.f_measure(0.8, 0.5, 0.3) - 0.52 / 0.74) > 1e-12:
        raise SelftestFailure("f-measure-hand-value")
    gt = (np.arange(16).reshape(4, 4) % 3 == 0).astype(float)
    if metrics.mae(gt, gt) != 0.0:
        raise SelftestFailure("mae-identity")
    if abs(metrics.mae(1.0 - gt, gt) - 1.0) > 1e-12:
        raise SelftestFailure("mae-inversion")


_CHECKS = (
    ("sca-oracle", check_sca_equivalence),
    ("cca-oracle", check_cca_equivalence),
    ("otsu-oracle", check_otsu),
    ("metric-hand-checks", check_metrics),
)


def run_selftest(perturb: str | None = None) -> list:
    """Run all checks; returns a list of (name, passed, detail) tuples."""
    results = []
    for name, fn in _CHECKS:
        try:
            fn(perturb=perturb)
        except SelftestFailure as exc:
            results.append((name, False, exc.prop))
        else:
            results.append((name, True, ""))
    return results
