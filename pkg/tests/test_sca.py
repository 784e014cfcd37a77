import numpy as np
import pytest

from hcasal import sca
from hcasal.features import Descriptors
from hcasal.sca import (
    ImpactMatrices,
    ScaParams,
    boundary_prior,
    build_graph,
    evolve,
    impact_matrices,
    prior_from_map,
)
from hcasal.slic import adjacency
from tests.test_slic import _segmentation_from_labels


def _grid_3x3_segmentation():
    """9 superpixels laid out as a 3x3 block grid on a 9x9 image."""
    labels = np.repeat(np.repeat(np.arange(9).reshape(3, 3), 3, 0), 3, 1)
    return _segmentation_from_labels(labels.astype(np.int32))


class TestPriors:
    def test_all_boundary(self):
        seg = _segmentation_from_labels(np.array([[0, 1]], dtype=np.int32))
        assert (boundary_prior(seg) == 0.001).all()

    def test_3x3_grid_center_interior(self):
        prior = boundary_prior(_grid_3x3_segmentation())
        assert prior[4] == 0.5
        others = np.delete(prior, 4)
        assert (others == 0.001).all()

    def test_single_superpixel(self):
        seg = _segmentation_from_labels(np.zeros((3, 3), dtype=np.int32))
        assert boundary_prior(seg).tolist() == [0.001]

    def test_prior_from_constant_map(self):
        seg = _grid_3x3_segmentation()
        prior = prior_from_map(np.full((9, 9), 0.7), seg)
        assert np.allclose(prior, 0.7)

    def test_prior_from_ones_clamped(self):
        seg = _grid_3x3_segmentation()
        assert (prior_from_map(np.ones((9, 9)), seg) == 0.999).all()

    def test_prior_from_random_map_matches_loop(self, rng):
        labels = rng.integers(0, 4, (8, 8)).astype(np.int32)
        seg = _segmentation_from_labels(labels)
        saliency = rng.random((8, 8))
        prior = prior_from_map(saliency, seg)
        for lab_id in range(seg.count):
            want = np.clip(saliency[labels == lab_id].mean(), 0.001, 0.999)
            assert prior[lab_id] == pytest.approx(want)

    def test_prior_dim_mismatch(self):
        seg = _grid_3x3_segmentation()
        with pytest.raises(ValueError):
            prior_from_map(np.zeros((4, 4)), seg)


class TestBuildGraph:
    def test_two_hop_closure(self):
        # path a-b-c: a reaches c through b
        labels = np.array([[0] * 3 + [1] * 3 + [2] * 3] * 3, dtype=np.int32)
        seg = _segmentation_from_labels(labels)
        nb = build_graph(seg)
        assert nb[0, 2] and nb[2, 0]

    def test_all_boundary_clique(self):
        seg = _grid_3x3_segmentation()
        nb = build_graph(seg)
        border = sorted(seg.boundary_ids)
        for i in border:
            for j in border:
                if i != j:
                    assert nb[i, j]

    def test_random_matches_set_algebra(self, rng):
        labels = rng.integers(0, 7, (15, 15)).astype(np.int32)
        seg = _segmentation_from_labels(labels)
        adj = adjacency(seg)
        want = adj.copy()
        for i in range(seg.count):
            for k in np.flatnonzero(adj[i]):
                want[i] |= adj[k]
        border = list(seg.boundary_ids)
        want[np.ix_(border, border)] = True
        np.fill_diagonal(want, False)
        assert (build_graph(seg) == want).all()

    def test_symmetry(self, rng):
        labels = rng.integers(0, 5, (12, 12)).astype(np.int32)
        nb = build_graph(_segmentation_from_labels(labels))
        assert (nb == nb.T).all()


def _complete_graph(n):
    nb = np.ones((n, n), dtype=bool)
    np.fill_diagonal(nb, False)
    return nb


class TestImpactMatrices:
    def test_zero_distance_gives_unit_impact(self):
        desc = Descriptors(layers=(np.zeros((3, 2)),), weights=(1.0,))
        mats = impact_matrices(desc, _complete_graph(3), ScaParams())
        assert mats.impact[0, 1] == 1.0
        assert mats.impact[0, 0] == 0.0

    def test_exponential_value(self):
        # distance 0.1 with bandwidth 0.1 -> e^-1
        layer = np.array([[0.0], [0.1], [5.0]])
        desc = Descriptors(layers=(layer,), weights=(1.0,))
        mats = impact_matrices(desc, _complete_graph(3), ScaParams())
        assert mats.impact[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-9)

    def test_coherence_range_endpoints(self, rng):
        desc = Descriptors(layers=(rng.random((8, 3)),), weights=(1.0,))
        mats = impact_matrices(desc, _complete_graph(8), ScaParams())
        assert mats.coherence.min() == pytest.approx(0.2)
        assert mats.coherence.max() == pytest.approx(0.8)
        assert ((mats.coherence >= 0.2) & (mats.coherence <= 0.8)).all()

    def test_degenerate_coherence_midpoint(self):
        desc = Descriptors(layers=(np.zeros((4, 2)),), weights=(1.0,))
        mats = impact_matrices(desc, _complete_graph(4), ScaParams())
        assert np.allclose(mats.coherence, 0.5)

    def test_rows_sum_to_one(self, rng):
        desc = Descriptors(layers=(rng.random((10, 3)),), weights=(1.0,))
        mats = impact_matrices(desc, _complete_graph(10), ScaParams())
        assert np.abs(mats.row_normalized.sum(axis=1) - 1.0).max() < 1e-9

    def test_isolated_node_rejected(self):
        desc = Descriptors(layers=(np.zeros((3, 1)),), weights=(1.0,))
        nb = np.zeros((3, 3), dtype=bool)
        nb[0, 1] = nb[1, 0] = True
        with pytest.raises(ValueError):
            impact_matrices(desc, nb, ScaParams())


def _mats(fstar, coherence):
    return ImpactMatrices(impact=fstar.copy(), row_normalized=fstar, coherence=coherence)


class TestEvolve:
    def test_identity_coherence_fixed_point(self):
        fstar = np.full((3, 3), 1 / 3.0)
        prior = np.array([0.2, 0.5, 0.9])
        out = evolve(prior, _mats(fstar, np.ones(3)), ScaParams(iterations=7))
        assert np.allclose(out, prior)

    def test_pure_propagation_one_step(self):
        fstar = np.array([[0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]])
        prior = np.array([1.0, 0.0, 0.0])
        out = evolve(prior, _mats(fstar, np.zeros(3)), ScaParams(iterations=1))
        assert np.allclose(out, fstar @ prior)

    def test_hand_computed_step(self):
        fstar = np.array([[0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]])
        prior = np.array([1.0, 0.0, 0.0])
        out = evolve(prior, _mats(fstar, np.full(3, 0.5)), ScaParams(iterations=1))
        assert np.allclose(out, [0.5, 0.25, 0.0])

    def test_constant_prior_invariant(self, rng):
        fstar = rng.random((5, 5))
        fstar /= fstar.sum(axis=1, keepdims=True)
        prior = np.full(5, 0.37)
        out = evolve(prior, _mats(fstar, rng.random(5)), ScaParams())
        assert np.allclose(out, 0.37)

    def test_matches_per_cell_loop(self, rng):
        from hcasal.selftest import _random_instance, _sca_loop_reference

        params = ScaParams()
        nb, desc, prior = _random_instance(rng, 40)
        mats = sca.impact_matrices(desc, nb, params)
        got = evolve(prior, mats, params)
        want = _sca_loop_reference(prior, mats, params.iterations)
        assert np.abs(got - want).max() < 1e-9
