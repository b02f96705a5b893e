import numpy as np
import pytest

from freqperf import (GraphError, build_from_edges, build_path, incidence,
                      laplacian, spectrum)


def path5_eigs_closed_form():
    # path-graph Laplacian eigenvalues 2 - 2 cos(k pi / n)
    return np.sort(2.0 - 2.0 * np.cos(np.arange(5) * np.pi / 5))


class TestBuildPath:
    def test_two_nodes(self):
        g = build_path(2, 1.0)
        assert g.edges == ((1, 2, 1.0),)
        assert g.acyclic

    def test_single_node(self):
        g = build_path(1, 1.0)
        assert g.n_edges == 0
        assert laplacian(g) == pytest.approx(np.zeros((1, 1)))

    def test_path5_spectrum(self):
        eigs = spectrum(build_path(5, 1.0))
        assert eigs == pytest.approx(path5_eigs_closed_form(), abs=1e-10)
        assert eigs == pytest.approx([0, 0.382, 1.382, 2.618, 3.618], abs=1e-3)

    def test_zero_nodes_rejected(self):
        with pytest.raises(GraphError):
            build_path(0, 1.0)

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(GraphError):
            build_path(3, -2.0)


class TestBuildFromEdges:
    def test_path3(self):
        g = build_from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
        assert g.acyclic

    def test_triangle(self):
        g = build_from_edges(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)])
        assert not g.acyclic
        assert spectrum(g) == pytest.approx([0.0, 3.0, 3.0], abs=1e-12)

    def test_disconnected_rejected(self):
        with pytest.raises(GraphError, match="connected"):
            build_from_edges(3, [(1, 2, 1.0)])

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(GraphError, match="weight"):
            build_from_edges(2, [(1, 2, 0.0)])

    def test_duplicate_rejected(self):
        with pytest.raises(GraphError, match="duplicate"):
            build_from_edges(2, [(1, 2, 1.0), (2, 1, 2.0)])

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            build_from_edges(2, [(1, 1, 1.0), (1, 2, 1.0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphError, match="out of range"):
            build_from_edges(2, [(1, 3, 1.0)])


class TestIncidence:
    def test_path2_unit_weight(self):
        E = incidence(build_path(2, 1.0))
        assert E[:, 0] == pytest.approx([1.0, -1.0])
        assert E @ E.T == pytest.approx(np.array([[1.0, -1], [-1, 1]]))

    def test_sqrt_weight_scaling(self):
        E = incidence(build_path(2, 4.0))
        assert E[:, 0] == pytest.approx([2.0, -2.0])

    def test_incidence_product_is_laplacian(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(2, 9))
            # random connected graph: spanning path plus extra chords
            edges = [(i, i + 1, float(rng.uniform(0.1, 5.0)))
                     for i in range(1, n)]
            pairs = {(i, i + 1) for i in range(1, n)}
            for _ in range(int(rng.integers(0, n))):
                i, j = sorted(rng.choice(n, size=2, replace=False) + 1)
                if (i, j) not in pairs:
                    pairs.add((i, j))
                    edges.append((int(i), int(j), float(rng.uniform(0.1, 5.0))))
            g = build_from_edges(n, edges)
            E = incidence(g)
            assert np.abs(E @ E.T - laplacian(g)).max() <= 1e-12

    def test_orientation_flip(self):
        g = build_path(3, 1.0)
        flipped = g.with_flipped_edge(1)
        E = incidence(flipped)
        assert E[:, 1] == pytest.approx([0.0, -1.0, 1.0])
        assert E @ E.T == pytest.approx(laplacian(g))


class TestLaplacian:
    def test_path2_weighted(self):
        b = 3.5
        assert laplacian(build_path(2, b)) == pytest.approx(
            np.array([[b, -b], [-b, b]]))

    def test_path3(self):
        assert laplacian(build_path(3, 1.0)) == pytest.approx(
            np.array([[1.0, -1, 0], [-1, 2, -1], [0, -1, 1]]))

    def test_row_sums_zero(self):
        g = build_from_edges(4, [(1, 2, 0.5), (2, 3, 2.0), (3, 4, 1.5),
                                 (1, 4, 0.7)])
        assert laplacian(g).sum(axis=1) == pytest.approx(np.zeros(4), abs=1e-14)


class TestSpectrum:
    def test_zero_eigenvalue_and_positivity(self):
        eigs = spectrum(build_path(6, 2.0))
        assert abs(eigs[0]) <= 1e-10
        assert np.all(eigs[1:] > 0)
        assert np.all(np.diff(eigs) >= 0)

    def test_single_node(self):
        assert spectrum(build_path(1, 1.0)) == pytest.approx([0.0])

    def test_weight_scaling_linearity(self):
        gamma = 3.7
        e1 = spectrum(build_path(5, 1.0))
        e2 = spectrum(build_path(5, gamma))
        assert e2 == pytest.approx(gamma * e1, abs=1e-12)
