import numpy as np
import pytest

from fxtrack import (
    AssumptionError,
    Topology,
    TrackingMode,
    builtin_scenario,
    check_assumptions,
    directed_weights,
    grounded_matrix,
    incidence,
    laplacian,
    second_smallest_eigenvalue,
    smallest_eigenvalue,
)
from fxtrack.topology import eigenvalues, spectral_data

from conftest import faddeev_leverrier


class TestLaplacian:
    def test_single_edge(self):
        topo = Topology.from_edges(2, [(1, 2)])
        np.testing.assert_array_equal(laplacian(topo), [[1, -1], [-1, 1]])

    def test_path(self, path_3):
        np.testing.assert_array_equal(laplacian(path_3), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    def test_no_edges(self):
        topo = Topology.from_edges(3, [])
        np.testing.assert_array_equal(laplacian(topo), np.zeros((3, 3)))

    def test_directed_rows_sum_to_zero(self, chain_2):
        L = laplacian(chain_2)
        np.testing.assert_array_equal(L, [[0, 0], [-1, 1]])
        np.testing.assert_allclose(L @ np.ones(2), 0.0)

    def test_weighted_edges(self):
        topo = Topology.from_edges(2, [(1, 2, 2.5)])
        np.testing.assert_array_equal(topo.L, [[2.5, -2.5], [-2.5, 2.5]])


class TestIncidence:
    def test_single_edge(self):
        D = incidence(Topology.from_edges(2, [(1, 2)]))
        np.testing.assert_array_equal(D, [[1], [-1]])

    def test_path_reproduces_laplacian(self, path_3):
        D = incidence(path_3)
        assert D.shape == (3, 2)
        np.testing.assert_array_equal(D @ D.T, laplacian(path_3))
        np.testing.assert_array_equal(np.ones(3) @ D, np.zeros(2))

    def test_no_edges(self):
        assert incidence(Topology.from_edges(4, [])).shape == (4, 0)

    def test_directed_rejected(self, chain_2):
        with pytest.raises(ValueError):
            incidence(chain_2)


class TestGroundedMatrix:
    def test_single_follower(self):
        topo = Topology.from_edges(1, [], leader_links=[1.0])
        np.testing.assert_array_equal(grounded_matrix(topo), [[1.0]])

    def test_pair(self):
        topo = Topology.from_edges(2, [(1, 2)], leader_links=[1.0, 0.0])
        np.testing.assert_array_equal(grounded_matrix(topo), [[2, -1], [-1, 1]])

    def test_disconnected(self):
        topo = Topology.from_edges(2, [], leader_links=[1.0, 1.0])
        with pytest.raises(AssumptionError, match="undirected and connected"):
            grounded_matrix(topo)

    def test_leaderless(self):
        with pytest.raises(AssumptionError):
            grounded_matrix(Topology.from_edges(2, [(1, 2)]))


class TestDirectedWeights:
    def test_chain(self, chain_2):
        data = directed_weights(chain_2)
        np.testing.assert_allclose(data.H, [[1, 0], [-1, 1]])
        np.testing.assert_allclose(data.p, [2.0, 1.0], atol=1e-10)
        np.testing.assert_allclose(data.Q, [[2.0, -0.5], [-0.5, 1.0]], atol=1e-10)
        assert data.lambda2_L is None
        assert data.to_dict()["lambda2_L"] is None
        assert data.lambda1_Q == pytest.approx((3.0 - np.sqrt(2.0)) / 2.0, abs=1e-10)
        assert data.p_max == pytest.approx(2.0)

    def test_star(self):
        topo = Topology.from_edges(3, [], leader_links=[1.0, 1.0, 1.0], directed=True)
        data = directed_weights(topo)
        np.testing.assert_allclose(data.H, np.eye(3))
        np.testing.assert_allclose(data.p, np.ones(3))
        assert data.lambda1_Q == pytest.approx(1.0)

    def test_unreachable_follower(self):
        topo = Topology.from_edges(3, [(2, 1)], leader_links=[1.0, 0.0, 0.0], directed=True)
        with pytest.raises(AssumptionError, match="spanning tree"):
            directed_weights(topo)

    def test_direction_matters(self):
        # leader -> 1, but 1 sends nothing to 2: edge (1, 2) means 1 listens to 2
        topo = Topology.from_edges(2, [(1, 2)], leader_links=[1.0, 0.0], directed=True)
        with pytest.raises(AssumptionError):
            directed_weights(topo)


class TestCheckAssumptions:
    def test_undirected_with_leader_passes(self):
        topo = Topology.from_edges(3, [(1, 2), (2, 3)], leader_links=[0.0, 1.0, 0.0])
        assert check_assumptions(topo, TrackingMode.UNDIRECTED_CT).is_valid

    def test_leaderless_dat_passes(self, path_3):
        assert check_assumptions(path_3, TrackingMode.DAT).is_valid

    def test_chain_missing_root(self):
        topo = Topology.from_edges(2, [(2, 1)], directed=True)
        report = check_assumptions(topo, TrackingMode.DIRECTED_CT)
        assert not report.is_valid
        assert "no spanning tree" in " ".join(report.reasons())

    def test_disconnected_undirected(self):
        topo = Topology.from_edges(3, [(1, 2)], leader_links=[1.0, 0.0, 0.0])
        report = check_assumptions(topo, TrackingMode.UNDIRECTED_CT)
        assert not report.is_valid
        assert any("undirected and connected" in r for r in report.reasons())

    def test_dat_rejects_leader_links(self):
        topo = Topology.from_edges(2, [(1, 2)], leader_links=[1.0, 0.0])
        assert not check_assumptions(topo, TrackingMode.DAT).is_valid

    def test_smc_has_no_graph(self, path_3):
        with pytest.raises(ValueError):
            check_assumptions(path_3, TrackingMode.SMC)


class TestEigenvalues:
    def test_scalar(self):
        assert smallest_eigenvalue(np.array([[1.0]])) == pytest.approx(1.0)

    def test_two_by_two(self):
        Q = np.array([[2.0, -0.5], [-0.5, 1.0]])
        assert smallest_eigenvalue(Q) == pytest.approx(0.79289, abs=1e-5)

    def test_path_algebraic_connectivity(self, path_3):
        np.testing.assert_allclose(eigenvalues(path_3.L), [0.0, 1.0, 3.0], atol=1e-12)
        assert second_smallest_eigenvalue(path_3.L) == pytest.approx(1.0)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            smallest_eigenvalue(np.array([[1.0, 2.0], [0.0, 1.0]]))

    @pytest.mark.parametrize("example_id", [2, 3, 4])
    def test_matches_characteristic_polynomial(self, example_id):
        sc = builtin_scenario(example_id)
        data = spectral_data(sc.topology, sc.mode)
        for M in (data.Q, data.laplacian if not sc.topology.directed else None):
            if M is None:
                continue
            np.testing.assert_allclose(np.poly(eigenvalues(M)), faddeev_leverrier(M), atol=1e-8)


class TestTopologyInvariants:
    @pytest.mark.parametrize("edges", [[(1, 2)], [(1, 2), (2, 3)], [(1, 2), (2, 3), (3, 4), (4, 1)]])
    def test_undirected_laplacian(self, edges):
        n = max(max(e) for e in edges)
        topo = Topology.from_edges(n, edges)
        L = topo.L
        np.testing.assert_array_equal(L, L.T)
        np.testing.assert_allclose(L @ np.ones(n), 0.0)
        D = incidence(topo)
        np.testing.assert_array_equal(D @ D.T, L)

    def test_asymmetric_undirected_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            Topology(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros(2))

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="Self loops"):
            Topology(np.eye(2), np.zeros(2))

    def test_edge_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            Topology.from_edges(2, [(1, 3)])

    def test_edges_listed_once(self, path_3):
        assert path_3.edges() == [(1, 2, 1.0), (2, 3, 1.0)]
