"""
Communication topology and the spectral quantities behind the gain conditions.

a_ij > 0 means follower i receives information from follower j; a_i0 > 0
means follower i receives from the leader. Agents are indexed 0..n-1
internally and 1..n in scenario files and reports.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import linalg

from .validation import AssumptionError, AssumptionReport, CheckEntry

LEADER = "leader"

SYMMETRY_TOL = 1e-12


class TrackingMode(str, Enum):
    """Problem variants handled by the simulator."""
    SMC = "smc"
    UNDIRECTED_CT = "undirected_ct"
    DIRECTED_CT = "directed_ct"
    DAT = "dat"


@dataclass(frozen=True, eq=False)
class Topology:
    """Weighted follower graph plus optional leader links."""
    adjacency: np.ndarray
    leader_links: np.ndarray
    directed: bool = False

    def __post_init__(self):
        adjacency = np.array(self.adjacency, dtype=float)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise ValueError("Adjacency must be a square matrix")
        n = adjacency.shape[0]
        links = np.zeros(n) if self.leader_links is None else np.array(self.leader_links, dtype=float)
        if links.shape != (n,):
            raise ValueError(f"Leader links must have length {n}, got {links.shape}")
        if np.any(adjacency < 0) or np.any(links < 0):
            raise ValueError("Weights must be nonnegative")
        if np.any(np.diag(adjacency) != 0):
            raise ValueError("Self loops are not allowed (a_ii must be 0)")
        if not self.directed and not np.allclose(adjacency, adjacency.T, atol=SYMMETRY_TOL, rtol=0):
            raise ValueError("Undirected topology requires a symmetric adjacency matrix")
        adjacency.setflags(write=False)
        links.setflags(write=False)
        object.__setattr__(self, 'adjacency', adjacency)
        object.__setattr__(self, 'leader_links', links)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def has_leader(self) -> bool:
        return bool(np.any(self.leader_links > 0))

    @cached_property
    def L(self) -> np.ndarray:
        return _frozen(laplacian(self))

    @cached_property
    def H(self) -> np.ndarray:
        """L + B, the leader-grounded Laplacian (not symmetric for digraphs)."""
        return _frozen(self.L + np.diag(self.leader_links))

    @cached_property
    def degrees(self) -> np.ndarray:
        """Row degree including the leader link."""
        return _frozen(self.adjacency.sum(axis=1) + self.leader_links)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence[float]],
        leader_links: Optional[Sequence[float]] = None,
        directed: bool = False,
    ) -> 'Topology':
        """
        Build a topology from a 1-based edge list.

        Args:
            n: Number of followers
            edges: (i, j) or (i, j, weight); for digraphs i receives from j
            leader_links: Per-follower leader weights a_i0
            directed: Whether edges are one-way

        Returns:
            Topology instance
        """
        adjacency = np.zeros((n, n))
        for edge in edges:
            if len(edge) not in (2, 3):
                raise ValueError(f"Edge {edge!r} must be (i, j) or (i, j, weight)")
            i, j = int(edge[0]) - 1, int(edge[1]) - 1
            weight = float(edge[2]) if len(edge) == 3 else 1.0
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"Edge {edge!r} references an agent outside 1..{n}")
            adjacency[i, j] = weight
            if not directed:
                adjacency[j, i] = weight
        links = np.zeros(n) if leader_links is None else leader_links
        return cls(adjacency=adjacency, leader_links=links, directed=directed)

    def edges(self) -> List[Tuple[int, int, float]]:
        """1-based (i, j, weight) list; undirected edges listed once with i < j."""
        result = []
        for i in range(self.n):
            for j in range(self.n):
                w = self.adjacency[i, j]
                if w == 0 or (not self.directed and j < i):
                    continue
                result.append((i + 1, j + 1, float(w)))
        return result

    def follower_graph(self) -> nx.Graph:
        """Follower subgraph; for digraphs edges point along information flow (j -> i)."""
        graph = nx.DiGraph() if self.directed else nx.Graph()
        graph.add_nodes_from(range(self.n))
        rows, cols = np.nonzero(self.adjacency)
        graph.add_edges_from((int(j), int(i)) for i, j in zip(rows, cols))
        return graph

    def information_graph(self) -> nx.DiGraph:
        """Directed graph of information flow including the leader node."""
        graph = nx.DiGraph(self.follower_graph())
        graph.add_node(LEADER)
        for i in np.nonzero(self.leader_links)[0]:
            graph.add_edge(LEADER, int(i))
        return graph


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Spectral quantities for one mode; p is None outside the directed case, lambda2_L is None inside it."""
    laplacian: np.ndarray
    Q: np.ndarray
    lambda1_Q: float
    lambda2_L: Optional[float] = None
    p: Optional[np.ndarray] = None
    p_max: float = 1.0
    H: Optional[np.ndarray] = field(default=None)

    def to_dict(self) -> dict:
        return {
            "lambda1_Q": self.lambda1_Q,
            "lambda2_L": self.lambda2_L,
            "p": None if self.p is None else [float(x) for x in self.p],
            "p_max": self.p_max,
        }


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write=False)
    return matrix


def laplacian(topo: Topology) -> np.ndarray:
    """L = O - A with O the diagonal of row sums of A."""
    adjacency = np.array(topo.adjacency, dtype=float)
    return np.diag(adjacency.sum(axis=1)) - adjacency


def incidence(topo: Topology) -> np.ndarray:
    """
    Oriented node-by-edge incidence matrix of an undirected topology.

    Each edge (i, j) with i < j contributes a column with +1 at i and -1 at j,
    columns ordered lexicographically. Entries are +-1 regardless of weight,
    so D D^T equals L only for unit weights.
    """
    if topo.directed:
        raise ValueError("Incidence matrix is defined for undirected topologies only")
    pairs = [(i, j) for i in range(topo.n) for j in range(i + 1, topo.n) if topo.adjacency[i, j] > 0]
    D = np.zeros((topo.n, len(pairs)))
    for col, (i, j) in enumerate(pairs):
        D[i, col] = 1.0
        D[j, col] = -1.0
    return D


def is_connected(topo: Topology) -> bool:
    """Connectivity of the follower subgraph, ignoring edge direction."""
    if topo.n == 0:
        return False
    graph = topo.follower_graph()
    if topo.directed:
        return nx.is_weakly_connected(graph)
    return nx.is_connected(graph)


def unreachable_from_leader(topo: Topology) -> List[int]:
    """0-based followers with no directed information path from the leader."""
    reached = nx.descendants(topo.information_graph(), LEADER)
    return [i for i in range(topo.n) if i not in reached]


def grounded_matrix(topo: Topology) -> np.ndarray:
    """
    Q = L + B for an undirected connected topology with at least one leader link.

    Raises:
        AssumptionError: If the topology is directed, disconnected or leaderless
    """
    if topo.directed:
        raise AssumptionError("Grounded matrix L + B requires an undirected topology")
    if not is_connected(topo):
        raise AssumptionError("Follower graph must be undirected and connected")
    if not topo.has_leader:
        raise AssumptionError("At least one follower must receive information from the leader")
    return laplacian(topo) + np.diag(topo.leader_links)


def directed_weights(topo: Topology) -> SpectralData:
    """
    Solve H^T p = 1 and build Q = (H^T P + P H) / 2 for a leader-rooted digraph.

    Raises:
        AssumptionError: If no spanning tree is rooted at the leader, H is
            singular, or some p_i is not positive
    """
    missing = unreachable_from_leader(topo)
    if missing:
        names = ", ".join(str(i + 1) for i in missing)
        raise AssumptionError(f"No spanning tree rooted at the leader (unreachable followers: {names})")
    H = laplacian(topo) + np.diag(topo.leader_links)
    try:
        p = linalg.solve(H.T, np.ones(topo.n))
    except linalg.LinAlgError as e:
        raise AssumptionError(f"H = L + B is singular: {e}") from e
    if np.any(p <= 0):
        raise AssumptionError(f"Weights p must be positive, got {p}")
    P = np.diag(p)
    Q = (H.T @ P + P @ H) / 2.0
    L = laplacian(topo)
    return SpectralData(
        laplacian=L,
        Q=Q,
        lambda1_Q=smallest_eigenvalue(Q),
        p=p,
        p_max=float(p.max()),
        H=H,
    )


def spectral_data(topo: Topology, mode: TrackingMode) -> SpectralData:
    """Spectral quantities required by the gain conditions of a mode."""
    mode = TrackingMode(mode)
    if mode == TrackingMode.DIRECTED_CT:
        return directed_weights(topo)
    L = laplacian(topo)
    if mode == TrackingMode.UNDIRECTED_CT:
        Q = grounded_matrix(topo)
        return SpectralData(
            laplacian=L,
            Q=Q,
            lambda1_Q=smallest_eigenvalue(Q),
            lambda2_L=second_smallest_eigenvalue(L),
            H=Q,
        )
    if mode == TrackingMode.DAT:
        if topo.directed or not is_connected(topo):
            raise AssumptionError("Average tracking requires an undirected and connected graph")
        return SpectralData(
            laplacian=L,
            Q=L,
            lambda1_Q=smallest_eigenvalue(L),
            lambda2_L=second_smallest_eigenvalue(L),
            H=L,
        )
    raise ValueError(f"No spectral data for mode {mode.value}")


def _require_symmetric(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("Expected a square matrix")
    if not np.allclose(M, M.T, atol=SYMMETRY_TOL * max(1.0, float(np.abs(M).max(initial=0.0))), rtol=0):
        raise ValueError("Expected a symmetric matrix")
    return M


def eigenvalues(M: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix."""
    return linalg.eigh(_require_symmetric(M), eigvals_only=True)


def smallest_eigenvalue(M: np.ndarray) -> float:
    return float(eigenvalues(M)[0])


def second_smallest_eigenvalue(L: np.ndarray) -> float:
    values = eigenvalues(L)
    if values.size < 2:
        raise ValueError("Second smallest eigenvalue needs at least two nodes")
    return float(values[1])


def check_assumptions(topo: Topology, mode: TrackingMode) -> AssumptionReport:
    """
    Report which graph assumptions of a mode hold.

    Args:
        topo: Topology to inspect
        mode: undirected_ct, directed_ct or dat

    Returns:
        AssumptionReport with one entry per condition
    """
    mode = TrackingMode(mode)
    report = AssumptionReport(mode.value)

    if mode == TrackingMode.UNDIRECTED_CT:
        report.add(CheckEntry(
            "undirected",
            not topo.directed,
            "" if not topo.directed else "follower graph must be undirected and connected",
        ))
        connected = is_connected(topo)
        report.add(CheckEntry(
            "connected",
            connected,
            "" if connected else "follower graph must be undirected and connected",
        ))
        report.add(CheckEntry(
            "leader link",
            topo.has_leader,
            "" if topo.has_leader else "no follower receives information from the leader",
        ))
    elif mode == TrackingMode.DIRECTED_CT:
        missing = unreachable_from_leader(topo)
        reason = ""
        if missing:
            reason = "no spanning tree rooted at the leader (unreachable: " + \
                ", ".join(str(i + 1) for i in missing) + ")"
        report.add(CheckEntry("spanning tree", not missing, reason))
    elif mode == TrackingMode.DAT:
        report.add(CheckEntry(
            "undirected",
            not topo.directed,
            "" if not topo.directed else "graph must be undirected and connected",
        ))
        connected = is_connected(topo)
        report.add(CheckEntry(
            "connected",
            connected,
            "" if connected else "graph must be undirected and connected",
        ))
        report.add(CheckEntry(
            "no leader",
            not topo.has_leader,
            "" if not topo.has_leader else "average tracking does not use leader links",
        ))
    else:
        raise ValueError(f"Mode {mode.value} has no graph assumptions")

    return report
