"""Weighted undirected network graphs: incidence, Laplacian, spectrum.

Nodes are numbered 1..n externally; edges are stored as (i, j, weight)
with i < j. The incidence matrix folds edge weights in as sqrt(w) so
that E_w @ E_w.T equals the weighted Laplacian exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GraphError


@dataclass(frozen=True)
class NetworkGraph:
    """Connected weighted graph of buses and branches.

    Attributes
    ----------
    n : int
        Number of nodes.
    edges : tuple of (int, int, float)
        Edges (i, j, w) with 1 <= i < j <= n and w > 0.
    orientation : tuple of int
        Per-edge sign (+1: tail at i, -1: tail at j) fixing the
        incidence column sign convention. Physically irrelevant;
        exposed so orientation invariance can be exercised.
    """

    n: int
    edges: tuple = ()
    orientation: tuple = field(default=())

    def __post_init__(self):
        if not self.orientation:
            object.__setattr__(self, "orientation", (1,) * len(self.edges))
        if len(self.orientation) != len(self.edges):
            raise GraphError("orientation length must match edge count")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def acyclic(self) -> bool:
        # valid for connected graphs, which construction guarantees
        return self.n_edges == self.n - 1

    def with_flipped_edge(self, index: int) -> "NetworkGraph":
        """Same graph with one incidence column sign flipped."""
        ori = list(self.orientation)
        ori[index] = -ori[index]
        return NetworkGraph(self.n, self.edges, tuple(ori))


def build_path(n: int, weight: float = 1.0) -> NetworkGraph:
    """Path graph 1-2-...-n with uniform edge weight."""
    if n < 1:
        raise GraphError(f"node count must be >= 1, got {n}")
    if weight <= 0:
        raise GraphError(f"edge weight must be positive, got {weight}")
    edges = tuple((i, i + 1, float(weight)) for i in range(1, n))
    return NetworkGraph(n, edges)


def build_from_edges(n: int, edges) -> NetworkGraph:
    """Validated graph from an explicit edge list.

    Raises GraphError on out-of-range indices, nonpositive weights,
    self-loops, duplicate edges, or a disconnected graph.
    """
    if n < 1:
        raise GraphError(f"node count must be >= 1, got {n}")
    seen = set()
    canonical = []
    for i, j, w in edges:
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphError(f"edge ({i},{j}) out of range 1..{n}")
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        if w <= 0:
            raise GraphError(f"edge ({i},{j}) has nonpositive weight {w}")
        a, b = min(i, j), max(i, j)
        if (a, b) in seen:
            raise GraphError(f"duplicate edge ({a},{b})")
        seen.add((a, b))
        canonical.append((a, b, float(w)))
    g = NetworkGraph(n, tuple(canonical))
    if not _is_connected(g):
        raise GraphError("graph is not connected")
    return g


def _is_connected(g: NetworkGraph) -> bool:
    if g.n == 1:
        return True
    adj = [[] for _ in range(g.n)]
    for i, j, _ in g.edges:
        adj[i - 1].append(j - 1)
        adj[j - 1].append(i - 1)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.n


def incidence(g: NetworkGraph) -> np.ndarray:
    """Weighted incidence matrix E_w (n x |edges|) with E_w @ E_w.T = L.

    The column for edge (i, j, w) carries +sqrt(w) at the tail and
    -sqrt(w) at the head, per the stored orientation.
    """
    E = np.zeros((g.n, g.n_edges))
    for c, ((i, j, w), s) in enumerate(zip(g.edges, g.orientation)):
        r = np.sqrt(w)
        E[i - 1, c] = s * r
        E[j - 1, c] = -s * r
    return E


def laplacian(g: NetworkGraph) -> np.ndarray:
    """Weighted Laplacian L = diag(A @ 1) - A."""
    L = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        a, b = i - 1, j - 1
        L[a, a] += w
        L[b, b] += w
        L[a, b] -= w
        L[b, a] -= w
    return L


def spectrum(g: NetworkGraph) -> np.ndarray:
    """Laplacian eigenvalues in ascending order (first is 0)."""
    return np.linalg.eigvalsh(laplacian(g))
