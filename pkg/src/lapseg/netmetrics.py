"""Network statistics: clustering, efficiency, and small-world-ness.

All metrics run on the symmetrized, unweighted skeleton of a digraph: an
undirected edge exists wherever at least one direction does. Clustering is
the Watts-Strogatz average of per-node local coefficients (nodes of degree
< 2 count as 0). Efficiency is

    E(G) = 1/(n(n-1)) * sum_{i != j} 1/d_ij

with hop-count shortest paths and unreachable pairs contributing 0, so it
is defined on disconnected graphs. Small-world-ness compares both against
uniform random graphs with the same node and edge counts:

    S = (C / C_rand) * (E / E_rand)

S > 1 indicates the small-world property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import ParameterError, UndefinedMetricError
from .graphs import SparseDigraph

_BFS_BATCH = 512


@dataclass
class NetworkStats:
    clustering: float
    efficiency: float
    c_rand: float
    e_rand: float
    swn: float
    baseline_samples: int
    nodes: int
    edges: int

    def to_json_dict(self) -> dict:
        return {
            "clustering": self.clustering,
            "efficiency": self.efficiency,
            "c_rand": self.c_rand,
            "e_rand": self.e_rand,
            "swn": None if math.isinf(self.swn) else self.swn,
            "swn_infinite": math.isinf(self.swn),
            "baseline_samples": self.baseline_samples,
            "nodes": self.nodes,
            "edges": self.edges,
        }


def symmetrize(graph) -> sp.csr_matrix:
    """Undirected, unweighted, loop-free adjacency of a digraph (0/1 CSR)."""
    if isinstance(graph, sp.spmatrix):
        adj = graph.tocsr().astype(np.float64)
    else:
        n = graph.n
        src = np.repeat(np.arange(n), graph.out_degree())
        adj = sp.csr_matrix(
            (np.ones(graph.num_edges), (src, graph.targets)), shape=(n, n)
        )
    sym = adj + adj.T
    sym.setdiag(0)
    sym.eliminate_zeros()
    sym.data[:] = 1.0
    return sym.tocsr()


def clustering_coefficient(graph) -> float:
    """Average local clustering of the symmetrized graph."""
    adj = symmetrize(graph)
    n = adj.shape[0]
    if n == 0:
        raise UndefinedMetricError("clustering needs at least one node")
    degree = np.asarray(adj.sum(axis=1)).reshape(-1)
    # (A @ A) .* A row-sums count ordered neighbor pairs that are themselves
    # adjacent, i.e. twice the triangles through each node.
    closed_pairs = np.asarray((adj @ adj).multiply(adj).sum(axis=1)).reshape(-1)
    local = np.zeros(n)
    eligible = degree >= 2
    local[eligible] = closed_pairs[eligible] / (degree[eligible] * (degree[eligible] - 1))
    return float(local.mean())


def efficiency(graph) -> float:
    """Average inverse hop distance over ordered node pairs."""
    adj = symmetrize(graph)
    n = adj.shape[0]
    if n < 2:
        raise UndefinedMetricError("efficiency needs at least two nodes")
    total = 0.0
    for start in range(0, n, _BFS_BATCH):
        idx = np.arange(start, min(start + _BFS_BATCH, n))
        dist = shortest_path(adj, method="D", directed=True, unweighted=True, indices=idx)
        reachable = np.isfinite(dist) & (dist > 0)
        total += float((1.0 / dist[reachable]).sum())
    return total / (n * (n - 1))


def random_equivalent(n: int, m: int, rng_seed) -> SparseDigraph:
    """Uniform G(n, m) graph, stored with both edge directions.

    Deterministic for a given seed; weights are 1.0 placeholders since the
    metrics ignore them.
    """
    max_m = n * (n - 1) // 2
    if not 0 <= m <= max_m:
        raise ParameterError(f"edge count {m} outside [0, {max_m}] for n={n}")
    rng = np.random.default_rng(rng_seed)
    if m == 0:
        chosen = np.empty(0, dtype=np.int64)
    elif max_m <= 1 << 22:
        chosen = rng.permutation(max_m)[:m]
    else:
        # Rejection sampling keeps memory bounded on large graphs; collision
        # probability is tiny at the edge densities k-NN graphs produce.
        seen: set = set()
        picked: list = []
        while len(picked) < m:
            batch = rng.integers(0, max_m, size=2 * (m - len(picked)))
            for code in batch:
                if code not in seen:
                    seen.add(code)
                    picked.append(code)
                    if len(picked) == m:
                        break
        chosen = np.array(picked, dtype=np.int64)

    i, j = _pair_decode(np.asarray(chosen, dtype=np.int64), n)
    src = np.concatenate([i, j])
    tgt = np.concatenate([j, i])
    order = np.lexsort((tgt, src))
    src, tgt = src[order], tgt[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(src, minlength=n))
    return SparseDigraph(n, indptr, tgt, np.ones(src.shape[0]))


def _pair_decode(codes: np.ndarray, n: int):
    """Map linear indices 0..n(n-1)/2-1 to pairs (i, j), i < j, row-major."""
    if codes.size == 0:
        return codes.copy(), codes.copy()
    # Row i starts at offset i*n - i*(i+1)/2; invert with sqrt then correct
    # for float rounding.
    b = 2 * n - 1
    i = ((b - np.sqrt(b * b - 8.0 * codes.astype(np.float64))) // 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    start = i * n - (i * (i + 1)) // 2
    too_far = start > codes
    i[too_far] -= 1
    start = i * n - (i * (i + 1)) // 2
    next_start = (i + 1) * n - ((i + 1) * (i + 2)) // 2
    overflow = codes >= next_start
    i[overflow] += 1
    start = i * n - (i * (i + 1)) // 2
    j = codes - start + i + 1
    return i, j


def small_world_ness(graph, samples: int = 20, rng_seed=0) -> NetworkStats:
    """Clustering and efficiency of `graph` against random-equivalent baselines."""
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    adj = symmetrize(graph)
    n = adj.shape[0]
    m = adj.nnz // 2
    c = clustering_coefficient(adj)
    e = efficiency(adj)
    child_seeds = np.random.SeedSequence(rng_seed).spawn(samples)
    c_sum = e_sum = 0.0
    for seed in child_seeds:
        baseline = random_equivalent(n, m, seed)
        c_sum += clustering_coefficient(baseline)
        e_sum += efficiency(baseline)
    c_rand = c_sum / samples
    e_rand = e_sum / samples
    if c_rand > 0.0 and e_rand > 0.0:
        swn = (c / c_rand) * (e / e_rand)
    else:
        swn = math.inf
    return NetworkStats(
        clustering=c,
        efficiency=e,
        c_rand=c_rand,
        e_rand=e_rand,
        swn=swn,
        baseline_samples=samples,
        nodes=n,
        edges=m,
    )
