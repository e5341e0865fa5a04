"""Construction of the two propagation digraphs.

Stage 1 connects every unlabeled node to its k nearest neighbors in the
9-D scaled feature space (exact search through a k-d tree). Stage 2
connects every still-unlabeled pixel to its 8-connected grid neighbors
(3 at corners, 5 on edges). In both graphs only unlabeled nodes have
out-edges, and each edge carries a Gaussian similarity weight
exp(-d^2 / (2 sigma^2)) computed on the same feature rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionError, InsufficientDataError, ParameterError

# Fixed scan order of the 8-neighborhood; adjacency (and therefore the
# per-row summation order during propagation) follows it deterministically.
GRID_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass
class SparseDigraph:
    """Out-adjacency lists in CSR layout: node i owns targets[indptr[i]:indptr[i+1]]."""

    n: int
    indptr: np.ndarray
    targets: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.indptr = np.asarray(self.indptr, dtype=np.int64)
        self.targets = np.asarray(self.targets, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.indptr.shape != (self.n + 1,):
            raise DimensionError("indptr must have n+1 entries")
        if self.targets.shape != self.weights.shape:
            raise DimensionError("targets and weights must align")

    @property
    def num_edges(self) -> int:
        return int(self.targets.shape[0])

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def out_edges(self, i: int):
        """(targets, weights) arrays for node i, in adjacency order."""
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.targets[s:e], self.weights[s:e]


def gaussian_weight(d, sigma: float):
    """Gaussian kernel similarity exp(-d^2 / (2 sigma^2)); 1 at d = 0."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    d = np.asarray(d, dtype=np.float64)
    out = np.exp(-(d * d) / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


class KdTree:
    """Exact nearest-neighbor index over feature rows.

    Queries return exactly min(k, n-1) distinct ids (self excluded) in
    nondecreasing distance order; distance ties are broken toward the
    lower node id, so results are deterministic even on degenerate data.
    """

    def __init__(self, feats: np.ndarray):
        feats = np.ascontiguousarray(feats, dtype=np.float64)
        if feats.ndim != 2:
            raise DimensionError("feature matrix must be 2-D")
        if feats.shape[0] < 2:
            raise InsufficientDataError("k-d tree needs at least 2 points")
        self.points = feats
        self.n = feats.shape[0]
        self._tree = cKDTree(feats, balanced_tree=True)

    def query(self, i: int, k: int):
        """k nearest neighbors of dataset point i -> (ids, distances)."""
        ids, dists = self.query_many(np.array([i]), k)
        return ids[0], dists[0]

    def query_many(self, indices: np.ndarray, k: int):
        """Batch version of query; rows align with `indices`.

        Tie-free rows (the overwhelming majority on real feature data) are
        answered in one vectorized pass; rows with distance ties fall back
        to a per-row path that retrieves the full tie set and orders it by
        (distance, id).
        """
        indices = np.asarray(indices, dtype=np.int64)
        k_eff = min(k, self.n - 1)
        if k_eff < 1:
            raise ParameterError("k must be at least 1")
        q = indices.shape[0]
        out_ids = np.empty((q, k_eff), dtype=np.int64)
        out_d = np.empty((q, k_eff), dtype=np.float64)

        # One extra beyond self+k certifies the boundary in the common case.
        kq = min(k_eff + 2, self.n)
        dists, ids = self._tree.query(self.points[indices], k=kq)
        if kq == 1:
            dists, ids = dists[:, None], ids[:, None]

        # Drop self from each row: keep non-self entries in distance order
        # (stable argsort on the drop mask); rows where self was not
        # returned (possible among many coincident points) lose their last
        # entry instead, which the tie check below then sends to the slow
        # path if it could matter.
        keep = ids != indices[:, None]
        order = np.argsort(~keep, axis=1, kind="stable")[:, : kq - 1]
        rows = np.arange(q)[:, None]
        cand_ids = ids[rows, order]
        cand_d = dists[rows, order]

        if kq - 1 > k_eff:
            boundary_tie = cand_d[:, k_eff - 1] == cand_d[:, k_eff]
        else:
            boundary_tie = np.zeros(q, dtype=bool)
        internal = np.zeros(q, dtype=bool)
        if k_eff > 1:
            internal = (np.diff(cand_d[:, :k_eff], axis=1) == 0).any(axis=1)
        # slow path also when self was not among the returned entries
        # (possible among many coincident points)
        self_found = (~keep).sum(axis=1) == 1
        slow = boundary_tie | internal | ~self_found

        fast = ~slow
        out_ids[fast] = cand_ids[fast, :k_eff]
        out_d[fast] = cand_d[fast, :k_eff]
        for qi in np.flatnonzero(slow):
            out_ids[qi], out_d[qi] = self._query_one_with_ties(int(indices[qi]), k_eff)
        return out_ids, out_d

    def _query_one_with_ties(self, self_id: int, k_eff: int):
        """Exact (distance, id)-ordered neighbors for a row with ties."""
        kq = min(k_eff + 2, self.n)
        while True:
            dists, ids = self._tree.query(self.points[self_id], k=kq)
            dists, ids = np.atleast_1d(dists), np.atleast_1d(ids)
            mask = ids != self_id
            cand_ids = ids[mask]
            cand_d = dists[mask]
            boundary = np.partition(cand_d, k_eff - 1)[k_eff - 1]
            if kq >= self.n or dists[-1] > boundary:
                order = np.lexsort((cand_ids, cand_d))[:k_eff]
                return cand_ids[order], cand_d[order]
            kq = min(kq * 2, self.n)


def build_kdtree(feats: np.ndarray) -> KdTree:
    return KdTree(feats)


def build_knn_digraph(feats: np.ndarray, labels: np.ndarray, k: int, sigma: float,
                      tree: KdTree | None = None) -> SparseDigraph:
    """Stage-1 graph: each unlabeled node points at its k nearest neighbors.

    `labels` is the flat per-node class array (0 = unlabeled); labeled
    nodes receive no out-edges. k >= n is clamped to n-1 with a warning
    so tiny images still run. Pass a prebuilt `tree` over the same rows to
    share the index across parameter sweeps.
    """
    feats = np.asarray(feats, dtype=np.float64)
    labels = np.asarray(labels).reshape(-1)
    n = feats.shape[0]
    if labels.shape[0] != n:
        raise DimensionError(f"labels ({labels.shape[0]}) must align with features ({n})")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if k >= n:
        warnings.warn(f"k={k} >= n={n}; clamping to {n - 1}", stacklevel=2)
        k = n - 1

    unlabeled = np.flatnonzero(labels == 0)
    indptr = np.zeros(n + 1, dtype=np.int64)
    if unlabeled.size == 0:
        return SparseDigraph(n, indptr, np.empty(0, np.int64), np.empty(0, np.float64))

    if tree is None:
        tree = KdTree(feats)
    elif tree.n != n:
        raise DimensionError(f"prebuilt tree has {tree.n} points, features have {n}")
    ids, dists = tree.query_many(unlabeled, k)
    degree = np.zeros(n, dtype=np.int64)
    degree[unlabeled] = ids.shape[1]
    indptr[1:] = np.cumsum(degree)
    return SparseDigraph(n, indptr, ids.reshape(-1), gaussian_weight(dists.reshape(-1), sigma))


def build_grid_digraph(feats_full: np.ndarray, unlabeled_mask: np.ndarray,
                       width: int, height: int, sigma: float) -> SparseDigraph:
    """Stage-2 graph: unlabeled pixels point at their 8-connected neighbors.

    Weights use the full-image feature rows; neighbor order per node is the
    fixed GRID_OFFSETS scan order.
    """
    feats_full = np.asarray(feats_full, dtype=np.float64)
    mask = np.asarray(unlabeled_mask, dtype=bool).reshape(-1)
    n = width * height
    if feats_full.shape[0] != n:
        raise DimensionError(
            f"feature rows ({feats_full.shape[0]}) must equal width*height ({n})"
        )
    if mask.shape[0] != n:
        raise DimensionError(f"mask length ({mask.shape[0]}) must equal width*height ({n})")
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")

    grid = np.arange(n, dtype=np.int64).reshape(height, width)
    mask2d = mask.reshape(height, width)
    src_parts, tgt_parts, order_parts = [], [], []
    for order, (dr, dc) in enumerate(GRID_OFFSETS):
        r0, r1 = max(0, -dr), height - max(0, dr)
        c0, c1 = max(0, -dc), width - max(0, dc)
        sub_mask = mask2d[r0:r1, c0:c1]
        src = grid[r0:r1, c0:c1][sub_mask]
        tgt = grid[r0 + dr : r1 + dr, c0 + dc : c1 + dc][sub_mask]
        src_parts.append(src)
        tgt_parts.append(tgt)
        order_parts.append(np.full(src.shape[0], order, dtype=np.int64))

    src = np.concatenate(src_parts)
    tgt = np.concatenate(tgt_parts)
    order = np.concatenate(order_parts)
    perm = np.lexsort((order, src))
    src, tgt = src[perm], tgt[perm]

    d = np.sqrt(((feats_full[src] - feats_full[tgt]) ** 2).sum(axis=1))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(src, minlength=n))
    return SparseDigraph(n, indptr, tgt, gaussian_weight(d, sigma))
