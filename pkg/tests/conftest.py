"""Shared builders: synthetic rasters, tiny datasets, graphs, brute-force oracles."""

import io

import numpy as np
import pytest
from PIL import Image

from lapseg import LabelMap, RgbImage, SparseDigraph


def two_half_image(size=64, left=(0.0, 0.0, 0.0), right=(1.0, 1.0, 1.0)) -> RgbImage:
    """Constant-color halves split down the middle."""
    arr = np.empty((size, size, 3))
    arr[:, : size // 2] = left
    arr[:, size // 2 :] = right
    return RgbImage(arr)


def two_half_seeds(size=64) -> LabelMap:
    """One seed pixel per half, placed where the 1/3 sampling grid lands."""
    labels = np.zeros((size, size), dtype=np.int32)
    small = -(-size // 3)
    sampled = np.floor((np.arange(small) + 0.5) * size / small).astype(int)
    row = sampled[len(sampled) // 2]
    left_col = sampled[len(sampled) // 4]
    right_col = sampled[3 * len(sampled) // 4]
    assert left_col < size // 2 <= right_col
    labels[row, left_col] = 1
    labels[row, right_col] = 2
    return LabelMap(labels, 2)


def save_png(path, array_u8, mode="RGB"):
    Image.fromarray(array_u8, mode=mode).save(path)


def png_bytes(array_u8, mode="RGB") -> bytes:
    buf = io.BytesIO()
    Image.fromarray(array_u8, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def undirected_graph(n, pairs) -> SparseDigraph:
    """SparseDigraph with both directions of each undirected pair, weight 1."""
    s, t = [], []
    for a, b in pairs:
        s += [a, b]
        t += [b, a]
    s, t = np.array(s, dtype=np.int64), np.array(t, dtype=np.int64)
    if s.size:
        order = np.lexsort((t, s))
        s, t = s[order], t[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(s, minlength=n))
    return SparseDigraph(n, indptr, t, np.ones(s.size))


def random_undirected_pairs(n, extra_edges, rng):
    """Connected edge set: a random spanning tree plus `extra_edges` extras."""
    pairs = set()
    order = rng.permutation(n)
    for idx in range(1, n):
        a = order[idx]
        b = order[rng.integers(0, idx)]
        pairs.add((min(a, b), max(a, b)))
    while len(pairs) < min(n * (n - 1) // 2, n - 1 + extra_edges):
        a, b = rng.integers(0, n, 2)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return sorted(pairs)


def random_labeled_digraph(n, num_classes, rng, extra_edges=None):
    """Weighted digraph + labels for propagation tests.

    Every unlabeled node has out-edges to all its undirected neighbors, so
    each one is path-connected to a seed (the underlying graph is connected
    and at least one node per class is labeled).
    """
    if extra_edges is None:
        extra_edges = 2 * n
    pairs = random_undirected_pairs(n, extra_edges, rng)
    labels = np.zeros(n, dtype=np.int64)
    seeds = rng.choice(n, size=num_classes, replace=False)
    for c, node in enumerate(seeds, start=1):
        labels[node] = c
    extra_labeled = rng.random(n) < 0.1
    labels[extra_labeled & (labels == 0)] = rng.integers(
        1, num_classes + 1, size=int((extra_labeled & (labels == 0)).sum())
    )

    neighbors = {i: [] for i in range(n)}
    for a, b in pairs:
        neighbors[a].append(b)
        neighbors[b].append(a)
    s, t = [], []
    for i in range(n):
        if labels[i] == 0:
            for j in sorted(neighbors[i]):
                s.append(i)
                t.append(j)
    s, t = np.array(s, dtype=np.int64), np.array(t, dtype=np.int64)
    w = rng.uniform(0.05, 1.0, size=s.size)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(s, minlength=n))
    return SparseDigraph(n, indptr, t, w), labels


def solve_fixed_point(graph: SparseDigraph, labels, num_classes) -> np.ndarray:
    """Direct linear-system solution of the propagation fixed point.

    Unlabeled rows satisfy v_i = sum_j W_ij v_j / sum_j W_ij with labeled
    rows clamped one-hot; solves (I - P_UU) v_U = P_UL v_L densely.
    """
    labels = np.asarray(labels)
    n = graph.n
    rows = np.zeros((n, num_classes))
    labeled = labels > 0
    rows[labeled, labels[labeled] - 1] = 1.0
    unlabeled = np.flatnonzero(~labeled)
    if unlabeled.size == 0:
        return rows
    pos = -np.ones(n, dtype=np.int64)
    pos[unlabeled] = np.arange(unlabeled.size)
    a = np.eye(unlabeled.size)
    b = np.zeros((unlabeled.size, num_classes))
    for row_idx, i in enumerate(unlabeled):
        tgt, w = graph.out_edges(i)
        total = w.sum()
        for j, wij in zip(tgt, w):
            if labels[j] > 0:
                b[row_idx] += (wij / total) * rows[j]
            else:
                a[row_idx, pos[j]] -= wij / total
    rows[unlabeled] = np.linalg.solve(a, b)
    # Unlabeled rows uniform when the node has no edges at all.
    isolated = unlabeled[np.diff(graph.indptr)[unlabeled] == 0]
    rows[isolated] = 1.0 / num_classes
    return rows


def brute_clustering(adj_dense: np.ndarray) -> float:
    """O(n^3) triangle-counting clustering oracle on a dense 0/1 adjacency."""
    n = adj_dense.shape[0]
    total = 0.0
    for u in range(n):
        nbrs = np.flatnonzero(adj_dense[u])
        d = nbrs.size
        if d < 2:
            continue
        links = 0
        for ii in range(d):
            for jj in range(ii + 1, d):
                if adj_dense[nbrs[ii], nbrs[jj]]:
                    links += 1
        total += 2.0 * links / (d * (d - 1))
    return total / n


def brute_efficiency(adj_dense: np.ndarray) -> float:
    """Floyd-Warshall efficiency oracle on a dense 0/1 adjacency."""
    n = adj_dense.shape[0]
    dist = np.where(adj_dense > 0, 1.0, np.inf)
    np.fill_diagonal(dist, 0.0)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    off = ~np.eye(n, dtype=bool)
    finite = np.isfinite(dist) & off
    return float((1.0 / dist[finite]).sum()) / (n * (n - 1))


def write_dataset(root, size=36, count=2):
    """Tiny two-half benchmark dataset (images/, trimaps/, truth/)."""
    images = root / "images"
    trimaps = root / "trimaps"
    truth = root / "truth"
    for d in (images, trimaps, truth):
        d.mkdir(parents=True, exist_ok=True)
    shades = [(0.0, 1.0), (0.1, 0.9)]
    for idx in range(count):
        dark, light = shades[idx % len(shades)]
        img = two_half_image(size, left=(dark,) * 3, right=(light,) * 3)
        save_png(images / f"img{idx}.png", img.to_uint8())

        tri = np.full((size, size), 128, dtype=np.uint8)
        tri[:, : size // 4] = 64
        tri[:, -size // 4 :] = 255
        tri[:2, : size // 4] = 0
        save_png(trimaps / f"img{idx}.png", tri, mode="L")

        gt = np.zeros((size, size), dtype=np.uint8)
        gt[:, size // 2 :] = 255
        save_png(truth / f"img{idx}.png", gt, mode="L")
    return images, trimaps, truth


def write_scribble_dataset(root, size=36, count=2):
    """Tiny scribble-seeded benchmark dataset (images/, scribbles/, truth/)."""
    images = root / "images"
    scribbles = root / "scribbles"
    truth = root / "truth"
    for d in (images, scribbles, truth):
        d.mkdir(parents=True, exist_ok=True)
    for idx in range(count):
        img = two_half_image(size)
        save_png(images / f"img{idx}.png", img.to_uint8())

        scrib = np.full((size, size, 3), 255, dtype=np.uint8)
        scrib[size // 2 - 2 : size // 2 + 2, 4:8] = [0, 0, 255]       # left stroke
        scrib[size // 2 - 2 : size // 2 + 2, -8:-4] = [255, 0, 0]     # right stroke
        save_png(scribbles / f"img{idx}.png", scrib)

        gt = np.zeros((size, size), dtype=np.uint8)
        gt[:, size // 2 :] = 255
        save_png(truth / f"img{idx}.png", gt, mode="L")
    return images, scribbles, truth


@pytest.fixture
def tiny_dataset(tmp_path):
    return write_dataset(tmp_path)


@pytest.fixture
def tiny_scribble_dataset(tmp_path):
    return write_scribble_dataset(tmp_path)
