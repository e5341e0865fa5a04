"""Iterative label propagation shared by both pipeline stages.

Every node carries a row-stochastic class-membership vector. Labeled nodes
are clamped one-hot and never change; unlabeled nodes are initialized in
balance (1/C each) and repeatedly replaced by the weighted arithmetic mean
of their out-neighbors' vectors:

    v_i(t+1) = sum_j W_ij v_j(t) / sum_j W_ij

Updates are synchronous (Jacobi, double-buffered), so a step is a sparse
row-normalized matrix product and results are bit-reproducible. Convergence
is tracked through the average maximum membership over unlabeled nodes,
sampled every `check_interval` iterations; the loop stops once the change
between consecutive checkpoints drops below omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ParameterError
from .graphs import SparseDigraph
from .resample import LabelMap


@dataclass
class DominationMatrix:
    """Per-node class-membership rows plus the clamp mask for labeled nodes."""

    rows: np.ndarray
    labeled_mask: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labeled_mask = np.asarray(self.labeled_mask, dtype=bool)
        if self.rows.ndim != 2:
            raise DimensionError("domination rows must be 2-D (nodes x classes)")
        if self.labeled_mask.shape != (self.rows.shape[0],):
            raise DimensionError("labeled mask must have one flag per node")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def num_classes(self) -> int:
        return self.rows.shape[1]

    def copy(self) -> "DominationMatrix":
        return DominationMatrix(self.rows.copy(), self.labeled_mask.copy())


@dataclass
class ConvergenceState:
    """Stop-rule bookkeeping; mutated in place by run_stage."""

    check_interval: int = 10
    omega: float = 1e-4
    max_iterations: int = 100000
    last_avg: float = field(default=math.nan)
    iteration: int = 0

    def __post_init__(self):
        if self.check_interval < 1:
            raise ParameterError("check_interval must be >= 1")
        if self.omega <= 0:
            raise ParameterError("omega must be positive")


class StageResult(NamedTuple):
    dom: DominationMatrix
    iterations: int
    converged: bool


def init_domination(labels: np.ndarray, num_classes: int) -> DominationMatrix:
    """One-hot rows for labeled nodes, uniform 1/C rows for unlabeled ones."""
    if num_classes < 1:
        raise ParameterError(f"num_classes must be >= 1, got {num_classes}")
    labels = np.asarray(labels).reshape(-1).astype(np.int64)
    n = labels.shape[0]
    rows = np.full((n, num_classes), 1.0 / num_classes, dtype=np.float64)
    labeled = labels > 0
    rows[labeled] = 0.0
    rows[labeled, labels[labeled] - 1] = 1.0
    return DominationMatrix(rows, labeled)


def _propagation_operator(graph: SparseDigraph, labeled_mask: np.ndarray):
    """Row-normalized weight matrix over propagating rows.

    Rows that must pass through unchanged (labeled nodes, and unlabeled
    nodes with no out-edges) are left empty; callers copy them across.
    """
    degree = graph.out_degree()
    active = (degree > 0) & ~labeled_mask
    src = np.repeat(np.arange(graph.n), degree)
    keep = active[src]
    src, tgt, w = src[keep], graph.targets[keep], graph.weights[keep]
    totals = np.bincount(src, weights=w, minlength=graph.n)
    norm = w / totals[src]
    op = sp.csr_matrix((norm, (src, tgt)), shape=(graph.n, graph.n))
    return op, active


def propagation_step(graph: SparseDigraph, dom: DominationMatrix) -> DominationMatrix:
    """One synchronous update; labeled and isolated rows are copied through."""
    if graph.n != dom.n:
        raise DimensionError(f"graph has {graph.n} nodes but domination has {dom.n} rows")
    op, active = _propagation_operator(graph, dom.labeled_mask)
    rows = op.dot(dom.rows)
    rows[~active] = dom.rows[~active]
    return DominationMatrix(rows, dom.labeled_mask.copy())


def avg_max_domination(dom: DominationMatrix) -> float:
    """Mean over unlabeled nodes of each row's maximum membership."""
    unlabeled = ~dom.labeled_mask
    if not unlabeled.any():
        raise ParameterError("no unlabeled nodes: propagation is already converged")
    return float(dom.rows[unlabeled].max(axis=1).mean())


def run_stage(graph: SparseDigraph, dom: DominationMatrix,
              conv: ConvergenceState) -> StageResult:
    """Iterate propagation_step until the checkpoint statistic settles.

    Checkpoints land every `check_interval` iterations; the stage stops as
    soon as (current - previous) < omega, where the initial state is the
    zeroth checkpoint. Hitting max_iterations returns converged=False.
    """
    if graph.n != dom.n:
        raise DimensionError(f"graph has {graph.n} nodes but domination has {dom.n} rows")
    work = dom.copy()
    unlabeled = ~work.labeled_mask
    if not unlabeled.any():
        conv.iteration = 0
        return StageResult(work, 0, True)

    op, active = _propagation_operator(graph, work.labeled_mask)
    passthrough = ~active
    conv.last_avg = avg_max_domination(work)
    conv.iteration = 0
    rows = work.rows
    converged = False
    while conv.iteration < conv.max_iterations:
        steps = min(conv.check_interval, conv.max_iterations - conv.iteration)
        for _ in range(steps):
            new_rows = op.dot(rows)
            new_rows[passthrough] = rows[passthrough]
            rows = new_rows
        conv.iteration += steps
        current = float(rows[unlabeled].max(axis=1).mean())
        if steps == conv.check_interval and current - conv.last_avg < conv.omega:
            conv.last_avg = current
            converged = True
            break
        conv.last_avg = current
    work.rows = rows
    return StageResult(work, conv.iteration, converged)


def threshold_label(dom: DominationMatrix, labels: LabelMap, tau: float) -> LabelMap:
    """Assign the argmax class wherever the row maximum reaches tau.

    Already-labeled pixels are untouched; rows below the confidence bar
    stay unlabeled for the next stage.
    """
    if not 0.0 < tau <= 1.0:
        raise ParameterError(f"tau must lie in (0, 1], got {tau}")
    flat = labels.flat()
    if dom.n != flat.shape[0]:
        raise DimensionError(f"domination has {dom.n} rows but label map has {flat.shape[0]}")
    out = labels.labels.copy().reshape(-1)
    unlabeled = out == 0
    confident = unlabeled & (dom.rows.max(axis=1) >= tau)
    out[confident] = dom.rows[confident].argmax(axis=1) + 1
    return LabelMap(out.reshape(labels.height, labels.width), labels.num_classes)


def argmax_label(dom: DominationMatrix, labels: LabelMap) -> LabelMap:
    """Assign every remaining unlabeled pixel its argmax class (ties -> lowest id)."""
    flat = labels.flat()
    if dom.n != flat.shape[0]:
        raise DimensionError(f"domination has {dom.n} rows but label map has {flat.shape[0]}")
    out = labels.labels.copy().reshape(-1)
    unlabeled = out == 0
    out[unlabeled] = dom.rows[unlabeled].argmax(axis=1) + 1
    return LabelMap(out.reshape(labels.height, labels.width), labels.num_classes)
