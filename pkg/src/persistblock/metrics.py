"""Exact p-Wasserstein distances between diagrams and Lp distances between vectors."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .diagram import Diagram, pad_to_cardinality

__all__ = [
    "MatchingResult",
    "DissimilarityMatrix",
    "wasserstein",
    "vector_distance",
    "pairwise_matrix",
]


@dataclass(frozen=True)
class MatchingResult:
    """Optimal matching cost plus the realizing bijection on the padded diagrams."""

    cost: float
    assignment: tuple[tuple[int, int], ...]  # (padded-d1 index, padded-d2 index)
    p: float


def _cost_matrix(p1: np.ndarray, p2: np.ndarray, n1: int, n2: int) -> np.ndarray:
    """Sup-norm costs on the padded sets; pad-to-pad matches cost nothing."""
    diff = np.abs(p1[:, None, :] - p2[None, :, :])
    cost = diff.max(axis=2)
    if n1 < p1.shape[0] and n2 < p2.shape[0]:
        cost[n1:, n2:] = 0.0
    return cost


def wasserstein(d1: Diagram, d2: Diagram, p: float) -> MatchingResult:
    """Exact p-Wasserstein distance with axis-projection padding.

    Ground distance is the sup-norm in (birth, persistence) coordinates and
    edge costs are raised to the p-th power.  For p >= 1 the outer 1/p root
    is applied; for 0 < p < 1 the optimal sum itself is the metric and no
    root is taken.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if len(d1) == 0 and len(d2) == 0:
        return MatchingResult(0.0, (), p)
    pad1, pad2 = pad_to_cardinality(d1, d2)
    cost = _cost_matrix(pad1, pad2, len(d1), len(d2)) ** p
    rows, cols = linear_sum_assignment(cost)
    total = float(cost[rows, cols].sum())
    value = total ** (1.0 / p) if p >= 1 else total
    return MatchingResult(value, tuple(zip(rows.tolist(), cols.tolist())), p)


def vector_distance(v1, v2, norm: str = "L2") -> float:
    """Standard Lp distance between equal-length feature vectors."""
    a = np.asarray(getattr(v1, "values", v1), dtype=float)
    b = np.asarray(getattr(v2, "values", v2), dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    d = a - b
    if norm == "L1":
        return float(np.sum(np.abs(d)))
    if norm == "L2":
        return float(np.linalg.norm(d))
    if norm == "Linf":
        return float(np.max(np.abs(d))) if d.size else 0.0
    raise ValueError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative matrix over a labeled dataset."""

    values: np.ndarray
    ids: tuple[str, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError("dissimilarity matrix must be square")
        if len(self.ids) != vals.shape[0]:
            raise ValueError("id count must match matrix size")
        if self.labels is not None and len(self.labels) != vals.shape[0]:
            raise ValueError("label count must match matrix size")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "ids", tuple(self.ids))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.ids)
            for row in self.values:
                writer.writerow([repr(float(x)) for x in row])

    @staticmethod
    def from_csv(path) -> "DissimilarityMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        ids = tuple(rows[0])
        vals = np.array([[float(x) for x in row] for row in rows[1:]])
        return DissimilarityMatrix(vals, ids)


def pairwise_matrix(features, norm: str = "L2", ids=None, labels=None) -> DissimilarityMatrix:
    """Symmetric matrix of pairwise vector distances (zero diagonal)."""
    arrs = [np.asarray(getattr(f, "values", f), dtype=float) for f in features]
    if not arrs:
        raise ValueError("need at least one feature vector")
    X = np.stack(arrs)
    if norm == "L2":
        sq = np.sum(X**2, axis=1)
        g = X @ X.T
        vals = np.sqrt(np.clip(sq[:, None] + sq[None, :] - 2 * g, 0.0, None))
    else:
        diff = np.abs(X[:, None, :] - X[None, :, :])
        vals = diff.sum(axis=2) if norm == "L1" else diff.max(axis=2)
    np.fill_diagonal(vals, 0.0)
    vals = 0.5 * (vals + vals.T)  # exact symmetry despite fp rounding
    if ids is None:
        ids = [str(i) for i in range(len(arrs))]
    return DissimilarityMatrix(vals, tuple(ids), tuple(labels) if labels is not None else None)
