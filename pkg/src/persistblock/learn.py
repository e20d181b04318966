"""K-medoids clustering, validation indices, retrieval statistics, 1-NN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .metrics import DissimilarityMatrix

__all__ = [
    "ClusteringResult",
    "k_medoids",
    "davies_bouldin",
    "select_tau",
    "clustering_accuracy",
    "retrieval_stats",
    "knn_classify",
]

E_MEASURE_CUTOFF = 32


@dataclass(frozen=True)
class ClusteringResult:
    """Medoid indices, per-item assignment (indices into medoids), total cost."""

    medoids: tuple[int, ...]
    assignment: np.ndarray
    cost: float
    converged: bool = True

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "medoids", tuple(int(m) for m in self.medoids))


def _assign(vals: np.ndarray, medoids) -> tuple[np.ndarray, float]:
    sub = vals[:, list(medoids)]
    assignment = np.argmin(sub, axis=1)
    cost = float(sub[np.arange(vals.shape[0]), assignment].sum())
    return assignment, cost


def k_medoids(M: DissimilarityMatrix, k: int, seed: int = 0,
              max_sweeps: int = 100) -> ClusteringResult:
    """PAM: greedy BUILD then SWAP sweeps to a local optimum.

    Deterministic given the matrix (the seed only breaks exact cost ties, and
    BUILD/SWAP themselves break ties by smallest index, so in practice results
    do not depend on it).  SWAP stops at the sweep cap; `converged` records
    whether a full sweep made no improvement.
    """
    vals = M.values
    n = vals.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    # BUILD: repeatedly add the medoid that most reduces total cost
    medoids: list[int] = [int(np.argmin(vals.sum(axis=1)))]
    best = vals[:, medoids[0]].copy()
    while len(medoids) < k:
        gains = np.sum(np.clip(best[:, None] - vals, 0.0, None), axis=0)
        gains[medoids] = -np.inf
        add = int(np.argmax(gains))
        medoids.append(add)
        best = np.minimum(best, vals[:, add])
    # SWAP: first-improvement sweeps over (medoid, non-medoid) pairs
    _, cost = _assign(vals, medoids)
    converged = False
    for _ in range(max_sweeps):
        improved = False
        for mi in range(k):
            for h in range(n):
                if h in medoids:
                    continue
                trial = list(medoids)
                trial[mi] = h
                _, trial_cost = _assign(vals, trial)
                if trial_cost < cost - 1e-12:
                    medoids, cost = trial, trial_cost
                    improved = True
        if not improved:
            converged = True
            break
    medoids = sorted(medoids)
    assignment, cost = _assign(vals, medoids)
    # medoids must be their own cluster centers even under zero-distance ties
    for mi, m in enumerate(medoids):
        assignment[m] = mi
    return ClusteringResult(tuple(medoids), assignment, cost, converged)


def davies_bouldin(M: DissimilarityMatrix, result: ClusteringResult) -> float:
    """Mean over clusters of the worst (spread_i + spread_j) / center distance.

    Spread is the mean dissimilarity of a cluster's members to its medoid;
    center distances are read straight off the matrix, so the index applies
    to any dissimilarity, not just Euclidean coordinates.
    """
    vals = M.values
    k = len(result.medoids)
    if k < 2:
        raise ValueError("need at least 2 clusters")
    spread = np.empty(k)
    for i, m in enumerate(result.medoids):
        members = np.nonzero(result.assignment == i)[0]
        spread[i] = float(vals[members, m].mean()) if len(members) else 0.0
    db = 0.0
    for i in range(k):
        worst = -np.inf
        for j in range(k):
            if j == i:
                continue
            sep = vals[result.medoids[i], result.medoids[j]]
            if sep <= 0:
                raise ValueError("coincident medoids give a zero denominator")
            worst = max(worst, (spread[i] + spread[j]) / sep)
        db += worst
    return db / k


def select_tau(tau_grid, pipeline, k: int, seed: int = 0):
    """Pick the tau whose clustering minimizes Davies-Bouldin (ties: smaller tau).

    `pipeline(tau)` must return the DissimilarityMatrix for that tau.  Returns
    (chosen tau, rows of {tau, db}).
    """
    taus = sorted(float(t) for t in tau_grid)
    if not taus:
        raise ValueError("empty tau grid")
    rows = []
    best_tau, best_db = None, np.inf
    for tau in taus:
        M = pipeline(tau)
        result = k_medoids(M, k, seed=seed)
        db = davies_bouldin(M, result)
        rows.append({"tau": tau, "db": db})
        if db < best_db:  # strict, so earlier (smaller) tau wins ties
            best_tau, best_db = tau, db
    return best_tau, rows


def clustering_accuracy(result: ClusteringResult, labels) -> float:
    """Best fraction correct over cluster-to-label assignments.

    Square confusion matrices get a bijection; when cluster and class counts
    differ the rectangular assignment matches each cluster to at most one
    label (and vice versa).
    """
    labels = list(labels)
    assignment = result.assignment
    if len(labels) != len(assignment):
        raise ValueError("label count must match item count")
    classes = sorted(set(labels))
    k = len(result.medoids)
    confusion = np.zeros((k, len(classes)))
    class_index = {c: i for i, c in enumerate(classes)}
    for cluster, label in zip(assignment, labels):
        confusion[cluster, class_index[label]] += 1
    rows, cols = linear_sum_assignment(-confusion)
    return float(confusion[rows, cols].sum()) / len(labels)


def _ranked_others(vals: np.ndarray, q: int) -> np.ndarray:
    others = np.delete(np.arange(vals.shape[0]), q)
    order = np.lexsort((others, vals[q, others]))  # distance, then index
    return others[order]


def retrieval_stats(M: DissimilarityMatrix, labels=None) -> dict[str, float]:
    """NN, First-Tier, Second-Tier, E-measure, and DCG averaged over queries.

    Each query ranks all other items by dissimilarity (ties by index).  With
    class size C: NN checks the rank-1 item, FT is recall in the top C-1, ST
    in the top 2(C-1), E the harmonic mean of precision and recall among the
    top 32, and DCG uses unit gains with a log2 discount from rank 2,
    normalized by the ideal ordering.
    """
    if labels is None:
        labels = M.labels
    if labels is None:
        raise ValueError("retrieval needs labels, on the matrix or passed in")
    labels = list(labels)
    vals = M.values
    n = vals.shape[0]
    if len(labels) != n:
        raise ValueError("label count must match matrix size")
    counts = {c: labels.count(c) for c in set(labels)}
    if min(counts.values()) < 2:
        raise ValueError("every class needs at least 2 members")
    nn = ft = st = em = dcg = 0.0
    for q in range(n):
        ranked = _ranked_others(vals, q)
        rel = np.array([labels[r] == labels[q] for r in ranked])
        n_rel = counts[labels[q]] - 1
        nn += float(rel[0])
        ft += float(rel[:n_rel].sum()) / n_rel
        st += float(rel[:min(2 * n_rel, len(rel))].sum()) / n_rel
        cut = min(E_MEASURE_CUTOFF, len(rel))
        hits = float(rel[:cut].sum())
        if hits > 0:
            prec = hits / cut
            rec = hits / n_rel
            em += 2.0 / (1.0 / prec + 1.0 / rec)
        discounts = np.concatenate([[1.0], 1.0 / np.log2(np.arange(2, len(rel) + 1))])
        ideal = float(discounts[:n_rel].sum())
        dcg += float((rel * discounts).sum()) / ideal
    return {"NN": nn / n, "FT": ft / n, "ST": st / n, "E": em / n, "DCG": dcg / n}


def knn_classify(test_train: np.ndarray, train_labels, k: int = 1):
    """Nearest-training-item label for each test row (ties by lower index).

    `test_train` is the rectangular test-by-train dissimilarity block.  For
    k > 1 the majority label among the k nearest wins, ties broken by the
    nearer (then lower-index) neighbor.
    """
    block = np.asarray(test_train, dtype=float)
    train_labels = list(train_labels)
    if block.ndim != 2 or block.shape[1] != len(train_labels):
        raise ValueError("block columns must match training labels")
    if len(train_labels) == 0:
        raise ValueError("empty training set")
    out = []
    cols = np.arange(block.shape[1])
    for row in block:
        order = np.lexsort((cols, row))[:k]
        votes: dict[str, int] = {}
        for idx in order:
            votes[train_labels[idx]] = votes.get(train_labels[idx], 0) + 1
        top = max(votes.values())
        for idx in order:  # first (nearest) label among the tied majority
            if votes[train_labels[idx]] == top:
                out.append(train_labels[idx])
                break
    return out
