import itertools

import numpy as np
import pytest

from persistblock.learn import (ClusteringResult, clustering_accuracy,
                                davies_bouldin, k_medoids, knn_classify,
                                retrieval_stats, select_tau)
from persistblock.metrics import DissimilarityMatrix, pairwise_matrix


def _matrix(vals, labels=None):
    vals = np.asarray(vals, dtype=float)
    ids = tuple(str(i) for i in range(vals.shape[0]))
    return DissimilarityMatrix(vals, ids, labels)


def _blob_matrix(rng, centers, per, spread=0.05):
    pts = np.concatenate([c + rng.normal(0, spread, (per, 2)) for c in centers])
    labels = [str(i) for i in range(len(centers)) for _ in range(per)]
    return pairwise_matrix(list(pts), labels=labels), labels


# --- k-medoids ---------------------------------------------------------------------


def test_k_medoids_recovers_separated_blobs():
    rng = np.random.default_rng(40)
    M, labels = _blob_matrix(rng, [(0, 0), (5, 0), (0, 5)], per=6)
    res = k_medoids(M, 3)
    assert clustering_accuracy(res, labels) == 1.0
    assert res.converged
    assert list(res.medoids) == sorted(res.medoids)


def test_k_medoids_local_optimum_under_single_swaps():
    rng = np.random.default_rng(41)
    for trial in range(5):
        vals = rng.uniform(0, 1, (20, 20))
        vals = 0.5 * (vals + vals.T)
        np.fill_diagonal(vals, 0.0)
        M = _matrix(vals)
        res = k_medoids(M, 3)
        medoids = set(res.medoids)
        for out in res.medoids:
            for cand in range(20):
                if cand in medoids:
                    continue
                trial_set = sorted(medoids - {out} | {cand})
                sub = vals[:, trial_set]
                cost = float(sub[np.arange(20), np.argmin(sub, axis=1)].sum())
                assert res.cost <= cost + 1e-12


def test_k_medoids_medoid_self_assignment():
    rng = np.random.default_rng(42)
    M, _ = _blob_matrix(rng, [(0, 0), (3, 3)], per=5)
    res = k_medoids(M, 2)
    for mi, m in enumerate(res.medoids):
        assert res.assignment[m] == mi


def test_k_medoids_deterministic():
    rng = np.random.default_rng(43)
    M, _ = _blob_matrix(rng, [(0, 0), (4, 1), (1, 4)], per=7)
    a = k_medoids(M, 3, seed=0)
    b = k_medoids(M, 3, seed=99)
    assert a.medoids == b.medoids and a.cost == b.cost


def test_k_medoids_k_validation():
    M = _matrix(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        k_medoids(M, 0)
    with pytest.raises(ValueError):
        k_medoids(M, 4)


# --- Davies-Bouldin ----------------------------------------------------------------


def test_db_zero_for_point_clusters():
    # two clusters of identical items: zero spread, positive separation
    vals = np.array([[0, 0, 1, 1],
                     [0, 0, 1, 1],
                     [1, 1, 0, 0],
                     [1, 1, 0, 0]], dtype=float)
    res = k_medoids(_matrix(vals), 2)
    assert davies_bouldin(_matrix(vals), res) == 0.0


def test_db_closed_form_two_clusters():
    # spreads 0.25 each (one member at distance 0.5), medoid distance 1
    vals = np.zeros((4, 4))
    vals[0, 1] = vals[1, 0] = 0.5
    vals[2, 3] = vals[3, 2] = 0.5
    vals[:2, 2:] = 1.0
    vals[2:, :2] = 1.0
    res = ClusteringResult(medoids=(0, 2), assignment=np.array([0, 0, 1, 1]),
                           cost=1.0)
    assert davies_bouldin(_matrix(vals), res) == pytest.approx(0.5)


def test_db_increases_when_merging_separated_clusters():
    rng = np.random.default_rng(44)
    M, _ = _blob_matrix(rng, [(0, 0), (10, 0), (0, 10)], per=8)
    fine = k_medoids(M, 3)
    coarse = k_medoids(M, 2)  # forces two tight blobs into one cluster
    assert davies_bouldin(M, coarse) > davies_bouldin(M, fine)


def test_db_rejects_coincident_medoids():
    vals = np.zeros((4, 4))
    res = ClusteringResult(medoids=(0, 1), assignment=np.array([0, 1, 0, 1]),
                           cost=0.0)
    with pytest.raises(ValueError):
        davies_bouldin(_matrix(vals), res)


# --- tau selection -----------------------------------------------------------------


def test_select_tau_minimizes_db_with_smaller_tie():
    rng = np.random.default_rng(45)
    tight, _ = _blob_matrix(rng, [(0, 0), (9, 0)], per=5, spread=0.01)
    loose, _ = _blob_matrix(rng, [(0, 0), (9, 0)], per=5, spread=1.5)
    matrices = {0.1: loose, 0.5: tight, 0.9: tight}
    tau, rows = select_tau([0.9, 0.5, 0.1], lambda t: matrices[t], k=2)
    assert tau == 0.5  # tied with 0.9; the smaller tau wins
    assert [r["tau"] for r in rows] == [0.1, 0.5, 0.9]
    assert rows[1]["db"] == rows[2]["db"] < rows[0]["db"]


def test_select_tau_rejects_empty_grid():
    with pytest.raises(ValueError):
        select_tau([], lambda t: None, k=2)


# --- clustering accuracy -------------------------------------------------------------


def test_accuracy_perfect_and_permuted():
    labels = ["a", "a", "b", "b", "c", "c"]
    res = ClusteringResult(medoids=(0, 2, 4),
                           assignment=np.array([2, 2, 0, 0, 1, 1]), cost=0.0)
    assert clustering_accuracy(res, labels) == 1.0


def test_accuracy_counts_best_bijection():
    labels = ["a", "a", "a", "b"]
    res = ClusteringResult(medoids=(0, 3),
                           assignment=np.array([0, 0, 1, 1]), cost=0.0)
    # best map: cluster0 -> a (2 right), cluster1 -> b (1 right)
    assert clustering_accuracy(res, labels) == pytest.approx(0.75)


def test_accuracy_more_clusters_than_labels():
    labels = ["a", "a", "b", "b"]
    res = ClusteringResult(medoids=(0, 1, 2),
                           assignment=np.array([0, 1, 2, 2]), cost=0.0)
    # each cluster matches at most one label: best is 1 + 2 correct
    assert clustering_accuracy(res, labels) == pytest.approx(0.75)


# --- retrieval statistics ------------------------------------------------------------


def _perfect_matrix(classes=10, per=10):
    n = classes * per
    labels = [str(c) for c in range(classes) for _ in range(per)]
    vals = np.ones((n, n))
    for c in range(classes):
        vals[c * per:(c + 1) * per, c * per:(c + 1) * per] = 0.0
    np.fill_diagonal(vals, 0.0)
    return _matrix(vals, labels), labels


def test_retrieval_perfect_matrix():
    M, labels = _perfect_matrix()
    stats = retrieval_stats(M, labels)
    assert stats["NN"] == 1.0
    assert stats["FT"] == 1.0
    assert stats["ST"] == 1.0
    assert stats["DCG"] == 1.0
    assert stats["E"] == pytest.approx(18 / 41, abs=1e-12)


def test_retrieval_adversarial_matrix():
    # within-class distance larger than cross-class: nearest item is always wrong
    M, labels = _perfect_matrix(classes=2, per=5)
    flipped = _matrix(1.0 - M.values, labels)
    vals = flipped.values.copy()
    np.fill_diagonal(vals, 0.0)
    stats = retrieval_stats(_matrix(vals, labels), labels)
    assert stats["NN"] == 0.0
    assert stats["FT"] == 0.0


def test_retrieval_ft_at_most_st():
    rng = np.random.default_rng(46)
    for _ in range(5):
        vals = rng.uniform(0, 1, (30, 30))
        vals = 0.5 * (vals + vals.T)
        np.fill_diagonal(vals, 0.0)
        labels = [str(i % 3) for i in range(30)]
        stats = retrieval_stats(_matrix(vals, labels), labels)
        assert stats["FT"] <= stats["ST"] + 1e-12
        for v in stats.values():
            assert 0.0 <= v <= 1.0


def test_retrieval_requires_labels():
    M, _ = _perfect_matrix(2, 3)
    unlabeled = _matrix(M.values)
    with pytest.raises(ValueError):
        retrieval_stats(unlabeled)


# --- k-NN classification --------------------------------------------------------------


def test_knn_nearest_label():
    block = np.array([[0.2, 0.9, 0.5],
                      [0.9, 0.1, 0.5]])
    assert knn_classify(block, ["a", "b", "c"], k=1) == ["a", "b"]


def test_knn_tie_broken_by_lower_index():
    block = np.array([[0.5, 0.5]])
    assert knn_classify(block, ["b", "a"], k=1) == ["b"]


def test_knn_majority_with_k3():
    block = np.array([[0.1, 0.2, 0.3, 0.9]])
    assert knn_classify(block, ["a", "b", "a", "b"], k=3) == ["a"]
