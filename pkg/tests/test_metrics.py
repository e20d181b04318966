import itertools

import numpy as np
import pytest

from persistblock.diagram import Diagram, pad_to_cardinality
from persistblock.metrics import (DissimilarityMatrix, pairwise_matrix,
                                  vector_distance, wasserstein)


def brute_force_wasserstein(d1, d2, p):
    """Exhaustive minimum over all bijections of the padded point sets."""
    p1, p2 = pad_to_cardinality(d1, d2)
    n = p1.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = 0.0
        for i, j in enumerate(perm):
            a, b = p1[i], p2[j]
            if i >= len(d1) and j >= len(d2):
                continue  # projection matched to projection costs nothing
            total += float(np.max(np.abs(a - b))) ** p
        best = min(best, total)
    return best ** (1.0 / p) if p >= 1 else best


def test_worked_example_p_half_and_two():
    d1 = Diagram([[1.0, 1.0], [20.0, 5.0]])
    d2 = Diagram([[2.0, 2.0], [20.0, 1.0]])
    assert wasserstein(d1, d2, 0.5).cost == pytest.approx(3.0, abs=1e-12)
    assert wasserstein(d1, d2, 2.0).cost == pytest.approx(np.sqrt(17.0), abs=1e-12)


def test_matches_exhaustive_bijection_oracle():
    rng = np.random.default_rng(20)
    for _ in range(120):
        n1, n2 = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        if n1 + n2 == 0:
            continue
        d1 = Diagram(np.column_stack([rng.uniform(0, 2, n1), rng.uniform(0, 1, n1)]))
        d2 = Diagram(np.column_stack([rng.uniform(0, 2, n2), rng.uniform(0, 1, n2)]))
        for p in (0.5, 1.0, 2.0):
            assert wasserstein(d1, d2, p).cost == pytest.approx(
                brute_force_wasserstein(d1, d2, p), abs=1e-12)


def test_no_outer_root_below_one():
    # single point against empty: matched to its axis projection at sup cost 4
    d = Diagram([[0.0, 4.0]])
    empty = Diagram(np.empty((0, 2)))
    assert wasserstein(d, empty, 0.5).cost == pytest.approx(2.0)  # 4^0.5, no root
    assert wasserstein(d, empty, 2.0).cost == pytest.approx(4.0)  # (4^2)^(1/2)


def test_assignment_realizes_cost():
    d1 = Diagram([[1.0, 1.0], [20.0, 5.0]])
    d2 = Diagram([[2.0, 2.0], [20.0, 1.0]])
    res = wasserstein(d1, d2, 2.0)
    p1, p2 = pad_to_cardinality(d1, d2)
    total = 0.0
    for i, j in res.assignment:
        if i >= len(d1) and j >= len(d2):
            continue
        total += float(np.max(np.abs(p1[i] - p2[j]))) ** 2
    assert np.sqrt(total) == pytest.approx(res.cost, abs=1e-12)
    assert sorted(i for i, _ in res.assignment) == list(range(p1.shape[0]))
    assert sorted(j for _, j in res.assignment) == list(range(p2.shape[0]))


def test_metric_properties():
    rng = np.random.default_rng(21)
    def rand():
        n = int(rng.integers(1, 4))
        return Diagram(np.column_stack([rng.uniform(0, 2, n), rng.uniform(0, 1, n)]))
    for _ in range(30):
        a, b, c = rand(), rand(), rand()
        for p in (0.5, 2.0):
            assert wasserstein(a, a, p).cost == pytest.approx(0.0, abs=1e-12)
            dab = wasserstein(a, b, p).cost
            assert dab == pytest.approx(wasserstein(b, a, p).cost, abs=1e-12)
            assert dab <= (wasserstein(a, c, p).cost
                           + wasserstein(c, b, p).cost + 1e-9)


def test_rejects_nonpositive_p():
    d = Diagram([[1.0, 1.0]])
    with pytest.raises(ValueError):
        wasserstein(d, d, 0.0)


def test_both_empty_distance_zero():
    empty = Diagram(np.empty((0, 2)))
    assert wasserstein(empty, empty, 2.0).cost == 0.0


# --- vector distances -------------------------------------------------------------


def test_vector_distance_norms():
    a, b = np.array([1.0, 2.0, 3.0]), np.array([2.0, 0.0, 3.0])
    assert vector_distance(a, b, "L1") == pytest.approx(3.0)
    assert vector_distance(a, b, "L2") == pytest.approx(np.sqrt(5.0))
    assert vector_distance(a, b, "Linf") == pytest.approx(2.0)
    with pytest.raises(ValueError):
        vector_distance(a, b[:2])
    with pytest.raises(ValueError):
        vector_distance(a, b, "L3")


def test_pairwise_matrix_properties():
    rng = np.random.default_rng(22)
    feats = [rng.uniform(0, 1, 6) for _ in range(5)]
    for norm in ("L1", "L2", "Linf"):
        m = pairwise_matrix(feats, norm=norm)
        assert np.allclose(m.values, m.values.T)
        assert np.all(np.diag(m.values) == 0.0)
        assert m.values[1, 3] == pytest.approx(vector_distance(feats[1], feats[3], norm))


def test_pairwise_matrix_csv_round_trip(tmp_path):
    m = pairwise_matrix([np.array([0.1, 0.2]), np.array([1 / 3, 2 / 7])],
                        ids=("a", "b"))
    path = tmp_path / "m.csv"
    m.to_csv(path)
    back = DissimilarityMatrix.from_csv(path)
    assert back.ids == ("a", "b")
    assert np.array_equal(back.values, m.values)


def test_dissimilarity_matrix_validation():
    with pytest.raises(ValueError):
        DissimilarityMatrix(np.zeros((2, 3)), ("a", "b"))
    with pytest.raises(ValueError):
        DissimilarityMatrix(np.zeros((2, 2)), ("a",))
    with pytest.raises(ValueError):
        DissimilarityMatrix(np.zeros((2, 2)), ("a", "b"), labels=("x",))
