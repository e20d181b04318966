"""E-Divisive style multiple change-point detection on vector sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

__all__ = ["ChangePointResult", "energy_divergence", "e_divisive", "cpd_error"]


@dataclass(frozen=True)
class ChangePointResult:
    """Accepted change points (1-based first index of each new segment)."""

    change_points: tuple[int, ...]
    p_values: tuple[float, ...]
    permutations: int
    significance: float


def _as_matrix(seq) -> np.ndarray:
    X = np.asarray(seq, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("sequence must be a nonempty (t, d) array")
    return X


def energy_divergence(X, Y, alpha: float = 1.0) -> tuple[float, float]:
    """Energy divergence between two samples: returns (E_hat, Q_hat).

    E_hat = cross-term minus both within-terms of mean pairwise Euclidean
    distances raised to alpha; Q_hat scales by nm/(n+m).  Within-terms are 0
    for singleton segments.
    """
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    X, Y = _as_matrix(X), _as_matrix(Y)
    n, m = X.shape[0], Y.shape[0]
    cross = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=2) ** alpha
    e = 2.0 * cross.mean()
    if n > 1:
        e -= (pdist(X) ** alpha).sum() / (n * (n - 1) / 2)
    if m > 1:
        e -= (pdist(Y) ** alpha).sum() / (m * (m - 1) / 2)
    return float(e), float(n * m / (n + m) * e)


def _best_split(dist_a: np.ndarray, lo: int, hi: int, min_seg: int):
    """Max Q_hat over splits of seq[lo:hi]; returns (q, split) or (None, None).

    `split` is the absolute index of the first element of the right part.
    Prefix sums over the alpha-powered distance submatrix make each candidate
    O(length) and the whole scan O(length^2).
    """
    length = hi - lo
    if length < 2 * min_seg:
        return None, None
    sub = dist_a[lo:hi, lo:hi]
    csum = np.cumsum(np.cumsum(sub, axis=0), axis=1)

    def box(r0, r1, c0, c1):  # sum of sub[r0:r1, c0:c1]
        total = csum[r1 - 1, c1 - 1]
        if r0 > 0:
            total -= csum[r0 - 1, c1 - 1]
        if c0 > 0:
            total -= csum[r1 - 1, c0 - 1]
        if r0 > 0 and c0 > 0:
            total += csum[r0 - 1, c0 - 1]
        return total

    best_q, best_split = -np.inf, None
    for s in range(min_seg, length - min_seg + 1):
        n, m = s, length - s
        cross = box(0, s, s, length)
        within_x = box(0, s, 0, s) / 2.0
        within_y = box(s, length, s, length) / 2.0
        e = 2.0 * cross / (n * m)
        if n > 1:
            e -= within_x / (n * (n - 1) / 2)
        if m > 1:
            e -= within_y / (m * (m - 1) / 2)
        q = n * m / (n + m) * e
        if q > best_q:
            best_q, best_split = q, lo + s
    return best_q, best_split


def _segment_max_q(dist_a: np.ndarray, lo: int, hi: int, min_seg: int) -> float:
    q, _ = _best_split(dist_a, lo, hi, min_seg)
    return -np.inf if q is None else q


def e_divisive(seq, min_seg: int = 5, R: int = 199, sig: float = 0.05,
               alpha: float = 1.0, seed: int = 0) -> ChangePointResult:
    """Hierarchical bisection with a within-segment permutation test.

    At each level the (segment, split) pair with the largest Q_hat is the
    candidate; it is accepted iff the permutation p-value
    (1 + #{permuted max-Q >= observed}) / (R + 1) is at or below `sig`, where
    permutations shuffle only the candidate segment.  Recursion stops at the
    first rejection.  Deterministic given the seed.
    """
    X = _as_matrix(seq)
    t = X.shape[0]
    if t < 2 * min_seg:
        raise ValueError(f"sequence of length {t} is too short for min_seg {min_seg}")
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    dist_a = squareform(pdist(X)) ** alpha
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed),))))
    boundaries = [0, t]
    change_points: list[int] = []
    p_values: list[float] = []
    while True:
        best = (-np.inf, None, None)  # (q, split, segment index)
        for si in range(len(boundaries) - 1):
            lo, hi = boundaries[si], boundaries[si + 1]
            q, split = _best_split(dist_a, lo, hi, min_seg)
            if q is not None and q > best[0]:
                best = (q, split, si)
        q_obs, split, si = best
        if split is None:
            break
        lo, hi = boundaries[si], boundaries[si + 1]
        exceed = 0
        idx = np.arange(lo, hi)
        for _ in range(R):
            perm = rng.permutation(idx)
            sub = dist_a[np.ix_(perm, perm)]
            q_perm = _segment_max_q(sub, 0, hi - lo, min_seg)
            if q_perm >= q_obs:
                exceed += 1
        p = (1 + exceed) / (R + 1)
        if p > sig:
            break
        change_points.append(split + 1)  # 1-based first index of the new segment
        p_values.append(p)
        boundaries = sorted(set(boundaries) | {split})
    order = np.argsort(change_points)
    return ChangePointResult(tuple(int(change_points[i]) for i in order),
                             tuple(float(p_values[i]) for i in order), R, sig)


def cpd_error(estimated, truth, gap: float = 50.0):
    """Absolute error per true change point; undetected points cost `gap`.

    Greedy matching by distance: the globally closest (truth, estimate) pair
    is consumed first, each estimate used at most once.
    """
    truth = [int(x) for x in truth]
    if not truth:
        raise ValueError("truth must be nonempty")
    estimates = [int(x) for x in estimated]
    errors = {i: float(gap) for i in range(len(truth))}
    pairs = sorted(
        (abs(t - e), ti, ei)
        for ti, t in enumerate(truth) for ei, e in enumerate(estimates))
    used_t, used_e = set(), set()
    for d, ti, ei in pairs:
        if ti in used_t or ei in used_e:
            continue
        errors[ti] = min(float(d), float(gap))
        used_t.add(ti)
        used_e.add(ei)
    return [errors[i] for i in range(len(truth))]
