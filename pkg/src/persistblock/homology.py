"""Small-scale Vietoris-Rips persistent homology (H0, H1) with a scale cap.

H0 comes from a Kruskal minimum spanning forest; H1 from GF(2) column
reduction of the edge/triangle boundary matrix, with columns stored as
Python-int bitsets (XOR is the column addition).  Simplices with any
pairwise distance above the cap never enter the filtration.  Equal
filtration values are broken by lexicographic vertex order, so results are
deterministic.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _HAVE_NUMBA = False

from .diagram import Diagram

__all__ = [
    "BudgetExceeded",
    "rips_h0",
    "rips_h1",
    "rips_diagrams",
    "naive_rips_diagrams",
]


class BudgetExceeded(RuntimeError):
    """Triangle count under the cap exceeds the configured budget."""


def _distances(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("point cloud must be a nonempty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return squareform(pdist(pts)) if pts.shape[0] > 1 else np.zeros((1, 1))


def _sorted_edges(dist: np.ndarray, cap: float):
    """Edges (i < j) under the cap, sorted by (length, i, j)."""
    n = dist.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    vals = dist[iu, ju]
    keep = vals <= cap
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    order = np.lexsort((ju, iu, vals))
    return iu[order], ju[order], vals[order]


def _essential_points(births, cap: float, essential: str):
    if essential == "drop":
        return np.empty((0, 2))
    pts = np.column_stack([births, np.full(len(births), cap) - births])
    return pts[pts[:, 1] > 0]


def rips_h0(points, cap: float = np.inf, essential: str = "drop") -> Diagram:
    """Dimension-0 diagram: births 0, deaths the spanning-forest edge lengths.

    Components still separate at the cap are essential classes; they are
    dropped by default or capped when essential="cap".
    """
    if essential not in ("drop", "cap"):
        raise ValueError(f"unknown essential policy {essential!r}")
    dist = _distances(points)
    n = dist.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    deaths = []
    for i, j, d in zip(*_sorted_edges(dist, cap)):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
            deaths.append(float(d))
    finite = np.column_stack([np.zeros(len(deaths)), deaths]) if deaths else np.empty((0, 2))
    n_components = n - len(deaths)
    if essential == "cap" and np.isfinite(cap):
        ess = _essential_points(np.zeros(n_components), cap, essential)
        finite = np.vstack([finite, ess])
    pts = finite[finite[:, 1] > 0]
    return Diagram(pts, dim=0)


def _triangles(dist: np.ndarray, cap: float, budget: int):
    """Triangles (i < j < k) with all pairwise distances <= cap, plus values."""
    n = dist.shape[0]
    adj = dist <= cap
    np.fill_diagonal(adj, False)
    tri_i, tri_j, tri_k, tri_v = [], [], [], []
    count = 0
    iu, ju = np.where(np.triu(adj, k=1))
    for i, j in zip(iu, ju):
        ks = np.nonzero(adj[i] & adj[j])[0]
        ks = ks[ks > j]
        if ks.size == 0:
            continue
        count += ks.size
        if count > budget:
            raise BudgetExceeded(
                f"more than {budget} triangles under cap {cap}; reduce the cap or raise the budget")
        tri_i.append(np.full(ks.size, i))
        tri_j.append(np.full(ks.size, j))
        tri_k.append(ks)
        tri_v.append(np.maximum(dist[i, j], np.maximum(dist[i, ks], dist[j, ks])))
    if not tri_i:
        return (np.empty(0, int),) * 3 + (np.empty(0),)
    return (np.concatenate(tri_i), np.concatenate(tri_j),
            np.concatenate(tri_k), np.concatenate(tri_v))


def _reduce_pairs_py(r_ij, r_ik, r_jk):
    """Column reduction with Python-int bitsets; returns (edge row, column) pairs."""
    pivot: dict[int, int] = {}
    pairs = []
    one = 1
    for idx in range(len(r_ij)):
        col = (one << int(r_ij[idx])) ^ (one << int(r_ik[idx])) ^ (one << int(r_jk[idx]))
        while col:
            low = col.bit_length() - 1
            other = pivot.get(low)
            if other is None:
                pivot[low] = col
                pairs.append((low, idx))
                break
            col ^= other
    return pairs


if _HAVE_NUMBA:

    @njit(cache=True)
    def _reduce_kernel(r_ij, r_ik, r_jk, n_rows):  # pragma: no cover - jitted
        words = (n_rows + 63) >> 6
        reduced = np.zeros((n_rows, words), dtype=np.uint64)
        filled = np.zeros(n_rows, dtype=np.uint8)
        out_row = np.empty(r_ij.shape[0], dtype=np.int64)
        out_col = np.empty(r_ij.shape[0], dtype=np.int64)
        count = 0
        col = np.zeros(words, dtype=np.uint64)
        one = np.uint64(1)
        for t in range(r_ij.shape[0]):
            a, b, c = r_ij[t], r_ik[t], r_jk[t]
            low = max(a, max(b, c))
            # no stored column reaches above its own pivot row, so every
            # word operation can stop at the current low's word
            for w in range((low >> 6) + 1):
                col[w] = np.uint64(0)
            col[a >> 6] ^= one << np.uint64(a & 63)
            col[b >> 6] ^= one << np.uint64(b & 63)
            col[c >> 6] ^= one << np.uint64(c & 63)
            while True:
                top = (low >> 6) + 1
                if filled[low] == 0:
                    for w in range(top):
                        reduced[low, w] = col[w]
                    filled[low] = 1
                    out_row[count] = low
                    out_col[count] = t
                    count += 1
                    break
                for w in range(top):
                    col[w] ^= reduced[low, w]
                # every remaining bit sits strictly below the old low
                new_low = -1
                for w in range(low >> 6, -1, -1):
                    if col[w] != np.uint64(0):
                        v = col[w]
                        bit = 63
                        while (v >> np.uint64(bit)) & one == np.uint64(0):
                            bit -= 1
                        new_low = (w << 6) + bit
                        break
                if new_low < 0:
                    break
                low = new_low
        return out_row[:count], out_col[:count]


def _reduce_pairs(r_ij, r_ik, r_jk, n_rows: int):
    """Dispatch the boundary reduction to the jitted kernel when available."""
    if _HAVE_NUMBA and len(r_ij):
        rows, cols = _reduce_kernel(np.ascontiguousarray(r_ij),
                                    np.ascontiguousarray(r_ik),
                                    np.ascontiguousarray(r_jk), n_rows)
        return list(zip(rows.tolist(), cols.tolist()))
    return _reduce_pairs_py(r_ij, r_ik, r_jk)


def rips_h1(points, cap: float, essential: str = "drop",
            triangle_budget: int = 3_000_000) -> Diagram:
    """Dimension-1 diagram from edge/triangle boundary reduction over GF(2).

    Emits (birth, persistence) pairs with positive persistence.  Loops never
    filled under the cap are essential: dropped by default, or assigned
    death = cap when essential="cap".
    """
    if essential not in ("drop", "cap"):
        raise ValueError(f"unknown essential policy {essential!r}")
    dist = _distances(points)
    n = dist.shape[0]
    ei, ej, ev = _sorted_edges(dist, cap)
    n_edges = len(ev)
    if n_edges == 0:
        return Diagram(np.empty((0, 2)), dim=1)
    edge_row = np.full((n, n), -1, dtype=np.int64)
    edge_row[ei, ej] = np.arange(n_edges)

    ti, tj, tk, tv = _triangles(dist, cap, triangle_budget)
    order = np.lexsort((tk, tj, ti, tv))
    ti, tj, tk, tv = ti[order], tj[order], tk[order], tv[order]

    r_ij = edge_row[ti, tj]
    r_ik = edge_row[ti, tk]
    r_jk = edge_row[tj, tk]

    pairs = [(row, float(tv[idx]))
             for row, idx in _reduce_pairs(r_ij, r_ik, r_jk, n_edges)]
    births = np.array([ev[row] for row, _ in pairs])
    deaths = np.array([death for _, death in pairs])
    pts = np.column_stack([births, deaths - births]) if len(pairs) else np.empty((0, 2))
    pts = pts[pts[:, 1] > 0] if len(pts) else pts

    if essential == "cap" and np.isfinite(cap):
        # cycle-creating edges never killed by a triangle are essential loops
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        paired_rows = {row for row, _ in pairs}
        ess_births = []
        for row, (i, j) in enumerate(zip(ei, ej)):
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[ri] = rj
            elif row not in paired_rows:
                ess_births.append(float(ev[row]))
        if ess_births:
            ess = _essential_points(np.array(ess_births), cap, essential)
            pts = np.vstack([pts, ess]) if len(pts) else ess
    return Diagram(pts, dim=1)


def rips_diagrams(points, cap: float, essential: str = "drop",
                  triangle_budget: int = 3_000_000) -> dict[int, Diagram]:
    """Both H0 and H1 diagrams of one cloud."""
    return {
        0: rips_h0(points, cap, essential),
        1: rips_h1(points, cap, essential, triangle_budget),
    }


def naive_rips_diagrams(points, cap: float, essential: str = "drop") -> dict[int, Diagram]:
    """Reference path: reduce the full boundary matrix of all simplices.

    Quadratic bookkeeping, intended for small clouds; the optimized H0/H1
    routines must match this output exactly.
    """
    dist = _distances(points)
    n = dist.shape[0]
    ei, ej, ev = _sorted_edges(dist, cap)
    ti, tj, tk, tv = _triangles(dist, cap, budget=10_000_000)

    simplices = [((i,), 0.0) for i in range(n)]
    simplices += [((int(a), int(b)), float(v)) for a, b, v in zip(ei, ej, ev)]
    simplices += [((int(a), int(b), int(c)), float(v)) for a, b, c, v in zip(ti, tj, tk, tv)]
    simplices.sort(key=lambda s: (s[1], len(s[0]), s[0]))
    index = {verts: pos for pos, (verts, _) in enumerate(simplices)}

    pivot: dict[int, int] = {}
    pairs = []  # (row position, col position)
    unpaired = set(range(len(simplices)))
    for pos, (verts, _) in enumerate(simplices):
        col = 0
        if len(verts) > 1:
            for drop in range(len(verts)):
                face = verts[:drop] + verts[drop + 1:]
                col ^= 1 << index[face]
        while col:
            low = col.bit_length() - 1
            other = pivot.get(low)
            if other is None:
                pivot[low] = col
                pairs.append((low, pos))
                unpaired.discard(low)
                unpaired.discard(pos)
                break
            col ^= other

    per_dim: dict[int, list[list[float]]] = {0: [], 1: []}
    for row, colpos in pairs:
        verts, birth = simplices[row]
        death = simplices[colpos][1]
        dim = len(verts) - 1
        if dim in per_dim and death > birth:
            per_dim[dim].append([birth, death - birth])
    if essential == "cap" and np.isfinite(cap):
        for pos in sorted(unpaired):
            verts, birth = simplices[pos]
            dim = len(verts) - 1
            if dim in per_dim and cap > birth:
                per_dim[dim].append([birth, cap - birth])
    return {d: Diagram(per_dim[d], dim=d) for d in (0, 1)}
