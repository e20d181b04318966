"""Persistence diagram data model and file ingestion.

Internal coordinates are always (birth, persistence).  Birth-death exists
only at the I/O boundary, where death is converted via p = d - b.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Diagram",
    "Domain",
    "DiagramError",
    "bounding_domain",
    "pad_to_cardinality",
    "parse_diagrams",
    "parse_diagrams_json",
    "write_diagrams",
    "write_diagrams_json",
]


class DiagramError(ValueError):
    """Raised on malformed diagram input or invalid coordinates."""


def _as_point_array(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        pts = pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DiagramError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DiagramError("diagram points must be finite")
    if np.any(pts < 0):
        raise DiagramError("birth and persistence must be nonnegative")
    return pts


@dataclass(frozen=True)
class Diagram:
    """A finite multiset of (birth, persistence) points of one homological dimension.

    Duplicate points are allowed; two diagrams are equal iff they are equal
    as multisets in the same dimension.  Instances are immutable and safe to
    share across threads.
    """

    points: np.ndarray
    dim: int = 0

    def __post_init__(self):
        pts = _as_point_array(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        if self.dim != other.dim or len(self) != len(other):
            return False
        return np.array_equal(_canonical(self.points), _canonical(other.points))

    def __hash__(self):
        return hash((self.dim, _canonical(self.points).tobytes()))

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def persistences(self) -> np.ndarray:
        return self.points[:, 1]


def _canonical(pts: np.ndarray) -> np.ndarray:
    if pts.shape[0] == 0:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order]


@dataclass(frozen=True)
class Domain:
    """Compact rectangle [0, birth_max] x [0, pers_max] holding a dataset's diagrams."""

    birth_max: float
    pers_max: float

    def __post_init__(self):
        if not (self.birth_max > 0 and self.pers_max > 0):
            raise DiagramError("domain bounds must be positive")

    @property
    def enlarged(self) -> tuple[float, float, float, float]:
        """The enlarged box that contains every block square: (x0, x1, y0, y1)."""
        b, p = self.birth_max, self.pers_max
        return (-p, b + p, 0.0, 2.0 * p)

    def contains(self, diagram: Diagram) -> bool:
        pts = diagram.points
        return bool(np.all(pts[:, 0] <= self.birth_max) and np.all(pts[:, 1] <= self.pers_max))


def bounding_domain(diagrams, margin: float = 0.0) -> Domain:
    """Componentwise max over all diagram points, inflated by `margin`.

    Raises DiagramError if every diagram is empty or all coordinates are zero.
    """
    if margin < 0:
        raise DiagramError("margin must be nonnegative")
    birth_max = 0.0
    pers_max = 0.0
    any_points = False
    for d in diagrams:
        if len(d) == 0:
            continue
        any_points = True
        birth_max = max(birth_max, float(d.births.max()))
        pers_max = max(pers_max, float(d.persistences.max()))
    if not any_points:
        raise DiagramError("cannot bound an all-empty diagram set")
    if birth_max == 0.0 and pers_max == 0.0:
        raise DiagramError("all diagram points are at the origin")
    # Degenerate axes (e.g. H0 diagrams, where every birth is 0) borrow the
    # other extent so the domain rectangle stays nondegenerate.
    if birth_max == 0.0:
        birth_max = pers_max
    if pers_max == 0.0:
        pers_max = birth_max
    scale = 1.0 + margin
    return Domain(birth_max * scale, pers_max * scale)


def pad_to_cardinality(d1: Diagram, d2: Diagram) -> tuple[np.ndarray, np.ndarray]:
    """Augment both diagrams with axis points so they have equal cardinality.

    For each point (a, b) of the opposite diagram the added candidate is its
    axis projection (a, 0), the sup-norm-nearest axis point.  Returns the two
    padded point arrays (original points first, pads after, row order kept).
    """
    p1, p2 = d1.points, d2.points
    pad1 = np.column_stack([p2[:, 0], np.zeros(len(d2))]) if len(d2) else np.empty((0, 2))
    pad2 = np.column_stack([p1[:, 0], np.zeros(len(d1))]) if len(d1) else np.empty((0, 2))
    return np.vstack([p1, pad1]), np.vstack([p2, pad2])


# --- file formats -----------------------------------------------------------
#
# CSV: header `dim,birth,death` or `dim,birth,persistence`, UTF-8, `.` decimal
# separator, one point per row.  JSON: array of {dim, points: [[b, p], ...]}.

_CSV_HEADERS = {
    ("dim", "birth", "death"): "birth-death",
    ("dim", "birth", "persistence"): "birth-persistence",
}


def _fmt(x: float) -> str:
    # repr round-trips doubles exactly (17 significant digits when needed)
    return repr(float(x))


def parse_diagrams(path, fmt: str | None = None, essential: str = "drop",
                   cap: float | None = None) -> dict[int, Diagram]:
    """Parse a diagram CSV into one Diagram per homological dimension.

    `fmt` is "birth-death" or "birth-persistence"; when None it is taken from
    the header.  Essential classes (death = inf) are dropped by default, or
    have their death replaced by `cap` when essential="cap".
    """
    if essential not in ("drop", "cap"):
        raise DiagramError(f"unknown essential policy {essential!r}")
    if essential == "cap" and cap is None:
        raise DiagramError("essential='cap' requires a cap value")
    per_dim: dict[int, list[list[float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    start = 0
    if rows:
        header = tuple(c.strip().lower() for c in rows[0])
        if header in _CSV_HEADERS:
            header_fmt = _CSV_HEADERS[header]
            if fmt is not None and fmt != header_fmt:
                raise DiagramError(f"requested format {fmt!r} but header says {header_fmt!r}")
            fmt = header_fmt
            start = 1
    if fmt is None:
        fmt = "birth-death"
    if fmt not in ("birth-death", "birth-persistence"):
        raise DiagramError(f"unknown format {fmt!r}")
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DiagramError(f"expected 3 fields at line {lineno}, got {len(row)}")
        try:
            dim = int(row[0])
            a = float(row[1])
            b = float(row[2])
        except ValueError as exc:
            raise DiagramError(f"non-numeric field at line {lineno}: {exc}") from None
        if fmt == "birth-death":
            if math.isinf(b):
                if essential == "drop":
                    continue
                b = cap
            pers = b - a
            if pers < 0:
                raise DiagramError(f"death before birth at line {lineno}")
        else:
            pers = b
            if pers < 0:
                raise DiagramError(f"negative persistence at line {lineno}")
        per_dim.setdefault(dim, []).append([a, pers])
    return {dim: Diagram(pts, dim=dim) for dim, pts in sorted(per_dim.items())}


def write_diagrams(path, diagrams: dict[int, Diagram]) -> None:
    """Write diagrams as birth-persistence CSV (exact decimal round-trip)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dim", "birth", "persistence"])
        for dim in sorted(diagrams):
            for a, p in diagrams[dim].points:
                writer.writerow([dim, _fmt(a), _fmt(p)])


def parse_diagrams_json(path) -> dict[int, Diagram]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    out = {}
    for entry in data:
        dim = int(entry["dim"])
        if dim in out:
            raise DiagramError(f"duplicate dimension {dim} in JSON input")
        out[dim] = Diagram(entry["points"], dim=dim)
    return out


def write_diagrams_json(path, diagrams: dict[int, Diagram]) -> None:
    data = [
        {"dim": dim, "points": [[float(a), float(p)] for a, p in diagrams[dim].points]}
        for dim in sorted(diagrams)
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
