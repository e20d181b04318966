"""Block squares, length/weight functions, and exact weighted-L2 distances.

Every diagram point (a, b) carries an axis-aligned square centered at (a, b)
with side given by the length function.  A block is the weighted sum of the
squares' indicator functions; distances between blocks are integrated in
closed form, since on each cell of the rectangle arrangement induced by the
square edges the integrand is a constant squared times an analytic weight
integral.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .diagram import Diagram, Domain

__all__ = [
    "LengthFunction",
    "WeightFunction",
    "BlockSquare",
    "BlockConfig",
    "Overlap",
    "square_overlap",
    "eval_surface",
    "block_l2_distance",
    "default_config",
    "stability_config",
]


@dataclass(frozen=True)
class LengthFunction:
    """Side length 2*tau*y*(y/y_max)^n * (1 - y/y_max)^m for y in [0, y_max]."""

    tau: float
    n: int = 0
    m: int = 0
    pers_max: float = 1.0

    def __post_init__(self):
        if not (0 < self.tau <= 1):
            raise ValueError("tau must lie in (0, 1]")
        if self.n < 0 or self.m < 0:
            raise ValueError("n and m must be nonnegative integers")
        if self.pers_max <= 0:
            raise ValueError("pers_max must be positive")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0) or np.any(y > self.pers_max):
            raise ValueError("y outside [0, pers_max]")
        t = y / self.pers_max
        out = 2.0 * self.tau * y * t**self.n * (1.0 - t) ** self.m
        return float(out) if out.ndim == 0 else out

    def sup(self) -> float:
        """Supremum of the side length over [0, pers_max] (exact for n = m = 0)."""
        if self.n == 0 and self.m == 0:
            return 2.0 * self.tau * self.pers_max
        ys = np.linspace(0.0, self.pers_max, 4097)
        return float(np.max(self(ys)))

    def lipschitz(self) -> float:
        """Sup-norm Lipschitz constant (exact 2*tau for n = m = 0)."""
        if self.n == 0 and self.m == 0:
            return 2.0 * self.tau
        ys = np.linspace(0.0, self.pers_max, 4097)
        vals = self(ys)
        # bound |d lambda / dy| numerically; safety factor covers sampling error
        return float(np.max(np.abs(np.diff(vals)) / np.diff(ys)) * 1.05)


@dataclass(frozen=True)
class WeightFunction:
    """Weight w(x, y): linear-sum x+y, shifted-linear x+y+c, or constant c."""

    kind: str = "linear"
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "shifted", "constant"):
            raise ValueError(f"unknown weight kind {self.kind!r}")

    def __call__(self, x, y):
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(self.c, dtype=float),
                                   np.broadcast_shapes(np.shape(x), np.shape(y))).copy()
        base = np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
        if self.kind == "shifted":
            base = base + self.c
        return base

    def rect_integral(self, x0, x1, y0, y1):
        """Exact integral of w over [x0, x1] x [y0, y1] (centroid identity)."""
        area = (x1 - x0) * (y1 - y0)
        if self.kind == "constant":
            return self.c * area
        mid = 0.5 * (x0 + x1) + 0.5 * (y0 + y1)
        if self.kind == "shifted":
            mid = mid + self.c
        return area * mid

    def sup_on(self, rect) -> float:
        """Maximum of w over the rectangle (x0, x1, y0, y1)."""
        x0, x1, y0, y1 = rect
        if self.kind == "constant":
            return self.c
        top = x1 + y1
        if self.kind == "shifted":
            top += self.c
        return top

    def min_on(self, rect) -> float:
        x0, x1, y0, y1 = rect
        if self.kind == "constant":
            return self.c
        bottom = x0 + y0
        if self.kind == "shifted":
            bottom += self.c
        return bottom


@dataclass(frozen=True)
class BlockSquare:
    """Closed square centered at (x, y) with the given side length."""

    x: float
    y: float
    side: float

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        h = 0.5 * self.side
        return (self.x - h, self.x + h, self.y - h, self.y + h)


@dataclass(frozen=True)
class Overlap:
    area: float
    rect: tuple[float, float, float, float]  # (x0, x1, y0, y1)


def square_overlap(s1: BlockSquare, s2: BlockSquare) -> Overlap | None:
    """Intersection of two squares; None when the interiors are disjoint.

    The overlap is positive exactly when the sup-norm distance between the
    centers is strictly below the mean of the side lengths; at equality the
    squares share at most a boundary segment and count as disjoint.
    """
    half_sum = 0.5 * (s1.side + s2.side)
    dx = abs(s1.x - s2.x)
    dy = abs(s1.y - s2.y)
    if max(dx, dy) >= half_sum:
        return None
    wx = half_sum - dx
    wy = half_sum - dy
    x0 = max(s1.x - 0.5 * s1.side, s2.x - 0.5 * s2.side)
    y0 = max(s1.y - 0.5 * s1.side, s2.y - 0.5 * s2.side)
    return Overlap(area=wx * wy, rect=(x0, x0 + wx, y0, y0 + wy))


@dataclass(frozen=True)
class BlockConfig:
    """Everything that determines a block: side lengths, weight, point values, region."""

    length: LengthFunction
    weight: WeightFunction
    domain: Domain
    point_value: str = "one"  # "one" or "weight-at-center"
    region: str = "omega"  # "omega" or "omega-prime"

    def __post_init__(self):
        if self.point_value not in ("one", "weight-at-center"):
            raise ValueError(f"unknown point_value {self.point_value!r}")
        if self.region not in ("omega", "omega-prime"):
            raise ValueError(f"unknown region {self.region!r}")

    @property
    def region_rect(self) -> tuple[float, float, float, float]:
        if self.region == "omega":
            return (0.0, self.domain.birth_max, 0.0, self.domain.pers_max)
        return self.domain.enlarged

    def point_values(self, points: np.ndarray) -> np.ndarray:
        if self.point_value == "one":
            return np.ones(points.shape[0])
        return points[:, 0] + points[:, 1]

    def f_sup(self) -> float:
        if self.point_value == "one":
            return 1.0
        return self.domain.birth_max + self.domain.pers_max

    def f_lipschitz(self) -> float:
        # |(x+y) - (a+b)| <= 2 ||(x,y)-(a,b)||_inf
        return 0.0 if self.point_value == "one" else 2.0

    def squares(self, diagram: Diagram) -> list[BlockSquare]:
        sides = self.length(diagram.persistences) if len(diagram) else np.empty(0)
        return [
            BlockSquare(float(x), float(y), float(s))
            for (x, y), s in zip(diagram.points, np.atleast_1d(sides))
        ]

    def to_json(self) -> str:
        return json.dumps({
            "tau": self.length.tau,
            "n": self.length.n,
            "m": self.length.m,
            "pers_max": self.length.pers_max,
            "weight": {"kind": self.weight.kind, "c": self.weight.c},
            "point_value": self.point_value,
            "region": self.region,
            "domain": {"birth_max": self.domain.birth_max, "pers_max": self.domain.pers_max},
        }, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "BlockConfig":
        d = json.loads(text)
        return BlockConfig(
            length=LengthFunction(d["tau"], d["n"], d["m"], d["pers_max"]),
            weight=WeightFunction(d["weight"]["kind"], d["weight"]["c"]),
            domain=Domain(d["domain"]["birth_max"], d["domain"]["pers_max"]),
            point_value=d["point_value"],
            region=d["region"],
        )


def default_config(domain: Domain, tau: float = 0.5) -> BlockConfig:
    """Production config: f = 1, w(x, y) = x + y, side 2*tau*y, region Omega."""
    return BlockConfig(
        length=LengthFunction(tau=tau, pers_max=domain.pers_max),
        weight=WeightFunction("linear"),
        domain=domain,
    )


def stability_config(domain: Domain, tau: float = 0.5) -> BlockConfig:
    """Config satisfying the stability hypotheses: w = x + y + pers_max >= 0 on
    the enlarged box, tau strictly below 1 so the side stays under 2y."""
    if not tau < 1.0:
        raise ValueError("stability configs require tau < 1")
    return BlockConfig(
        length=LengthFunction(tau=tau, pers_max=domain.pers_max),
        weight=WeightFunction("shifted", c=domain.pers_max),
        domain=domain,
        region="omega-prime",
    )


def eval_surface(cfg: BlockConfig, diagram: Diagram, q) -> float:
    """Block value at a point: sum of f(a, b) over closed squares containing q."""
    qx, qy = float(q[0]), float(q[1])
    if not (np.isfinite(qx) and np.isfinite(qy)):
        raise ValueError("query point must be finite")
    if len(diagram) == 0:
        return 0.0
    pts = diagram.points
    half = 0.5 * self_sides(cfg, diagram)
    inside = (np.abs(qx - pts[:, 0]) <= half) & (np.abs(qy - pts[:, 1]) <= half)
    return float(np.sum(cfg.point_values(pts)[inside]))


def self_sides(cfg: BlockConfig, diagram: Diagram) -> np.ndarray:
    return np.atleast_1d(cfg.length(diagram.persistences)) if len(diagram) else np.empty(0)


def _surface_coeffs(cfg: BlockConfig, d1: Diagram, d2: Diagram):
    """Stack both diagrams' squares with signed point values (+ for d1, - for d2)."""
    pts = np.vstack([d1.points, d2.points]) if len(d1) + len(d2) else np.empty((0, 2))
    coeffs = np.concatenate([cfg.point_values(d1.points) if len(d1) else np.empty(0),
                             -cfg.point_values(d2.points) if len(d2) else np.empty(0)])
    sides = np.concatenate([self_sides(cfg, d1), self_sides(cfg, d2)])
    return pts, coeffs, sides


def block_l2_distance(cfg: BlockConfig, d1: Diagram, d2: Diagram,
                      region: str | None = None) -> float:
    """Exact weighted-L2 distance between the two blocks over the integration region.

    All square edge abscissas/ordinates (clipped to the region) induce a
    rectangular arrangement; the difference surface is constant on each
    arrangement cell, so the integral is a finite sum of constants squared
    times closed-form weight integrals.
    """
    rect = cfg.region_rect if region is None else (
        (0.0, cfg.domain.birth_max, 0.0, cfg.domain.pers_max)
        if region == "omega" else cfg.domain.enlarged)
    pts, coeffs, sides = _surface_coeffs(cfg, d1, d2)
    rx0, rx1, ry0, ry1 = rect
    if pts.shape[0] == 0:
        return 0.0
    half = 0.5 * sides
    x_lo, x_hi = pts[:, 0] - half, pts[:, 0] + half
    y_lo, y_hi = pts[:, 1] - half, pts[:, 1] + half
    xs = np.unique(np.clip(np.concatenate([x_lo, x_hi, [rx0, rx1]]), rx0, rx1))
    ys = np.unique(np.clip(np.concatenate([y_lo, y_hi, [ry0, ry1]]), ry0, ry1))
    if len(xs) < 2 or len(ys) < 2:
        return 0.0
    xm = 0.5 * (xs[:-1] + xs[1:])
    ym = 0.5 * (ys[:-1] + ys[1:])
    # membership of each slab midpoint in each square, per axis
    in_x = (xm[None, :] >= x_lo[:, None]) & (xm[None, :] <= x_hi[:, None])
    in_y = (ym[None, :] >= y_lo[:, None]) & (ym[None, :] <= y_hi[:, None])
    # surface value on each arrangement cell: sum of signed coefficients
    value = np.einsum("k,ki,kj->ij", coeffs, in_x.astype(float), in_y.astype(float))
    dx = np.diff(xs)
    dy = np.diff(ys)
    if cfg.weight.kind == "constant":
        wint = cfg.weight.c * np.outer(dx, dy)
    else:
        shift = cfg.weight.c if cfg.weight.kind == "shifted" else 0.0
        wint = np.outer(dx * xm, dy) + np.outer(dx, dy * ym) + shift * np.outer(dx, dy)
    total = float(np.sum(value**2 * wint))
    return float(np.sqrt(max(total, 0.0)))
