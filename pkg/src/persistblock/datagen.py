"""Seeded synthetic data generators for every experiment.

All generators draw from numpy's PCG64 counter-based generator, so outputs
are pure functions of (spec, seed) and reproducible across platforms.
Golden first-value vectors are frozen in the test suite.  Per-item seeds are
derived with SeedSequence((global_seed, item_index)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from .diagram import Diagram

__all__ = [
    "ShapeSpec",
    "LTMSpec",
    "SHAPE_KINDS",
    "rng_for",
    "sample_shape",
    "ltm_orbit",
    "random_beta_diagram",
]

SHAPE_KINDS = ("cube", "circle", "sphere", "clusters3", "nested-clusters", "torus")


def rng_for(seed, index: int | None = None) -> np.random.Generator:
    """PCG64 generator for (seed,) or the derived stream (seed, index)."""
    entropy = (int(seed),) if index is None else (int(seed), int(index))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    n_points: int = 500
    noise_eta: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.n_points < 1:
            raise ValueError("n_points must be positive")


@dataclass(frozen=True)
class LTMSpec:
    """Linked twist map orbit: r, initial point, and iteration count."""

    r: float
    x0: float = 0.0
    y0: float = 0.0
    length: int = 1000

    def __post_init__(self):
        if not (0 <= self.x0 < 1 and 0 <= self.y0 < 1):
            raise ValueError("initial point must lie in [0, 1)^2")
        if self.r <= 0:
            raise ValueError("r must be positive")


def _unit_sphere(rng, n: int, radius: float) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return radius * v


def _torus(rng, n: int, inner_d: float, outer_d: float) -> np.ndarray:
    # surface-uniform sampling via rejection on the angular density
    tube_r = (outer_d - inner_d) / 4.0
    center_r = (outer_d + inner_d) / 4.0
    out = np.empty((n, 3))
    filled = 0
    while filled < n:
        m = 2 * (n - filled) + 16
        theta = rng.uniform(0.0, 2.0 * np.pi, m)
        accept_u = rng.uniform(0.0, 1.0, m)
        theta = theta[accept_u <= (center_r + tube_r * np.cos(theta)) / (center_r + tube_r)]
        phi = rng.uniform(0.0, 2.0 * np.pi, len(theta))
        take = min(len(theta), n - filled)
        t, ph = theta[:take], phi[:take]
        out[filled:filled + take, 0] = (center_r + tube_r * np.cos(t)) * np.cos(ph)
        out[filled:filled + take, 1] = (center_r + tube_r * np.cos(t)) * np.sin(ph)
        out[filled:filled + take, 2] = tube_r * np.sin(t)
        filled += take
    return out


def _clusters(rng, n: int, nested: bool) -> np.ndarray:
    parents = rng.uniform(0.0, 1.0, (3, 3))
    if nested:
        # three children per parent at the vertices of an equilateral triangle
        # (side 0.3) in a random orientation, so the within-parent geometry is
        # the same for every cloud and the classes stay separable under noise
        side = 0.3
        radius = side / np.sqrt(3.0)
        angles = np.array([0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0])
        children = []
        for p in parents:
            basis, _ = np.linalg.qr(rng.standard_normal((3, 3)))
            offsets = (np.cos(angles)[:, None] * basis[:, 0]
                       + np.sin(angles)[:, None] * basis[:, 1]) * radius
            children.append(p + offsets)
        centers = np.concatenate(children)
    else:
        centers = parents
    which = rng.integers(0, len(centers), n)
    return centers[which] + rng.normal(0.0, 0.02, (n, 3))


def sample_shape(spec: ShapeSpec) -> np.ndarray:
    """Uniform sample on the shape plus isotropic Gaussian noise (sd eta).

    Surface sampling for sphere/torus/circle, volume for the cube, Gaussian
    blobs for the cluster shapes.  The circle is planar (2D); other shapes
    are 3D.
    """
    rng = rng_for(spec.seed)
    n = spec.n_points
    if spec.kind == "cube":
        pts = rng.uniform(0.0, 1.0, (n, 3))
    elif spec.kind == "circle":
        angles = rng.uniform(0.0, 2.0 * np.pi, n)
        pts = 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])
    elif spec.kind == "sphere":
        pts = _unit_sphere(rng, n, 0.5)
    elif spec.kind == "clusters3":
        pts = _clusters(rng, n, nested=False)
    elif spec.kind == "nested-clusters":
        pts = _clusters(rng, n, nested=True)
    elif spec.kind == "torus":
        pts = _torus(rng, n, inner_d=0.5, outer_d=1.0)
    else:  # unreachable; kinds validated in ShapeSpec
        raise ValueError(spec.kind)
    if spec.noise_eta > 0:
        pts = pts + rng.normal(0.0, spec.noise_eta, pts.shape)
    return pts


def ltm_orbit(spec: LTMSpec) -> np.ndarray:
    """Linked twist map orbit of length + 1 points in [0, 1)^2.

    x_{n+1} = x_n + r y_n (1 - y_n) mod 1, then
    y_{n+1} = y_n + r x_{n+1} (1 - x_{n+1}) mod 1 (the y update sees the new x).
    """
    out = np.empty((spec.length + 1, 2))
    x, y = spec.x0, spec.y0
    out[0] = (x, y)
    r = spec.r
    for i in range(1, spec.length + 1):
        x = (x + r * y * (1.0 - y)) % 1.0
        y = (y + r * x * (1.0 - x)) % 1.0
        out[i] = (x, y)
    return out


def random_beta_diagram(n: int, ab=(4.0, 6.0), ap=(1.0, 5.0), seed: int = 0,
                        dim: int = 1) -> Diagram:
    """Diagram with births ~ Beta(ab) and persistences ~ Beta(ap), independent.

    Sampled by inverse-CDF on the documented PRNG for cross-language
    reproducibility.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_for(seed)
    u = rng.random((n, 2))
    births = beta_dist.ppf(u[:, 0], *ab)
    pers = beta_dist.ppf(u[:, 1], *ap)
    return Diagram(np.column_stack([births, pers]), dim=dim)
