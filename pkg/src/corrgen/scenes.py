"""Seeded synthetic scenes: random columns and rings around a path, plus analytic fixtures.

Randomness comes from numpy's PCG64 bit generator seeded with the scene seed
(a documented 128-bit permuted congruential generator; doubles use its
standard 53-bit mapping), so a given spec yields the same cloud on every
platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .path import ParametricPath, build_path_from_waypoints, straight_path

KINDS = ("columns", "rings", "mixed", "channel", "cylinder")

# default random scene: a 10 m stretch with a gently weaving path
_EXTENT = ((0.0, 10.0), (-3.0, 3.0), (-3.0, 3.0))
_WAYPOINTS = ((0.0, 0.0, 0.0), (3.3, 0.5, 0.3), (6.6, -0.5, -0.3), (10.0, 0.0, 0.0))


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of a synthetic scene.

    For ``cylinder`` the ``count`` is the number of rings and ``density`` the
    points per ring; for ``channel`` ``count`` is the number of points per
    wall. For the random kinds ``count`` is the number of obstacles and
    ``density`` the points per obstacle.
    """

    kind: str = "mixed"
    seed: int = 0
    count: int = 10
    density: int = 200
    extent: tuple = _EXTENT
    column_radius: tuple = (0.1, 0.4)
    ring_radius: tuple = (0.9, 2.2)
    ring_offset: float = 0.6
    clearance: float = 0.35
    radius: float = 1.0  # cylinder radius / channel half-width
    path_offset: tuple = (0.0, 0.0)  # (y, z) shift of the fixture path

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown scene kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.count < 0 or self.density < 1:
            raise InputError("count must be >= 0 and density >= 1")
        if self.radius <= 0 or self.clearance <= 0:
            raise InputError("radius and clearance must be positive")
        for lo, hi in (self.column_radius, self.ring_radius):
            if not 0 < lo <= hi:
                raise InputError("obstacle size ranges must be positive and ordered")

    def default_path(self) -> ParametricPath:
        if self.kind == "cylinder":
            oy, oz = self.path_offset
            return straight_path([0.0, oy, oz], [1.0, oy, oz])
        if self.kind == "channel":
            return straight_path([0.0, self.path_offset[0], 0.0], [1.0, self.path_offset[0], 0.0])
        (x0, x1), _, _ = self.extent
        span = (_WAYPOINTS[-1][0] - _WAYPOINTS[0][0])
        wp = [(x0 + (x - _WAYPOINTS[0][0]) * (x1 - x0) / span, y, z) for x, y, z in _WAYPOINTS]
        return build_path_from_waypoints(wp, 60)


def _cylinder(spec):
    x = np.linspace(0.0, 1.0, spec.count)
    th = 2.0 * np.pi * np.arange(spec.density) / spec.density
    X = np.repeat(x, spec.density)
    T = np.tile(th, spec.count)
    return np.column_stack([X, spec.radius * np.cos(T), spec.radius * np.sin(T)])


def _channel(spec):
    x = np.linspace(0.0, 1.0, spec.count)
    w = spec.radius
    top = np.column_stack([x, np.full_like(x, w), np.zeros_like(x)])
    bottom = np.column_stack([x, np.full_like(x, -w), np.zeros_like(x)])
    return np.vstack([top, bottom])


def _path_samples(path):
    return path.positions_at(np.linspace(*path.xi_range, 2000))


def _too_close(points, samples, clearance):
    # blockwise to bound memory
    for start in range(0, len(points), 256):
        blk = points[start:start + 256]
        d2 = ((blk[:, None, :] - samples[None, :, :]) ** 2).sum(-1)
        if d2.min() < clearance ** 2:
            return True
    return False


def _column(rng, spec):
    (x0, x1), (y0, y1), (z0, z1) = spec.extent
    rho = rng.uniform(*spec.column_radius)
    cx = rng.uniform(x0 + rho, x1 - rho)
    cy = rng.uniform(y0 + rho, y1 - rho)
    th = rng.uniform(0.0, 2.0 * np.pi, spec.density)
    z = rng.uniform(z0, z1, spec.density)
    return np.column_stack([cx + rho * np.cos(th), cy + rho * np.sin(th), z])


def _ring(rng, spec, path):
    (x0, x1), (y0, y1), (z0, z1) = spec.extent
    r = rng.uniform(*spec.ring_radius)
    xi = rng.uniform(0.05, 0.95) * (path.xi_range[1] - path.xi_range[0]) + path.xi_range[0]
    frame = path.eval(xi)
    off = rng.uniform(-spec.ring_offset, spec.ring_offset, 2)
    tilt = rng.uniform(-0.3, 0.3)
    th = 2.0 * np.pi * (np.arange(spec.density) + rng.uniform(0.0, 1.0)) / spec.density
    n, b, t = frame.rotation[:, 1], frame.rotation[:, 2], frame.rotation[:, 0]
    # tilt the ring plane about its first normal
    b_t = np.cos(tilt) * b + np.sin(tilt) * t
    center = frame.position + off[0] * n + off[1] * b
    pts = center + r * (np.outer(np.cos(th), n) + np.outer(np.sin(th), b_t))
    lo = np.array([x0, y0, z0])
    hi = np.array([x1, y1, z1])
    return pts[np.all((pts >= lo) & (pts <= hi), axis=1)]


def generate_scene(spec: SceneSpec, path: ParametricPath | None = None) -> np.ndarray:
    """Point cloud (m, 3) for ``spec``; deterministic in ``spec.seed``."""
    if spec.kind == "cylinder":
        return _cylinder(spec)
    if spec.kind == "channel":
        return _channel(spec)
    path = path or spec.default_path()
    samples = _path_samples(path)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    clouds = []
    for _ in range(spec.count):
        if spec.kind == "columns":
            kind = "column"
        elif spec.kind == "rings":
            kind = "ring"
        else:
            kind = "column" if rng.uniform() < 0.5 else "ring"
        for _attempt in range(50):
            pts = _column(rng, spec) if kind == "column" else _ring(rng, spec, path)
            if len(pts) and not _too_close(pts, samples, spec.clearance):
                clouds.append(pts)
                break
    if not clouds:
        return np.empty((0, 3))
    return np.vstack(clouds)


@dataclass(frozen=True)
class Fixture:
    name: str
    scene: SceneSpec
    wrapper_radius: float
    dimension: int = 3
    notes: str = field(default="", compare=False)

    def build(self):
        path = self.scene.default_path()
        return path, generate_scene(self.scene, path)


FIXTURES = {
    "cylinder": Fixture("cylinder", SceneSpec("cylinder", count=50, density=64, radius=1.0), 1.5),
    "channel": Fixture("channel", SceneSpec("channel", count=1000, radius=0.4), 1.0, dimension=2),
    "hugging": Fixture("hugging", SceneSpec("cylinder", count=50, density=64, radius=1.0,
                                            path_offset=(0.7, 0.0)), 2.0,
                       notes="path runs 0.3 m from one side of a unit tube"),
    "mixed": Fixture("mixed", SceneSpec("mixed", seed=7, count=10, density=200), 2.5),
}
