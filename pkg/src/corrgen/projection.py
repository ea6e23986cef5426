"""Projection of a point cloud onto a reference path, plus the bounding wrapper.

Each point gets a path parameter (closest point on the path) and the two
components of its offset along the transverse frame columns. The work is a
per-point map with no shared state, so any partition of the cloud projects to
the same coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import InputError, ValidationError
from .path import ParametricPath

GOLDEN_ITERATIONS = 30


@dataclass(frozen=True, eq=False)
class ProjectedCloud:
    """Path-frame coordinates of (a subset of) a cloud.

    ``source_index`` is -1 for synthetic wrapper points. ``end_cap`` marks
    points whose closest path point is a path end with the offset not lying in
    the transverse plane.
    """

    par: np.ndarray
    ortho: np.ndarray
    source_index: np.ndarray
    end_cap: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        par = np.asarray(self.par, dtype=np.float64).ravel()
        m = len(par)
        ortho = np.asarray(self.ortho, dtype=np.float64).reshape(m, 2)
        src = np.asarray(self.source_index, dtype=np.int64).ravel()
        cap = np.asarray(self.end_cap, dtype=bool).ravel()
        res = np.asarray(self.residual, dtype=np.float64).ravel()
        if not (len(src) == len(cap) == len(res) == m):
            raise ValueError("projected cloud fields must have equal length")
        for name, arr in (("par", par), ("ortho", ortho), ("source_index", src), ("end_cap", cap), ("residual", res)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.par)

    @property
    def synthetic(self) -> np.ndarray:
        return self.source_index < 0

    def subset(self, mask) -> "ProjectedCloud":
        return ProjectedCloud(self.par[mask], self.ortho[mask], self.source_index[mask],
                              self.end_cap[mask], self.residual[mask])

    @classmethod
    def empty(cls) -> "ProjectedCloud":
        return cls(np.empty(0), np.empty((0, 2)), np.empty(0, np.int64), np.empty(0, bool), np.empty(0))

    @classmethod
    def concat(cls, parts) -> "ProjectedCloud":
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(np.concatenate([p.par for p in parts]),
                   np.concatenate([p.ortho for p in parts]),
                   np.concatenate([p.source_index for p in parts]),
                   np.concatenate([p.end_cap for p in parts]),
                   np.concatenate([p.residual for p in parts]))


@dataclass(frozen=True)
class WrapperConfig:
    radius: float
    ring_points: int = 16
    stations: int = 100

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("wrapper radius must be positive")
        if self.ring_points < 8:
            raise InputError("wrapper needs at least 8 ring points")
        if self.stations < 1:
            raise InputError("wrapper needs at least one station")


def as_cloud(points) -> np.ndarray:
    """Validate and return an (m, 3) float array; 2-column input gets z = 0."""
    P = np.asarray(points, dtype=np.float64)
    if P.size == 0:
        return np.empty((0, 3))
    if P.ndim != 2 or P.shape[1] not in (2, 3):
        raise InputError("a point cloud is an (m, 3) or (m, 2) array")
    if P.shape[1] == 2:
        P = np.column_stack([P, np.zeros(len(P))])
    if not np.all(np.isfinite(P)):
        raise ValidationError("point cloud contains non-finite coordinates")
    return P


def project_cloud(path: ParametricPath, cloud, tangential_tol: float | None = None) -> ProjectedCloud:
    P = as_cloud(cloud)
    if len(P) == 0:
        return ProjectedCloud.empty()
    if tangential_tol is None:
        tangential_tol = 1e-6 * path.length
    par = _accel.project_points(P, path.xi, path.positions, path.velocities, GOLDEN_ITERATIONS)
    pos, R = path.frames_at(par)
    local = np.einsum("kji,kj->ki", R, P - pos)
    residual = local[:, 0]
    a, b = path.xi_range
    at_end = (par <= a) | (par >= b)
    end_cap = at_end & (np.abs(residual) > tangential_tol)
    return ProjectedCloud(par, local[:, 1:], np.arange(len(P)), end_cap, residual)


def wrapper_points(path: ParametricPath, config: WrapperConfig, planar: bool = False) -> ProjectedCloud:
    """Synthetic ring (3D) or pair of lines (2D) at the wrapper radius."""
    xi = np.linspace(*path.xi_range, config.stations)
    if planar:
        ang = np.array([0.0, np.pi])
    else:
        ang = 2.0 * np.pi * np.arange(config.ring_points) / config.ring_points
    ring = config.radius * np.column_stack([np.cos(ang), np.sin(ang)])
    # exact zeros keep the planar wrapper on the designated axis
    ring[np.abs(ring) < 1e-15 * config.radius] = 0.0
    par = np.repeat(xi, len(ring))
    ortho = np.tile(ring, (len(xi), 1))
    n = len(par)
    return ProjectedCloud(par, ortho, np.full(n, -1), np.zeros(n, bool), np.zeros(n))


def apply_wrapper(projected: ProjectedCloud, config: WrapperConfig, path: ParametricPath,
                  planar: bool = False) -> ProjectedCloud:
    """Drop real points beyond the wrapper radius and append the wrapper points.

    Synthetic points already present in ``projected`` are discarded first, so
    applying the wrapper twice gives the same result as applying it once.
    """
    real = projected.subset(~projected.synthetic)
    if planar:
        dist = np.abs(real.ortho[:, 0])
    else:
        dist = np.linalg.norm(real.ortho, axis=1)
    kept = real.subset(dist <= config.radius)
    return ProjectedCloud.concat([kept, wrapper_points(path, config, planar)])


def retained(projected: ProjectedCloud, include_end_caps: bool = False) -> ProjectedCloud:
    """Points that enter the optimisation as constraints."""
    if include_end_caps:
        return projected
    return projected.subset(~projected.end_cap)


def split_planar(projected: ProjectedCloud, axis: int = 0):
    """Split by the sign of the designated transverse coordinate; zeros go to both sides."""
    v = projected.ortho[:, axis]
    return projected.subset(v >= 0.0), projected.subset(v <= 0.0)


def reconstruct(path: ParametricPath, projected: ProjectedCloud) -> np.ndarray:
    """World positions ``gamma(par) + R(par) (0, ortho)``."""
    if len(projected) == 0:
        return np.empty((0, 3))
    pos, R = path.frames_at(projected.par)
    return pos + np.einsum("kij,kj->ki", R[:, :, 1:], projected.ortho)
