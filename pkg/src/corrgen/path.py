"""Reference paths with an attached moving frame.

A :class:`ParametricPath` is a dense list of stations ``(xi, position,
rotation)``. Between stations the position is a cubic Hermite interpolant
whose end derivatives follow the station tangents, and the frame is a
spherical interpolation of the neighbouring rotations, re-aligned so that its
first column is exactly the interpolant's unit tangent. Rotation columns are
(tangent, first normal, second normal); columns 2 and 3 span the transverse
plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSegmentError, DomainError, InputError

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class FrameStation:
    xi: float
    position: np.ndarray
    rotation: np.ndarray

    @property
    def tangent(self) -> np.ndarray:
        return self.rotation[:, 0]


def _unit(v, axis=-1):
    n = np.linalg.norm(v, axis=axis, keepdims=True)
    return v / n


def _rodrigues(axis, angle):
    """Batch of rotation matrices for unit ``axis`` (k, 3) and ``angle`` (k,)."""
    axis = np.atleast_2d(axis)
    angle = np.atleast_1d(angle)
    x, y, z = axis[:, 0], axis[:, 1], axis[:, 2]
    c = np.cos(angle)
    s = np.sin(angle)
    C = 1.0 - c
    R = np.empty((len(angle), 3, 3))
    R[:, 0, 0] = c + x * x * C
    R[:, 0, 1] = x * y * C - z * s
    R[:, 0, 2] = x * z * C + y * s
    R[:, 1, 0] = y * x * C + z * s
    R[:, 1, 1] = c + y * y * C
    R[:, 1, 2] = y * z * C - x * s
    R[:, 2, 0] = z * x * C - y * s
    R[:, 2, 1] = z * y * C + x * s
    R[:, 2, 2] = c + z * z * C
    return R


def _log_rotation(R):
    """Axis-angle (axis (k,3), angle (k,)) of a batch of rotations."""
    tr = np.trace(R, axis1=1, axis2=2)
    angle = np.arccos(np.clip(0.5 * (tr - 1.0), -1.0, 1.0))
    w = np.stack([R[:, 2, 1] - R[:, 1, 2], R[:, 0, 2] - R[:, 2, 0], R[:, 1, 0] - R[:, 0, 1]], axis=1)
    n = np.linalg.norm(w, axis=1)
    axis = np.zeros_like(w)
    axis[:, 0] = 1.0
    ok = n > 1e-12
    axis[ok] = w[ok] / n[ok, None]
    # near pi the skew part vanishes; recover the axis from the symmetric part
    flip = (~ok) & (angle > 1.0)
    for i in np.flatnonzero(flip):
        B = 0.5 * (R[i] + np.eye(3))
        j = int(np.argmax(np.diag(B)))
        axis[i] = _unit(B[:, j])
    angle = np.where(ok | flip, angle, 0.0)
    return axis, angle


def _align(R, t):
    """Rotate each frame in ``R`` minimally so that its first column becomes ``t``."""
    a = R[:, :, 0]
    cross = np.cross(a, t)
    sn = np.linalg.norm(cross, axis=1)
    cs = np.einsum("ij,ij->i", a, t)
    angle = np.arctan2(sn, cs)
    out = R.copy()
    move = sn > 1e-15
    if np.any(move):
        Q = _rodrigues(cross[move] / sn[move, None], angle[move])
        out[move] = Q @ R[move]
    return out


def _gram_schmidt(R):
    t = _unit(R[:, :, 0])
    n = R[:, :, 1] - np.einsum("ij,ij->i", R[:, :, 1], t)[:, None] * t
    n = _unit(n)
    b = np.cross(t, n)
    return np.stack([t, n, b], axis=2)


def transport_frames(tangents, initial_normal=None):
    """Parallel-transport frames along unit ``tangents`` (K, 3).

    Each frame is obtained from the previous one by the minimal rotation that
    carries the previous tangent onto the next, so the normals never spin
    about the tangent.
    """
    T = _unit(np.asarray(tangents, dtype=np.float64))
    t0 = T[0]
    if initial_normal is None:
        ref = np.array([0.0, 0.0, 1.0])
        n0 = np.cross(ref, t0)
        if np.linalg.norm(n0) < 1e-8:
            n0 = np.cross(np.array([1.0, 0.0, 0.0]), t0)
    else:
        n0 = np.asarray(initial_normal, dtype=np.float64)
        n0 = n0 - n0.dot(t0) * t0
    n0 = _unit(n0)
    frames = np.empty((len(T), 3, 3))
    frames[0] = np.column_stack([t0, n0, np.cross(t0, n0)])
    for k in range(1, len(T)):
        prev = frames[k - 1]
        frames[k] = _align(prev[None], T[k][None])[0]
    return _gram_schmidt(frames)


@dataclass(frozen=True, eq=False)
class ParametricPath:
    """Immutable sampled path; see the module docstring for the interpolation rules."""

    xi: np.ndarray
    positions: np.ndarray
    rotations: np.ndarray
    velocities: np.ndarray = field(default=None)

    def __post_init__(self):
        xi = np.array(self.xi, dtype=np.float64).ravel()
        pos = np.array(self.positions, dtype=np.float64).reshape(-1, 3)
        rot = np.array(self.rotations, dtype=np.float64).reshape(-1, 3, 3)
        if len(xi) < 2 or len(pos) != len(xi) or len(rot) != len(xi):
            raise InputError("a path needs at least two stations with matching positions and rotations")
        if not np.all(np.diff(xi) > 0):
            raise InputError("station parameters must be strictly increasing")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(rot))):
            raise InputError("non-finite station data")
        err = np.abs(np.einsum("kji,kjl->kil", rot, rot) - np.eye(3)).max()
        if err > 1e-6 or np.any(np.linalg.det(rot) < 0):
            raise InputError("station rotations must be proper orthonormal matrices")
        rot = _gram_schmidt(rot)
        vel = self.velocities
        if vel is None:
            vel = _station_velocities(xi, pos, rot)
        vel = np.array(vel, dtype=np.float64).reshape(-1, 3)
        for arr in (xi, pos, rot, vel):
            arr.flags.writeable = False
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "velocities", vel)
        # per-segment relative rotation as axis-angle, for slerp
        rel = np.einsum("kji,kjl->kil", rot[:-1], rot[1:])
        axis, angle = _log_rotation(rel)
        axis.flags.writeable = False
        angle.flags.writeable = False
        object.__setattr__(self, "_seg_axis", axis)
        object.__setattr__(self, "_seg_angle", angle)

    @property
    def xi_range(self) -> tuple[float, float]:
        return float(self.xi[0]), float(self.xi[-1])

    @property
    def length(self) -> float:
        """Chord length of the station polyline (meters)."""
        return float(np.linalg.norm(np.diff(self.positions, axis=0), axis=1).sum())

    @property
    def spacing(self) -> float:
        return float(np.diff(self.xi).max())

    def __len__(self):
        return len(self.xi)

    def station(self, k: int) -> FrameStation:
        return FrameStation(float(self.xi[k]), self.positions[k].copy(), self.rotations[k].copy())

    def _check(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        a, b = self.xi_range
        tol = _DOMAIN_SLACK * (b - a)
        if np.any(xi < a - tol) or np.any(xi > b + tol) or not np.all(np.isfinite(xi)):
            raise DomainError(f"path parameter outside [{a}, {b}]")
        return np.clip(xi, a, b)

    def _segment(self, xi):
        k = np.searchsorted(self.xi, xi, side="right") - 1
        return np.clip(k, 0, len(self.xi) - 2)

    def positions_at(self, xi) -> np.ndarray:
        """Hermite-interpolated positions (m, 3)."""
        return self._hermite(self._check(np.atleast_1d(xi)))[0]

    def tangents_at(self, xi) -> np.ndarray:
        """Unit tangent of the position interpolant (m, 3)."""
        return _unit(self._hermite(self._check(np.atleast_1d(xi)))[1])

    def _hermite(self, xi):
        k = self._segment(xi)
        h = self.xi[k + 1] - self.xi[k]
        u = (xi - self.xi[k]) / h
        u2 = u * u
        u3 = u2 * u
        P0, P1 = self.positions[k], self.positions[k + 1]
        V0, V1 = self.velocities[k] * h[:, None], self.velocities[k + 1] * h[:, None]
        h00 = 2.0 * u3 - 3.0 * u2 + 1.0
        h10 = u3 - 2.0 * u2 + u
        h01 = -2.0 * u3 + 3.0 * u2
        h11 = u3 - u2
        pos = h00[:, None] * P0 + h10[:, None] * V0 + h01[:, None] * P1 + h11[:, None] * V1
        d00 = 6.0 * u2 - 6.0 * u
        d10 = 3.0 * u2 - 4.0 * u + 1.0
        d01 = -6.0 * u2 + 6.0 * u
        d11 = 3.0 * u2 - 2.0 * u
        vel = (d00[:, None] * P0 + d10[:, None] * V0 + d01[:, None] * P1 + d11[:, None] * V1) / h[:, None]
        return pos, vel

    def frames_at(self, xi):
        """Positions (m, 3) and rotations (m, 3, 3) at the parameters ``xi``."""
        xi = self._check(np.atleast_1d(xi))
        k = self._segment(xi)
        u = (xi - self.xi[k]) / (self.xi[k + 1] - self.xi[k])
        pos, vel = self._hermite(xi)
        R = self.rotations[k] @ _rodrigues(self._seg_axis[k], u * self._seg_angle[k])
        R = _gram_schmidt(_align(R, _unit(vel)))
        # stations are returned verbatim
        hit = np.isin(xi, self.xi)
        if np.any(hit):
            idx = np.searchsorted(self.xi, xi[hit])
            pos[hit] = self.positions[idx]
            R[hit] = self.rotations[idx]
        return pos, R

    def eval(self, xi: float) -> FrameStation:
        pos, R = self.frames_at([xi])
        return FrameStation(float(np.clip(xi, *self.xi_range)), pos[0], R[0])

    def translated(self, offset) -> "ParametricPath":
        return ParametricPath(self.xi, self.positions + np.asarray(offset, float), self.rotations, self.velocities)

    def to_dict(self) -> dict:
        return {
            "stations": [
                {"xi": float(x), "position": p.tolist(), "rotation_rowmajor": R.ravel().tolist()}
                for x, p, R in zip(self.xi, self.positions, self.rotations)
            ]
        }


def _station_velocities(xi, pos, rot):
    # tangent direction from the frame, speed from neighbouring chords
    chord = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    dxi = np.diff(xi)
    speed = np.empty(len(xi))
    speed[0] = chord[0] / dxi[0]
    speed[-1] = chord[-1] / dxi[-1]
    speed[1:-1] = (chord[:-1] + chord[1:]) / (dxi[:-1] + dxi[1:])
    return rot[:, :, 0] * speed[:, None]


def eval_path(path: ParametricPath, xi: float) -> FrameStation:
    return path.eval(xi)


def build_path_from_waypoints(waypoints, samples_per_segment: int = 50) -> ParametricPath:
    """Catmull-Rom interpolation of ``waypoints`` with parallel-transport frames.

    The parameter is the cumulative chord length of the dense samples,
    normalised to [0, 1].
    """
    W = np.asarray(waypoints, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] < 2:
        raise InputError("at least two waypoints are required")
    if W.shape[1] == 2:
        W = np.column_stack([W, np.zeros(len(W))])
    if W.shape[1] != 3 or not np.all(np.isfinite(W)):
        raise InputError("waypoints must be finite 2- or 3-vectors")
    if samples_per_segment < 1:
        raise InputError("samples_per_segment must be positive")
    seg = np.linalg.norm(np.diff(W, axis=0), axis=1)
    if np.any(seg <= 1e-12 * max(1.0, seg.max())):
        raise DegenerateSegmentError("consecutive waypoints coincide")

    t = np.concatenate([[0.0], np.cumsum(seg)])
    M = np.empty_like(W)
    M[0] = (W[1] - W[0]) / (t[1] - t[0])
    M[-1] = (W[-1] - W[-2]) / (t[-1] - t[-2])
    if len(W) > 2:
        M[1:-1] = (W[2:] - W[:-2]) / (t[2:] - t[:-2])[:, None]

    pts, ders = [], []
    u = np.linspace(0.0, 1.0, samples_per_segment, endpoint=False)
    u2, u3 = u * u, u * u * u
    for k in range(len(W) - 1):
        h = t[k + 1] - t[k]
        P0, P1, V0, V1 = W[k], W[k + 1], M[k] * h, M[k + 1] * h
        pts.append(np.outer(2 * u3 - 3 * u2 + 1, P0) + np.outer(u3 - 2 * u2 + u, V0)
                   + np.outer(-2 * u3 + 3 * u2, P1) + np.outer(u3 - u2, V1))
        ders.append(np.outer(6 * u2 - 6 * u, P0) + np.outer(3 * u2 - 4 * u + 1, V0)
                    + np.outer(-6 * u2 + 6 * u, P1) + np.outer(3 * u2 - 2 * u, V1))
    pts.append(W[-1][None])
    ders.append((M[-1] * (t[-1] - t[-2]))[None])
    pos = np.vstack(pts)
    tang = _unit(np.vstack(ders))

    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pos, axis=0), axis=1))])
    xi = arc / arc[-1]
    frames = transport_frames(tang)
    return ParametricPath(xi, pos, frames)


def straight_path(start, end, stations: int = 101) -> ParametricPath:
    """Straight segment with the default frame, parameterised on [0, 1]."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    s = np.linspace(0.0, 1.0, stations)
    pos = start + s[:, None] * (end - start)
    frames = transport_frames(np.repeat((end - start)[None], stations, axis=0))
    return ParametricPath(s, pos, frames)


def path_from_dict(data: dict) -> ParametricPath:
    """Build a path from the JSON path-file layout (``waypoints`` or ``stations``)."""
    if "waypoints" in data:
        return build_path_from_waypoints(data["waypoints"], int(data.get("samples_per_segment", 50)))
    if "stations" in data:
        st = data["stations"]
        try:
            xi = [float(s["xi"]) for s in st]
            pos = [list(map(float, s["position"])) for s in st]
            rot = [np.asarray(s["rotation_rowmajor"], dtype=float).reshape(3, 3) for s in st]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed station entry: {exc}") from exc
        pos = [p + [0.0] if len(p) == 2 else p for p in pos]
        return ParametricPath(xi, pos, rot)
    raise InputError("path file needs either 'waypoints' or 'stations'")
