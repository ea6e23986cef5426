"""Solved corridors and the geometry recovered from them.

A 3D corridor is the set of ``(xi, x)`` with ``x' E(xi) x + d(xi)' x - 1 <= 0``
where the three entries of the symmetric ``E`` and the two entries of ``d``
are Chebyshev polynomials in ``xi``. A 2D corridor is the band
``b_minus(xi) <= x <= b_plus(xi)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import ChebyshevPoly
from .errors import DegeneracyError, InputError
from .path import ParametricPath

FIELDS_3D = ("e11", "e12", "e22", "d1", "d2")
FIELDS_2D = ("b_plus", "b_minus")


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


@dataclass(frozen=True, eq=False)
class Corridor3D:
    e11: ChebyshevPoly
    e12: ChebyshevPoly
    e22: ChebyshevPoly
    d1: ChebyshevPoly
    d2: ChebyshevPoly
    path: ParametricPath | None = None

    dim = 3

    def __post_init__(self):
        doms = {p.domain for p in self.polys}
        if len(doms) != 1:
            raise InputError("all corridor polynomials must share one domain")

    @property
    def polys(self):
        return (self.e11, self.e12, self.e22, self.d1, self.d2)

    @property
    def domain(self):
        return self.e11.domain

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.polys)

    @classmethod
    def from_coeffs(cls, coeffs, domain, path=None) -> "Corridor3D":
        """``coeffs`` is a (5, n+1) array ordered e11, e12, e22, d1, d2."""
        coeffs = np.asarray(coeffs, dtype=np.float64)
        return cls(*(ChebyshevPoly(c, domain) for c in coeffs), path=path)

    @classmethod
    def constant(cls, E, d=(0.0, 0.0), domain=(0.0, 1.0), path=None) -> "Corridor3D":
        E = np.asarray(E, dtype=np.float64)
        return cls.from_coeffs([[E[0, 0]], [E[0, 1]], [E[1, 1]], [d[0]], [d[1]]], domain, path)

    def matrices(self, xi):
        """``E`` (m, 2, 2) and ``d`` (m, 2) at the parameters ``xi``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        e11, e12, e22, d1, d2 = (np.atleast_1d(p(xi)) for p in self.polys)
        E = np.stack([np.stack([e11, e12], -1), np.stack([e12, e22], -1)], -2)
        return E, np.stack([d1, d2], -1)

    def eval_inequality(self, xi, x_perp):
        """Scalar corridor function; negative inside, zero on the boundary."""
        scalar = np.ndim(xi) == 0
        x = np.atleast_2d(np.asarray(x_perp, dtype=np.float64))
        E, d = self.matrices(xi)
        val = np.einsum("ki,kij,kj->k", x, E, x) + np.einsum("ki,ki->k", d, x) - 1.0
        return float(val[0]) if scalar else val

    def contains(self, xi, x_perp, tol: float = 0.0):
        """Closed-set membership, ``eval_inequality <= tol``."""
        v = self.eval_inequality(xi, x_perp)
        return bool(v <= tol) if np.ndim(v) == 0 else v <= tol

    def recover_ellipse(self, xi: float) -> "EllipseSlice":
        E, d = self.matrices(xi)
        return EllipseSlice.from_quadratic(float(xi), E[0], d[0])

    def slice_areas(self, xi) -> np.ndarray:
        """Exact cross-section areas ``pi (1 + q) / sqrt(det E)``."""
        E, d = self.matrices(xi)
        det = E[:, 0, 0] * E[:, 1, 1] - E[:, 0, 1] ** 2
        if np.any(E[:, 0, 0] <= 0) or np.any(det <= 0):
            bad = np.atleast_1d(xi)[(E[:, 0, 0] <= 0) | (det <= 0)][0]
            raise DegeneracyError(f"ellipse matrix not positive definite at xi={bad:.6g}")
        q = 0.25 * np.einsum("ki,kij,kj->k", d, np.linalg.inv(E), d)
        return np.pi * (1.0 + q) / np.sqrt(det)

    def volume(self, samples: int = 401) -> float:
        if samples < 2:
            raise InputError("volume needs at least two samples")
        xi = np.linspace(*self.domain, samples)
        return _trapezoid(self.slice_areas(xi), xi)

    def min_eigenvalues(self, xi) -> np.ndarray:
        E, _ = self.matrices(xi)
        return np.linalg.eigvalsh(E)[:, 0]

    def derivative(self) -> "Corridor3D":
        return Corridor3D(*(p.derivative() for p in self.polys), path=self.path)

    def to_dict(self, include_path: bool = True) -> dict:
        out = {"dim": 3, "degree": self.degree, "xi_range": list(self.domain), "basis": "chebyshev"}
        for name, p in zip(FIELDS_3D, self.polys):
            out[name] = p.to_list()
        if include_path and self.path is not None:
            out["path"] = self.path.to_dict()
        return out


@dataclass(frozen=True, eq=False)
class Corridor2D:
    b_plus: ChebyshevPoly
    b_minus: ChebyshevPoly
    path: ParametricPath | None = None

    dim = 2

    def __post_init__(self):
        if self.b_plus.domain != self.b_minus.domain:
            raise InputError("bounds must share one domain")

    @property
    def polys(self):
        return (self.b_plus, self.b_minus)

    @property
    def domain(self):
        return self.b_plus.domain

    @property
    def degree(self) -> int:
        return max(self.b_plus.degree, self.b_minus.degree)

    @classmethod
    def from_coeffs(cls, coeffs, domain, path=None) -> "Corridor2D":
        coeffs = np.asarray(coeffs, dtype=np.float64)
        return cls(ChebyshevPoly(coeffs[0], domain), ChebyshevPoly(coeffs[1], domain), path=path)

    def eval_inequality(self, xi, x):
        """``max(x - b_plus, b_minus - x)``: non-positive inside the band."""
        up = np.asarray(x, dtype=np.float64) - self.b_plus(xi)
        lo = self.b_minus(xi) - np.asarray(x, dtype=np.float64)
        v = np.maximum(up, lo)
        return float(v) if np.ndim(v) == 0 else v

    def contains(self, xi, x, tol: float = 0.0):
        v = self.eval_inequality(xi, x)
        return bool(v <= tol) if np.ndim(v) == 0 else v <= tol

    def area(self, samples: int = 401) -> float:
        if samples < 2:
            raise InputError("area needs at least two samples")
        xi = np.linspace(*self.domain, samples)
        return _trapezoid(self.b_plus(xi) - self.b_minus(xi), xi)

    def derivative(self) -> "Corridor2D":
        return Corridor2D(self.b_plus.derivative(), self.b_minus.derivative(), path=self.path)

    def to_dict(self, include_path: bool = True) -> dict:
        out = {"dim": 2, "degree": self.degree, "xi_range": list(self.domain), "basis": "chebyshev",
               "b_plus": self.b_plus.to_list(), "b_minus": self.b_minus.to_list()}
        if include_path and self.path is not None:
            out["path"] = self.path.to_dict()
        return out


@dataclass(frozen=True)
class EllipseSlice:
    """Cross-section ``(x - center)' matrix (x - center) <= 1`` at one parameter."""

    xi: float
    center: np.ndarray
    matrix: np.ndarray
    semi_axes: tuple[float, float]
    angle: float
    axes: np.ndarray  # columns are the unit directions of semi_axes

    @classmethod
    def from_quadratic(cls, xi, E, d) -> "EllipseSlice":
        E = np.asarray(E, dtype=np.float64)
        d = np.asarray(d, dtype=np.float64)
        det = E[0, 0] * E[1, 1] - E[0, 1] ** 2
        if E[0, 0] <= 0 or det <= 0:
            raise DegeneracyError(f"ellipse matrix not positive definite at xi={xi:.6g}")
        Einv_d = np.linalg.solve(E, d)
        center = -0.5 * Einv_d
        q = 0.25 * float(d @ Einv_d)
        M = E / (1.0 + q)
        lam, V = np.linalg.eigh(M)
        # descending eigenvalues give ascending semi-axes
        lam, V = lam[::-1], V[:, ::-1]
        axes = 1.0 / np.sqrt(lam)
        return cls(float(xi), center, M, (float(axes[0]), float(axes[1])),
                   float(np.arctan2(V[1, 0], V[0, 0])), V)

    @property
    def area(self) -> float:
        return float(np.pi * self.semi_axes[0] * self.semi_axes[1])

    def boundary(self, ring: int) -> np.ndarray:
        th = 2.0 * np.pi * np.arange(ring) / ring
        local = np.column_stack([self.semi_axes[0] * np.cos(th), self.semi_axes[1] * np.sin(th)])
        return self.center + local @ self.axes.T


def recover_ellipse(corridor: Corridor3D, xi: float) -> EllipseSlice:
    return corridor.recover_ellipse(xi)


def eval_inequality(corridor, xi, x_perp):
    return corridor.eval_inequality(xi, x_perp)


def contains(corridor, xi, x_perp, tol: float = 0.0):
    return corridor.contains(xi, x_perp, tol)


def corridor_volume(corridor: Corridor3D, samples: int = 401) -> float:
    return corridor.volume(samples)


def corridor_area_2d(corridor: Corridor2D, samples: int = 401) -> float:
    return corridor.area(samples)


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (V, 3) world coordinates
    faces: np.ndarray  # (F, 3) vertex indices
    xi: np.ndarray  # (V,) station parameter of each vertex
    local: np.ndarray  # (V, 2) transverse coordinates of each vertex

    def to_obj(self) -> str:
        lines = ["# corrgen corridor mesh"]
        lines += [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in self.vertices]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in self.faces]
        return "\n".join(lines) + "\n"


def sample_boundary_mesh(corridor: Corridor3D, stations: int = 50, ring: int = 32,
                         path: ParametricPath | None = None) -> Mesh:
    """Tube surface through ``ring`` boundary points at ``stations`` parameters."""
    if stations < 2 or ring < 3:
        raise InputError("mesh needs stations >= 2 and ring >= 3")
    path = path or corridor.path
    if path is None:
        raise InputError("mesh export needs the corridor's reference path")
    xi = np.linspace(*corridor.domain, stations)
    local = np.vstack([corridor.recover_ellipse(x).boundary(ring) for x in xi])
    xv = np.repeat(xi, ring)
    pos, R = path.frames_at(xv)
    verts = pos + np.einsum("kij,kj->ki", R[:, :, 1:], local)
    faces = []
    for i in range(stations - 1):
        for j in range(ring):
            a = i * ring + j
            b = i * ring + (j + 1) % ring
            faces.append((a, b, a + ring))
            faces.append((b, b + ring, a + ring))
    return Mesh(verts, np.asarray(faces, dtype=np.int64), xv, local)


def corridor_from_dict(data: dict, path: ParametricPath | None = None):
    try:
        dim = int(data["dim"])
        domain = tuple(float(v) for v in data["xi_range"])
        if data.get("basis", "chebyshev") != "chebyshev":
            raise InputError(f"unsupported basis {data.get('basis')!r}")
        if dim == 3:
            return Corridor3D(*(ChebyshevPoly(data[k], domain) for k in FIELDS_3D), path=path)
        if dim == 2:
            return Corridor2D(ChebyshevPoly(data["b_plus"], domain), ChebyshevPoly(data["b_minus"], domain), path=path)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed corridor: {exc}") from exc
    raise InputError(f"unsupported corridor dimension {data.get('dim')!r}")

