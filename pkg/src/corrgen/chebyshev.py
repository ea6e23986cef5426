"""Chebyshev (first kind) polynomials over an arbitrary parameter interval.

Every parametric quantity of a corridor is a :class:`ChebyshevPoly`; the
optimizer works directly on the coefficient vectors through
:func:`basis_matrix`, since corridor values are linear in the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import DomainError

# slack on the domain check so that rounding at the endpoints is not an error
_DOMAIN_SLACK = 1e-12


def to_unit(xi, domain):
    """Map ``xi`` affinely from ``domain`` onto [-1, 1], raising on out-of-range values."""
    a, b = domain
    xi = np.asarray(xi, dtype=np.float64)
    s = (2.0 * xi - a - b) / (b - a)
    if np.any(np.abs(s) > 1.0 + _DOMAIN_SLACK) or not np.all(np.isfinite(s)):
        raise DomainError(f"path parameter outside domain [{a}, {b}]")
    return np.clip(s, -1.0, 1.0)


def basis_matrix(degree: int, xi, domain) -> np.ndarray:
    """Matrix with rows ``[T_0(s), ..., T_degree(s)]``, one row per entry of ``xi``."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    s = to_unit(np.atleast_1d(xi), domain)
    return _accel.chebyshev_basis(int(degree), s.ravel())


def eval_basis_row(degree: int, xi: float, domain=(-1.0, 1.0)) -> np.ndarray:
    return basis_matrix(degree, [xi], domain)[0]


def clenshaw(coeffs, s):
    """Evaluate ``sum c_k T_k(s)`` for ``s`` in [-1, 1] (scalar or array)."""
    s = np.asarray(s, dtype=np.float64)
    b1 = np.zeros_like(s)
    b2 = np.zeros_like(s)
    two_s = 2.0 * s
    for c in coeffs[:0:-1]:
        b1, b2 = c + two_s * b1 - b2, b1
    return coeffs[0] + s * b1 - b2


def _cheb_derivative_coeffs(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    if n == 0:
        return np.zeros(1)
    d = np.zeros(n + 2)
    # backward recurrence d_{k-1} = d_{k+1} + 2k c_k, halved for k-1 = 0
    for k in range(n, 0, -1):
        d[k - 1] = d[k + 1] + 2.0 * k * c[k]
    d[0] *= 0.5
    return d[:n]


@dataclass(frozen=True, eq=False)
class ChebyshevPoly:
    """Scalar polynomial ``sum c_k T_k(s(xi))`` with ``s`` the affine map of ``domain`` to [-1, 1]."""

    coeffs: np.ndarray
    domain: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).ravel()
        if c.size == 0:
            raise ValueError("a Chebyshev polynomial needs at least one coefficient")
        a, b = float(self.domain[0]), float(self.domain[1])
        if not a < b:
            raise ValueError("domain must satisfy lo < hi")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "domain", (a, b))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, xi):
        s = to_unit(xi, self.domain)
        out = clenshaw(self.coeffs, s)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self) -> "ChebyshevPoly":
        a, b = self.domain
        d = _cheb_derivative_coeffs(self.coeffs) * (2.0 / (b - a))
        return ChebyshevPoly(d, self.domain)

    def to_list(self) -> list[float]:
        return [float(c) for c in self.coeffs]


def eval(poly: ChebyshevPoly, xi):  # noqa: A001 - mirrors the operation name
    return poly(xi)


def derivative(poly: ChebyshevPoly) -> ChebyshevPoly:
    return poly.derivative()
