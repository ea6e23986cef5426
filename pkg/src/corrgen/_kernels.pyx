# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: point-to-path projection and Chebyshev basis rows.

Both functions must agree with their twins in ``_fallback.py`` to rounding;
keep the arithmetic in the same order when editing either side.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double GOLDEN = 0.6180339887498949
# stations within this relative distance of the nearest count as tied
cdef double TIE_RTOL = 1e-12


cdef inline double _sqdist(const double[:, ::1] pos, const double[:, ::1] vel,
                           const double[::1] xi, Py_ssize_t k, double x,
                           double px, double py, double pz) nogil:
    cdef double h = xi[k + 1] - xi[k]
    cdef double u = (x - xi[k]) / h
    cdef double u2 = u * u
    cdef double u3 = u2 * u
    cdef double h00 = 2.0 * u3 - 3.0 * u2 + 1.0
    cdef double h10 = u3 - 2.0 * u2 + u
    cdef double h01 = -2.0 * u3 + 3.0 * u2
    cdef double h11 = u3 - u2
    cdef double gx = h00 * pos[k, 0] + h10 * h * vel[k, 0] + h01 * pos[k + 1, 0] + h11 * h * vel[k + 1, 0]
    cdef double gy = h00 * pos[k, 1] + h10 * h * vel[k, 1] + h01 * pos[k + 1, 1] + h11 * h * vel[k + 1, 1]
    cdef double gz = h00 * pos[k, 2] + h10 * h * vel[k, 2] + h01 * pos[k + 1, 2] + h11 * h * vel[k + 1, 2]
    cdef double dx = px - gx
    cdef double dy = py - gy
    cdef double dz = pz - gz
    return dx * dx + dy * dy + dz * dz


cdef inline double _bracket_sqdist(const double[:, ::1] pos, const double[:, ::1] vel,
                                   const double[::1] xi, Py_ssize_t i, Py_ssize_t last,
                                   double x, double px, double py, double pz) nogil:
    # segment inside the two-segment bracket around station i
    cdef Py_ssize_t k
    if x < xi[i]:
        k = i - 1
    else:
        k = i
    if k > last - 1:
        k = last - 1
    if k < 0:
        k = 0
    return _sqdist(pos, vel, xi, k, x, px, py, pz)


cdef inline double _newton(const double[:, ::1] pos, const double[:, ::1] vel,
                          const double[::1] xi, Py_ssize_t i, Py_ssize_t last, double x,
                          double lo, double hi, double px, double py, double pz) nogil:
    # one Newton step on the squared distance, clipped to the bracket
    cdef Py_ssize_t k
    if x < xi[i]:
        k = i - 1
    else:
        k = i
    if k > last - 1:
        k = last - 1
    if k < 0:
        k = 0
    cdef double h = xi[k + 1] - xi[k]
    cdef double u = (x - xi[k]) / h
    cdef double u2 = u * u
    cdef double u3 = u2 * u
    cdef double h00 = 2.0 * u3 - 3.0 * u2 + 1.0
    cdef double h10 = u3 - 2.0 * u2 + u
    cdef double h01 = -2.0 * u3 + 3.0 * u2
    cdef double h11 = u3 - u2
    cdef double d00 = 6.0 * u2 - 6.0 * u
    cdef double d10 = 3.0 * u2 - 4.0 * u + 1.0
    cdef double d01 = -6.0 * u2 + 6.0 * u
    cdef double d11 = 3.0 * u2 - 2.0 * u
    cdef double s00 = 12.0 * u - 6.0
    cdef double s10 = 6.0 * u - 4.0
    cdef double s01 = -12.0 * u + 6.0
    cdef double s11 = 6.0 * u - 2.0
    cdef double num = 0.0
    cdef double den = 0.0
    cdef double r, g1, g2
    cdef Py_ssize_t c
    cdef double p[3]
    p[0] = px
    p[1] = py
    p[2] = pz
    for c in range(3):
        r = p[c] - (h00 * pos[k, c] + h10 * h * vel[k, c] + h01 * pos[k + 1, c] + h11 * h * vel[k + 1, c])
        g1 = (d00 * pos[k, c] + d10 * h * vel[k, c] + d01 * pos[k + 1, c] + d11 * h * vel[k + 1, c]) / h
        g2 = (s00 * pos[k, c] + s10 * h * vel[k, c] + s01 * pos[k + 1, c] + s11 * h * vel[k + 1, c]) / (h * h)
        num = num + r * g1
        den = den + g1 * g1 - r * g2
    if den <= 0.0:
        return x
    x = x + num / den
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


def project_points(points, xi, pos, vel, int iters=30, int polish=3):
    """Closest path parameter for every row of ``points``.

    ``pos``/``vel`` are station positions and Hermite derivatives at the
    parameters ``xi``. Returns an array of parameters, one per point.
    """
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[:, ::1] Q = np.ascontiguousarray(pos, dtype=np.float64)
    cdef const double[:, ::1] V = np.ascontiguousarray(vel, dtype=np.float64)
    cdef Py_ssize_t m = P.shape[0]
    cdef Py_ssize_t K = X.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j, k, best, lo_i, hi_i, it
    cdef double px, py, pz, d, dx, dy, dz, dmin
    cdef double a, b, c, e, fc, fe, lo, hi, mid, flo, fhi, fmid, xbest, fbest, xn, fn
    if m == 0:
        return out_arr
    with nogil:
        for j in range(m):
            px = P[j, 0]
            py = P[j, 1]
            pz = P[j, 2]
            best = 0
            dmin = 1e300
            for k in range(K):
                dx = px - Q[k, 0]
                dy = py - Q[k, 1]
                dz = pz - Q[k, 2]
                d = dx * dx + dy * dy + dz * dz
                if d < dmin:
                    dmin = d
            dmin = dmin * (1.0 + TIE_RTOL)
            for k in range(K):
                dx = px - Q[k, 0]
                dy = py - Q[k, 1]
                dz = pz - Q[k, 2]
                d = dx * dx + dy * dy + dz * dz
                if d <= dmin:
                    best = k
                    break
            lo_i = best - 1 if best > 0 else 0
            hi_i = best + 1 if best < K - 1 else K - 1
            lo = X[lo_i]
            hi = X[hi_i]
            a = lo
            b = hi
            for it in range(iters):
                c = b - GOLDEN * (b - a)
                e = a + GOLDEN * (b - a)
                fc = _bracket_sqdist(Q, V, X, best, K - 1, c, px, py, pz)
                fe = _bracket_sqdist(Q, V, X, best, K - 1, e, px, py, pz)
                if fc < fe:
                    b = e
                else:
                    a = c
            mid = 0.5 * (a + b)
            flo = _bracket_sqdist(Q, V, X, best, K - 1, lo, px, py, pz)
            fmid = _bracket_sqdist(Q, V, X, best, K - 1, mid, px, py, pz)
            fhi = _bracket_sqdist(Q, V, X, best, K - 1, hi, px, py, pz)
            xbest = lo
            fbest = flo
            if fmid < fbest:
                xbest = mid
                fbest = fmid
            if fhi < fbest:
                xbest = hi
                fbest = fhi
            for it in range(polish):
                xn = _newton(Q, V, X, best, K - 1, xbest, lo, hi, px, py, pz)
                fn = _bracket_sqdist(Q, V, X, best, K - 1, xn, px, py, pz)
                # the decrease near the minimum is below rounding; allow a relative slack
                if not fn <= fbest * (1.0 + TIE_RTOL):
                    break
                xbest = xn
                fbest = fn
            out[j] = xbest
    return out_arr


def chebyshev_basis(int degree, s):
    """Rows ``[T_0(s), ..., T_degree(s)]`` for every entry of ``s`` in [-1, 1]."""
    cdef const double[::1] S = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t m = S.shape[0]
    out_arr = np.empty((m, degree + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef double x
    with nogil:
        for i in range(m):
            x = S[i]
            out[i, 0] = 1.0
            if degree >= 1:
                out[i, 1] = x
            for k in range(2, degree + 1):
                out[i, k] = 2.0 * x * out[i, k - 1] - out[i, k - 2]
    return out_arr
