"""Pure numpy implementations of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

GOLDEN = 0.6180339887498949
# stations within this relative distance of the nearest count as tied
TIE_RTOL = 1e-12

# rows per block in the brute-force station search; bounds peak memory
_CHUNK = 512


def _sqdist(pos, vel, xi, k, x, p):
    h = xi[k + 1] - xi[k]
    u = (x - xi[k]) / h
    u2 = u * u
    u3 = u2 * u
    h00 = 2.0 * u3 - 3.0 * u2 + 1.0
    h10 = u3 - 2.0 * u2 + u
    h01 = -2.0 * u3 + 3.0 * u2
    h11 = u3 - u2
    g = (h00[:, None] * pos[k] + (h10 * h)[:, None] * vel[k]
         + h01[:, None] * pos[k + 1] + (h11 * h)[:, None] * vel[k + 1])
    d = p - g
    return d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2]


def _bracket_sqdist(pos, vel, xi, best, x, p):
    k = np.where(x < xi[best], best - 1, best)
    k = np.clip(k, 0, len(xi) - 2)
    return _sqdist(pos, vel, xi, k, x, p)


def _newton(pos, vel, xi, best, x, lo, hi, p):
    k = np.where(x < xi[best], best - 1, best)
    k = np.clip(k, 0, len(xi) - 2)
    h = xi[k + 1] - xi[k]
    u = (x - xi[k]) / h
    u2 = u * u
    u3 = u2 * u
    h00 = 2.0 * u3 - 3.0 * u2 + 1.0
    h10 = u3 - 2.0 * u2 + u
    h01 = -2.0 * u3 + 3.0 * u2
    h11 = u3 - u2
    d00 = 6.0 * u2 - 6.0 * u
    d10 = 3.0 * u2 - 4.0 * u + 1.0
    d01 = -6.0 * u2 + 6.0 * u
    d11 = 3.0 * u2 - 2.0 * u
    s00 = 12.0 * u - 6.0
    s10 = 6.0 * u - 4.0
    s01 = -12.0 * u + 6.0
    s11 = 6.0 * u - 2.0
    hh = h[:, None]
    P0, P1, V0, V1 = pos[k], pos[k + 1], vel[k], vel[k + 1]
    r = p - (h00[:, None] * P0 + h10[:, None] * hh * V0 + h01[:, None] * P1 + h11[:, None] * hh * V1)
    g1 = (d00[:, None] * P0 + d10[:, None] * hh * V0 + d01[:, None] * P1 + d11[:, None] * hh * V1) / hh
    g2 = (s00[:, None] * P0 + s10[:, None] * hh * V0 + s01[:, None] * P1 + s11[:, None] * hh * V1) / (hh * hh)
    num = r[:, 0] * g1[:, 0] + r[:, 1] * g1[:, 1] + r[:, 2] * g1[:, 2]
    den = (g1[:, 0] * g1[:, 0] - r[:, 0] * g2[:, 0] + g1[:, 1] * g1[:, 1] - r[:, 1] * g2[:, 1]
           + g1[:, 2] * g1[:, 2] - r[:, 2] * g2[:, 2])
    ok = den > 0.0
    step = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
    return np.clip(x + step, lo, hi)


def project_points(points, xi, pos, vel, iters=30, polish=3):
    points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    vel = np.ascontiguousarray(vel, dtype=np.float64)
    m = points.shape[0]
    K = xi.shape[0]
    if m == 0:
        return np.empty(0)

    best = np.empty(m, dtype=np.intp)
    for start in range(0, m, _CHUNK):
        block = points[start:start + _CHUNK]
        diff = block[:, None, :] - pos[None, :, :]
        d = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1] + diff[..., 2] * diff[..., 2]
        dmin = d.min(axis=1, keepdims=True) * (1.0 + TIE_RTOL)
        best[start:start + _CHUNK] = np.argmax(d <= dmin, axis=1)

    lo = xi[np.maximum(best - 1, 0)]
    hi = xi[np.minimum(best + 1, K - 1)]
    a = lo.copy()
    b = hi.copy()
    for _ in range(iters):
        c = b - GOLDEN * (b - a)
        e = a + GOLDEN * (b - a)
        fc = _bracket_sqdist(pos, vel, xi, best, c, points)
        fe = _bracket_sqdist(pos, vel, xi, best, e, points)
        left = fc < fe
        b = np.where(left, e, b)
        a = np.where(left, a, c)
    mid = 0.5 * (a + b)
    flo = _bracket_sqdist(pos, vel, xi, best, lo, points)
    fmid = _bracket_sqdist(pos, vel, xi, best, mid, points)
    fhi = _bracket_sqdist(pos, vel, xi, best, hi, points)

    out = lo.copy()
    fbest = flo.copy()
    take = fmid < fbest
    out[take] = mid[take]
    fbest[take] = fmid[take]
    take = fhi < fbest
    out[take] = hi[take]
    fbest[take] = fhi[take]
    live = np.ones(m, bool)
    for _ in range(polish):
        xn = _newton(pos, vel, xi, best, out, lo, hi, points)
        fn = _bracket_sqdist(pos, vel, xi, best, xn, points)
        # the decrease near the minimum is below rounding; allow a relative slack
        live &= fn <= fbest * (1.0 + TIE_RTOL)
        out = np.where(live, xn, out)
        fbest = np.where(live, fn, fbest)
    return out


def chebyshev_basis(degree, s):
    s = np.ascontiguousarray(s, dtype=np.float64).ravel()
    out = np.empty((s.shape[0], degree + 1))
    out[:, 0] = 1.0
    if degree >= 1:
        out[:, 1] = s
    for k in range(2, degree + 1):
        out[:, k] = 2.0 * s * out[:, k - 1] - out[:, k - 2]
    return out
