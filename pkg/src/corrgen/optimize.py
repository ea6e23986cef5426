"""Volume-maximising corridor programs.

3D: minimise the summed trace of ``E`` over a uniform parameter grid, keep
``E`` positive definite on the grid, and keep every retained point outside
the corridor (``x' E x + d' x >= 1``). Definiteness is either exact (a
rotated quadratic cone per grid sample) or the diagonal-dominance LP
restriction. 2D: maximise the summed width ``b_plus - b_minus`` with the two
bounds kept off the points on their side.

All constraints are linear in the Chebyshev coefficients, so assembly is a
matter of stacking basis rows.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .backends import NONNEG, RQUAD, ConicProgram, get_backend, solver_tolerance
from .chebyshev import basis_matrix
from .corridor import Corridor2D, Corridor3D
from .errors import CorrgenError, InputError, SolverError, UnboundedProblemError
from .path import ParametricPath
from .projection import (ProjectedCloud, WrapperConfig, apply_wrapper, project_cloud, retained,
                         split_planar)

log = logging.getLogger(__name__)

DD_LP = "dd-lp"
EXACT_CONE = "exact-cone"
FORMULATIONS = (DD_LP, EXACT_CONE)
_ALIASES = {"lp": DD_LP, "dd": DD_LP, "dd-lp": DD_LP, "cone": EXACT_CONE, "sdp": EXACT_CONE,
            "socp": EXACT_CONE, "exact": EXACT_CONE, "exact-cone": EXACT_CONE}

SQRT2 = np.sqrt(2.0)


def canonical_formulation(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise InputError(f"unknown formulation {name!r}; use one of lp, cone") from None


@dataclass(frozen=True)
class EigenBoundConfig:
    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        if not 0 < self.lambda_min <= self.lambda_max:
            raise InputError("eigen bounds need 0 < lambda_min <= lambda_max")


@dataclass(frozen=True)
class ProblemSpec:
    degree: int
    dimension: int = 3
    samples: int = 100
    formulation: str = DD_LP
    pd_epsilon: float = 1e-6
    eigen_bounds: EigenBoundConfig | None = None
    feas_tol: float = 1e-6
    offset: bool = True
    xi_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "formulation", canonical_formulation(self.formulation))
        object.__setattr__(self, "xi_range", (float(self.xi_range[0]), float(self.xi_range[1])))
        if self.degree < 0:
            raise InputError("degree must be non-negative")
        if self.dimension not in (2, 3):
            raise InputError("dimension must be 2 or 3")
        if self.samples < 4 * (self.degree + 1):
            raise InputError(f"need samples >= 4 (degree + 1) = {4 * (self.degree + 1)}, got {self.samples}")
        if not self.pd_epsilon > 0:
            raise InputError("pd_epsilon must be positive")
        if not self.xi_range[0] < self.xi_range[1]:
            raise InputError("xi_range must be increasing")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(*self.xi_range, self.samples)

    def with_degree(self, degree: int) -> "ProblemSpec":
        return replace(self, degree=degree, samples=max(self.samples, 4 * (degree + 1)))


@dataclass
class Assembled:
    program: ConicProgram
    spec: ProblemSpec
    point_rows: int
    definiteness: int
    assembly_ms: float
    blocks: tuple = ()

    @property
    def constraints(self) -> int:
        return self.point_rows + self.definiteness


@dataclass
class SolveReport:
    status: str
    objective: float
    volume: float
    solve_ms: float
    assembly_ms: float
    constraints: int
    formulation: str
    degree: int
    dimension: int
    backend: str
    point_rows: int = 0
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        key = "area" if self.dimension == 2 else "volume"
        out = {"status": self.status, "objective": self.objective, key: self.volume,
               "solve_ms": round(self.solve_ms, 3), "assembly_ms": round(self.assembly_ms, 3),
               "constraints": self.constraints, "point_rows": self.point_rows,
               "formulation": self.formulation, "degree": self.degree, "dim": self.dimension,
               "backend": self.backend}
        return out


def _rows_ge(G, h):
    """Standard-form (A, b) for ``G x >= h``."""
    return -G, -np.asarray(h, dtype=np.float64)


def _dominance(G, Z, shift, upper=False):
    """Rows for ``|e12| <= e11 - shift`` and ``|e12| <= e22 - shift`` on grid rows ``G``.

    With ``upper`` the shift applies to ``shift I - E`` instead.
    """
    s = -1.0 if upper else 1.0
    blocks = [np.hstack([s * G, -G, Z]), np.hstack([s * G, G, Z]),
              np.hstack([Z, -G, s * G]), np.hstack([Z, G, s * G])]
    G4 = np.vstack(blocks)
    h = np.full(G4.shape[0], shift if not upper else -shift)
    return _rows_ge(G4, h)


def _rquad_blocks(G, Z, shift, upper=False):
    """Stacked (A, b) for one rotated cone per grid row, on ``E - shift I`` (or ``shift I - E``)."""
    N = G.shape[0]
    s = -1.0 if upper else 1.0
    a_row = np.hstack([s * G, Z, Z])
    b_row = np.hstack([Z, Z, s * G])
    t_row = np.hstack([Z, s * SQRT2 * G, Z])
    A = np.empty((3 * N, a_row.shape[1]))
    A[0::3], A[1::3], A[2::3] = -a_row, -b_row, -t_row
    b = np.zeros(3 * N)
    b[0::3] = b[1::3] = -shift if not upper else shift
    return A, b


def assemble_3d(spec: ProblemSpec, projected: ProjectedCloud) -> Assembled:
    """Build the 3D program over ``projected`` (already filtered and wrapped)."""
    t0 = time.perf_counter()
    if len(projected) == 0 and spec.eigen_bounds is None:
        raise UnboundedProblemError("no points, wrapper or eigen bounds: the corridor would be unbounded")
    n1 = spec.degree + 1
    dom = spec.xi_range
    G = basis_matrix(spec.degree, spec.grid, dom)
    Z = np.zeros_like(G)
    nblk = 5 if spec.offset else 3
    nv = nblk * n1

    colsum = G.sum(axis=0)
    c = np.zeros(nv)
    c[0:n1] = colsum
    c[2 * n1:3 * n1] = colsum

    # points: x1^2 e11 + 2 x1 x2 e12 + x2^2 e22 + x1 d1 + x2 d2 >= 1
    B = basis_matrix(spec.degree, projected.par, dom) if len(projected) else np.zeros((0, n1))
    x1 = projected.ortho[:, 0:1]
    x2 = projected.ortho[:, 1:2]
    parts = [x1 * x1 * B, 2.0 * x1 * x2 * B, x2 * x2 * B]
    if spec.offset:
        parts += [x1 * B, x2 * B]
    P = np.hstack(parts) if len(projected) else np.zeros((0, nv))
    scale = 1.0 / np.maximum(1.0, (projected.ortho ** 2).sum(axis=1))
    A_pts, b_pts = _rows_ge(P * scale[:, None], scale)

    pad = (lambda M: np.hstack([M, np.zeros((M.shape[0], nv - 3 * n1))])) if spec.offset else (lambda M: M)
    lin_A, lin_b = [A_pts], [b_pts]
    cone_A, cone_b = [], []
    eps = spec.pd_epsilon
    eb = spec.eigen_bounds
    if spec.formulation == DD_LP:
        A, b = _dominance(G, Z, eps)
        lin_A.append(pad(A))
        lin_b.append(b)
        definiteness = A.shape[0]
        if eb is not None:
            for A, b in (_dominance(G, Z, eb.lambda_min), _dominance(G, Z, eb.lambda_max, upper=True)):
                lin_A.append(pad(A))
                lin_b.append(b)
    else:
        A, b = _rows_ge(np.vstack([np.hstack([G, Z, Z]), np.hstack([Z, Z, G])]), np.full(2 * G.shape[0], eps))
        lin_A.append(pad(A))
        lin_b.append(b)
        A, b = _rquad_blocks(G, Z, eps)
        cone_A.append(pad(A))
        cone_b.append(b)
        definiteness = 3 * G.shape[0]
        if eb is not None:
            for A, b in (_rquad_blocks(G, Z, eb.lambda_min), _rquad_blocks(G, Z, eb.lambda_max, upper=True)):
                cone_A.append(pad(A))
                cone_b.append(b)
    if eb is not None:
        T = np.hstack([G, Z, G])
        A, b = _rows_ge(np.vstack([T, -T]), np.concatenate([np.full(len(G), 2 * eb.lambda_min),
                                                            np.full(len(G), -2 * eb.lambda_max)]))
        lin_A.append(pad(A))
        lin_b.append(b)

    A_lin = np.vstack(lin_A)
    cones = [(NONNEG, A_lin.shape[0])]
    A_all, b_all = [A_lin], [np.concatenate(lin_b)]
    if cone_A:
        Ac = np.vstack(cone_A)
        cones += [(RQUAD, 3)] * (Ac.shape[0] // 3)
        A_all.append(Ac)
        b_all.append(np.concatenate(cone_b))
    prog = ConicProgram(c, sp.csr_matrix(np.vstack(A_all)), np.concatenate(b_all), cones)
    ms = 1e3 * (time.perf_counter() - t0)
    return Assembled(prog, spec, len(projected), definiteness, ms, (A_pts, b_pts))


def _coeffs_3d(x, spec):
    n1 = spec.degree + 1
    C = np.zeros((5, n1))
    k = 5 if spec.offset else 3
    C[:k] = x.reshape(k, n1)
    return C


def _backend(asm, backend):
    return backend if hasattr(backend, "solve") else get_backend(backend, asm.program)


def _run(asm: Assembled, backend):
    be = _backend(asm, backend)
    res = be.solve(asm.program)
    if res.status != "optimal":
        raise SolverError(f"solver {be.name} returned {res.status}", status=res.status, residuals=res.residuals)
    return be, res


def _seed_rows(projected: ProjectedCloud, spec: ProblemSpec, sectors: int = 8) -> np.ndarray:
    """Nearest point per (parameter bin, angular sector): a cheap bounded starting subset."""
    bins = min(spec.samples, 4 * (spec.degree + 1))
    a, b = spec.xi_range
    ib = np.minimum(((projected.par - a) / (b - a) * bins).astype(np.intp), bins - 1)
    ang = np.arctan2(projected.ortho[:, 1], projected.ortho[:, 0])
    isec = np.minimum(((ang + np.pi) / (2 * np.pi) * sectors).astype(np.intp), sectors - 1)
    cell = ib * sectors + isec
    dist = np.hypot(projected.ortho[:, 0], projected.ortho[:, 1])
    order = np.lexsort((dist, cell))
    first = np.ones(len(order), bool)
    first[1:] = cell[order[1:]] != cell[order[:-1]]
    return np.sort(order[first])


def _run_active_set(asm: Assembled, projected: ProjectedCloud, backend, max_rounds: int = 100):
    """Constraint generation over the point rows.

    Solves on a subset of point rows, adds the violated ones and repeats. The
    final iterate satisfies every point row, so it is optimal for the full
    program.
    """
    be = _backend(asm, backend)
    A_pts, b_pts = asm.blocks
    w = asm.point_rows
    tol = getattr(be, "tol", None) or solver_tolerance()
    active = np.zeros(w, bool)
    active[_seed_rows(projected, asm.spec)] = True
    session = be.session(asm.program.with_leading_rows(w, np.flatnonzero(active)))
    total_ms = 0.0
    for rounds in range(1, max_rounds + 1):
        res = session.solve()
        total_ms += res.solve_ms
        if res.status == "unbounded" and not active.all():
            # seed too sparse to bound the subproblem; fall back to everything
            session.add_rows(A_pts[~active], b_pts[~active])
            active[:] = True
            continue
        if res.status != "optimal":
            raise SolverError(f"solver {be.name} returned {res.status}", status=res.status,
                              residuals=res.residuals)
        slack = b_pts - A_pts @ res.x
        slack[active] = np.inf
        bad = np.flatnonzero(slack < -tol)
        if bad.size == 0:
            res.solve_ms = total_ms
            res.residuals = dict(res.residuals, active_rows=int(active.sum()), rounds=rounds)
            return be, res
        take = max(32, int(active.sum()) // 4)
        if bad.size > take:
            bad = bad[np.argpartition(slack[bad], take)[:take]]
        active[bad] = True
        session.add_rows(A_pts[bad], b_pts[bad])
    raise SolverError("constraint generation did not converge", residuals={"rounds": max_rounds})


def solve_3d(spec: ProblemSpec, projected: ProjectedCloud, backend=None,
             path: ParametricPath | None = None, volume_samples: int = 401, active_set: bool = True):
    """Assemble and solve; returns ``(Corridor3D, SolveReport)``.

    ``active_set`` solves by constraint generation over the point rows, which
    reaches the same optimum as the full program at a fraction of the cost
    when most points are inactive.
    """
    asm = assemble_3d(spec, projected)
    if active_set and asm.point_rows > 0:
        be, res = _run_active_set(asm, projected, backend)
    else:
        be, res = _run(asm, backend)
    corridor = Corridor3D.from_coeffs(_coeffs_3d(res.x, spec), spec.xi_range, path)

    residuals = dict(res.residuals)
    if len(projected):
        margin = corridor.eval_inequality(projected.par, projected.ortho)
        residuals["min_point_margin"] = float(margin.min())
        if margin.min() < -spec.feas_tol:
            raise SolverError(f"solution violates point constraints by {-margin.min():.3g}",
                              residuals=residuals)
    min_eig = float(corridor.min_eigenvalues(spec.grid).min())
    residuals["min_eigenvalue"] = min_eig
    if min_eig <= 0:
        raise SolverError("solution is not positive definite on the grid", residuals=residuals)
    volume = corridor.volume(volume_samples)
    report = SolveReport("optimal", float(asm.program.c @ res.x), volume, res.solve_ms, asm.assembly_ms,
                         asm.constraints, spec.formulation, spec.degree, 3, be.name, asm.point_rows, residuals)
    return corridor, report


def assemble_2d(spec: ProblemSpec, positive: ProjectedCloud, negative: ProjectedCloud, axis: int = 0) -> Assembled:
    t0 = time.perf_counter()
    if len(positive) == 0 or len(negative) == 0:
        raise UnboundedProblemError("each side needs points (or a wrapper) to bound the corridor")
    n1 = spec.degree + 1
    dom = spec.xi_range
    G = basis_matrix(spec.degree, spec.grid, dom)
    Z = np.zeros_like(G)
    colsum = G.sum(axis=0)
    c = np.concatenate([-colsum, colsum])
    eps = spec.pd_epsilon

    Bp = basis_matrix(spec.degree, positive.par, dom)
    Bn = basis_matrix(spec.degree, negative.par, dom)
    rows = [
        _rows_ge(np.hstack([G, Z]), np.full(len(G), eps)),                      # b_plus >= eps
        _rows_ge(np.hstack([Z, -G]), np.full(len(G), eps)),                     # b_minus <= -eps
        _rows_ge(np.hstack([-Bp, np.zeros_like(Bp)]), -positive.ortho[:, axis]),  # b_plus <= P+
        _rows_ge(np.hstack([np.zeros_like(Bn), Bn]), negative.ortho[:, axis]),    # b_minus >= P-
    ]
    A = np.vstack([r[0] for r in rows])
    b = np.concatenate([r[1] for r in rows])
    prog = ConicProgram(c, sp.csc_matrix(A), b, [(NONNEG, A.shape[0])])
    ms = 1e3 * (time.perf_counter() - t0)
    return Assembled(prog, spec, len(positive) + len(negative), 2 * len(G), ms)


def solve_2d(spec: ProblemSpec, positive: ProjectedCloud, negative: ProjectedCloud, backend=None,
             path: ParametricPath | None = None, area_samples: int = 401, axis: int = 0):
    asm = assemble_2d(spec, positive, negative, axis)
    be, res = _run(asm, backend)
    n1 = spec.degree + 1
    corridor = Corridor2D.from_coeffs(res.x.reshape(2, n1), spec.xi_range, path)
    residuals = dict(res.residuals)
    pts = ProjectedCloud.concat([positive, negative])
    margin = corridor.eval_inequality(pts.par, pts.ortho[:, axis])
    residuals["min_point_margin"] = float(margin.min())
    if margin.min() < -spec.feas_tol:
        raise SolverError(f"solution violates point constraints by {-margin.min():.3g}", residuals=residuals)
    area = corridor.area(area_samples)
    report = SolveReport("optimal", float(asm.program.c @ res.x), area, res.solve_ms, asm.assembly_ms,
                         asm.constraints, spec.formulation, spec.degree, 2, be.name, asm.point_rows, residuals)
    return corridor, report


def prepare(path: ParametricPath, cloud, spec: ProblemSpec, wrapper: WrapperConfig | None,
            include_end_caps: bool = False):
    """Project ``cloud`` and apply the wrapper; returns the constraint set (2D: the two sides)."""
    proj = retained(project_cloud(path, cloud), include_end_caps)
    planar = spec.dimension == 2
    if wrapper is not None:
        proj = apply_wrapper(proj, wrapper, path, planar=planar)
    if planar:
        return split_planar(proj)
    return proj


def build_corridor(path: ParametricPath, cloud, degree: int, wrapper_radius: float | None = None,
                   formulation: str = DD_LP, dimension: int = 3, samples: int | None = None,
                   backend=None, include_end_caps: bool = False, **spec_kw):
    """End-to-end: project, wrap, solve. Returns ``(corridor, report)``.

    ``samples`` defaults to ``max(100, 4 (degree + 1))``.
    """
    if samples is None:
        samples = max(100, 4 * (degree + 1))
    spec = ProblemSpec(degree=degree, dimension=dimension, samples=samples, formulation=formulation,
                       xi_range=path.xi_range, **spec_kw)
    if dimension == 3 and wrapper_radius is None and spec.eigen_bounds is None:
        raise InputError("a wrapper radius is required in 3D unless eigen bounds are given")
    wrapper = None
    if wrapper_radius is not None:
        wrapper = WrapperConfig(wrapper_radius, 16, samples)
    data = prepare(path, cloud, spec, wrapper, include_end_caps)
    if dimension == 2:
        return solve_2d(spec, *data, backend=backend, path=path)
    return solve_3d(spec, data, backend=backend, path=path)


@dataclass
class SweepRow:
    degree: int
    formulation: str
    volume: float
    solve_ms: float
    assembly_ms: float
    constraints: int
    ok: bool = True
    error: str = ""

    def as_csv_row(self):
        vol = f"{self.volume:.9g}" if self.ok else "nan"
        return [self.degree, self.formulation, vol, f"{self.solve_ms:.3f}", f"{self.assembly_ms:.3f}",
                self.constraints]


def degree_sweep(template: ProblemSpec, projected, degrees, formulations=FORMULATIONS,
                 backend=None, jobs: int = 1, path: ParametricPath | None = None):
    """Solve the same constraint set for every (degree, formulation); rows come back in degree order.

    ``projected`` is a ProjectedCloud in 3D or a ``(positive, negative)`` pair in 2D.
    """
    degrees = list(degrees)
    if degrees != sorted(degrees):
        raise InputError("degrees must be ascending")
    forms = [canonical_formulation(f) for f in formulations]
    tasks = [(d, f) for d in degrees for f in forms]

    def one(task):
        d, f = task
        spec = replace(template.with_degree(d), formulation=f)
        try:
            if spec.dimension == 2:
                _, rep = solve_2d(spec, *projected, backend=backend, path=path)
            else:
                _, rep = solve_3d(spec, projected, backend=backend, path=path)
            return SweepRow(d, f, rep.volume, rep.solve_ms, rep.assembly_ms, rep.constraints)
        except CorrgenError as exc:
            log.warning("degree %d %s failed: %s", d, f, exc)
            return SweepRow(d, f, float("nan"), float("nan"), float("nan"), 0, ok=False, error=str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, tasks))
    return [one(t) for t in tasks]
