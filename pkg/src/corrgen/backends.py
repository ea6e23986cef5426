"""Convex solver backends for programs in conic standard form.

A :class:`ConicProgram` reads

    minimize    c' x
    subject to  b - A x = s,  s in K

where ``K`` is a product of cones listed in row order. Two cone kinds are
used: ``"nonneg"`` (componentwise ``s >= 0``) and ``"rquad"``, a block
``(a, b, t)`` with ``2 a b >= t**2`` and ``a, b >= 0``. The 2x2 condition
``E >= 0`` is exactly ``(E11, E22, sqrt(2) E12)`` in ``rquad``.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

NONNEG = "nonneg"
RQUAD = "rquad"

DEFAULT_TOL = 1e-8


def solver_tolerance() -> float:
    """Backend tolerance, overridable with ``CORRGEN_SOLVER_TOL``."""
    raw = os.environ.get("CORRGEN_SOLVER_TOL")
    if raw:
        try:
            val = float(raw)
        except ValueError:
            return DEFAULT_TOL
        if val > 0:
            return val
    return DEFAULT_TOL


@dataclass
class ConicProgram:
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cones: list = field(default_factory=list)  # [(kind, size), ...] in row order

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        self.A = sp.csr_matrix(self.A)
        self.b = np.asarray(self.b, dtype=np.float64)
        rows = sum(size for _, size in self.cones)
        if self.A.shape != (rows, self.c.size) or self.b.size != rows:
            raise ValueError(f"program shape mismatch: A {self.A.shape}, b {self.b.size}, cones {rows}")
        for kind, size in self.cones:
            if kind not in (NONNEG, RQUAD) or (kind == RQUAD and size != 3):
                raise ValueError(f"unsupported cone {kind}/{size}")

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.b.size

    @property
    def is_lp(self) -> bool:
        return all(kind == NONNEG for kind, _ in self.cones)

    def count(self, kind) -> int:
        return sum(size if kind == NONNEG else 1 for k, size in self.cones if k == kind)

    def triplets(self):
        """Sparse ``(row, col, value)`` form of ``A``."""
        coo = self.A.tocoo()
        return coo.row, coo.col, coo.data

    def with_leading_rows(self, lead: int, keep) -> "ConicProgram":
        """Copy keeping only rows ``keep`` among the first ``lead`` rows (all nonneg)."""
        if not self.cones or self.cones[0][0] != NONNEG or self.cones[0][1] < lead:
            raise ValueError("leading rows must lie in the first nonnegative cone")
        keep = np.asarray(keep, dtype=np.intp)
        idx = np.concatenate([keep, np.arange(lead, self.num_rows)])
        cones = [(NONNEG, self.cones[0][1] - lead + keep.size)] + list(self.cones[1:])
        return ConicProgram(self.c, self.A[idx], self.b[idx], cones)

    def slack(self, x) -> np.ndarray:
        return self.b - self.A @ x

    def violation(self, x) -> float:
        """Largest cone violation of ``x`` (0 when feasible)."""
        s = self.slack(x)
        worst = 0.0
        r = 0
        for kind, size in self.cones:
            blk = s[r:r + size]
            if kind == NONNEG:
                if size:
                    worst = max(worst, float(-blk.min()))
            else:
                a, b, t = blk
                worst = max(worst, -a, -b, float(t * t - 2.0 * a * b) / max(1.0, abs(a) + abs(b)))
            r += size
        return max(worst, 0.0)


@dataclass
class BackendResult:
    x: np.ndarray | None
    status: str  # optimal | infeasible | unbounded | numerical-failure
    objective: float
    solve_ms: float
    residuals: dict = field(default_factory=dict)


class ClarabelBackend:
    """Interior-point conic solver; handles both cone kinds."""

    name = "clarabel"

    def __init__(self, tol: float | None = None):
        self.tol = tol

    def solve(self, prog: ConicProgram) -> BackendResult:
        import clarabel

        tol = self.tol or solver_tolerance()
        # (a, b, t) rotated  ->  ((a+b)/sqrt2, (a-b)/sqrt2, t) second-order
        rows, cols, vals = [], [], []
        cones = []
        r = 0
        h = 1.0 / np.sqrt(2.0)
        for kind, size in prog.cones:
            if kind == NONNEG:
                cones.append(clarabel.NonnegativeConeT(size))
                rows.extend(range(r, r + size))
                cols.extend(range(r, r + size))
                vals.extend([1.0] * size)
            else:
                rows += [r, r, r + 1, r + 1, r + 2]
                cols += [r, r + 1, r, r + 1, r + 2]
                vals += [h, h, h, -h, 1.0]
                cones.append(clarabel.SecondOrderConeT(3))
            r += size
        T = sp.csc_matrix((vals, (rows, cols)), shape=(r, r))
        A = T @ prog.A
        b = T @ prog.b
        n = prog.num_vars
        P = sp.csc_matrix((n, n))
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.tol_feas = tol
        settings.tol_gap_abs = tol
        settings.tol_gap_rel = tol
        t0 = time.perf_counter()
        solver = clarabel.DefaultSolver(P, prog.c, sp.csc_matrix(A), b, cones, settings)
        sol = solver.solve()
        ms = 1e3 * (time.perf_counter() - t0)
        name = str(sol.status)
        x = np.asarray(sol.x, dtype=np.float64)
        if name in ("Solved", "AlmostSolved"):
            status = "optimal"
        elif "PrimalInfeasible" in name:
            status = "infeasible"
        elif "DualInfeasible" in name:
            status = "unbounded"
        else:
            status = "numerical-failure"
        res = {"clarabel_status": name, "primal_residual": float(sol.r_prim), "dual_residual": float(sol.r_dual),
               "cone_violation": prog.violation(x) if status == "optimal" else float("nan")}
        return BackendResult(x if status == "optimal" else None, status, float(sol.obj_val), ms, res)

    def session(self, prog: ConicProgram) -> "ColdSession":
        return ColdSession(self, prog)


class HighsBackend:
    """HiGHS dual simplex (via ``highspy``); linear programs only.

    Sessions keep the HiGHS model alive so rows added between solves are
    handled by a warm-started re-solve from the previous basis.
    """

    name = "highs"

    def __init__(self, tol: float | None = None):
        self.tol = tol

    def solve(self, prog: ConicProgram) -> BackendResult:
        return self.session(prog).solve()

    def session(self, prog: ConicProgram) -> "HighsSession":
        if not prog.is_lp:
            raise ValueError("HiGHS backend only accepts nonnegative cones")
        return HighsSession(prog, self.tol or solver_tolerance())


class HighsSession:
    def __init__(self, prog: ConicProgram, tol: float):
        import highspy

        self._inf = highspy.kHighsInf
        self._status = highspy.HighsModelStatus
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("primal_feasibility_tolerance", max(tol, 1e-10))
        h.setOptionValue("dual_feasibility_tolerance", max(tol, 1e-10))
        n = prog.num_vars
        h.addVars(n, np.full(n, -self._inf), np.full(n, self._inf))
        h.changeColsCost(n, np.arange(n, dtype=np.int32), prog.c)
        self._h = h
        self.c = prog.c
        self.add_rows(prog.A, prog.b)

    def add_rows(self, A, b):
        """Append rows ``A x <= b``."""
        A = sp.csr_matrix(A)
        if A.shape[0] == 0:
            return
        self._h.addRows(A.shape[0], np.full(A.shape[0], -self._inf), np.asarray(b, dtype=np.float64),
                        A.nnz, A.indptr[:-1].astype(np.int32), A.indices.astype(np.int32), A.data)

    def solve(self) -> BackendResult:
        h = self._h
        t0 = time.perf_counter()
        h.run()
        ms = 1e3 * (time.perf_counter() - t0)
        st = h.getModelStatus()
        S = self._status
        if st == S.kOptimal:
            status = "optimal"
        elif st == S.kInfeasible:
            status = "infeasible"
        elif st in (S.kUnbounded, S.kUnboundedOrInfeasible):
            status = "unbounded"
        else:
            status = "numerical-failure"
        info = h.getInfo()
        res = {"highs_status": h.modelStatusToString(st), "iterations": int(info.simplex_iteration_count),
               "primal_infeasibility": float(info.max_primal_infeasibility)}
        x = np.asarray(h.getSolution().col_value, dtype=np.float64) if status == "optimal" else None
        obj = float(self.c @ x) if x is not None else float("nan")
        return BackendResult(x, status, obj, ms, res)


class ColdSession:
    """Session for backends without warm starts: appended rows trigger a full re-solve."""

    def __init__(self, backend, prog: ConicProgram):
        if not prog.cones or prog.cones[0][0] != NONNEG:
            raise ValueError("sessions append to a leading nonnegative cone")
        self._backend = backend
        self._prog = prog

    def add_rows(self, A, b):
        p = self._prog
        A = sp.csr_matrix(A)
        if A.shape[0] == 0:
            return
        cones = [(NONNEG, p.cones[0][1] + A.shape[0])] + list(p.cones[1:])
        self._prog = ConicProgram(p.c, sp.vstack([A, p.A], format="csr"), np.concatenate([b, p.b]), cones)

    def solve(self) -> BackendResult:
        return self._backend.solve(self._prog)


BACKENDS = {"clarabel": ClarabelBackend, "highs": HighsBackend}


def get_backend(name: str | None, prog: ConicProgram | None = None, tol: float | None = None):
    """Backend by name; ``None`` picks HiGHS for LPs and Clarabel otherwise."""
    if name is None:
        name = "highs" if prog is not None and prog.is_lp else "clarabel"
    try:
        return BACKENDS[name](tol)
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None
