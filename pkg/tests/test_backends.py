import numpy as np
import pytest
import scipy.sparse as sp

from corrgen.backends import (DEFAULT_TOL, NONNEG, RQUAD, ClarabelBackend, ConicProgram, HighsBackend,
                              get_backend, solver_tolerance)


def small_lp():
    # min -x - y  s.t.  x + 2y <= 4,  3x + y <= 6,  x, y >= 0   -> (1.6, 1.2)
    A = np.array([[1, 2], [3, 1], [-1, 0], [0, -1]], float)
    b = np.array([4, 6, 0, 0], float)
    return ConicProgram([-1.0, -1.0], A, b, [(NONNEG, 4)])


@pytest.mark.parametrize("backend", [ClarabelBackend(), HighsBackend()])
def test_small_lp(backend):
    res = backend.solve(small_lp())
    assert res.status == "optimal"
    np.testing.assert_allclose(res.x, [1.6, 1.2], atol=1e-6)
    assert res.objective == pytest.approx(-2.8, abs=1e-6)


def test_rotated_cone():
    # max t  s.t. (a, b, t) in rquad, a = 1, b = 2  ->  t = 2
    # variables (a, b, t); cone slack s = x
    A = np.vstack([np.eye(3)[:2], -np.eye(3)[:2], -np.eye(3)])
    b = np.array([1, 2, -1, -2, 0, 0, 0], float)
    prog = ConicProgram([0, 0, -1.0], A, b, [(NONNEG, 4), (RQUAD, 3)])
    res = ClarabelBackend().solve(prog)
    assert res.status == "optimal"
    assert res.x[2] == pytest.approx(2.0, abs=1e-6)
    assert prog.violation(res.x) <= 1e-6


def test_highs_rejects_cones():
    prog = ConicProgram([0, 0, 0], -np.eye(3), np.zeros(3), [(RQUAD, 3)])
    with pytest.raises(ValueError):
        HighsBackend().solve(prog)


def test_unbounded_and_infeasible():
    prog = ConicProgram([-1.0], [[-1.0]], [0.0], [(NONNEG, 1)])
    assert ClarabelBackend().solve(prog).status == "unbounded"
    assert HighsBackend().solve(prog).status == "unbounded"
    prog = ConicProgram([1.0], [[1.0], [-1.0]], [-1.0, -1.0], [(NONNEG, 2)])  # x <= -1, x >= 1
    assert ClarabelBackend().solve(prog).status == "infeasible"
    assert HighsBackend().solve(prog).status == "infeasible"


@pytest.mark.parametrize("backend", [ClarabelBackend(), HighsBackend()])
def test_session_rows_match_full_solve(backend):
    full = small_lp()
    part = full.with_leading_rows(2, [0])
    sess = backend.session(part)
    first = sess.solve()
    assert first.status == "optimal"
    sess.add_rows(full.A[1:2], full.b[1:2])
    res = sess.solve()
    np.testing.assert_allclose(res.x, [1.6, 1.2], atol=1e-6)


def test_with_leading_rows_shape():
    prog = small_lp().with_leading_rows(2, [1])
    assert prog.num_rows == 3 and prog.cones == [(NONNEG, 3)]
    with pytest.raises(ValueError):
        small_lp().with_leading_rows(5, [0])


def test_shape_validation():
    with pytest.raises(ValueError):
        ConicProgram([1.0, 2.0], sp.eye(3), np.zeros(3), [(NONNEG, 3)])
    with pytest.raises(ValueError):
        ConicProgram([1.0], np.ones((2, 1)), np.zeros(2), [(RQUAD, 2)])


def test_get_backend_choice():
    assert get_backend(None, small_lp()).name == "highs"
    cone = ConicProgram([0, 0, 0], -np.eye(3), np.zeros(3), [(RQUAD, 3)])
    assert get_backend(None, cone).name == "clarabel"
    with pytest.raises(ValueError):
        get_backend("mosek")


def test_tolerance_env(monkeypatch):
    monkeypatch.delenv("CORRGEN_SOLVER_TOL", raising=False)
    assert solver_tolerance() == DEFAULT_TOL
    monkeypatch.setenv("CORRGEN_SOLVER_TOL", "1e-6")
    assert solver_tolerance() == 1e-6
    monkeypatch.setenv("CORRGEN_SOLVER_TOL", "junk")
    assert solver_tolerance() == DEFAULT_TOL
