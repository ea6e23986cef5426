import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as npcheb

from corrgen.chebyshev import ChebyshevPoly, basis_matrix, clenshaw, derivative, eval_basis_row
from corrgen.chebyshev import eval as cheb_eval
from corrgen.errors import DomainError


def test_pure_t3():
    assert cheb_eval(ChebyshevPoly([0, 0, 0, 1]), 0.5) == pytest.approx(-1.0, abs=1e-15)


def test_constant_and_endpoint():
    assert ChebyshevPoly([2.0])(0.3) == 2.0
    assert ChebyshevPoly([0, 1], (0.0, 10.0))(10.0) == pytest.approx(1.0)


def test_basis_rows():
    np.testing.assert_allclose(eval_basis_row(2, 0.0), [1, 0, -1])
    np.testing.assert_allclose(eval_basis_row(0, 0.7), [1])
    np.testing.assert_allclose(eval_basis_row(3, 0.5), [1, 0.5, -0.5, -1], atol=1e-15)


def test_out_of_domain():
    with pytest.raises(DomainError):
        ChebyshevPoly([1, 2], (0, 1))(1.5)


def test_derivative_examples():
    np.testing.assert_array_equal(derivative(ChebyshevPoly([5.0])).coeffs, [0.0])
    np.testing.assert_allclose(derivative(ChebyshevPoly([0, 1])).coeffs, [1.0])


def test_derivative_finite_difference(rng):
    p = ChebyshevPoly([0, 0, 1], (0.0, 2.0))
    dp = p.derivative()
    h = 1e-5
    for x in rng.uniform(h, 2 - h, 100):
        fd = (p(x + h) - p(x - h)) / (2 * h)
        assert abs(dp(x) - fd) <= 1e-7


def test_derivative_matches_numpy(rng):
    c = rng.normal(size=12)
    np.testing.assert_allclose(ChebyshevPoly(c).derivative().coeffs, npcheb.chebder(c), atol=1e-12)


coeff_lists = st.lists(st.floats(-1, 1), min_size=1, max_size=31)


@settings(max_examples=200, deadline=None)
@given(coeff_lists, st.floats(-1, 1))
def test_matches_trig_form(c, s):
    k = np.arange(len(c))
    direct = float(np.sum(np.asarray(c) * np.cos(k * np.arccos(s))))
    assert abs(clenshaw(np.asarray(c), s) - direct) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 25), st.floats(-3, 5))
def test_basis_nesting(n, x):
    dom = (-3.0, 5.0)
    a = eval_basis_row(n, x, dom)
    b = eval_basis_row(n + 1, x, dom)
    np.testing.assert_array_equal(a, b[:-1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=16), st.floats(0.05, 0.95))
def test_second_derivative_finite_difference(c, x):
    p = ChebyshevPoly(c, (0.0, 1.0))
    d2 = p.derivative().derivative()
    h = 1e-4
    fd = (p(x + h) - 2 * p(x) + p(x - h)) / h**2
    # truncation O(h^2 f'''') and rounding O(eps / h^2) bounded by the coefficient scale
    scale = max(1.0, np.abs(d2(np.linspace(0, 1, 201))).max())
    assert abs(d2(x) - fd) <= 1e-5 * scale * len(c) ** 4


def test_basis_matrix_rows_match_eval(rng):
    xi = rng.uniform(0, 4, 50)
    c = rng.normal(size=8)
    B = basis_matrix(7, xi, (0.0, 4.0))
    np.testing.assert_allclose(B @ c, ChebyshevPoly(c, (0.0, 4.0))(xi), atol=1e-12)


def test_to_list_roundtrip():
    p = ChebyshevPoly([1.5, -2.0, 0.25], (1.0, 3.0))
    q = ChebyshevPoly(p.to_list(), p.domain)
    np.testing.assert_array_equal(q.coeffs, p.coeffs)
    assert q.domain == p.domain
