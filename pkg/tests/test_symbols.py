import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqindex.clifford import dirac_symbol, make_exterior_action, make_pauli_action, make_plane_action
from eqindex.exprs import ExpressionError, fourier_coefficients, parse_expression
from eqindex.symbols import (
    DiffOpCoefficients,
    circle_operator,
    coordinate_orbits,
    deformed_symbol_check,
    deformed_symbol_samples,
    dirac_operator,
    ellipticity_check,
    laplacian,
    leading_symbol,
    partial_derivative,
    plane_taming_field,
    rescaled_application,
    rotation_orbits,
    scalar_operator_from_expressions,
    sphere_samples,
    symbol_limit_check,
    transversal_ellipticity_check,
    zero_operator,
)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_laplacian_symbol_is_norm_squared(n):
    op = laplacian(n, {(0,) * n: 5.0})
    for xi in sphere_samples(n, 32, seed=1):
        assert abs(leading_symbol(op, np.zeros(n), xi)[0, 0] - xi @ xi) <= 1e-12


@pytest.mark.parametrize("action", [make_pauli_action(), make_plane_action(), make_exterior_action(3)])
def test_dirac_symbol(action):
    op = dirac_operator(action)
    for xi in sphere_samples(action.vector_dim, 16, seed=2):
        assert np.abs(leading_symbol(op, np.zeros(action.vector_dim), xi) - dirac_symbol(action, xi)).max() <= 1e-12


def test_ellipticity_verdicts():
    assert ellipticity_check(laplacian(2)).elliptic
    assert ellipticity_check(dirac_operator(make_plane_action())).elliptic
    assert not ellipticity_check(partial_derivative(2, 0)).elliptic
    assert not ellipticity_check(zero_operator(2)).elliptic
    assert ellipticity_check(circle_operator(lambda x: np.sin(x[0]))).elliptic


def test_torus_operator_transversally_elliptic():
    op = partial_derivative(2, 0).scaled(-1j)
    pts = np.random.default_rng(0).uniform(0, 2 * np.pi, (8, 2))
    assert transversal_ellipticity_check(op, coordinate_orbits(2, [1]), pts).elliptic
    assert not ellipticity_check(op, pts).elliptic
    # along the orbit direction the symbol dies
    assert not transversal_ellipticity_check(op, coordinate_orbits(2, [0]), pts).elliptic


def test_rotation_orbits_flag_origin():
    op = laplacian(2)
    v = transversal_ellipticity_check(op, rotation_orbits(), np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    assert v.flagged_points == [[0.0, 0.0]]


def test_symbol_limit_converges():
    op = circle_operator(lambda x: 3.0)
    x, xi = np.array([0.4]), np.array([1.0])
    # t^-1 (t + 3) - 1 = 3 / t
    assert symbol_limit_check(op, x, xi, [10.0]) == pytest.approx(0.3)
    assert symbol_limit_check(op, x, xi, [1e6]) < 1e-5
    assert np.allclose(rescaled_application(op, x, xi, 2.0), 2.5)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 100))
def test_laplacian_symbol_homogeneous(a, b, t):
    op = laplacian(2)
    xi = np.array([a, b])
    assert leading_symbol(op, np.zeros(2), t * xi)[0, 0] == pytest.approx(t**2 * (xi @ xi), rel=1e-12, abs=1e-12)


def test_deformed_symbol_invertible_off_origin():
    rep = deformed_symbol_check(make_plane_action(), plane_taming_field(), deformed_symbol_samples())
    assert rep.passed
    assert all(p["x"] == [0.0, 0.0] for p in rep.noninvertible)
    assert rep.noninvertible and rep.min_singular_value_outside > 0.1


def test_taming_field_equivariant():
    pts = np.random.default_rng(3).standard_normal((5, 2))
    assert plane_taming_field().equivariance_defect(pts) < 1e-12


def test_bad_tables_rejected():
    with pytest.raises(ValueError):
        DiffOpCoefficients(1, 2, 1, 1, {(2, 0): lambda x: 1.0})
    with pytest.raises(ValueError):
        DiffOpCoefficients(2, 1, 1, 1, {(1,): lambda x: 1.0})


def test_expression_operator():
    op = scalar_operator_from_expressions(2, 2, {"2,0": "1", "0,2": "1 + 0*x*y", "0,0": "sin(x) + i*y**2"})
    assert ellipticity_check(op).elliptic
    assert leading_symbol(op, [1.0, 2.0], [3.0, 4.0])[0, 0] == pytest.approx(25.0)


@pytest.mark.parametrize("text", ["__import__('os')", "x**y", "x**-1", "exp(x)", "z", "x.real", "True"])
def test_expression_rejects(text):
    with pytest.raises(ExpressionError):
        parse_expression(text, 2)


def test_expression_values():
    f = parse_expression("2*x1 - x2/4 + cos(t) + i", 2)
    assert f([0.0, 4.0]) == pytest.approx(0 - 1 + 1 + 1j)


def test_fourier_of_sine():
    coeffs = fourier_coefficients(parse_expression("sin(t)", 1), 8)
    assert set(coeffs) == {1, -1}
    assert coeffs[1] == pytest.approx(-0.5j) and coeffs[-1] == pytest.approx(0.5j)
