import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eqindex.clifford import (
    SIGMA_1,
    CliffordAction,
    dirac_symbol,
    exterior_basis,
    make_exterior_action,
    make_pauli_action,
    make_plane_action,
    verify_clifford,
)


def test_pauli_generators():
    a = make_pauli_action()
    assert np.allclose(a.generators[0], SIGMA_1 / 1j)
    assert np.allclose(a.c([1, 1, 1]) @ a.c([1, 1, 1]), -3 * np.eye(2))
    g = a.generators
    assert np.allclose(g[0] @ g[1] + g[1] @ g[0], 0)
    assert verify_clifford(a).passed


def test_plane_action_is_odd():
    a = make_plane_action()
    assert a.graded
    assert np.allclose(a.c([1, 0]), SIGMA_1 / 1j)
    xi = np.array([0.3, -1.2])
    m = a.c(xi)
    assert m[0, 0] == 0 and m[1, 1] == 0
    assert np.allclose(m @ m, -(xi @ xi) * np.eye(2))


def test_exterior_one_dimensional():
    a = make_exterior_action(1)
    assert np.array_equal(a.generators[0], np.array([[0, -1], [1, 0]]))


@pytest.mark.parametrize("n", range(1, 9))
def test_exterior_relations(n):
    a = make_exterior_action(n)
    assert a.fiber_dim == 2**n
    report = verify_clifford(a)
    assert report.passed and report.grading_deviation == 0


def test_exterior_basis_order():
    assert exterior_basis(3) == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]


def test_exterior_range():
    with pytest.raises(ValueError):
        make_exterior_action(9)


def test_broken_action_detected():
    gens = make_pauli_action().generators.copy()
    gens[2] = gens[0]
    assert not verify_clifford(CliffordAction(gens)).passed


def test_round_trip():
    a = make_exterior_action(2)
    b = CliffordAction.from_dict(a.to_dict())
    assert np.array_equal(a.generators, b.generators) and a.grading == b.grading


@given(arrays(np.float64, 3, elements=st.floats(-10, 10)))
def test_square_is_minus_norm(v):
    a = make_pauli_action()
    assert np.allclose(a.c(v) @ a.c(v), -(v @ v) * np.eye(2), atol=1e-9)
    assert np.allclose(dirac_symbol(a, v), 1j * a.c(v))
