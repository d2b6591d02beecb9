import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqindex import oracles
from eqindex.charring import CharacterElement, WindowedCharacter, char_dim
from eqindex.index import (
    IndeterminateRankError,
    RankPolicy,
    analyze_matrix,
    deformed_plane_index,
    equivariant_index,
    fredholm_index,
    numeric_kernel,
)
from eqindex.models import (
    IsotypicBlockOperator,
    build_circle_model,
    build_derham_circle_model,
    build_plane_weight_model,
    build_product_model,
    build_shift_model,
    build_toeplitz_model,
    plane_grid,
    random_finite_rank_perturbation,
)

# frozen outputs of the reference computations in eqindex.oracles
TOEPLITZ_DENSE_ORACLE = {
    ((1, 1.0),): -1,
    ((-2, 1.0),): 2,
    ((0, 0.5), (1, 1.0)): -1,
    ((0, 2.0), (1, 1.0)): 0,
    ((-1, 1.0), (0, 0.3), (1, 0.1)): 1,
    ((-1, 2.0), (1, 1.0)): 1,
}
# lowest eigenvalue of D+D- per angular mode p, n = 200 cells, R = 8
LANDAU_LOWEST = {-2: -4.0008e-4, 0: -4.0008e-4, 1: 3.9996, 2: 7.9996}
# |<closed form, computed cokernel>| at n_r = 200, R = 8
PROFILE_OVERLAP = {0: 0.99999832, 1: 0.99999998, 4: 0.99999999}
# smallest singular value per weight at n_r = 200: 2 sqrt|m| below zero, 2 above
SIGMA_MIN = {-4: 3.99924, -1: 1.99935, 0: 2.00022, 3: 2.00000}


def test_numeric_kernel_examples():
    assert numeric_kernel(np.zeros((3, 3))).dim == 3
    assert numeric_kernel(np.eye(4)).dim == 0
    assert numeric_kernel(build_shift_model(6).to_dense()).dim == 2


def test_gap_ratio_conventions():
    d = numeric_kernel(build_shift_model(20).to_dense())
    assert d.gap_ratio == math.inf and d.confident
    full = numeric_kernel(np.eye(3))
    assert full.gap_ratio == pytest.approx(1e10)
    close = numeric_kernel(np.diag([1.0, 1e-6 * 0.9, 1e-6 * 1.5]))
    assert not close.confident


def test_threshold_is_relative_with_floor():
    p = RankPolicy()
    assert p.threshold(1.0) == 1e-6
    assert p.threshold(1e-8) == 1e-10


def test_shift_index():
    assert fredholm_index(build_shift_model(20)) == 2


def test_toeplitz_z_index():
    assert fredholm_index(build_toeplitz_model({1: 1}, 64)) == -1


@pytest.mark.parametrize("symbol", list(TOEPLITZ_DENSE_ORACLE), ids=str)
def test_toeplitz_against_frozen_oracle(symbol):
    coeffs = dict(symbol)
    expected = TOEPLITZ_DENSE_ORACLE[symbol]
    assert fredholm_index(build_toeplitz_model(coeffs, 64)) == expected
    assert oracles.toeplitz_index_dense(coeffs, 64) == expected
    assert -oracles.winding_number(coeffs) == expected


def test_indeterminate_raises():
    a = np.diag([1.0, 1e-6 * 0.9, 1e-6 * 1.5])
    with pytest.raises(IndeterminateRankError):
        fredholm_index(a)


def test_circle_kernel():
    r = analyze_matrix(build_circle_model(None, 32).to_dense())
    assert r.kernel_dim == 1 and r.index == 0 and r.confident
    assert abs(oracles.circle_kernel_monodromy() - 1) < 1e-8
    a = build_circle_model(None, 32).to_dense()
    c = oracles.circle_kernel_fourier(32)
    assert np.linalg.norm(a @ c) / np.linalg.norm(c) < 1e-8


def test_circle_with_nonintegral_mean_has_no_kernel():
    # V = 1/2: monodromy -1, spectrum k + 1/2 avoids zero
    assert abs(oracles.circle_kernel_monodromy({0: 0.5}) + 1) < 1e-8
    assert analyze_matrix(build_circle_model({0: 0.5}, 16).to_dense()).kernel_dim == 0


def test_equivariant_shift():
    char = equivariant_index(build_shift_model(20, labeled=True))
    assert char.entries == {0: 1, 1: 1}


def test_equivariant_product():
    char = equivariant_index(build_product_model(build_shift_model(20), 4))
    assert isinstance(char, WindowedCharacter)
    assert char.window == (-4, 4) and all(char[k] == 2 for k in range(-4, 5))


def test_equivariant_trivial_group_reduces():
    m = build_shift_model(12)
    char = equivariant_index(m)
    assert isinstance(char, CharacterElement) and char.entries == {0: fredholm_index(m)}


def test_derham_indices():
    assert fredholm_index(build_derham_circle_model(8)) == 0
    assert equivariant_index(build_derham_circle_model(8)).agrees_with(
        equivariant_index(build_derham_circle_model(8, deformed=True))
    )


@pytest.mark.parametrize("p", sorted(LANDAU_LOWEST))
def test_landau_oracle_frozen(p):
    assert oracles.landau_spectrum(p, n=200, R=8.0, count=1)[0] == pytest.approx(LANDAU_LOWEST[p], abs=1e-6)


@pytest.mark.parametrize("k", sorted(PROFILE_OVERLAP))
def test_cokernel_matches_closed_form(k):
    s = plane_grid(200, 8.0)
    mid = 0.5 * (s[:-1] + s[1:])
    u, _, _ = np.linalg.svd(build_plane_weight_model(k, 200).to_dense())
    assert abs(np.vdot(oracles.plane_cokernel_profile(k, mid), u[:, -1])) == pytest.approx(PROFILE_OVERLAP[k], abs=1e-7)


@pytest.mark.parametrize("m", sorted(SIGMA_MIN))
def test_plane_gap_is_order_one(m):
    sv = np.linalg.svd(build_plane_weight_model(m, 200).to_dense(), compute_uv=False)
    assert sv[-1] == pytest.approx(SIGMA_MIN[m], abs=1e-4)


def test_plane_window_matches_oracle():
    res = deformed_plane_index((-3, 3), 200)
    for k in range(-3, 4):
        zero_mode = oracles.landau_spectrum(-k, n=200, count=1)[0] < 1.0
        assert res.cokernel[k] == int(zero_mode) == int(k >= 0)
        assert res.kernel[k] == 0
    assert str(res.character) == "[-3..3] {-3:0, -2:0, -1:0, 0:-1, 1:-1, 2:-1, 3:-1}"


def test_plane_trivial_lift_shifts_labels():
    res = deformed_plane_index((-3, 3), 200, lift="trivial")
    assert res.character.window == (-3, 2)
    assert res.cokernel == {k: int(k >= 0) for k in range(-4, 3)}


def test_plane_plateau_under_refinement_and_radius():
    base = deformed_plane_index((-3, 3), 200).character
    assert deformed_plane_index((-3, 3), 400).character == base
    assert deformed_plane_index((-3, 3), 200, R=10.0).character == base
    assert deformed_plane_index((-3, 3), 200, f_choice="quad").character == base


# -- properties ---------------------------------------------------------------

shapes = st.tuples(st.integers(1, 12), st.integers(1, 12))


@given(shapes, st.integers(0, 2**31 - 1))
def test_index_is_shape_difference(shape, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    assert fredholm_index(a) == shape[1] - shape[0]


@given(st.integers(1, 10), st.integers(0, 5), st.integers(0, 2**31 - 1))
def test_square_index_zero_and_kernel_count(n, drop, seed):
    drop = min(drop, n)
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.concatenate([rng.uniform(0.5, 2.0, n - drop), np.zeros(drop)])
    a = u @ np.diag(s) @ v.T
    r = analyze_matrix(a)
    assert r.index == 0 and r.kernel_dim == drop


@given(st.floats(0.1, 10), st.integers(0, 2**31 - 1))
def test_kernel_dimension_scale_invariant(scale, seed):
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    a = u @ np.diag([3.0, 2.0, 1.0, 0.5, 0.1, 0.0, 0.0, 0.0]) @ u.T
    assert numeric_kernel(scale * a).dim == numeric_kernel(a).dim == 3
    c = build_circle_model(None, 8).to_dense()
    assert numeric_kernel(scale * c).dim == numeric_kernel(c).dim == 1


@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.floats(0.0, 0.5))
def test_equivariant_index_stable(seed, rank, norm):
    m = build_shift_model(16, labeled=True)
    p = random_finite_rank_perturbation(m, rank, norm, seed)
    assert equivariant_index(p) == equivariant_index(m)


@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_fredholm_index_stable_nonequivariant(seed, rank):
    m = build_shift_model(16, labeled=True)
    p = random_finite_rank_perturbation(m, rank, 0.5, seed, equivariant=False)
    assert fredholm_index(p) == 2


@given(st.integers(0, 2**31 - 1))
def test_char_dim_equals_fredholm_index(seed):
    m = random_finite_rank_perturbation(build_shift_model(10, labeled=True), 2, 0.3, seed)
    assert char_dim(equivariant_index(m)) == fredholm_index(m)


@pytest.mark.parametrize(
    "model",
    [build_shift_model(12), build_toeplitz_model({-1: 1}, 32), build_plane_weight_model(1, 100), build_shift_model(12, labeled=True)],
    ids=["shift", "toeplitz", "plane", "z2shift"],
)
def test_adjoint_negates_index(model):
    assert fredholm_index(model.adjoint()) == -fredholm_index(model)


def test_zero_size_blocks():
    m = IsotypicBlockOperator.from_matrix(np.zeros((0, 3)))
    assert fredholm_index(m) == 3
