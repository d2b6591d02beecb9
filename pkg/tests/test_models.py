import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqindex.charring import GroupDesc
from eqindex.models import (
    CollarWarp,
    IsotypicBlockOperator,
    ModelSpec,
    add_perturbation,
    build_circle_model,
    build_derham_circle_model,
    build_glued_plane_models,
    build_plane_weight_model,
    build_product_model,
    build_shift_model,
    build_toeplitz_model,
    compose,
    glued_piece_geometry,
    off_block_norm,
    random_finite_rank_perturbation,
    swap_pairs_action,
    swap_pairs_basis,
)

ALL_MODELS = [
    build_shift_model(20),
    build_shift_model(20, labeled=True),
    build_toeplitz_model({-2: 1}, 64),
    build_circle_model(),
    build_derham_circle_model(8),
    build_derham_circle_model(8, deformed=True),
    build_product_model(build_shift_model(10), 3),
    build_plane_weight_model(2, 120),
]


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.metadata["kind"])
def test_block_structure_respected(model):
    assert off_block_norm(model, model.to_dense()) <= 1e-14


def test_shift_dump_matrix():
    assert np.array_equal(build_shift_model(4).to_dense(), [[0, 0, 1, 0], [0, 0, 0, 1]])


def test_shift_size_checks():
    for n in (2, 7):
        with pytest.raises(ValueError):
            build_shift_model(n)


def test_labeled_shift_matches_plain_in_adapted_basis():
    n = 12
    u = swap_pairs_basis(n)
    plain = build_shift_model(n).to_dense()
    labeled = build_shift_model(n, labeled=True).to_dense()
    u_out = swap_pairs_basis(n - 2)
    assert np.allclose(u_out.T @ plain @ u, labeled)
    q = swap_pairs_action(n)
    assert np.allclose(u.T @ q @ u, np.diag([1] * (n // 2) + [-1] * (n // 2)))


def test_toeplitz_and_shift_agree_on_common_block():
    n = 16
    t = build_toeplitz_model({-2: 1}, n).to_dense()
    s = build_shift_model(n).to_dense()
    assert np.array_equal(t[: n - 2], s)


def test_toeplitz_rejects_vanishing_symbol():
    with pytest.raises(ValueError, match="vanishes"):
        build_toeplitz_model({0: 1, 1: 1}, 64)


def test_circle_model_tridiagonal_and_hermitian():
    a = build_circle_model(None, 8).to_dense()
    assert np.allclose(np.triu(a, 2), 0) and np.allclose(np.tril(a, -2), 0)
    assert np.allclose(a, a.conj().T)
    assert np.allclose(np.diag(a).real, np.arange(-8, 9))


def test_circle_model_cutoff_check():
    with pytest.raises(ValueError):
        build_circle_model({3: 1.0, -3: 1.0}, 5)


def test_derham_blocks():
    d = build_derham_circle_model(4)
    assert d.graded and d.window == (-4, 4)
    assert d.block(2)[1][0, 0] == 2j
    assert build_derham_circle_model(4, deformed=True).block(-1)[1][0, 0] == 0
    with pytest.raises(ValueError):
        build_derham_circle_model(3)


def test_product_window_has_nine_blocks():
    p = build_product_model(build_shift_model(20), 4)
    assert len(p.blocks) == 9
    assert all(dim == 20 for _, dim in p.domain_labels)


@pytest.mark.parametrize("m", [-2, 0, 3])
def test_plane_block_is_bidiagonal(m):
    a = build_plane_weight_model(m, 100).to_dense()
    rows, cols = np.nonzero(a)
    offsets = set((cols - rows).tolist())
    assert len(offsets) == 2 and max(offsets) - min(offsets) == 1


def test_plane_shapes_follow_weight():
    # a free origin node only for negative weights
    assert build_plane_weight_model(-1, 100).shape == (100, 100)
    assert build_plane_weight_model(0, 100).shape == (100, 99)
    trivial = build_plane_weight_model(1, 100, lift="trivial")
    assert trivial.label_offset == -1 and trivial.shape == (100, 99)
    assert build_plane_weight_model(0, 100, lift="trivial").shape == (100, 100)


def test_plane_parameter_checks():
    with pytest.raises(ValueError):
        build_plane_weight_model(0, 50)
    with pytest.raises(ValueError):
        build_plane_weight_model(0, 100, R=5)
    with pytest.raises(ValueError):
        build_plane_weight_model(0, 100, f_choice="cubic")


@pytest.mark.parametrize("warp", ["log", "inverse_square"])
def test_warp_is_identity_away_from_collar(warp):
    s, r_of, rho_of, collar = glued_piece_geometry("inner", 4.0, 200, 8.0, warp)
    inside = s[s < 4.0 - collar.delta]
    assert np.array_equal(r_of(inside), inside) and np.array_equal(rho_of(inside), inside)
    assert r_of(s).max() < 4.0
    s, r_of, rho_of, _ = glued_piece_geometry("outer", 4.0, 200, 8.0, warp)
    assert r_of(s).min() > 4.0
    assert CollarWarp(warp, 0.4).stretch(0.0) == pytest.approx(1.0)


def test_glued_split_radius_checks():
    for r0 in (0.0, -1.0, 8.0, 9.0):
        with pytest.raises(ValueError):
            build_glued_plane_models(0, r0, 100)


def test_perturbation_rank_zero_is_identity():
    m = build_shift_model(20)
    assert random_finite_rank_perturbation(m, 0, 0.4, 1) is m


def test_perturbation_norm_and_rank():
    m = build_circle_model(None, 16)
    p = random_finite_rank_perturbation(m, 3, 0.4, seed=5)
    k = p.to_dense() - m.to_dense()
    assert np.linalg.norm(k, 2) == pytest.approx(0.4 * np.linalg.norm(m.to_dense(), 2))
    assert np.linalg.matrix_rank(k) == 3
    assert p.metadata["perturbation"] == {"rank": 3, "relative_norm": 0.4, "seed": 5}


def test_perturbation_reproducible():
    m = build_shift_model(20)
    a = random_finite_rank_perturbation(m, 2, 0.3, seed=11).to_dense()
    b = random_finite_rank_perturbation(m, 2, 0.3, seed=11).to_dense()
    assert np.array_equal(a, b)


def test_equivariant_perturbation_keeps_blocks():
    m = build_shift_model(20, labeled=True)
    p = random_finite_rank_perturbation(m, 3, 0.4, seed=2)
    assert p.equivariant and off_block_norm(p, p.to_dense()) == 0


def test_off_block_perturbation_rejected():
    m = build_shift_model(8, labeled=True)
    k = np.zeros(m.shape)
    k[0, -1] = 1.0
    with pytest.raises(ValueError, match="block structure"):
        add_perturbation(m, k, equivariant=True)
    assert not add_perturbation(m, k, equivariant=False).equivariant


def test_perturbation_arguments():
    m = build_shift_model(8)
    with pytest.raises(ValueError):
        random_finite_rank_perturbation(m, 7, 0.1, 0)
    with pytest.raises(ValueError):
        random_finite_rank_perturbation(m, 1, 0.6, 0)


def test_far_edge_perturbation_support():
    m = build_toeplitz_model({1: 1}, 64)
    k = random_finite_rank_perturbation(m, 3, 0.4, 0).to_dense() - m.to_dense()
    assert np.abs(k[16:]).max() == 0 and np.abs(k[:, 16:]).max() == 0


def test_compose_shapes():
    c = compose(build_shift_model(18), build_shift_model(20))
    assert c.shape == (16, 20)


def test_adjoint_swaps_labels():
    m = build_plane_weight_model(0, 100, lift="trivial")
    a = m.adjoint()
    assert a.domain_labels == m.codomain_labels and a.label_offset == 1
    assert np.allclose(a.to_dense(), m.to_dense().conj().T)


def test_label_offset_enforced():
    with pytest.raises(ValueError):
        IsotypicBlockOperator(GroupDesc.circle(), ((0, 1),), ((1, 1),), {(0, 1): np.eye(1)})


def test_models_are_immutable():
    m = build_shift_model(8)
    with pytest.raises(ValueError):
        m.blocks[(0, 0)][0, 0] = 5
    with pytest.raises(AttributeError):
        m.graded = True


def test_model_spec_builds():
    spec = ModelSpec.from_dict({"kind": "toeplitz", "n": 32, "symbol": {"-1": [1.0, 0.0]}})
    assert spec.build().shape == (32, 32)
    assert ModelSpec("product", {"base": {"kind": "shift", "n": 8}, "k_max": 1}).build().shape == (18, 24)
    with pytest.raises(ValueError):
        ModelSpec("sphere")


def test_dump_is_json_ready():
    import json

    doc = build_shift_model(4, labeled=True).dump()
    json.dumps(doc)
    assert doc["shape"] == [2, 4] and doc["domain_labels"] == [[0, 2], [1, 2]]


@given(st.integers(2, 12).map(lambda k: 2 * k))
def test_shift_shape_property(n):
    assert build_shift_model(n).shape == (n - 2, n)
    assert build_shift_model(n, labeled=True).shape == (n - 2, n)
