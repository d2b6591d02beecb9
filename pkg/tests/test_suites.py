import pytest

from eqindex.index import RankPolicy
from eqindex.models import build_circle_model, build_shift_model, build_toeplitz_model
from eqindex.suites import (
    HOMOTOPY_PATHS,
    NoPlateauError,
    adjoint_check,
    circle_kernel_quantity,
    composition_check,
    convergence_study,
    gluing_check,
    homotopy_suite,
    plane_weight_quantity,
    shift_composition,
    shift_quantity,
    stability_suite,
    symbol_suite,
)


def test_stability_shift():
    rep = stability_suite(build_shift_model(20), trials=20)
    assert rep.passed and rep.index == 2
    assert [r["rank"] for r in rep.diagnostics["trial_results"][:4]] == [1, 2, 3, 1]


def test_stability_rank_zero_is_trivial():
    rep = stability_suite(build_toeplitz_model({1: 1}, 32), trials=3, rank=0)
    assert rep.passed and all(r["rank"] == 0 for r in rep.diagnostics["trial_results"])


def test_stability_equivariant():
    rep = stability_suite(build_shift_model(16, labeled=True), trials=20)
    assert rep.passed and rep.index.entries == {0: 1, 1: 1}


def test_stability_is_seeded():
    a = stability_suite(build_circle_model(None, 16), trials=5, seed=3)
    b = stability_suite(build_circle_model(None, 16), trials=5, seed=3)
    assert a.to_json() == b.to_json()


def test_stability_rejects_no_trials():
    with pytest.raises(ValueError):
        stability_suite(build_shift_model(8), trials=0)


@pytest.mark.parametrize("path", sorted(HOMOTOPY_PATHS))
def test_homotopy_paths_constant(path):
    rep = homotopy_suite(path, steps=6)
    assert rep.passed


def test_homotopy_detects_jump():
    # 2 + s*4 z crosses the origin at s = 1/2: index drops from 0 to -1
    rep = homotopy_suite(lambda s: build_toeplitz_model({0: 2.0, 1: 4.0 * s + 1e-3}, 64), steps=5)
    assert not rep.passed


def test_homotopy_unknown_path():
    with pytest.raises(ValueError):
        homotopy_suite("nope")


def test_composition_of_shifts():
    rep = composition_check(*shift_composition(20))
    assert rep.passed and rep.index == 4


def test_adjoint_of_shift():
    rep = adjoint_check(build_shift_model(20))
    assert rep.passed and rep.index == -2


def test_gluing_additive():
    rep = gluing_check((-2, 2), 4.0, 100)
    assert rep.passed
    assert [r["unsplit"] for r in rep.labels] == [0, 0, -1, -1, -1]


def test_gluing_inverse_square_warp():
    assert gluing_check((-1, 1), 4.0, 100, warp="inverse_square").passed


def test_gluing_rejects_vanishing_split():
    with pytest.raises(ValueError):
        gluing_check((-1, 1), 0.0, 100)


def test_convergence_circle():
    rep = convergence_study(circle_kernel_quantity(), [16, 32, 64])
    assert rep.diagnostics["accepted_value"] == 1
    assert rep.diagnostics["converged_resolution"] == 16


def test_convergence_plane_weight():
    rep = convergence_study(plane_weight_quantity(0), [100, 200, 400])
    assert rep.diagnostics["accepted_value"] == [0, 1]


def test_convergence_shift():
    assert convergence_study(shift_quantity(), [8, 16, 32]).diagnostics["accepted_value"] == 2


def test_convergence_without_plateau_raises():
    with pytest.raises(NoPlateauError) as info:
        convergence_study(lambda n, p: (n, float("inf")), [1, 2, 3])
    assert info.value.report.indeterminate


def test_convergence_low_gap_is_not_a_plateau():
    with pytest.raises(NoPlateauError):
        convergence_study(lambda n, p: (1, 2.0), [1, 2, 3], RankPolicy())


def test_convergence_argument_checks():
    with pytest.raises(ValueError):
        convergence_study(shift_quantity(), [8, 16])
    with pytest.raises(ValueError):
        convergence_study(shift_quantity(), [16, 8, 32])


def test_symbol_suite():
    rep = symbol_suite()
    assert rep.passed and len(rep.verdicts) == 5
