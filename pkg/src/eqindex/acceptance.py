"""Acceptance criteria, each checked against an independent reference where one exists."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import oracles
from .charring import GroupDesc, decompose_representation
from .index import (
    RankPolicy,
    analyze_matrix,
    analyze_model,
    deformed_plane_index,
    equivariant_index,
    fredholm_index,
    numeric_kernel,
)
from .models import (
    build_circle_model,
    build_derham_circle_model,
    build_plane_weight_model,
    build_product_model,
    build_shift_model,
    build_toeplitz_model,
    derham_full_operator,
    jsonable,
    plane_grid,
    swap_pairs_action,
)
from .suites import convergence_study, glued_quantity, gluing_check, stability_suite, symbol_suite

GAP_SHIFT = 1e10
CIRCLE_KERNEL_TOL = 1e-8
MONODROMY_TOL = 1e-8
PLANE_WINDOW = (-8, 8)
PLANE_N_R, PLANE_R = 400, 8.0
GLUING_WINDOW = (-4, 4)
GLUING_RESOLUTIONS = (100, 200, 400)
GLUING_R0 = 4.0
# reference eigensolve: zero modes sit at O(h^2), the next level at 4
LANDAU_ZERO = 1.0
PROFILE_OVERLAP = 0.999
STABILITY_TRIALS, STABILITY_RANK, STABILITY_NORM = 100, 3, 0.4


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:>2}: {self.title}"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed, "detail": jsonable(self.detail)}


def criterion_1(policy: RankPolicy) -> CriterionResult:
    model = build_shift_model(20)
    r = analyze_model(model, policy)[0]
    ok = r.confident and r.index == 2 and r.gap_ratio >= GAP_SHIFT
    return CriterionResult(1, "shift operator index 2 with gap ratio >= 1e10", ok, {"index": r.index, "gap_ratio": r.gap_ratio})


def criterion_2(policy: RankPolicy) -> CriterionResult:
    char = equivariant_index(build_shift_model(20, labeled=True), policy)
    # reference: restrict the swap action to the kernel of the plain shift
    plain = build_shift_model(20).to_dense()
    ker = numeric_kernel(plain, policy, basis=True)
    restricted = ker.null_basis.conj().T @ swap_pairs_action(20) @ ker.null_basis
    ref = decompose_representation(restricted, GroupDesc.cyclic(2))
    coker = numeric_kernel(plain.conj().T, policy).dim
    ok = char.entries == {0: 1, 1: 1} and ref.entries == {0: 1, 1: 1} and coker == 0
    return CriterionResult(
        2, "Z2 shift equivariant index {V0:1, V1:1}", ok, {"index": char.entries, "kernel_decomposition": ref.entries}
    )


def criterion_3(policy: RankPolicy) -> CriterionResult:
    rows, ok = [], True
    for q in (1, 2, 3):
        for sign in (-1, 1):
            symbol = {sign * q: 1.0}
            got = fredholm_index(build_toeplitz_model(symbol, 64), policy)
            dense = oracles.toeplitz_index_dense(symbol, 64)
            expected = -sign * q
            good = got == dense == expected == -oracles.winding_number(symbol)
            ok &= good
            rows.append({"symbol": f"z^{sign * q}", "index": got, "dense_oracle": dense, "expected": expected})
    return CriterionResult(3, "Toeplitz indices +-1, +-2, +-3 at N=64", ok, {"rows": rows})


def criterion_4(policy: RankPolicy) -> CriterionResult:
    model = build_circle_model(None, 32)
    r = analyze_model(model, policy)[0]
    a = model.to_dense()
    ref = oracles.circle_kernel_fourier(32)
    residual = float(np.linalg.norm(a @ ref) / np.linalg.norm(ref))
    mono = oracles.circle_kernel_monodromy()
    ok = (
        r.confident
        and r.index == 0
        and r.kernel_dim == 1
        and residual < CIRCLE_KERNEL_TOL
        and abs(mono - 1) < MONODROMY_TOL
    )
    return CriterionResult(
        4,
        "-i d/dt + sin t: index 0, kernel dimension 1 at K=32",
        ok,
        {"index": r.index, "kernel_dim": r.kernel_dim, "gap_ratio": r.gap_ratio, "kernel_residual": residual, "monodromy": mono},
    )


def criterion_5(policy: RankPolicy) -> CriterionResult:
    d = build_derham_circle_model(16)
    full = sum(r.kernel_dim for r in analyze_model(derham_full_operator(d), policy))
    index = fredholm_index(d, policy)
    euler = 0
    ok = full == 2 and index == euler
    return CriterionResult(5, "de Rham circle: dim Ker D = 2, Ind D+ = 0 = Euler characteristic", ok, {"kernel_full_D": full, "index": index})


def criterion_6(policy: RankPolicy) -> CriterionResult:
    base = build_shift_model(20)
    base_index = fredholm_index(base, policy)
    char = equivariant_index(build_product_model(base, 4), policy)
    ok = base_index == 2 and char.window == (-4, 4) and all(char[k] == 2 for k in range(-4, 5))
    return CriterionResult(6, "product model: multiplicity 2 at each of 9 weights", ok, {"index": str(char)})


def _plane_oracles(result) -> tuple[bool, dict]:
    """Landau eigensolve per weight and overlap with the closed-form cokernel."""
    lo, hi = result.params["window"]
    offset = result.params["label_offset"]
    s = plane_grid(PLANE_N_R, PLANE_R)
    mid = 0.5 * (s[:-1] + s[1:])
    rows, ok = [], True
    for k in range(lo, hi + 1):
        # codomain weight k is angular mode -k; domain weight k is mode -k-1
        coker_eig = oracles.landau_spectrum(-k, "cokernel", PLANE_N_R, PLANE_R, 1)[0]
        ker_eig = oracles.landau_spectrum(-k - 1, "kernel", PLANE_N_R, PLANE_R, 1)[0]
        oracle_coker = int(coker_eig < LANDAU_ZERO)
        oracle_ker = int(ker_eig < LANDAU_ZERO)
        expected_coker = int(k >= offset)
        row = {
            "weight": k,
            "kernel": result.kernel[k],
            "cokernel": result.cokernel[k],
            "oracle_kernel": oracle_ker,
            "oracle_cokernel": oracle_coker,
            "lowest_DpDm": float(coker_eig),
            "lowest_DmDp": float(ker_eig),
        }
        good = result.kernel[k] == 0 == oracle_ker and result.cokernel[k] == expected_coker == oracle_coker
        if expected_coker:
            u, _, _ = np.linalg.svd(build_plane_weight_model(k, PLANE_N_R, PLANE_R).block(k)[1])
            overlap = float(abs(np.vdot(oracles.plane_cokernel_profile(k, mid), u[:, -1])))
            row["profile_overlap"] = overlap
            good &= overlap >= PROFILE_OVERLAP
        ok &= bool(good)
        rows.append(row)
    return ok, {"rows": rows}


def criterion_7(policy: RankPolicy) -> CriterionResult:
    result = deformed_plane_index(PLANE_WINDOW, PLANE_N_R, PLANE_R, "one", "spinor", policy)
    ok, detail = _plane_oracles(result)
    finite = all(abs(v) < np.inf for v in list(result.kernel.values()) + list(result.cokernel.values()))
    detail.update({"character": str(result.character), "label_offset": result.params["label_offset"], "min_gap_ratio": result.min_gap})
    return CriterionResult(
        7, "deformed plane Dirac: kernel 0, cokernel 1 for weights >= offset on [-8, 8]", ok and finite, detail
    )


def criterion_8(policy: RankPolicy) -> CriterionResult:
    docs = []
    for f in ("one", "quad"):
        r = deformed_plane_index(PLANE_WINDOW, PLANE_N_R, PLANE_R, f, "spinor", policy)
        docs.append(json.dumps({"char": r.character.to_dict(), "ker": r.kernel, "coker": r.cokernel}, sort_keys=True))
    return CriterionResult(8, "f-independence: identical character for f = 1 and f = 1 + r^2", docs[0] == docs[1], {"f_one": docs[0]})


def criterion_9(policy: RankPolicy) -> CriterionResult:
    plain = equivariant_index(build_derham_circle_model(16, False), policy)
    deformed = equivariant_index(build_derham_circle_model(16, True), policy)
    ok = plain.agrees_with(deformed) and sum(plain.entries.values()) == sum(deformed.entries.values())
    return CriterionResult(9, "deformed and undeformed de Rham circle indices agree", ok, {"undeformed": str(plain), "deformed": str(deformed)})


def criterion_10(policy: RankPolicy) -> CriterionResult:
    models = {
        "shift": build_shift_model(20),
        "toeplitz_z": build_toeplitz_model({1: 1.0}, 64),
        "circle_sin": build_circle_model(None, 32),
    }
    detail, ok = {}, True
    for name, model in models.items():
        rep = stability_suite(model, STABILITY_TRIALS, STABILITY_RANK, STABILITY_NORM, seed=0, policy=policy)
        detail[name] = {"index": rep.index, "passed": rep.passed, **rep.verdicts[-1].detail}
        ok &= rep.passed
    return CriterionResult(10, "index stable under 100 finite-rank perturbations per model", ok, detail)


def criterion_11(policy: RankPolicy) -> CriterionResult:
    study = convergence_study(glued_quantity(GLUING_WINDOW, GLUING_R0), GLUING_RESOLUTIONS, policy, "gluing_convergence")
    res = study.diagnostics["converged_resolution"]
    rep = gluing_check(GLUING_WINDOW, GLUING_R0, res, policy=policy)
    return CriterionResult(
        11,
        f"gluing additivity on [-4, 4] at converged resolution n_r={res}",
        rep.passed,
        {"resolution": res, "rows": rep.labels, "convergence": study.diagnostics["values"]},
    )


def criterion_12(policy: RankPolicy) -> CriterionResult:
    rep = symbol_suite()
    return CriterionResult(12, "symbol suite", rep.passed, {v.name: v.passed for v in rep.verdicts})


CRITERIA: tuple[Callable[[RankPolicy], CriterionResult], ...] = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
)


def run_criterion(fn, policy: RankPolicy | None = None) -> CriterionResult:
    policy = policy or RankPolicy()
    start = time.perf_counter()
    try:
        result = fn(policy)
    except Exception as exc:  # a crash is a failed criterion, not a crashed run
        number = int(fn.__name__.rsplit("_", 1)[1])
        result = CriterionResult(number, fn.__name__, False, {"error": f"{type(exc).__name__}: {exc}"})
    result.seconds = time.perf_counter() - start
    return result


def run_acceptance(policy: RankPolicy | None = None) -> list[CriterionResult]:
    return [run_criterion(fn, policy) for fn in CRITERIA]
