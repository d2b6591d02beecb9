"""Verification suites: stability, homotopy, composition, gluing, convergence, symbols."""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from . import clifford, symbols
from .charring import CharacterElement, WindowedCharacter
from .index import RankPolicy, analyze_matrix, plane_blocks
from .models import (
    IsotypicBlockOperator,
    build_circle_model,
    build_glued_plane_models,
    build_plane_weight_model,
    build_shift_model,
    build_toeplitz_model,
    compose,
    random_finite_rank_perturbation,
)
from .report import IndexReport, model_report

SYMBOL_TOL = 1e-12


class NoPlateauError(RuntimeError):
    """A convergence study did not settle; the report is attached."""

    def __init__(self, report: IndexReport):
        super().__init__(f"{report.name}: no plateau over resolutions {report.diagnostics.get('resolutions')}")
        self.report = report


def total_index(index) -> int:
    """Forget the group: sum of multiplicities."""
    if isinstance(index, (CharacterElement, WindowedCharacter)):
        return sum(index.entries.values())
    return int(index)


def _same_index(a, b) -> bool:
    if isinstance(a, WindowedCharacter) and isinstance(b, WindowedCharacter):
        return a.window == b.window and a.agrees_with(b)
    if isinstance(a, (CharacterElement, WindowedCharacter)) != isinstance(b, (CharacterElement, WindowedCharacter)):
        return total_index(a) == total_index(b)
    return a == b


def _index_json(index):
    if isinstance(index, (CharacterElement, WindowedCharacter)):
        return index.to_dict()
    return index


# -- stability ----------------------------------------------------------------


def stability_suite(
    model: IsotypicBlockOperator,
    trials: int = 100,
    rank: int = 3,
    relative_norm: float = 0.4,
    seed: int = 0,
    policy: RankPolicy | None = None,
    equivariant: bool | None = None,
) -> IndexReport:
    """Recompute the index after ``trials`` seeded perturbations of rank ``1..rank``.

    Trial ``t`` uses rank ``1 + t % rank`` and seed ``seed + t``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    policy = policy or RankPolicy()
    base = model_report(model, policy)
    rep = IndexReport("stability", dict(model.metadata), policy, base.labels, base.index, seed=seed)
    rep.diagnostics.update({"trials": trials, "max_rank": rank, "relative_norm": relative_norm})
    if base.indeterminate:
        rep.indeterminate = True
        rep.verdict("unperturbed index is determinate", False)
        return rep
    rows, changed, unclear = [], 0, 0
    for t in range(trials):
        r = 0 if rank == 0 else 1 + t % rank
        pert = random_finite_rank_perturbation(model, r, relative_norm, seed + t, equivariant)
        got = model_report(pert, policy)
        same = not got.indeterminate and _same_index(base.index, got.index)
        unclear += got.indeterminate
        changed += not same
        rows.append(
            {
                "trial": t,
                "rank": r,
                "seed": seed + t,
                "index": None if got.index is None else total_index(got.index),
                "min_gap_ratio": got.diagnostics["min_gap_ratio"],
                "unchanged": same,
            }
        )
    rep.diagnostics["trial_results"] = rows
    rep.diagnostics["min_gap_ratio"] = min(r["min_gap_ratio"] for r in rows)
    rep.verdict("index unchanged under finite-rank perturbation", changed == 0, changed=changed, indeterminate=unclear)
    return rep


# -- homotopy -----------------------------------------------------------------


def _circle_path(s):
    return build_circle_model({1: -0.5j * s, -1: 0.5j * s}, 32)


def _toeplitz_path(s):
    return build_toeplitz_model({0: 2.0, 1: s}, 64)


def _constant_path(s):
    return build_shift_model(20)


HOMOTOPY_PATHS: dict[str, Callable[[float], IsotypicBlockOperator]] = {
    "circle_potential": _circle_path,
    "toeplitz_2_plus_sz": _toeplitz_path,
    "constant": _constant_path,
}


def homotopy_suite(
    path: Callable[[float], IsotypicBlockOperator] | str,
    steps: int = 11,
    policy: RankPolicy | None = None,
) -> IndexReport:
    """Index at ``steps`` equispaced parameters in ``[0, 1]``; passes iff constant and determinate."""
    name = path if isinstance(path, str) else getattr(path, "__name__", "path")
    if isinstance(path, str):
        if path not in HOMOTOPY_PATHS:
            raise ValueError(f"unknown homotopy path {path!r}; expected one of {sorted(HOMOTOPY_PATHS)}")
        path = HOMOTOPY_PATHS[path]
    if steps < 2:
        raise ValueError("steps must be at least 2")
    policy = policy or RankPolicy()
    rows, values = [], []
    for s in np.linspace(0.0, 1.0, steps):
        r = model_report(path(float(s)), policy)
        rows.append({"s": float(s), "index": _index_json(r.index), "min_gap_ratio": r.diagnostics["min_gap_ratio"]})
        values.append(r.index)
    rep = IndexReport("homotopy", {"kind": name}, policy, index=values[0])
    rep.diagnostics["steps"] = rows
    rep.diagnostics["min_gap_ratio"] = min(r["min_gap_ratio"] for r in rows)
    rep.indeterminate = any(v is None for v in values)
    rep.verdict("index constant along the path", all(v is not None and _same_index(values[0], v) for v in values))
    return rep


# -- composition and adjoint --------------------------------------------------


def composition_check(a: IsotypicBlockOperator, b: IsotypicBlockOperator, policy: RankPolicy | None = None) -> IndexReport:
    """``Ind(BA) = Ind(A) + Ind(B)`` on computed integers."""
    policy = policy or RankPolicy()
    ra, rb, rba = (model_report(m, policy) for m in (a, b, compose(b, a)))
    rep = IndexReport("composition", {"A": dict(a.metadata), "B": dict(b.metadata)}, policy, index=rba.index)
    rep.indeterminate = any(r.indeterminate for r in (ra, rb, rba))
    rep.diagnostics.update({"index_A": ra.index, "index_B": rb.index, "index_BA": rba.index})
    if not rep.indeterminate:
        rep.verdict("Ind(BA) = Ind(A) + Ind(B)", total_index(rba.index) == total_index(ra.index) + total_index(rb.index))
    return rep


def shift_composition(n: int = 20) -> tuple[IsotypicBlockOperator, IsotypicBlockOperator]:
    """Compatible truncations ``A: C^n -> C^(n-2)`` and ``B: C^(n-2) -> C^(n-4)`` of the double shift."""
    return build_shift_model(n), build_shift_model(n - 2)


def adjoint_check(model: IsotypicBlockOperator, policy: RankPolicy | None = None) -> IndexReport:
    """``Ind(A*) = -Ind(A)``."""
    policy = policy or RankPolicy()
    ra, rs = model_report(model, policy), model_report(model.adjoint(), policy)
    rep = IndexReport("adjoint", dict(model.metadata), policy, index=rs.index)
    rep.indeterminate = ra.indeterminate or rs.indeterminate
    rep.diagnostics.update({"index_A": _index_json(ra.index), "index_adjoint": _index_json(rs.index)})
    if not rep.indeterminate:
        rep.verdict("Ind(A*) = -Ind(A)", total_index(rs.index) == -total_index(ra.index))
    return rep


# -- gluing -------------------------------------------------------------------


def gluing_check(
    window: tuple[int, int] = (-4, 4),
    r0: float = 4.0,
    n_r: int = 400,
    warp: str = "log",
    R: float = 8.0,
    f_choice: str = "one",
    lift: str = "spinor",
    policy: RankPolicy | None = None,
) -> IndexReport:
    """Per weight: index on the disc plus index on the annulus equals the unsplit index."""
    policy = policy or RankPolicy()
    lo, hi = int(window[0]), int(window[1])
    rep = IndexReport(
        "gluing",
        {"kind": "plane_glued", "r0": r0, "warp": warp, "R": R, "f_choice": f_choice, "lift": lift},
        policy,
    )
    rep.diagnostics.update({"window": [lo, hi], "resolution": n_r, "split_field_norm": r0})
    rep.verdict("taming field nonvanishing on the split circle", r0 > 0, norm=r0)
    whole = {b.domain_label: b for b in plane_blocks((lo, hi), n_r, R, f_choice, lift, policy)}
    rows, failures = [], 0
    for m in range(lo, hi + 1):
        inner, outer = build_glued_plane_models(m, r0, n_r, warp, R, f_choice, lift)
        pieces = [analyze_matrix(p.block(m)[1], policy, False, (m, p.block(m)[0])) for p in (inner, outer)]
        gap = min([whole[m].gap_ratio] + [p.gap_ratio for p in pieces])
        confident = whole[m].confident and all(p.confident for p in pieces)
        ok = confident and pieces[0].index + pieces[1].index == whole[m].index
        failures += not ok
        rows.append(
            {
                "label": m,
                "unsplit": whole[m].index,
                "inner": pieces[0].index,
                "outer": pieces[1].index,
                "gap_ratio": gap,
                "confident": confident,
            }
        )
    rep.labels = rows
    rep.indeterminate = not all(r["confident"] for r in rows)
    rep.diagnostics["min_gap_ratio"] = min(r["gap_ratio"] for r in rows)
    rep.verdict("inner + outer = unsplit at every weight", failures == 0, failures=failures)
    return rep


# -- convergence --------------------------------------------------------------

Quantity = Callable[[int, RankPolicy], tuple[object, float]]


def convergence_study(
    quantity: Quantity, resolutions: Sequence[int], policy: RankPolicy | None = None, name: str = "convergence"
) -> IndexReport:
    """Evaluate ``quantity`` at increasing resolutions and locate the plateau.

    The value is accepted when the last two resolutions agree with confident
    gaps.  ``converged_resolution`` is the smallest resolution from which every
    later value agrees.  Raises :class:`NoPlateauError` otherwise.
    """
    resolutions = [int(r) for r in resolutions]
    if len(resolutions) < 3:
        raise ValueError("convergence study needs at least three resolutions")
    if sorted(resolutions) != resolutions or len(set(resolutions)) != len(resolutions):
        raise ValueError("resolutions must be strictly increasing")
    policy = policy or RankPolicy()
    values, gaps = [], []
    for res in resolutions:
        v, g = quantity(res, policy)
        values.append(v)
        gaps.append(g)
    ok = [g >= policy.min_gap for g in gaps]
    rep = IndexReport(name, {"kind": name}, policy)
    rep.diagnostics["resolutions"] = resolutions
    rep.diagnostics["values"] = values
    rep.diagnostics["min_gap_ratios"] = gaps
    plateau = values[-1] == values[-2] and ok[-1] and ok[-2]
    start = len(values) - 1
    while plateau and start > 0 and values[start - 1] == values[-1] and ok[start - 1]:
        start -= 1
    if not plateau:
        rep.indeterminate = True
        rep.verdict("last two resolutions agree with confident gaps", False)
        raise NoPlateauError(rep)
    rep.index = None
    rep.diagnostics["accepted_value"] = values[-1]
    rep.diagnostics["converged_resolution"] = resolutions[start]
    rep.verdict("last two resolutions agree with confident gaps", True)
    return rep


def plane_weight_quantity(m: int = 0, R: float = 8.0, f_choice: str = "one") -> Quantity:
    """``[kernel dim, cokernel dim]`` of the weight-``m`` plane block at ``n_r``."""

    def q(n_r, policy):
        model = build_plane_weight_model(m, n_r, R, f_choice)
        r = analyze_matrix(model.block(m)[1], policy)
        return [r.kernel_dim, r.cokernel_dim], r.gap_ratio

    q.__name__ = f"plane_weight[{m}]"
    return q


def glued_quantity(window=(-4, 4), r0: float = 4.0, warp: str = "log", R: float = 8.0, f_choice: str = "one") -> Quantity:
    """Per weight ``[unsplit, inner, outer]`` indices at ``n_r``."""

    def q(n_r, policy):
        values, gap = {}, math.inf
        whole = {b.domain_label: b for b in plane_blocks(window, n_r, R, f_choice, "spinor", policy)}
        for m in range(window[0], window[1] + 1):
            inner, outer = build_glued_plane_models(m, r0, n_r, warp, R, f_choice)
            parts = [analyze_matrix(p.block(m)[1], policy) for p in (inner, outer)]
            values[str(m)] = [whole[m].index, parts[0].index, parts[1].index]
            gap = min([gap, whole[m].gap_ratio] + [p.gap_ratio for p in parts])
        return values, gap

    q.__name__ = "glued"
    return q


def circle_kernel_quantity() -> Quantity:
    """Kernel dimension of the ``sin t`` circle model at Fourier cutoff ``K``."""

    def q(k_max, policy):
        r = analyze_matrix(build_circle_model(None, k_max).to_dense(), policy)
        return r.kernel_dim, r.gap_ratio

    q.__name__ = "circle_kernel"
    return q


def shift_quantity() -> Quantity:
    def q(n, policy):
        r = analyze_matrix(build_shift_model(n).to_dense(), policy)
        return r.index, r.gap_ratio

    q.__name__ = "shift"
    return q


# -- symbols ------------------------------------------------------------------


def symbol_suite(seed: int = 0, sphere_count: int = 64) -> IndexReport:
    """Leading symbols, ellipticity, transversal ellipticity and the deformed plane symbol."""
    rep = IndexReport("symbols", {"kind": "symbols"}, seed=seed)
    points = symbols.default_points(3, count=8, seed=seed)

    dev = 0.0
    for n in (1, 2, 3):
        op = symbols.laplacian(n)
        for xi in symbols.sphere_samples(n, sphere_count, seed):
            dev = max(dev, abs(symbols.leading_symbol(op, points[0, :n], xi)[0, 0] - xi @ xi))
    rep.verdict("Laplacian symbol equals |xi|^2", dev <= SYMBOL_TOL, max_deviation=dev)

    dev = 0.0
    for action in (clifford.make_pauli_action(), clifford.make_plane_action(), clifford.make_exterior_action(3)):
        op = symbols.dirac_operator(action)
        n = action.vector_dim
        for xi in symbols.sphere_samples(n, sphere_count, seed):
            diff = symbols.leading_symbol(op, points[0, :n], xi) - clifford.dirac_symbol(action, xi)
            dev = max(dev, float(np.abs(diff).max()))
    rep.verdict("Dirac symbol equals i c(xi)", dev <= SYMBOL_TOL, max_deviation=dev)

    plane = symbols.ellipticity_check(symbols.dirac_operator(clifford.make_plane_action()), sphere_count=sphere_count, seed=seed)
    rep.verdict("plane Dirac operator elliptic", plane.elliptic, min_singular_value=plane.min_singular_value)

    torus_op = symbols.partial_derivative(2, 0).scaled(-1j)
    torus_pts = np.random.default_rng(seed).uniform(0, 2 * np.pi, size=(16, 2))
    full = symbols.ellipticity_check(torus_op, torus_pts, sphere_count, seed)
    trans = symbols.transversal_ellipticity_check(torus_op, symbols.coordinate_orbits(2, [1]), torus_pts, sphere_count, seed)
    rep.verdict(
        "-i d/dx on the torus: transversally elliptic, not elliptic",
        trans.elliptic and not full.elliptic,
        transversal_min_singular_value=trans.min_singular_value,
        full_min_singular_value=full.min_singular_value,
    )

    deformed = symbols.deformed_symbol_check(
        clifford.make_plane_action(), symbols.plane_taming_field(), symbols.deformed_symbol_samples(seed=seed)
    )
    rep.verdict(
        "c(xi + v) invertible on transversal covectors off the origin",
        deformed.passed,
        noninvertible=deformed.noninvertible,
        min_singular_value_outside=deformed.min_singular_value_outside,
    )
    return rep
