"""Numerical kernels, Fredholm indices and equivariant indices of matrix models."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charring import CharacterElement, GroupDesc, WindowedCharacter
from .models import IsotypicBlockOperator, build_plane_weight_model, label_offset

__all__ = [
    "BlockResult",
    "IndeterminateRankError",
    "PlaneIndexResult",
    "RankDecision",
    "RankPolicy",
    "analyze_matrix",
    "analyze_model",
    "character_window",
    "deformed_plane_index",
    "equivariant_index",
    "fredholm_index",
    "label_offset",
    "multiplicities",
    "numeric_kernel",
    "plane_blocks",
]

LOCALIZED = 0.5
LOCALIZATION_BAND = (0.1, 0.9)


class IndeterminateRankError(RuntimeError):
    """A rank decision fell inside a closing spectral gap."""

    def __init__(self, message: str, results=None):
        super().__init__(message)
        self.results = results


@dataclass(frozen=True)
class RankPolicy:
    """``sigma`` counts as zero iff ``sigma < max(abs_floor, rel_factor * sigma_max)``."""

    abs_floor: float = 1e-10
    rel_factor: float = 1e-6
    min_gap: float = 10.0

    def __post_init__(self):
        if not (self.abs_floor > 0 and 0 < self.rel_factor < 1 and self.min_gap >= 1):
            raise ValueError("rank policy parameters out of range")

    def threshold(self, sigma_max: float) -> float:
        return max(self.abs_floor, self.rel_factor * sigma_max)

    def to_dict(self) -> dict:
        return {"abs_floor": self.abs_floor, "rel_factor": self.rel_factor, "min_gap": self.min_gap}


@dataclass(frozen=True, eq=False)
class RankDecision:
    """Kernel dimension of a matrix read off its singular values.

    ``gap_ratio`` is the smallest retained singular value over the largest one
    counted as zero.  Zeros forced by the shape (more columns than singular
    values) are exact, giving an infinite ratio; with no zeros at all the
    denominator is the absolute floor.
    """

    singular_values: np.ndarray
    shape: tuple[int, int]
    threshold: float
    rank: int
    gap_ratio: float
    policy: RankPolicy
    null_basis: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.shape[1] - self.rank

    @property
    def confident(self) -> bool:
        return self.gap_ratio >= self.policy.min_gap

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "dim": self.dim,
            "threshold": self.threshold,
            "gap_ratio": self.gap_ratio,
            "confident": self.confident,
        }


def _decide(sv: np.ndarray, shape, policy: RankPolicy, null_basis=None) -> RankDecision:
    sigma_max = float(sv[0]) if sv.size else 0.0
    thr = policy.threshold(sigma_max)
    rank = int(np.count_nonzero(sv >= thr))
    structural = shape[1] - sv.size
    first_kept = float(sv[rank - 1]) if rank else math.inf
    if rank < sv.size:
        last_zero = float(sv[rank])
    elif structural > 0:
        last_zero = 0.0
    else:
        last_zero = policy.abs_floor
    gap = math.inf if last_zero == 0.0 else first_kept / last_zero
    return RankDecision(sv, (int(shape[0]), int(shape[1])), thr, rank, gap, policy, null_basis)


def numeric_kernel(matrix, policy: RankPolicy | None = None, basis: bool = False) -> RankDecision:
    """Kernel dimension of ``matrix`` by thresholded singular values."""
    policy = policy or RankPolicy()
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if min(a.shape) == 0:
        nb = np.eye(a.shape[1], dtype=complex) if basis else None
        return _decide(np.zeros(0), a.shape, policy, nb)
    if not basis:
        return _decide(np.linalg.svd(a, compute_uv=False), a.shape, policy)
    _, sv, vh = np.linalg.svd(a)
    d = _decide(sv, a.shape, policy)
    return _decide(sv, a.shape, policy, vh[d.rank :].conj().T)


@dataclass(frozen=True, eq=False)
class BlockResult:
    """Kernel and cokernel of one block ``domain_label -> codomain_label``."""

    domain_label: int
    codomain_label: int
    kernel: RankDecision
    cokernel: RankDecision
    kernel_dim: int
    cokernel_dim: int
    localization: tuple[float, ...] = ()

    @property
    def index(self) -> int:
        return self.kernel_dim - self.cokernel_dim

    @property
    def gap_ratio(self) -> float:
        return min(self.kernel.gap_ratio, self.cokernel.gap_ratio)

    @property
    def localized_cleanly(self) -> bool:
        lo, hi = LOCALIZATION_BAND
        return not any(lo <= w <= hi for w in self.localization)

    @property
    def confident(self) -> bool:
        return self.kernel.confident and self.cokernel.confident and self.localized_cleanly

    def to_dict(self) -> dict:
        out = {
            "domain_label": self.domain_label,
            "codomain_label": self.codomain_label,
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "index": self.index,
            "gap_ratio": self.gap_ratio,
            "confident": self.confident,
            "shape": list(self.kernel.shape),
        }
        if self.localization:
            out["localization"] = [round(w, 12) for w in self.localization]
        return out


def _near_count(basis: np.ndarray) -> tuple[int, list[float]]:
    """Number of null directions concentrated on the first half of the coordinates."""
    if basis is None or basis.shape[1] == 0:
        return 0, []
    half = basis.shape[0] // 2
    near = basis[:half]
    weights = np.linalg.eigvalsh(near.conj().T @ near)
    weights = np.clip(weights, 0.0, 1.0)
    return int(np.count_nonzero(weights > LOCALIZED)), [float(w) for w in weights]


def analyze_matrix(matrix, policy: RankPolicy | None = None, far_edge: bool = False, labels=(0, 0)) -> BlockResult:
    """Kernel of ``A`` and of ``A^H`` from a single singular value decomposition.

    With ``far_edge`` the matrix is a section of a half-infinite operator and
    only null vectors living on the first half of the coordinates count; the
    ones at the far end are artefacts of truncation.
    """
    policy = policy or RankPolicy()
    a = np.asarray(matrix, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    rows, cols = a.shape
    if min(a.shape) == 0:
        ker = _decide(np.zeros(0), (rows, cols), policy, np.eye(cols, dtype=complex))
        cok = _decide(np.zeros(0), (cols, rows), policy, np.eye(rows, dtype=complex))
    elif far_edge:
        u, sv, vh = np.linalg.svd(a)
        ker = _decide(sv, (rows, cols), policy)
        ker = _decide(sv, (rows, cols), policy, vh[ker.rank :].conj().T)
        cok = _decide(sv, (cols, rows), policy, u[:, ker.rank :])
    else:
        sv = np.linalg.svd(a, compute_uv=False)
        ker = _decide(sv, (rows, cols), policy)
        cok = _decide(sv, (cols, rows), policy)
    if not far_edge:
        return BlockResult(labels[0], labels[1], ker, cok, ker.dim, cok.dim)
    kd, kw = _near_count(ker.null_basis)
    cd, cw = _near_count(cok.null_basis)
    return BlockResult(labels[0], labels[1], ker, cok, kd, cd, tuple(kw + cw))


def analyze_model(model: IsotypicBlockOperator, policy: RankPolicy | None = None) -> list[BlockResult]:
    """One result per block, plus zero blocks for labels the operator does not touch."""
    policy = policy or RankPolicy()
    cdims = dict(model.codomain_labels)
    hit = set()
    out = []
    for d, dd in model.domain_labels:
        c, mat = model.block(d)
        if c in cdims:
            hit.add(c)
        else:
            mat = np.zeros((0, dd), dtype=complex)
        out.append(analyze_matrix(mat, policy, model.far_edge, (d, c)))
    for c, cd in model.codomain_labels:
        if c not in hit:
            out.append(analyze_matrix(np.zeros((cd, 0)), policy, model.far_edge, (c - model.label_offset, c)))
    return out


def _require_confident(results: list[BlockResult]) -> None:
    bad = [r for r in results if not r.confident]
    if bad:
        worst = min(bad, key=lambda r: r.gap_ratio)
        raise IndeterminateRankError(
            f"{len(bad)} block(s) indeterminate; worst gap ratio {worst.gap_ratio:.3g} at label {worst.domain_label}",
            results,
        )


def fredholm_index(model, policy: RankPolicy | None = None) -> int:
    """``dim Ker - dim Coker``; raises :class:`IndeterminateRankError` on an unclear rank."""
    if not isinstance(model, IsotypicBlockOperator):
        model = IsotypicBlockOperator.from_matrix(model)
    results = analyze_model(model, policy)
    _require_confident(results)
    return sum(r.index for r in results)


def multiplicities(results: list[BlockResult]) -> tuple[dict[int, int], dict[int, int]]:
    """Kernel multiplicities by domain label and cokernel multiplicities by codomain label."""
    plus, minus = {}, {}
    for r in results:
        if r.kernel.shape[1]:
            plus[r.domain_label] = plus.get(r.domain_label, 0) + r.kernel_dim
        if r.cokernel.shape[1]:
            minus[r.codomain_label] = minus.get(r.codomain_label, 0) + r.cokernel_dim
    return plus, minus


def character_window(window: tuple[int, int], offset: int) -> tuple[int, int] | None:
    """Labels whose kernel and cokernel multiplicities are both known."""
    lo, hi = max(window[0], window[0] + offset), min(window[1], window[1] + offset)
    return (lo, hi) if lo <= hi else None


def equivariant_index(model: IsotypicBlockOperator, policy: RankPolicy | None = None):
    """Index as a character: kernel minus cokernel multiplicity per irreducible.

    Models carrying a ``window`` give a :class:`WindowedCharacter`.
    """
    results = analyze_model(model, policy)
    _require_confident(results)
    return _character(model.group, results, model.window, model.label_offset)


def _character(group: GroupDesc, results, window, offset):
    plus, minus = multiplicities(results)
    labels = set(plus) | set(minus)
    entries = {k: plus.get(k, 0) - minus.get(k, 0) for k in labels}
    if window is None:
        return CharacterElement.from_dict(group, entries)
    w = character_window(window, offset)
    return WindowedCharacter.from_dict(group, w[0], w[1], {k: v for k, v in entries.items() if w[0] <= k <= w[1]})


@dataclass(frozen=True, eq=False)
class PlaneIndexResult:
    """Per-weight results of the deformed plane operator and the assembled character."""

    character: WindowedCharacter
    kernel: dict[int, int]
    cokernel: dict[int, int]
    blocks: tuple[BlockResult, ...]
    params: dict

    @property
    def min_gap(self) -> float:
        return min(r.gap_ratio for r in self.blocks)


def plane_blocks(window, n_r=400, R=8.0, f_choice="one", lift="spinor", policy=None) -> list[BlockResult]:
    """Kernel and cokernel of each weight block of the deformed plane operator."""
    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise ValueError("empty window")
    policy = policy or RankPolicy()
    out = []
    for m in range(lo, hi + 1):
        c, mat = build_plane_weight_model(m, n_r, R, f_choice, lift).block(m)
        out.append(analyze_matrix(mat, policy, False, (m, c)))
    return out


def deformed_plane_index(
    window: tuple[int, int] = (-8, 8),
    n_r: int = 400,
    R: float = 8.0,
    f_choice: str = "one",
    lift: str = "spinor",
    policy: RankPolicy | None = None,
) -> PlaneIndexResult:
    """Assemble the windowed index of the deformed plane Dirac operator.

    Kernels are labelled by domain weight, cokernels by codomain weight.
    """
    lo, hi = int(window[0]), int(window[1])
    blocks = plane_blocks((lo, hi), n_r, R, f_choice, lift, policy)
    _require_confident(blocks)
    offset = label_offset(lift)
    plus, minus = multiplicities(blocks)
    char = _character(GroupDesc.circle(), blocks, (lo, hi), offset)
    params = {"window": [lo, hi], "n_r": n_r, "R": R, "f_choice": f_choice, "lift": lift, "label_offset": offset}
    return PlaneIndexResult(char, plus, minus, tuple(blocks), params)
