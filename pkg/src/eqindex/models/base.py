"""Block-labelled finite matrix models of equivariant operators."""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..charring import GroupDesc

BLOCK_TOL = 1e-14


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _labels(pairs) -> tuple[tuple[int, int], ...]:
    return tuple((int(k), int(d)) for k, d in pairs)


@dataclass(frozen=True, eq=False)
class IsotypicBlockOperator:
    """A matrix between two representations, stored block by block.

    ``domain_labels`` and ``codomain_labels`` list ``(irrep label,
    multiplicity-space dimension)`` in basis order.  ``blocks[(d, c)]`` is the
    matrix from the ``d``-isotypic part of the domain to the ``c``-isotypic
    part of the codomain.  For equivariant models each domain label feeds at
    most one codomain label, namely ``d + metadata["label_offset"]``.
    """

    group: GroupDesc
    domain_labels: tuple[tuple[int, int], ...]
    codomain_labels: tuple[tuple[int, int], ...]
    blocks: Mapping[tuple[int, int], np.ndarray]
    graded: bool = False
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        dom, cod = _labels(self.domain_labels), _labels(self.codomain_labels)
        for labels in (dom, cod):
            names = [k for k, _ in labels]
            if len(set(names)) != len(names):
                raise ValueError("duplicate labels")
            for k, d in labels:
                self.group.check_label(k)
                if d < 0:
                    raise ValueError("negative block dimension")
        ddim, cdim = dict(dom), dict(cod)
        blocks = {}
        for (d, c), mat in self.blocks.items():
            if d not in ddim or c not in cdim:
                raise ValueError(f"block ({d}, {c}) uses an undeclared label")
            mat = _freeze(mat)
            if mat.shape != (cdim[c], ddim[d]):
                raise ValueError(f"block ({d}, {c}) has shape {mat.shape}, expected {(cdim[c], ddim[d])}")
            blocks[(int(d), int(c))] = mat
        object.__setattr__(self, "domain_labels", dom)
        object.__setattr__(self, "codomain_labels", cod)
        object.__setattr__(self, "blocks", MappingProxyType(blocks))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))
        if self.equivariant:
            offset = self.label_offset
            seen = set()
            for d, c in blocks:
                if d in seen:
                    raise ValueError(f"domain label {d} feeds several codomain labels")
                seen.add(d)
                target = (d + offset) % self.group.n if self.group.kind == "cyclic" else d + offset
                if c != target:
                    raise ValueError(f"block ({d}, {c}) breaks the label offset {offset}")

    @classmethod
    def from_matrix(cls, matrix, graded: bool = False, **metadata) -> "IsotypicBlockOperator":
        """An unlabelled model: trivial group, one block."""
        m = np.asarray(matrix, dtype=complex)
        return cls(GroupDesc.trivial(), ((0, m.shape[1]),), ((0, m.shape[0]),), {(0, 0): m}, graded, metadata)

    @property
    def equivariant(self) -> bool:
        return self.group.kind != "trivial"

    @property
    def label_offset(self) -> int:
        return int(self.metadata.get("label_offset", 0))

    @property
    def domain_dim(self) -> int:
        return sum(d for _, d in self.domain_labels)

    @property
    def codomain_dim(self) -> int:
        return sum(d for _, d in self.codomain_labels)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.codomain_dim, self.domain_dim)

    @property
    def far_edge(self) -> bool:
        """True for sections of a half-infinite operator truncated at the high-index end."""
        return bool(self.metadata.get("far_edge", False))

    @property
    def window(self) -> tuple[int, int] | None:
        w = self.metadata.get("window")
        return None if w is None else (int(w[0]), int(w[1]))

    def domain_slices(self) -> dict[int, slice]:
        return _slices(self.domain_labels)

    def codomain_slices(self) -> dict[int, slice]:
        return _slices(self.codomain_labels)

    def block(self, domain_label: int) -> tuple[int, np.ndarray]:
        """Codomain label and matrix of the block leaving ``domain_label``."""
        for (d, c), mat in self.blocks.items():
            if d == domain_label:
                return c, mat
        target = domain_label + self.label_offset
        cdim = dict(self.codomain_labels).get(target, 0)
        return target, np.zeros((cdim, dict(self.domain_labels)[domain_label]), dtype=complex)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        ds, cs = self.domain_slices(), self.codomain_slices()
        for (d, c), mat in self.blocks.items():
            out[cs[c], ds[d]] = mat
        return out

    def sigma_max(self) -> float:
        if min(self.shape) == 0:
            return 0.0
        return max((float(np.linalg.norm(m, 2)) for m in self.blocks.values() if m.size), default=0.0) if self.equivariant else float(
            np.linalg.norm(self.to_dense(), 2)
        )

    def adjoint(self) -> "IsotypicBlockOperator":
        meta = dict(self.metadata)
        meta["label_offset"] = -self.label_offset
        meta["adjoint"] = not bool(self.metadata.get("adjoint", False))
        blocks = {(c, d): m.conj().T for (d, c), m in self.blocks.items()}
        return IsotypicBlockOperator(self.group, self.codomain_labels, self.domain_labels, blocks, self.graded, meta)

    def replace(self, blocks=None, **metadata) -> "IsotypicBlockOperator":
        meta = dict(self.metadata)
        meta.update(metadata)
        return IsotypicBlockOperator(
            self.group, self.domain_labels, self.codomain_labels, self.blocks if blocks is None else blocks, self.graded, meta
        )

    def dump(self) -> dict:
        """Dense matrix plus label annotations, JSON-ready."""
        dense = self.to_dense()
        return {
            "group": self.group.to_dict(),
            "shape": list(self.shape),
            "domain_labels": [list(p) for p in self.domain_labels],
            "codomain_labels": [list(p) for p in self.codomain_labels],
            "graded": self.graded,
            "metadata": jsonable(self.metadata),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in dense],
        }


def _slices(labels) -> dict[int, slice]:
    out, start = {}, 0
    for k, d in labels:
        out[k] = slice(start, start + d)
        start += d
    return out


def jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def off_block_norm(model: IsotypicBlockOperator, dense: np.ndarray) -> float:
    """Largest entry of ``dense`` outside the declared blocks of ``model``."""
    mask = np.ones(dense.shape, dtype=bool)
    ds, cs = model.domain_slices(), model.codomain_slices()
    for d, c in model.blocks:
        mask[cs[c], ds[d]] = False
    return float(np.abs(dense[mask]).max(initial=0.0))


def compose(b: IsotypicBlockOperator, a: IsotypicBlockOperator) -> IsotypicBlockOperator:
    """The model of ``B A``."""
    if a.group != b.group or a.codomain_labels != b.domain_labels:
        raise ValueError("models are not composable")
    blocks = {}
    for (d, c), ma in a.blocks.items():
        for (c2, e), mb in b.blocks.items():
            if c2 == c:
                blocks[(d, e)] = blocks.get((d, e), 0) + mb @ ma
    meta = {
        "kind": f"compose({b.metadata.get('kind', '?')},{a.metadata.get('kind', '?')})",
        "label_offset": a.label_offset + b.label_offset,
        "far_edge": a.far_edge or b.far_edge,
    }
    return IsotypicBlockOperator(a.group, a.domain_labels, b.codomain_labels, blocks, False, meta)


def add_perturbation(model: IsotypicBlockOperator, perturbation: np.ndarray, equivariant: bool | None = None) -> IsotypicBlockOperator:
    """``model + K`` for a dense ``K`` in the model's basis.

    With ``equivariant`` set (the default for labelled models) ``K`` must respect
    the block structure; otherwise the labels are dropped.
    """
    k = np.asarray(perturbation, dtype=complex)
    if k.shape != model.shape:
        raise ValueError(f"perturbation shape {k.shape} != model shape {model.shape}")
    if equivariant is None:
        equivariant = model.equivariant
    if equivariant and model.equivariant:
        if off_block_norm(model, k) > BLOCK_TOL:
            raise ValueError("perturbation does not respect the isotypic block structure")
        ds, cs = model.domain_slices(), model.codomain_slices()
        blocks = {}
        for d, dd in model.domain_labels:
            c, mat = model.block(d)
            if c in cs:
                blocks[(d, c)] = mat + k[cs[c], ds[d]]
        return model.replace(blocks=blocks, perturbed=True)
    meta = dict(model.metadata)
    meta["perturbed"] = True
    meta.pop("label_offset", None)
    meta.pop("window", None)
    return IsotypicBlockOperator.from_matrix(model.to_dense() + k, model.graded, **meta)


def _rank_one_terms(rng, rows: int, cols: int, rank: int) -> np.ndarray:
    u = rng.standard_normal((rows, rank)) + 1j * rng.standard_normal((rows, rank))
    v = rng.standard_normal((cols, rank)) + 1j * rng.standard_normal((cols, rank))
    u, _ = np.linalg.qr(u)
    v, _ = np.linalg.qr(v)
    s = np.sort(rng.uniform(0.2, 1.0, rank))[::-1]
    s[0] = 1.0
    return (u * s) @ v.conj().T


def random_finite_rank_perturbation(
    model: IsotypicBlockOperator,
    rank: int,
    relative_norm: float,
    seed: int,
    equivariant: bool | None = None,
) -> IsotypicBlockOperator:
    """Add a seeded random matrix of rank ``rank`` and norm ``relative_norm * sigma_max``.

    For sections of half-infinite operators (``far_edge``) the perturbation is
    supported on the first quarter of the coordinates: a compact operator
    cannot reach the truncation edge.
    """
    if rank < 0 or rank > min(model.shape):
        raise ValueError(f"rank must lie in [0, {min(model.shape)}]")
    if not 0 <= relative_norm <= 0.5:
        raise ValueError("relative_norm must lie in [0, 0.5]")
    if equivariant is None:
        equivariant = model.equivariant
    if rank == 0 or relative_norm == 0:
        return model
    rng = np.random.default_rng(seed)
    k = np.zeros(model.shape, dtype=complex)
    if equivariant and model.equivariant:
        ds, cs = model.domain_slices(), model.codomain_slices()
        usable = [(d, c) for d, _ in model.domain_labels for c in [model.block(d)[0]] if c in cs]
        usable = [(d, c) for d, c in usable if ds[d].stop > ds[d].start and cs[c].stop > cs[c].start]
        if not usable:
            return model
        picks = rng.integers(0, len(usable), size=rank)
        for p in picks:
            d, c = usable[p]
            rows, cols = cs[c].stop - cs[c].start, ds[d].stop - ds[d].start
            k[cs[c], ds[d]] += _rank_one_terms(rng, rows, cols, 1)
    else:
        rows, cols = model.shape
        if model.far_edge:
            rows, cols = max(rank, rows // 4), max(rank, cols // 4)
        k[:rows, :cols] = _rank_one_terms(rng, rows, cols, rank)
    norm = float(np.linalg.norm(k, 2))
    if norm > 0:
        k *= relative_norm * model.sigma_max() / norm
    out = add_perturbation(model, k, equivariant)
    return out.replace(perturbation={"rank": int(rank), "relative_norm": float(relative_norm), "seed": int(seed)})
