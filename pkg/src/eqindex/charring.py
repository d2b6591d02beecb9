"""Character rings of the abelian groups used by the models.

Every group supported here (trivial, cyclic ``Z_n``, circle ``S^1``) has only
one-dimensional irreducible representations, so an irreducible is just an
integer label:

* trivial group: the single label ``0``;
* ``Z_n``: a residue ``0 <= j < n`` (the character ``q -> exp(2 pi i j / n)``);
* ``S^1``: an integer weight ``m`` (the character ``exp(it) -> exp(imt)``).

A :class:`CharacterElement` is a finitely supported integer combination of
labels.  A :class:`WindowedCharacter` is a truncation of an infinite formal sum
to a window ``[lo, hi]`` of labels; outside the window its entries are unknown,
never zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

SNAP_TOL = 1e-6
UNITARY_TOL = 1e-8


class GroupMismatchError(ValueError):
    pass


class UnknownLabelError(KeyError):
    """Raised when a windowed character is queried outside its window."""


@dataclass(frozen=True)
class GroupDesc:
    kind: str
    n: int | None = None

    def __post_init__(self):
        if self.kind not in ("trivial", "cyclic", "circle"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "cyclic":
            if self.n is None or int(self.n) < 1:
                raise ValueError("cyclic group needs n >= 1")
        elif self.n is not None:
            raise ValueError(f"{self.kind} group takes no order parameter")

    @classmethod
    def trivial(cls) -> "GroupDesc":
        return cls("trivial")

    @classmethod
    def cyclic(cls, n: int) -> "GroupDesc":
        return cls("cyclic", int(n))

    @classmethod
    def circle(cls) -> "GroupDesc":
        return cls("circle")

    @property
    def is_finite(self) -> bool:
        return self.kind != "circle"

    def labels(self) -> list[int]:
        """All irreducible labels of a finite group."""
        if self.kind == "trivial":
            return [0]
        if self.kind == "cyclic":
            return list(range(self.n))
        raise ValueError("the circle group has infinitely many irreducibles")

    def check_label(self, label) -> int:
        if isinstance(label, (bool, np.bool_)) or not isinstance(label, (int, np.integer)):
            raise TypeError(f"irrep label must be an integer, got {label!r}")
        label = int(label)
        if self.kind == "trivial" and label != 0:
            raise ValueError("the trivial group has only the label 0")
        if self.kind == "cyclic" and not 0 <= label < self.n:
            raise ValueError(f"residue {label} out of range for Z_{self.n}")
        return label

    def combine(self, a: int, b: int) -> int:
        """Label of the tensor product of two irreducibles."""
        if self.kind == "trivial":
            return 0
        if self.kind == "cyclic":
            return (a + b) % self.n
        return a + b

    def to_dict(self) -> dict:
        return {"kind": self.kind} if self.n is None else {"kind": self.kind, "n": self.n}

    @classmethod
    def from_dict(cls, d: Mapping) -> "GroupDesc":
        return cls(d["kind"], d.get("n"))

    def __str__(self):
        return {"trivial": "1", "circle": "S1"}.get(self.kind) or f"Z{self.n}"


def _clean(group: GroupDesc, entries: Mapping) -> tuple[tuple[int, int], ...]:
    out = {}
    for label, mult in entries.items():
        label = group.check_label(label)
        if int(mult) != mult:
            raise ValueError(f"multiplicity {mult!r} is not an integer")
        out[label] = out.get(label, 0) + int(mult)
    return tuple(sorted((k, v) for k, v in out.items() if v != 0))


@dataclass(frozen=True)
class CharacterElement:
    """Finitely supported element of the character ring ``R(G)``."""

    group: GroupDesc
    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", _clean(self.group, dict(self.items)))

    @classmethod
    def from_dict(cls, group: GroupDesc, entries: Mapping[int, int]) -> "CharacterElement":
        return cls(group, tuple(entries.items()))

    @classmethod
    def zero(cls, group: GroupDesc) -> "CharacterElement":
        return cls(group)

    @property
    def entries(self) -> dict[int, int]:
        return dict(self.items)

    def __getitem__(self, label) -> int:
        return self.entries.get(self.group.check_label(label), 0)

    def __add__(self, other):
        return char_add(self, other)

    def __neg__(self):
        return CharacterElement(self.group, tuple((k, -v) for k, v in self.items))

    def __sub__(self, other):
        return char_add(self, -other)

    def __mul__(self, other):
        return char_tensor(self, other)

    def __bool__(self):
        return bool(self.items)

    def dim(self) -> int:
        return char_dim(self)

    def to_dict(self) -> dict:
        return {"group": self.group.to_dict(), "entries": [list(p) for p in self.items]}

    def __str__(self):
        if not self.items:
            return "0"
        return " + ".join(f"{v}*V[{k}]" for k, v in self.items).replace("+ -", "- ")


def _same_group(a, b):
    if a.group != b.group:
        raise GroupMismatchError(f"group mismatch: {a.group} vs {b.group}")


def char_add(a: CharacterElement, b: CharacterElement) -> CharacterElement:
    _same_group(a, b)
    out = a.entries
    for k, v in b.items:
        out[k] = out.get(k, 0) + v
    return CharacterElement.from_dict(a.group, out)


def char_tensor(a: CharacterElement, b: CharacterElement) -> CharacterElement:
    """Product in ``R(G)``: weights add, extended bilinearly."""
    _same_group(a, b)
    out: dict[int, int] = {}
    for ka, va in a.items:
        for kb, vb in b.items:
            k = a.group.combine(ka, kb)
            out[k] = out.get(k, 0) + va * vb
    return CharacterElement.from_dict(a.group, out)


def char_dim(a: CharacterElement) -> int:
    # all irreducibles of the supported groups are one-dimensional
    return sum(v for _, v in a.items)


@dataclass(frozen=True)
class WindowedCharacter:
    """Truncation of an element of the completed ring to labels ``lo..hi``."""

    group: GroupDesc
    lo: int
    hi: int
    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.group.kind == "trivial":
            raise ValueError("windowed characters need a cyclic or circle group")
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")
        self.group.check_label(self.lo)
        self.group.check_label(self.hi)
        d = {}
        for k, v in self.items:
            k = self.group.check_label(k)
            if not self.lo <= k <= self.hi:
                raise ValueError(f"label {k} outside window [{self.lo}, {self.hi}]")
            d[k] = d.get(k, 0) + int(v)
        object.__setattr__(self, "items", tuple(sorted((k, v) for k, v in d.items() if v)))

    @classmethod
    def from_dict(cls, group, lo, hi, entries: Mapping[int, int]) -> "WindowedCharacter":
        return cls(group, lo, hi, tuple(entries.items()))

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def entries(self) -> dict[int, int]:
        return dict(self.items)

    def __contains__(self, label) -> bool:
        return self.lo <= label <= self.hi

    def __getitem__(self, label) -> int:
        if label not in self:
            raise UnknownLabelError(f"label {label} outside window [{self.lo}, {self.hi}]")
        return dict(self.items).get(label, 0)

    def labels(self) -> range:
        return range(self.lo, self.hi + 1)

    def restrict(self, lo: int, hi: int) -> "WindowedCharacter":
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        return WindowedCharacter(self.group, lo, hi, tuple((k, v) for k, v in self.items if lo <= k <= hi))

    def intersect_window(self, other: "WindowedCharacter") -> tuple[int, int] | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return (lo, hi) if lo <= hi else None

    def agrees_with(self, other: "WindowedCharacter") -> bool:
        """Equality on the common window; False when the windows are disjoint."""
        _same_group(self, other)
        w = self.intersect_window(other)
        if w is None:
            return False
        return all(self[k] == other[k] for k in range(w[0], w[1] + 1))

    def __add__(self, other: "WindowedCharacter") -> "WindowedCharacter":
        _same_group(self, other)
        w = self.intersect_window(other)
        if w is None:
            raise ValueError("windows do not overlap; the sum is unknown everywhere")
        return WindowedCharacter.from_dict(
            self.group, w[0], w[1], {k: self[k] + other[k] for k in range(w[0], w[1] + 1)}
        )

    def to_dict(self) -> dict:
        return {
            "group": self.group.to_dict(),
            "window": [self.lo, self.hi],
            "entries": [[k, self[k]] for k in self.labels()],
        }

    def __str__(self):
        body = ", ".join(f"{k}:{self[k]}" for k in self.labels())
        return f"[{self.lo}..{self.hi}] {{{body}}}"


# -- decomposition of representations ---------------------------------------


def _check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("representation matrices must be square")
    dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if dev > tol:
        raise ValueError(f"matrix is not unitary (deviation {dev:.2e})")


def isotypic_projectors(
    action: np.ndarray | Callable[[float], np.ndarray],
    group: GroupDesc,
    max_weight: int = 64,
) -> dict[int, np.ndarray]:
    """Projectors onto the isotypic components, by character averaging.

    For ``Z_n`` the input is the matrix of the generator; for ``S^1`` it is a
    callable ``t -> rho(exp(it))`` and weights are assumed to satisfy
    ``|m| <= max_weight`` (checked afterwards via completeness).
    """
    if group.kind == "trivial":
        u = np.asarray(action, dtype=complex)
        _check_unitary(u)
        return {0: np.eye(u.shape[0], dtype=complex)}
    if group.kind == "cyclic":
        g = np.asarray(action, dtype=complex)
        _check_unitary(g)
        n = group.n
        powers = [np.eye(g.shape[0], dtype=complex)]
        for _ in range(n - 1):
            powers.append(powers[-1] @ g)
        if np.abs(powers[-1] @ g - powers[0]).max() > UNITARY_TOL:
            raise ValueError(f"generator does not satisfy g^{n} = Id")
        omega = np.exp(-2j * np.pi / n)
        return {j: sum(omega ** (j * k) * powers[k] for k in range(n)) / n for j in range(n)}
    count = 2 * max_weight + 1
    ts = 2 * np.pi * np.arange(count) / count
    samples = [np.asarray(action(t), dtype=complex) for t in ts]
    for s in samples:
        _check_unitary(s)
    return {
        m: sum(np.exp(-1j * m * t) * s for t, s in zip(ts, samples)) / count
        for m in range(-max_weight, max_weight + 1)
    }


def _snap(angles: np.ndarray, step: float) -> np.ndarray:
    k = np.rint(angles / step)
    dist = np.abs(angles - k * step)
    if dist.size and dist.max() > SNAP_TOL:
        raise ValueError(f"eigenvalue off the character lattice by {dist.max():.2e} rad")
    return k.astype(int)


def decompose_representation(
    action: np.ndarray | Callable[[float], np.ndarray],
    group: GroupDesc,
    max_weight: int = 64,
) -> CharacterElement:
    """Multiplicities of the irreducibles in a finite dimensional representation.

    The eigenvalues of the generator (or of ``rho(exp(2 pi i / P))`` for the
    circle) are snapped to the admissible character values; angular distance
    above ``1e-6`` is an error.  The snapped counts are cross-checked against
    the traces of the isotypic projectors.
    """
    if group.kind == "trivial":
        u = np.asarray(action, dtype=complex)
        _check_unitary(u)
        if np.abs(u - np.eye(u.shape[0])).max() > SNAP_TOL:
            raise ValueError("the trivial group must act by the identity")
        return CharacterElement.from_dict(group, {0: u.shape[0]})

    projectors = isotypic_projectors(action, group, max_weight)
    if group.kind == "cyclic":
        g = np.asarray(action, dtype=complex)
        dim = g.shape[0]
        labels = _snap(np.angle(np.linalg.eigvals(g)), 2 * np.pi / group.n) % group.n
    else:
        count = 2 * max_weight + 1
        g = np.asarray(action(2 * np.pi / count), dtype=complex)
        dim = g.shape[0]
        labels = _snap(np.angle(np.linalg.eigvals(g)), 2 * np.pi / count)
        labels = np.where(labels > max_weight, labels - count, labels)
    counts: dict[int, int] = {}
    for j in labels:
        counts[int(j)] = counts.get(int(j), 0) + 1
    total = sum(projectors.values())
    if np.abs(total - np.eye(dim)).max() > SNAP_TOL:
        raise ValueError("isotypic projectors do not resolve the identity; weights exceed max_weight?")
    for j, p in projectors.items():
        if abs(np.trace(p).real - counts.get(j, 0)) > SNAP_TOL:
            raise ValueError(f"projector trace disagrees with eigenvalue count at label {j}")
    return CharacterElement.from_dict(group, counts)
