"""Clifford actions ``c: R^n -> End(C^N)`` with ``c(v)^2 = -|v|^2 Id``."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

CLIFFORD_TOL = 1e-12

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class CliffordAction:
    """Generators ``c_1..c_n`` acting on ``C^N``, optionally graded.

    ``grading`` is a pair of index tuples ``(even, odd)`` partitioning the
    fiber basis into ``E+`` and ``E-``.
    """

    generators: np.ndarray
    grading: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    name: str = ""

    def __post_init__(self):
        gens = np.array(self.generators, dtype=complex)
        if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
            raise ValueError("generators must have shape (n, N, N)")
        gens.setflags(write=False)
        object.__setattr__(self, "generators", gens)
        if self.grading is not None:
            plus, minus = (tuple(int(i) for i in part) for part in self.grading)
            if sorted(plus + minus) != list(range(self.fiber_dim)):
                raise ValueError("grading must partition the fiber basis")
            object.__setattr__(self, "grading", (plus, minus))

    @property
    def vector_dim(self) -> int:
        return self.generators.shape[0]

    @property
    def fiber_dim(self) -> int:
        return self.generators.shape[1]

    @property
    def graded(self) -> bool:
        return self.grading is not None

    def c(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.vector_dim,):
            raise ValueError(f"expected a vector of length {self.vector_dim}, got shape {v.shape}")
        return np.tensordot(v, self.generators, axes=1)

    def plus_to_minus(self, a: np.ndarray) -> np.ndarray:
        """The ``E+ -> E-`` block of a fiber endomorphism."""
        if self.grading is None:
            raise ValueError("action is not graded")
        plus, minus = self.grading
        return a[np.ix_(minus, plus)]

    def to_dict(self) -> dict:
        return {
            "n": self.vector_dim,
            "N": self.fiber_dim,
            "generators": [
                [[[float(z.real), float(z.imag)] for z in row] for row in g] for g in self.generators
            ],
            "grading": None if self.grading is None else [list(self.grading[0]), list(self.grading[1])],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CliffordAction":
        gens = np.array(d["generators"], dtype=float)
        gens = gens[..., 0] + 1j * gens[..., 1]
        if gens.shape[:2] != (d["n"], d["N"]):
            raise ValueError("serialized dimensions disagree with generator data")
        grading = None if d.get("grading") is None else tuple(tuple(p) for p in d["grading"])
        return cls(gens, grading)


def make_pauli_action() -> CliffordAction:
    """``R^3`` on ``C^2`` through ``c(x) = (x1 s1 + x2 s2 + x3 s3) / i``."""
    return CliffordAction(np.stack([SIGMA_1, SIGMA_2, SIGMA_3]) / 1j, name="pauli")


def make_plane_action() -> CliffordAction:
    """``R^2`` on ``C^2 = E+ + E-`` graded by the eigenspaces of sigma_3."""
    return CliffordAction(np.stack([SIGMA_1, SIGMA_2]) / 1j, grading=((0,), (1,)), name="plane")


def exterior_basis(n: int) -> list[tuple[int, ...]]:
    """Basis of the exterior algebra on ``n`` generators, by degree then lexicographically."""
    return [s for k in range(n + 1) for s in combinations(range(n), k)]


def make_exterior_action(n: int) -> CliffordAction:
    """``c(e_i) = eps(e_i) - iota(e_i)`` on the exterior algebra of ``R^n``."""
    if not 1 <= n <= 8:
        raise ValueError(f"exterior action supports 1 <= n <= 8, got {n}")
    basis = exterior_basis(n)
    position = {s: j for j, s in enumerate(basis)}
    gens = np.zeros((n, len(basis), len(basis)), dtype=complex)
    for i in range(n):
        for j, s in enumerate(basis):
            sign = (-1) ** sum(1 for a in s if a < i)
            if i in s:
                gens[i, position[tuple(a for a in s if a != i)], j] -= sign
            else:
                gens[i, position[tuple(sorted(s + (i,)))], j] += sign
    even = tuple(j for j, s in enumerate(basis) if len(s) % 2 == 0)
    odd = tuple(j for j, s in enumerate(basis) if len(s) % 2 == 1)
    return CliffordAction(gens, grading=(even, odd), name=f"exterior{n}")


@dataclass(frozen=True)
class CliffordReport:
    max_deviation: float
    grading_deviation: float | None
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "grading_deviation": self.grading_deviation,
            "passed": self.passed,
        }


def verify_clifford(action: CliffordAction, tol: float = CLIFFORD_TOL) -> CliffordReport:
    """Check ``c_i c_j + c_j c_i = -2 delta_ij Id`` and, if graded, odd parity."""
    gens = action.generators
    eye = np.eye(action.fiber_dim)
    dev = 0.0
    for i in range(action.vector_dim):
        for j in range(i, action.vector_dim):
            anti = gens[i] @ gens[j] + gens[j] @ gens[i]
            dev = max(dev, np.abs(anti + 2.0 * (i == j) * eye).max())
    grading_dev = None
    if action.graded:
        plus, minus = action.grading
        grading_dev = 0.0
        for g in gens:
            for part in (plus, minus):
                if part:
                    grading_dev = max(grading_dev, np.abs(g[np.ix_(part, part)]).max())
    passed = dev < tol and (grading_dev is None or grading_dev < tol)
    return CliffordReport(float(dev), grading_dev, bool(passed))


def dirac_symbol(action: CliffordAction, xi) -> np.ndarray:
    """Leading symbol ``i c(xi)`` of the Dirac operator of ``action``."""
    return 1j * action.c(xi)
