"""Leading symbols, ellipticity and transversal ellipticity by sampling.

Operators are written as ``sum_{|a| <= k} a_a(x) D^a`` with ``D_j = -i d/dx_j``,
so the leading symbol at ``(x, xi)`` is ``sum_{|a| = k} a_a(x) xi^a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .charring import GroupDesc
from .clifford import CliffordAction

ELLIPTIC_TOL = 1e-8

Coefficient = Callable[[np.ndarray], np.ndarray]


def _as_matrix(value, n_out: int, n_in: int) -> np.ndarray:
    m = np.asarray(value, dtype=complex)
    if m.ndim == 0:
        m = m * np.eye(n_out, n_in, dtype=complex)
    if m.shape != (n_out, n_in):
        raise ValueError(f"coefficient has shape {m.shape}, expected {(n_out, n_in)}")
    return m


@dataclass(frozen=True, eq=False)
class DiffOpCoefficients:
    """An order-``k`` operator ``R^n -> Hom(C^N1, C^N2)`` as a coefficient table."""

    order: int
    base_dim: int
    fiber_in: int
    fiber_out: int
    coefficients: Mapping[tuple[int, ...], Coefficient]
    name: str = ""

    def __post_init__(self):
        for alpha in self.coefficients:
            if len(alpha) != self.base_dim or min(alpha, default=0) < 0:
                raise ValueError(f"bad multi-index {alpha} for base dimension {self.base_dim}")
            if sum(alpha) > self.order:
                raise ValueError(f"multi-index {alpha} exceeds order {self.order}")
        if not any(sum(a) == self.order for a in self.coefficients) and self.coefficients:
            raise ValueError("no coefficient of top order")

    def coefficient(self, alpha, x) -> np.ndarray:
        return _as_matrix(self.coefficients[alpha](np.asarray(x, dtype=float)), self.fiber_out, self.fiber_in)

    def _check(self, x, xi):
        x = np.asarray(x, dtype=float).reshape(-1)
        xi = np.asarray(xi, dtype=float).reshape(-1)
        if x.shape != (self.base_dim,) or xi.shape != (self.base_dim,):
            raise ValueError(f"point and covector must have length {self.base_dim}")
        return x, xi

    def scaled(self, factor: complex) -> "DiffOpCoefficients":
        coeffs = {a: (lambda x, f=f: factor * np.asarray(f(x), dtype=complex)) for a, f in self.coefficients.items()}
        return DiffOpCoefficients(self.order, self.base_dim, self.fiber_in, self.fiber_out, coeffs, self.name)


def _monomial(xi: np.ndarray, alpha) -> float:
    return float(np.prod([xi[j] ** a for j, a in enumerate(alpha)]))


def leading_symbol(coeffs: DiffOpCoefficients, x, xi) -> np.ndarray:
    x, xi = coeffs._check(x, xi)
    out = np.zeros((coeffs.fiber_out, coeffs.fiber_in), dtype=complex)
    for alpha in coeffs.coefficients:
        if sum(alpha) == coeffs.order:
            out += coeffs.coefficient(alpha, x) * _monomial(xi, alpha)
    return out


def rescaled_application(coeffs: DiffOpCoefficients, x, xi, t: float) -> np.ndarray:
    """``t^-k D(exp(it<xi, . - x>) e)`` at ``x``, as a matrix in ``e``.

    ``D^a exp(it<xi, y - x>) = (t xi)^a exp(...)`` exactly, so the result is the
    polynomial ``sum_a t^(|a|-k) a_a(x) xi^a``.
    """
    x, xi = coeffs._check(x, xi)
    out = np.zeros((coeffs.fiber_out, coeffs.fiber_in), dtype=complex)
    for alpha in coeffs.coefficients:
        out += coeffs.coefficient(alpha, x) * _monomial(xi, alpha) * float(t) ** (sum(alpha) - coeffs.order)
    return out


def symbol_limit_check(coeffs: DiffOpCoefficients, x, xi, t_values: Sequence[float]) -> float:
    """Largest deviation of the rescaled application from the leading symbol."""
    sigma = leading_symbol(coeffs, x, xi)
    return max(float(np.abs(rescaled_application(coeffs, x, xi, t) - sigma).max()) for t in t_values)


def sphere_samples(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Unit vectors: exact ``+-1`` in 1D, equispaced angles in 2D, seeded Gaussian otherwise."""
    if dim == 0:
        return np.zeros((0, 0))
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    v = np.random.default_rng(seed).standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def default_points(dim: int, count: int = 64, radius: float = 3.0, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-radius, radius, size=(count, dim))


@dataclass
class EllipticityVerdict:
    elliptic: bool
    min_singular_value: float
    worst_point: list[float] = field(default_factory=list)
    worst_covector: list[float] = field(default_factory=list)
    samples: int = 0
    flagged_points: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "elliptic": self.elliptic,
            "min_singular_value": self.min_singular_value,
            "worst_point": self.worst_point,
            "worst_covector": self.worst_covector,
            "samples": self.samples,
            "flagged_points": self.flagged_points,
        }


def _min_sv(coeffs, x, xi) -> float:
    return float(np.linalg.svd(leading_symbol(coeffs, x, xi), compute_uv=False).min())


def _scan(coeffs, pairs) -> EllipticityVerdict:
    if coeffs.fiber_in != coeffs.fiber_out:
        raise ValueError("ellipticity needs equal input and output fiber dimensions")
    best = (np.inf, None, None)
    count = 0
    for x, xi in pairs:
        s = _min_sv(coeffs, x, xi)
        count += 1
        if s < best[0]:
            best = (s, x, xi)
    s, x, xi = best
    return EllipticityVerdict(
        elliptic=bool(count > 0 and s > ELLIPTIC_TOL),
        min_singular_value=float(s),
        worst_point=[] if x is None else [float(v) for v in x],
        worst_covector=[] if xi is None else [float(v) for v in xi],
        samples=count,
    )


def ellipticity_check(coeffs: DiffOpCoefficients, point_samples=None, sphere_count: int = 128, seed: int = 0) -> EllipticityVerdict:
    points = default_points(coeffs.base_dim, seed=seed) if point_samples is None else np.atleast_2d(point_samples)
    dirs = sphere_samples(coeffs.base_dim, sphere_count, seed)
    return _scan(coeffs, product(points, dirs))


@dataclass(frozen=True)
class OrbitDirections:
    """Tangent vectors spanning the group orbit through each point."""

    sampler: Callable[[np.ndarray], np.ndarray]
    base_dim: int

    def at(self, x) -> np.ndarray:
        v = np.asarray(self.sampler(np.asarray(x, dtype=float)), dtype=float).reshape(-1, self.base_dim)
        return v

    def transversal_basis(self, x, tol: float = 1e-12) -> np.ndarray:
        """Orthonormal basis (columns) of the covectors annihilating the orbit at ``x``."""
        v = self.at(x)
        if v.shape[0] == 0:
            return np.eye(self.base_dim)
        _, s, vh = np.linalg.svd(v)
        rank = int(np.sum(s > tol * max(1.0, s.max(initial=0.0))))
        return vh[rank:].T


def coordinate_orbits(base_dim: int, axes: Sequence[int]) -> OrbitDirections:
    """Orbits of a torus acting by translation along the listed coordinate axes."""
    vecs = np.eye(base_dim)[list(axes)]
    return OrbitDirections(lambda x: vecs, base_dim)


def rotation_orbits() -> OrbitDirections:
    """Orbits of ``S^1`` rotating ``R^2``; empty at the fixed origin."""

    def sampler(x):
        if np.hypot(x[0], x[1]) == 0.0:
            return np.zeros((0, 2))
        return np.array([[-x[1], x[0]]])

    return OrbitDirections(sampler, 2)


def transversal_ellipticity_check(
    coeffs: DiffOpCoefficients,
    orbits: OrbitDirections,
    point_samples=None,
    sphere_count: int = 128,
    seed: int = 0,
) -> EllipticityVerdict:
    """Ellipticity restricted to covectors perpendicular to the orbits.

    Points where the orbit dimension differs from the generic one are listed in
    ``flagged_points``; sampling near such points may misclassify.
    """
    points = default_points(coeffs.base_dim, seed=seed) if point_samples is None else np.atleast_2d(np.asarray(point_samples, dtype=float))
    pairs = []
    dims = []
    for x in points:
        basis = orbits.transversal_basis(x)
        dims.append(basis.shape[1])
        for u in sphere_samples(basis.shape[1], sphere_count, seed):
            pairs.append((x, basis @ u))
    verdict = _scan(coeffs, pairs)
    if dims:
        generic = max(set(dims), key=dims.count)
        verdict.flagged_points = [[float(v) for v in x] for x, d in zip(points, dims) if d != generic]
    return verdict


# -- taming fields and the deformed symbol ----------------------------------


def _rotate(x, t):
    c, s = np.cos(t), np.sin(t)
    return np.array([c * x[0] - s * x[1], s * x[0] + c * x[1]])


@dataclass(frozen=True)
class TamingField:
    """``x -> v(x) = taming_map(x) * J x`` for ``S^1`` rotating the plane.

    ``compact_radius`` bounds the set where ``v`` may vanish.
    """

    taming_map: Callable[[np.ndarray], float]
    compact_radius: float
    group: GroupDesc = GroupDesc.circle()

    def vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return float(self.taming_map(x)) * np.array([-x[1], x[0]])

    def equivariance_defect(self, points, angles=(0.3, 1.0, 2.5)) -> float:
        """Largest ``|v(g x) - g v(x)|`` over sampled points and rotations."""
        worst = 0.0
        for x in np.atleast_2d(points):
            for t in angles:
                worst = max(worst, float(np.abs(self.vector(_rotate(x, t)) - _rotate(self.vector(x), t)).max()))
        return worst


def plane_taming_field() -> TamingField:
    """Constant taming map 1: ``v`` is the generating field ``iz`` of rotation."""
    return TamingField(lambda x: 1.0, compact_radius=0.0)


@dataclass
class DeformedSymbolReport:
    passed: bool
    checked: int
    noninvertible: list[dict] = field(default_factory=list)
    min_singular_value_outside: float = np.inf

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "noninvertible": self.noninvertible,
            "min_singular_value_outside": self.min_singular_value_outside,
        }


def deformed_symbol_check(
    action: CliffordAction,
    taming: TamingField,
    samples,
    orbits: OrbitDirections | None = None,
    tol: float = ELLIPTIC_TOL,
) -> DeformedSymbolReport:
    """Invertibility of ``c(xi + v(x)): E+ -> E-`` on sampled ``(x, xi)``.

    ``xi`` is projected onto the transversal covectors at ``x`` first.  Every
    non-invertible point must lie in the compact set ``|x| <= compact_radius``;
    otherwise the check fails.
    """
    if not action.graded:
        raise ValueError("deformed symbol check needs a graded Clifford action")
    orbits = orbits or rotation_orbits()
    bad = []
    smallest = np.inf
    count = 0
    for x, xi in samples:
        x = np.asarray(x, dtype=float)
        basis = orbits.transversal_basis(x)
        xi = basis @ (basis.T @ np.asarray(xi, dtype=float))
        block = action.plus_to_minus(action.c(xi + taming.vector(x)))
        s = float(np.linalg.svd(block, compute_uv=False).min())
        count += 1
        if s <= tol:
            inside = bool(np.linalg.norm(x) <= taming.compact_radius + 1e-12)
            bad.append({"x": [float(v) for v in x], "xi": [float(v) for v in xi], "inside_compact_set": inside})
        else:
            smallest = min(smallest, s)
    passed = all(b["inside_compact_set"] for b in bad)
    return DeformedSymbolReport(passed, count, bad, float(smallest))


def deformed_symbol_samples(radius: float = 4.0, count: int = 9, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Grid points (origin included) paired with zero and random covectors."""
    rng = np.random.default_rng(seed)
    axis = np.linspace(-radius, radius, count)
    out = []
    for a in axis:
        for b in axis:
            x = np.array([a, b])
            out.append((x, np.zeros(2)))
            out.append((x, rng.standard_normal(2)))
    return out


# -- coefficient tables for the built-in operators ---------------------------


def _const(value):
    value = np.asarray(value, dtype=complex)
    return lambda x: value


def laplacian(n: int, lower_order: Mapping[tuple[int, ...], complex] | None = None) -> DiffOpCoefficients:
    """``-sum d^2/dx_j^2 = sum D_j^2`` plus optional constant lower-order terms."""
    coeffs = {tuple(2 * (j == i) for j in range(n)): _const(1.0) for i in range(n)}
    for alpha, c in (lower_order or {}).items():
        coeffs[tuple(alpha)] = _const(c)
    return DiffOpCoefficients(2, n, 1, 1, coeffs, name="laplacian")


def circle_operator(potential: Callable[[np.ndarray], complex] | None = None) -> DiffOpCoefficients:
    """``-i d/dt + V(t)`` on the circle (one coordinate)."""
    coeffs = {(1,): _const(1.0)}
    if potential is not None:
        coeffs[(0,)] = lambda x: np.asarray(potential(x), dtype=complex)
    return DiffOpCoefficients(1, 1, 1, 1, coeffs, name="circle")


def dirac_operator(action: CliffordAction) -> DiffOpCoefficients:
    """``sum c(e_j) d/dx_j`` for the flat connection, i.e. coefficient ``i c(e_j)`` on ``D_j``."""
    n = action.vector_dim
    coeffs = {tuple(int(j == i) for j in range(n)): _const(1j * action.generators[i]) for i in range(n)}
    return DiffOpCoefficients(1, n, action.fiber_dim, action.fiber_dim, coeffs, name=f"dirac[{action.name}]")


def partial_derivative(n: int, axis: int) -> DiffOpCoefficients:
    """Scalar ``d/dx_axis = i D_axis``."""
    alpha = tuple(int(j == axis) for j in range(n))
    return DiffOpCoefficients(1, n, 1, 1, {alpha: _const(1j)}, name=f"d/dx{axis + 1}")


def zero_operator(n: int, order: int = 1) -> DiffOpCoefficients:
    alpha = (order,) + (0,) * (n - 1)
    return DiffOpCoefficients(order, n, 1, 1, {alpha: _const(0.0)}, name="zero")


def scalar_operator_from_expressions(order: int, base_dim: int, table: Mapping[str, str]) -> DiffOpCoefficients:
    """Build a scalar operator from ``{"a1,a2,...": expression}`` entries."""
    from .exprs import parse_expression

    coeffs = {}
    for key, text in table.items():
        alpha = tuple(int(p) for p in str(key).replace(" ", "").split(","))
        fn = parse_expression(text, base_dim)
        coeffs[alpha] = lambda x, fn=fn: fn(x)
    return DiffOpCoefficients(order, base_dim, 1, 1, coeffs, name="user")


def multi_indices(n: int, k: int):
    """All multi-indices of length ``n`` and total degree ``k``."""
    return [a for a in product(range(k + 1), repeat=n) if sum(a) == k]
