"""Radial models of the deformed Dirac operator ``D+ = -i(2 d/dzbar - f z)`` on the plane.

Rotation by ``e^{it}`` splits the operator into one ordinary differential
operator per weight.  On angular mode ``e^{in theta}`` and in half-density
form ``u = h / sqrt(r)`` it becomes

    h  ->  -i [ h' - ((n + 1/2)/r) h - f r h ]

from ``L^2(dr)`` to ``L^2(dr)``, landing in mode ``n + 1``.  Unknowns live at
grid nodes and the output at midpoints, so each block is a bidiagonal
``(intervals) x (nodes)`` matrix.

An end node is left free exactly when the local solution of the homogeneous
equation is square integrable there; otherwise it is pinned to zero.  Because
the operator is first order this determines the shape of each block, and the
shape difference is the discrete index.

Labels.  With the default ``spinor`` lift, domain weight ``m`` is angular mode
``-m-1`` and codomain weight ``k`` is mode ``-k``, so the label offset is 0.
With the ``trivial`` lift both sides use weight ``-mode`` and the offset is
``-1``.
"""
from __future__ import annotations

import math

import numpy as np

from ..charring import GroupDesc
from .base import IsotypicBlockOperator

LIFTS = ("spinor", "trivial")
F_CHOICES = ("one", "quad")
WARPS = ("log", "inverse_square")
COLLAR_FRACTION = 0.1
STRETCH_MAX = 400.0


def admissible_f(choice: str):
    if choice == "one":
        return lambda r: np.ones_like(r)
    if choice == "quad":
        return lambda r: 1.0 + r**2
    raise ValueError(f"f_choice must be one of {F_CHOICES}, got {choice!r}")


def angular_mode(m: int, lift: str = "spinor") -> int:
    """Angular mode of the domain component for weight ``m``."""
    if lift == "spinor":
        return -m - 1
    if lift == "trivial":
        return -m
    raise ValueError(f"lift must be one of {LIFTS}, got {lift!r}")


def label_offset(lift: str) -> int:
    return 0 if lift == "spinor" else -1


def radial_block(n: int, s: np.ndarray, rho: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, dict]:
    """Discretize ``-i[h' - ((n+1/2)/rho) h - q h]`` on nodes ``s``.

    ``rho`` and ``q`` are sampled at the midpoints.  Returns the matrix and
    the end conditions chosen.
    """
    ds = np.diff(s)
    c = (n + 0.5) / rho + q
    count = len(ds)
    idx = np.arange(count)
    mat = np.zeros((count, count + 1), dtype=complex)
    mat[idx, idx] = -1j * (-1.0 / ds - c / 2)
    mat[idx, idx + 1] = -1j * (1.0 / ds - c / 2)
    # exp(int c) is the homogeneous solution: it decays leftward iff c > 0
    left_free = bool(c[0] > 0)
    right_free = bool(c[-1] < 0)
    cols = slice(0 if left_free else 1, count + 1 if right_free else count)
    ends = {"left": "free" if left_free else "pinned", "right": "free" if right_free else "pinned"}
    return mat[:, cols], ends


def _weight_model(m, lift, mat, ends, meta) -> IsotypicBlockOperator:
    offset = label_offset(lift)
    meta = dict(meta)
    meta.update({"m": int(m), "mode": angular_mode(m, lift), "lift": lift, "label_offset": offset, "ends": ends})
    return IsotypicBlockOperator(
        GroupDesc.circle(),
        ((m, mat.shape[1]),),
        ((m + offset, mat.shape[0]),),
        {(m, m + offset): mat},
        graded=True,
        metadata=meta,
    )


def plane_grid(n_r: int, R: float) -> np.ndarray:
    return np.linspace(0.0, R, n_r + 1)


def build_plane_weight_model(
    m: int, n_r: int = 400, R: float = 8.0, f_choice: str = "one", lift: str = "spinor"
) -> IsotypicBlockOperator:
    """The weight-``m`` block of the deformed plane Dirac operator on ``0 <= r <= R``."""
    if n_r < 100:
        raise ValueError("n_r must be at least 100")
    if R < 6:
        raise ValueError("R must be at least 6")
    f = admissible_f(f_choice)
    s = plane_grid(n_r, R)
    mid = 0.5 * (s[:-1] + s[1:])
    mat, ends = radial_block(angular_mode(m, lift), s, mid, f(mid) * mid)
    meta = {"kind": "plane_weight", "n_r": int(n_r), "R": float(R), "f_choice": f_choice, "s_range": [0.0, float(R)]}
    return _weight_model(m, lift, mat, ends, meta)


class CollarWarp:
    """Conformal stretch ``lambda(d)`` of the metric at distance ``d < delta`` from the split circle.

    ``log``: ``lambda = delta / d``.  ``inverse_square``: ``lambda = (delta / d)^2``.
    Both equal 1 at the collar edge and make the split circle infinitely far
    away.  The stretched coordinate ``sigma = int lambda`` is truncated where
    ``lambda`` reaches ``stretch_max``.
    """

    def __init__(self, kind: str, delta: float, stretch_max: float = STRETCH_MAX):
        if kind not in WARPS:
            raise ValueError(f"warp must be one of {WARPS}, got {kind!r}")
        self.kind, self.delta, self.stretch_max = kind, float(delta), float(stretch_max)

    def distance(self, sigma):
        """Distance to the split circle after stretched length ``sigma`` into the collar."""
        d = self.delta
        if self.kind == "log":
            return d * np.exp(-sigma / d)
        return d * d / (sigma + d)

    def stretch(self, sigma):
        return self.delta / self.distance(sigma) if self.kind == "log" else (self.delta / self.distance(sigma)) ** 2

    @property
    def length(self) -> float:
        d = self.delta
        if self.kind == "log":
            return d * math.log(self.stretch_max)
        return d * (math.sqrt(self.stretch_max) - 1.0)


def _uniform_nodes(start: float, stop: float, step: float) -> np.ndarray:
    count = max(1, int(math.ceil((stop - start) / step - 1e-9)))
    return np.linspace(start, stop, count + 1)


def glued_piece_geometry(side: str, r0: float, n_r: int, R: float, warp: str = "log"):
    """Nodes ``s``, and ``r(s)``, ``rho(s) = r(s) lambda(s)`` as functions, for one piece."""
    collar = CollarWarp(warp, COLLAR_FRACTION * r0)
    step = R / n_r
    if side == "inner":
        a = r0 - collar.delta
        s = _uniform_nodes(0.0, a + collar.length, step)

        def r_of(x):
            return np.where(x <= a, x, r0 - collar.distance(np.maximum(x - a, 0.0)))

        def lam(x):
            return np.where(x <= a, 1.0, collar.stretch(np.maximum(x - a, 0.0)))

    elif side == "outer":
        b = r0 + collar.delta
        s = _uniform_nodes(b - collar.length, R, step)

        def r_of(x):
            return np.where(x >= b, x, r0 + collar.distance(np.maximum(b - x, 0.0)))

        def lam(x):
            return np.where(x >= b, 1.0, collar.stretch(np.maximum(b - x, 0.0)))

    else:
        raise ValueError("side must be 'inner' or 'outer'")
    return s, r_of, lambda x: r_of(x) * lam(x), collar


def build_glued_plane_models(
    m: int,
    r0: float = 4.0,
    n_r: int = 400,
    warp: str = "log",
    R: float = 8.0,
    f_choice: str = "one",
    lift: str = "spinor",
) -> tuple[IsotypicBlockOperator, IsotypicBlockOperator]:
    """Weight-``m`` blocks on the disc ``r < r0`` and the annulus ``r0 < r < R``.

    Each piece carries the metric stretched conformally near ``r = r0`` so the
    split circle is at infinite distance.  The operator keeps its form in the
    stretched coordinate with ``r`` replaced by ``rho = lambda r`` in both the
    angular term and the deformation term, since ``v = iz`` and the Clifford
    action both scale with the metric.  Grid spacing is ``R / n_r`` as for the
    unsplit model.
    """
    if not 0 < r0 < R:
        raise ValueError(f"split radius must satisfy 0 < r0 < R (taming field |v| = r0 must not vanish), got {r0}")
    if n_r < 100:
        raise ValueError("n_r must be at least 100")
    f = admissible_f(f_choice)
    out = []
    for side in ("inner", "outer"):
        s, r_of, rho_of, collar = glued_piece_geometry(side, r0, n_r, R, warp)
        mid = 0.5 * (s[:-1] + s[1:])
        rho = rho_of(mid)
        mat, ends = radial_block(angular_mode(m, lift), s, rho, f(r_of(mid)) * rho)
        meta = {
            "kind": "plane_glued",
            "side": side,
            "r0": float(r0),
            "n_r": int(n_r),
            "R": float(R),
            "warp": warp,
            "delta": collar.delta,
            "stretch_max": collar.stretch_max,
            "f_choice": f_choice,
            "s_range": [float(s[0]), float(s[-1])],
        }
        out.append(_weight_model(m, lift, mat, ends, meta))
    return out[0], out[1]
