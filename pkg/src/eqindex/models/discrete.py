"""Sequence-space models: shifts, Toeplitz sections, circle operators, products."""
from __future__ import annotations

from typing import Mapping

import numpy as np

from ..charring import GroupDesc
from .base import IsotypicBlockOperator

SYMBOL_SAMPLES = 4096
SYMBOL_FLOOR = 1e-8


def build_shift_model(n: int = 64, labeled: bool = False) -> IsotypicBlockOperator:
    """The truncated double shift ``(x_1, x_2, ...) -> (x_3, x_4, ...)``, as an ``n-2`` by ``n`` matrix.

    With ``labeled`` the basis is adapted to the ``Z_2`` action swapping
    coordinates ``2j-1`` and ``2j``: label 0 is spanned by the symmetric
    combinations and label 1 by the antisymmetric ones.
    """
    if n < 4 or n % 2:
        raise ValueError("shift model needs an even size n >= 4")
    if not labeled:
        t = np.zeros((n - 2, n), dtype=complex)
        t[:, 2:] = np.eye(n - 2)
        return IsotypicBlockOperator.from_matrix(t, kind="shift", n=n)
    half = n // 2
    block = np.zeros((half - 1, half), dtype=complex)
    block[:, 1:] = np.eye(half - 1)
    return IsotypicBlockOperator(
        GroupDesc.cyclic(2),
        ((0, half), (1, half)),
        ((0, half - 1), (1, half - 1)),
        {(0, 0): block, (1, 1): block},
        metadata={"kind": "shift", "n": n, "labeled": True},
    )


def swap_pairs_basis(n: int) -> np.ndarray:
    """Unitary whose columns are the label-0 then label-1 basis vectors of the pair-swap action on ``C^n``."""
    if n % 2:
        raise ValueError("n must be even")
    half = n // 2
    u = np.zeros((n, n))
    r = 1 / np.sqrt(2)
    for j in range(half):
        u[2 * j, j] = u[2 * j + 1, j] = r
        u[2 * j, half + j], u[2 * j + 1, half + j] = r, -r
    return u


def swap_pairs_action(n: int) -> np.ndarray:
    """The permutation matrix swapping coordinates ``2j`` and ``2j+1``."""
    q = np.zeros((n, n))
    for j in range(0, n, 2):
        q[j, j + 1] = q[j + 1, j] = 1
    return q


def _coeff_dict(coeffs) -> dict[int, complex]:
    if isinstance(coeffs, Mapping):
        out = {int(k): complex(v) for k, v in coeffs.items()}
    else:
        out = {int(k): complex(v) for k, v in coeffs}
    return {k: v for k, v in out.items() if v != 0}


def symbol_values(coeffs, samples: int = SYMBOL_SAMPLES) -> np.ndarray:
    """``a(z) = sum a_k z^k`` on equispaced points of the unit circle."""
    c = _coeff_dict(coeffs)
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    return sum((v * z**k for k, v in c.items()), np.zeros(samples, dtype=complex))


def build_toeplitz_model(coeffs, n: int = 128) -> IsotypicBlockOperator:
    """The ``n x n`` section of the Toeplitz operator with symbol ``sum a_k z^k``.

    Entry ``(i, j)`` is ``a_{i-j}``, so ``z`` is the forward shift and
    ``z^{-1}`` the backward shift.  The symbol must not vanish on ``|z| = 1``.
    """
    c = _coeff_dict(coeffs)
    if not c:
        raise ValueError("symbol is identically zero")
    span = max(abs(k) for k in c)
    if n < max(8, 4 * span):
        raise ValueError(f"section size {n} too small for a symbol of degree {span}")
    values = np.abs(symbol_values(c))
    if values.min() <= SYMBOL_FLOOR * max(1.0, values.max()):
        raise ValueError(f"symbol vanishes on the unit circle (min |a| = {values.min():.3g})")
    t = np.zeros((n, n), dtype=complex)
    for k, v in c.items():
        t += v * np.eye(n, k=-k)
    return IsotypicBlockOperator.from_matrix(
        t, kind="toeplitz", n=n, far_edge=True, symbol={str(k): [v.real, v.imag] for k, v in sorted(c.items())}
    )


def build_circle_model(potential_coeffs=None, k_max: int = 32) -> IsotypicBlockOperator:
    """``-i d/dt + V(t)`` on Fourier modes ``|k| <= k_max``.

    ``potential_coeffs`` maps harmonic ``k`` to the coefficient of ``e^{ikt}``
    in ``V``; the default is ``V = sin t``.
    """
    c = _coeff_dict({1: -0.5j, -1: 0.5j} if potential_coeffs is None else potential_coeffs)
    degree = max((abs(k) for k in c), default=0)
    if k_max < max(1, 2 * degree):
        raise ValueError(f"k_max must be at least twice the potential degree ({2 * degree})")
    modes = np.arange(-k_max, k_max + 1)
    a = np.diag(modes.astype(complex))
    for k, v in c.items():
        a += v * np.eye(len(modes), k=-k)
    return IsotypicBlockOperator.from_matrix(
        a, kind="circle", k_max=k_max, potential={str(k): [v.real, v.imag] for k, v in sorted(c.items())}
    )


def build_derham_circle_model(k_max: int = 16, deformed: bool = False) -> IsotypicBlockOperator:
    """``d`` from functions to 1-forms on the circle, one block per rotation weight.

    Weight ``k`` sends ``e^{ikt}`` to ``ik e^{ikt} dt``.  The deformed version
    adds ``i c(v)`` for the generating field ``v = d/dt``, giving ``i(k+1)``.
    """
    if k_max < 4:
        raise ValueError("k_max must be at least 4")
    shift = 1 if deformed else 0
    weights = range(-k_max, k_max + 1)
    blocks = {(k, k): np.array([[1j * (k + shift)]]) for k in weights}
    labels = tuple((k, 1) for k in weights)
    return IsotypicBlockOperator(
        GroupDesc.circle(),
        labels,
        labels,
        blocks,
        graded=True,
        metadata={"kind": "derham_circle", "k_max": k_max, "deformed": deformed, "window": [-k_max, k_max]},
    )


def derham_full_operator(model: IsotypicBlockOperator) -> IsotypicBlockOperator:
    """The self-adjoint ``D = D+ + (D+)*`` on forms of both degrees."""
    if model.metadata.get("kind") != "derham_circle":
        raise ValueError("expected a de Rham circle model")
    blocks = {}
    for (d, c), m in model.blocks.items():
        z = complex(m[0, 0])
        blocks[(d, c)] = np.array([[0, np.conj(z)], [z, 0]])
    labels = tuple((k, 2) for k, _ in model.domain_labels)
    meta = dict(model.metadata)
    meta["kind"] = "derham_circle_full"
    return IsotypicBlockOperator(model.group, labels, labels, blocks, graded=False, metadata=meta)


def build_product_model(base: IsotypicBlockOperator, k_max: int = 8) -> IsotypicBlockOperator:
    """``A x Id`` on ``H x L^2(S^1)``: one copy of ``base`` per circle weight ``|k| <= k_max``.

    The circle acts on the second factor only, so every weight carries the
    full base operator.
    """
    if base.equivariant:
        raise ValueError("product model expects an unlabelled base")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    m = base.to_dense()
    weights = range(-k_max, k_max + 1)
    meta = {"kind": "product", "k_max": k_max, "window": [-k_max, k_max], "base": dict(base.metadata)}
    if base.far_edge:
        meta["far_edge"] = True
    return IsotypicBlockOperator(
        GroupDesc.circle(),
        tuple((k, m.shape[1]) for k in weights),
        tuple((k, m.shape[0]) for k in weights),
        {(k, k): m for k in weights},
        graded=base.graded,
        metadata=meta,
    )
