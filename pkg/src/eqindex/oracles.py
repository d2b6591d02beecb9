"""Reference computations that do not go through the model builders or the rank policy."""
from __future__ import annotations

import numpy as np


def winding_number(coeffs, samples: int = 8192) -> int:
    """Winding number of ``a(z) = sum a_k z^k`` around 0 along ``|z| = 1``."""
    z = np.exp(2j * np.pi * np.arange(samples + 1) / samples)
    a = sum(complex(v) * z ** int(k) for k, v in dict(coeffs).items())
    if np.abs(a).min() <= 1e-12 * np.abs(a).max():
        raise ValueError("symbol vanishes on the sampled circle")
    phase = np.unwrap(np.angle(a))
    return int(round((phase[-1] - phase[0]) / (2 * np.pi)))


def _full_image_section(coeffs: dict, n: int) -> np.ndarray:
    """``T`` restricted to the first ``n`` coordinates, keeping every output row it reaches."""
    top = max(0, max(coeffs))
    out = np.zeros((n + top, n), dtype=complex)
    for j in range(n):
        for k, v in coeffs.items():
            if 0 <= j + k < n + top:
                out[j + k, j] += v
    return out


def toeplitz_index_dense(coeffs, n: int = 64, rtol: float = 1e-8) -> int:
    """Index of a Toeplitz operator from two rectangular sections.

    The kernels of ``T`` and of ``T*`` are read off sections that keep every
    output row, so no truncation edge creates spurious null vectors.  Kernels
    that are not finitely supported only solve the section up to a residual
    decaying geometrically in ``n``; ``rtol`` (relative to the largest
    singular value) absorbs it.
    """
    c = {int(k): complex(v) for k, v in dict(coeffs).items() if v != 0}
    adj = {-k: np.conj(v) for k, v in c.items()}
    dims = []
    for table in (c, adj):
        a = _full_image_section(table, n)
        sv = np.linalg.svd(a, compute_uv=False)
        dims.append(a.shape[1] - int(np.count_nonzero(sv > rtol * sv[0])))
    return int(dims[0] - dims[1])


def circle_kernel_monodromy(potential_coeffs=None, steps: int = 20000) -> complex:
    """``u(2 pi) / u(0)`` for ``-i u' + V u = 0`` by fourth-order Runge-Kutta.

    The operator has a periodic kernel exactly when this equals 1.
    """
    c = {1: -0.5j, -1: 0.5j} if potential_coeffs is None else {int(k): complex(v) for k, v in dict(potential_coeffs).items()}

    def rhs(t, u):
        v = sum(val * np.exp(1j * k * t) for k, val in c.items())
        return -1j * v * u

    h = 2 * np.pi / steps
    u, t = 1.0 + 0j, 0.0
    for _ in range(steps):
        k1 = rhs(t, u)
        k2 = rhs(t + h / 2, u + h / 2 * k1)
        k3 = rhs(t + h / 2, u + h / 2 * k2)
        k4 = rhs(t + h, u + h * k3)
        u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return complex(u)


def circle_kernel_fourier(k_max: int, samples: int = 1024) -> np.ndarray:
    """Fourier coefficients of ``exp(i cos t)`` for modes ``-k_max..k_max``."""
    t = 2 * np.pi * np.arange(samples) / samples
    spec = np.fft.fft(np.exp(1j * np.cos(t))) / samples
    return np.array([spec[k % samples] for k in range(-k_max, k_max + 1)])


def landau_spectrum(mode: int, side: str = "cokernel", n: int = 400, R: float = 8.0, count: int = 3) -> np.ndarray:
    """Lowest eigenvalues of ``D+ D-`` (cokernel side) or ``D- D+`` (kernel side) on one angular mode, f = 1.

    In mode ``e^{ip theta}`` these are ``-Laplacian + r^2 - 2 + 2p`` and
    ``-Laplacian + r^2 + 2 + 2p``.  Second-order conservative differences on
    cell centres, Dirichlet at ``r = R``.
    """
    if side not in ("cokernel", "kernel"):
        raise ValueError("side must be 'cokernel' or 'kernel'")
    h = R / n
    r = (np.arange(n) + 0.5) * h
    faces = np.arange(n + 1) * h
    # symmetric form: r * (-(1/r)(r u')') with weight r
    main = (faces[:-1] + faces[1:]) / h**2
    main[-1] += faces[-1] / h**2  # u = 0 at the outer face, ghost value -u
    off = -faces[1:-1] / h**2
    shift = -2 + 2 * mode if side == "cokernel" else 2 + 2 * mode
    main = main + r * (mode**2 / r**2 + r**2 + shift)
    s = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    w = 1 / np.sqrt(r)
    return np.linalg.eigvalsh(w[:, None] * s * w[None, :])[:count]


def plane_cokernel_profile(k: int, r: np.ndarray) -> np.ndarray:
    """Half-density form ``sqrt(r) r^k e^{-r^2/2}`` of ``zbar^k e^{-|z|^2/2}``, normalized."""
    v = np.sqrt(r) * r**k * np.exp(-(r**2) / 2)
    return v / np.linalg.norm(v)
