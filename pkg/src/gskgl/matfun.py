"""Closed-form functions of stacks of 2x2 matrices.

For ``M = mu I + N`` with ``mu = tr(M)/2`` the traceless part satisfies
``N^2 = delta^2 I``, so every analytic ``f`` obeys

    f(M) = (f(mu+delta) + f(mu-delta))/2 I + (f(mu+delta) - f(mu-delta))/(2 delta) N.

When ``delta`` is tiny the divided difference is replaced by ``f'(mu)``, which
also covers defective matrices.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["phi", "phi_derivative", "funm2", "expm2", "phim2", "matvec2"]

_SMALL_Z = 1.0
_TAYLOR_TERMS = 30
_SMALL_DELTA = 1e-5


def phi(j: int, z) -> np.ndarray:
    """``phi_j(z) = sum_m z^m / (m + j)!``; ``phi_0 = exp``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL_Z
    if small.any():
        zs = z[small]
        acc = np.zeros_like(zs)
        for m in range(_TAYLOR_TERMS, -1, -1):
            acc = acc * zs + 1.0 / math.factorial(m + j)
        out[small] = acc
    big = ~small
    if big.any():
        zb = z[big]
        acc = np.exp(zb)
        for i in range(j):
            acc = (acc - 1.0 / math.factorial(i)) / zb
        out[big] = acc
    return out


def phi_derivative(j: int, z) -> np.ndarray:
    """``phi_j'(z) = phi_j(z) - j phi_{j+1}(z)``."""
    if j == 0:
        return phi(0, z)
    return phi(j, z) - j * phi(j + 1, z)


def funm2(M: np.ndarray, f, fprime) -> np.ndarray:
    """Apply ``f`` to each 2x2 matrix in ``M`` (shape ``(..., 2, 2)``)."""
    M = np.asarray(M, dtype=complex)
    mu = 0.5 * (M[..., 0, 0] + M[..., 1, 1])
    N = M - mu[..., None, None] * np.eye(2)
    delta = np.sqrt(N[..., 0, 0] ** 2 + N[..., 0, 1] * N[..., 1, 0])
    fp_ = f(mu + delta)
    fm_ = f(mu - delta)
    g0 = 0.5 * (fp_ + fm_)
    tiny = np.abs(delta) < _SMALL_DELTA
    safe = np.where(tiny, 1.0, delta)
    g1 = np.where(tiny, fprime(mu), (fp_ - fm_) / (2.0 * safe))
    return g0[..., None, None] * np.eye(2) + g1[..., None, None] * N


def expm2(M: np.ndarray) -> np.ndarray:
    return funm2(M, np.exp, np.exp)


def phim2(j: int, M: np.ndarray) -> np.ndarray:
    return funm2(M, lambda z: phi(j, z), lambda z: phi_derivative(j, z))


def matvec2(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Mode-wise product of matrices ``(n, 2, 2)`` with vectors ``(2, n)``."""
    return np.stack(
        [
            M[:, 0, 0] * x[0] + M[:, 0, 1] * x[1],
            M[:, 1, 0] * x[0] + M[:, 1, 1] * x[1],
        ]
    )
