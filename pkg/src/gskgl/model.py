"""Gray-Scott-Klausmeier vegetation-water model and the generic model contract.

The deviation ``V = U - U*`` from a homogeneous state obeys

    dV/dt = Lambda V + B2(V, V) + B3(V, V, V) (+ higher order remainder)

Every model exposes the linear symbol and the symmetric bilinear/trilinear
forms twice: once on constant vectors with an explicit output wavenumber
(``*_symbol``, used for coefficient derivation) and once on spectral fields
(``*_field``, used for time stepping).
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatchError
from .spectral import Grid1D, SpectralField, dealias, dealias_cutoff, forward, half_to_full, inverse

__all__ = [
    "ModelParams",
    "FixedPoint",
    "PatternModel",
    "GSKModel",
    "gsk_fixed_points",
    "gsk_linear_symbol",
    "gsk_b2_symbol",
    "gsk_b3_symbol",
    "gsk_b2_field",
    "gsk_b3_field",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Gray-Scott-Klausmeier system.

    a: rainfall, b: vegetation loss, c: advection speed, d: vegetation diffusion.
    """

    a: float
    b: float
    c: float = 0.0
    d: float = 0.018

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.a < 0 or self.b < 0:
            raise ValueError(f"a and b must be non-negative, got a={self.a}, b={self.b}")

    @property
    def has_vegetated_states(self) -> bool:
        # relative slack so that a = 4 b^2 typed in decimal still counts as the fold point
        return self.a >= 4.0 * self.b**2 * (1.0 - 1e-12)

    def with_a(self, a: float) -> "ModelParams":
        return replace(self, a=a)


@dataclass(frozen=True)
class FixedPoint:
    v_star: float
    w_star: float
    branch: str

    def as_array(self) -> np.ndarray:
        return np.array([self.v_star, self.w_star])


def gsk_fixed_points(params: ModelParams) -> list[FixedPoint]:
    """Homogeneous equilibria: the desert state and, for ``a >= 4 b^2``, two vegetated ones."""
    points = [FixedPoint(0.0, 1.0, "desert")]
    a, b = params.a, params.b
    # b = 0 sends the minus branch to w = 0, v = b/w undefined, and the plus branch onto the desert
    if a <= 0 or b <= 0 or not params.has_vegetated_states:
        return points
    root = math.sqrt(max(0.25 - b * b / a, 0.0))
    for branch, w in (("minus", 0.5 - root), ("plus", 0.5 + root)):
        points.append(FixedPoint(b / w, w, branch))
    return points


def _branch(params: ModelParams, branch: str) -> FixedPoint:
    for fp in gsk_fixed_points(params):
        if fp.branch == branch:
            return fp
    raise ValueError(f"no {branch!r} fixed point for a={params.a}, b={params.b} (needs a >= 4 b^2)")


def gsk_linear_symbol(k, params: ModelParams, fp: FixedPoint) -> np.ndarray:
    """Linear symbol at wavenumber(s) ``k``; shape ``k.shape + (2, 2)``."""
    k = np.asarray(k, dtype=float)
    v, w = fp.v_star, fp.w_star
    out = np.empty(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -params.d * k**2 - params.b + 2.0 * w * v
    out[..., 0, 1] = v * v
    out[..., 1, 0] = -2.0 * w * v
    out[..., 1, 1] = -2.0 * w * k**2 + 1j * params.c * k - params.a - v * v
    return out


def gsk_b2_symbol(k_out, zeta, eta, fp: FixedPoint) -> np.ndarray:
    """Symmetric bilinear form; the porous-medium part carries ``-k_out^2``."""
    zeta = np.asarray(zeta, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    s = fp.w_star * zeta[0] * eta[0] + fp.v_star * (zeta[0] * eta[1] + zeta[1] * eta[0])
    return np.array([s, -(k_out**2) * zeta[1] * eta[1] - s])


def gsk_b3_symbol(zeta, eta, xi) -> np.ndarray:
    """Symmetrised form of ``(w v^2, -w v^2)``."""
    zeta, eta, xi = (np.asarray(z, dtype=complex) for z in (zeta, eta, xi))
    s = (zeta[1] * eta[0] * xi[0] + eta[1] * zeta[0] * xi[0] + xi[1] * zeta[0] * eta[0]) / 3.0
    return np.array([s, -s])


def _same_grid(*fields: SpectralField) -> Grid1D:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"{f.grid} != {grid}")
    return grid


def gsk_b2_field(V: SpectralField, W: SpectralField, fp: FixedPoint) -> SpectralField:
    """Pseudospectral ``B2(V, W)`` with two-thirds dealiasing."""
    grid = _same_grid(V, W)
    v1, w1 = inverse(dealias(V.coeffs, 2))
    v2, w2 = inverse(dealias(W.coeffs, 2))
    p_vv, p_vw, p_ww = forward(np.stack([v1 * v2, v1 * w2 + w1 * v2, w1 * w2]))
    s = fp.w_star * p_vv + fp.v_star * p_vw
    out = np.stack([s, -grid.k**2 * p_ww - s])
    return SpectralField(grid, dealias(out, 2))


def gsk_b3_field(V: SpectralField, W: SpectralField, Z: SpectralField) -> SpectralField:
    """Pseudospectral symmetrised ``B3(V, W, Z)`` with the cubic dealiasing rule."""
    grid = _same_grid(V, W, Z)
    v1, w1 = inverse(dealias(V.coeffs, 3))
    v2, w2 = inverse(dealias(W.coeffs, 3))
    v3, w3 = inverse(dealias(Z.coeffs, 3))
    s = forward((w1 * v2 * v3 + w2 * v1 * v3 + w3 * v1 * v2) / 3.0)
    return SpectralField(grid, dealias(np.stack([s, -s]), 3))


class PatternModel(ABC):
    """Contract for an ``m``-component model written as a deviation from ``U*``.

    Subclasses provide the linear symbol and the symmetric quadratic and cubic
    forms in symbol and field form.  Quartic and higher Taylor terms, if any,
    are supplied through ``remainder`` (field form, default ``None``).
    """

    m: int
    remainder: Optional[Callable[[SpectralField], SpectralField]] = None

    @property
    @abstractmethod
    def fixed_point(self) -> np.ndarray: ...

    @abstractmethod
    def linear_symbol(self, k) -> np.ndarray: ...

    @abstractmethod
    def b2_symbol(self, k_out, zeta, eta) -> np.ndarray: ...

    @abstractmethod
    def b3_symbol(self, zeta, eta, xi) -> np.ndarray: ...

    @abstractmethod
    def b2_field(self, V: SpectralField, W: SpectralField) -> SpectralField: ...

    @abstractmethod
    def b3_field(self, V: SpectralField, W: SpectralField, Z: SpectralField) -> SpectralField: ...

    def nonlinear(self, V: SpectralField) -> SpectralField:
        out = self.b2_field(V, V) + self.b3_field(V, V, V)
        if self.remainder is not None:
            out = out + self.remainder(V)
        return out

    def nonlinear_half(self, half: np.ndarray, grid: Grid1D) -> np.ndarray:
        """Nonlinearity on the non-negative half spectrum of a real state."""
        full = SpectralField(grid, half_to_full(half, grid.n))
        return self.nonlinear(full).coeffs[:, : grid.n // 2 + 1]


class GSKModel(PatternModel):
    """Gray-Scott-Klausmeier deviation dynamics around one of its fixed points.

    The instability analysis targets the ``minus`` branch; other branches are
    accepted for plain simulation.
    """

    m = 2

    def __init__(self, params: ModelParams, fixed_point: FixedPoint | str = "minus"):
        self.params = params
        if isinstance(fixed_point, str):
            fixed_point = _branch(params, fixed_point)
        self.fp = fixed_point

    def __repr__(self):
        return f"GSKModel({self.params}, {self.fp.branch})"

    @property
    def fixed_point(self) -> np.ndarray:
        return self.fp.as_array()

    def linear_symbol(self, k) -> np.ndarray:
        return gsk_linear_symbol(k, self.params, self.fp)

    def b2_symbol(self, k_out, zeta, eta) -> np.ndarray:
        return gsk_b2_symbol(k_out, zeta, eta, self.fp)

    def b3_symbol(self, zeta, eta, xi) -> np.ndarray:
        return gsk_b3_symbol(zeta, eta, xi)

    def b2_field(self, V, W):
        return gsk_b2_field(V, W, self.fp)

    def b3_field(self, V, W, Z):
        return gsk_b3_field(V, W, Z)

    def nonlinear_half(self, half: np.ndarray, grid: Grid1D) -> np.ndarray:
        n = grid.n
        k2 = dealias_cutoff(n, 2)
        k3 = dealias_cutoff(n, 3)
        q = np.zeros_like(half)
        q[:, : k2 + 1] = half[:, : k2 + 1]
        v, w = sfft.irfft(q, n=n, axis=-1) * n
        prods = sfft.rfft(np.stack([v * v, v * w, w * w]), axis=-1) / n
        prods[:, k2 + 1 :] = 0.0
        s = self.fp.w_star * prods[0] + 2.0 * self.fp.v_star * prods[1]
        q[:, k3 + 1 :] = 0.0
        v3, w3 = sfft.irfft(q, n=n, axis=-1) * n
        cubic = sfft.rfft(w3 * v3 * v3) / n
        cubic[k3 + 1 :] = 0.0
        out = np.empty_like(half)
        out[0] = s + cubic
        out[1] = -grid.k_half**2 * prods[2] - s - cubic
        if self.remainder is not None:
            out = out + self.remainder(SpectralField(grid, half_to_full(half, n))).coeffs[:, : n // 2 + 1]
        return out

    def rhs_physical(self, u: np.ndarray, grid: Grid1D) -> np.ndarray:
        """Right-hand side of the original system for absolute states ``u = (v, w)``.

        Derivatives are spectral; products are formed on the grid without
        dealiasing, so the caller should use well-resolved data.
        """
        p = self.params
        v, w = np.asarray(u, dtype=float)

        def dx(f, order):
            return np.real(inverse((1j * grid.k) ** order * forward(f)))

        fv = p.d * dx(v, 2) - p.b * v + w * v * v
        fw = dx(w * w, 2) + p.c * dx(w, 1) + p.a * (1.0 - w) - w * v * v
        return np.stack([fv, fw])
