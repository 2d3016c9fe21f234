"""Periodic Fourier grids, spectral fields, weighted sup-norms and mode filters.

Coefficients are stored in numpy FFT order and normalised so that a physical
field is ``u(x) = sum_j c_j exp(i k_j x)``, i.e. ``c = fft(u) / n``.  The
continuum Fourier density used by the weighted norms is ``c * length / (2 pi)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatchError

__all__ = [
    "Grid1D",
    "SpectralField",
    "ModeFilterSpec",
    "forward",
    "inverse",
    "real_forward",
    "half_to_full",
    "dealias",
    "dealias_cutoff",
    "xr_norm",
    "algebra_constant",
    "algebra_constant_check",
    "mode_filter",
    "ec_es_split",
    "critical_mask",
    "convolve_direct",
    "convolve_fft",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[0, length)`` with ``n`` points.

    Wavenumbers are ``2 pi j / length`` with ``j`` in numpy FFT order; the
    Nyquist index carries ``+n/2``.
    """

    n: int
    length: float

    def __post_init__(self):
        n = int(self.n)
        if n < 16 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def indices(self) -> np.ndarray:
        j = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        j[self.n // 2] = self.n // 2
        j.setflags(write=False)
        return j

    @cached_property
    def k(self) -> np.ndarray:
        k = self.indices * self.dk
        k.setflags(write=False)
        return k

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.n) * (self.length / self.n)
        x.setflags(write=False)
        return x

    @property
    def k_half(self) -> np.ndarray:
        """Non-negative wavenumbers of the half spectrum (length n//2 + 1)."""
        return self.k[: self.n // 2 + 1]

    def index_of(self, k: float, atol: float = 1e-9) -> int:
        """Return the FFT index of wavenumber ``k``; raise if ``k`` is off-grid."""
        j = int(round(k / self.dk))
        if abs(j * self.dk - k) > atol * max(1.0, abs(k)):
            raise ValueError(f"wavenumber {k} is not on the grid (dk={self.dk})")
        if not -self.n // 2 < j <= self.n // 2:
            raise ValueError(f"wavenumber {k} exceeds the Nyquist limit")
        return j % self.n


def forward(u: np.ndarray) -> np.ndarray:
    """Physical values (last axis) to normalised coefficients."""
    return sfft.fft(u, axis=-1) / u.shape[-1]


def inverse(c: np.ndarray) -> np.ndarray:
    """Normalised coefficients to (complex) physical values."""
    return sfft.ifft(c, axis=-1) * c.shape[-1]


def half_to_full(h: np.ndarray, n: int) -> np.ndarray:
    """Expand a half spectrum (``n//2 + 1`` entries) to an exactly Hermitian full one."""
    full = np.empty(h.shape[:-1] + (n,), dtype=complex)
    full[..., : n // 2 + 1] = h
    full[..., n // 2 + 1 :] = np.conj(h[..., 1 : n // 2][..., ::-1])
    return full


def real_forward(u: np.ndarray) -> np.ndarray:
    """Coefficients of a real field, Hermitian symmetric bit for bit."""
    n = u.shape[-1]
    return half_to_full(sfft.rfft(np.real(u), axis=-1) / n, n)


def dealias_cutoff(n: int, order: int = 2) -> int:
    """Largest retained |index| so that products of ``order`` factors do not alias back.

    ``order=2`` is the two-thirds rule, ``order=3`` keeps a quarter of the modes.
    """
    return (n - 1) // (order + 1)


def dealias(c: np.ndarray, order: int = 2) -> np.ndarray:
    n = c.shape[-1]
    j = np.fft.fftfreq(n, d=1.0 / n)
    return np.where(np.abs(j) <= dealias_cutoff(n, order), c, 0.0)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """``m`` complex coefficient arrays on a :class:`Grid1D`."""

    grid: Grid1D
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[1] != self.grid.n:
            raise ValueError(f"coefficient shape {c.shape} does not match n={self.grid.n}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: Grid1D, m: int = 2) -> "SpectralField":
        return cls(grid, np.zeros((m, grid.n), dtype=complex))

    @classmethod
    def from_physical(cls, grid: Grid1D, values) -> "SpectralField":
        values = np.atleast_2d(np.asarray(values))
        if np.isrealobj(values):
            return cls(grid, real_forward(values))
        return cls(grid, forward(values))

    @classmethod
    def single_mode(cls, grid: Grid1D, k: float, vector, hermitian: bool = True) -> "SpectralField":
        """``vector * exp(i k x)`` (+ complex conjugate when ``hermitian``)."""
        vector = np.atleast_1d(np.asarray(vector, dtype=complex))
        c = np.zeros((vector.size, grid.n), dtype=complex)
        j = grid.index_of(k)
        c[:, j] += vector
        if hermitian:
            c[:, (-j) % grid.n] += np.conj(vector)
        return cls(grid, c)

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    def to_physical(self, real: bool = True) -> np.ndarray:
        u = inverse(self.coeffs)
        return u.real if real else u

    def continuum(self) -> np.ndarray:
        """Coefficients rescaled to the continuum Fourier density."""
        return self.coeffs * (self.grid.length / (2.0 * np.pi))

    def hermitian_defect(self) -> float:
        """max |c(-k) - conj c(k)| relative to max |c|."""
        c = self.coeffs
        scale = np.max(np.abs(c))
        if scale == 0.0:
            return 0.0
        mirrored = np.conj(c[:, (-self.grid.indices) % self.grid.n])
        return float(np.max(np.abs(c - mirrored)) / scale)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.to_physical(real=False))))

    def _check(self, other: "SpectralField"):
        if self.grid != other.grid:
            raise GridMismatchError(f"{self.grid} != {other.grid}")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)


def xr_norm(u: SpectralField, r: float = 2.0) -> float:
    """Weighted sup-norm ``max_k |u(k)| (1 + k^2)^(r/2)`` of the continuum density."""
    weight = (1.0 + u.grid.k**2) ** (r / 2.0)
    return float(np.max(np.abs(u.continuum()) * weight))


def algebra_constant(grid: Grid1D, r: float) -> float:
    """``2^(r/2+1) * sum_k (1+k^2)^(-r/2) dk`` over the grid wavenumbers."""
    if r <= 1:
        raise ValueError(f"the weighted sup-norm is an algebra only for r > 1, got {r}")
    return 2.0 ** (r / 2.0 + 1.0) * float(np.sum((1.0 + grid.k**2) ** (-r / 2.0)) * grid.dk)


def _linear_product_norm(u: SpectralField, v: SpectralField, r: float) -> float:
    """Weighted norm of the exact (non-periodised) product of two band-limited fields."""
    g = u.grid
    order = np.argsort(g.indices)
    j = g.indices[order]
    conv = np.convolve(u.continuum()[0, order], v.continuum()[0, order]) * g.dk
    kk = (np.arange(conv.size) + 2 * j[0]) * g.dk
    return float(np.max(np.abs(conv) * (1.0 + kk**2) ** (r / 2.0)))


def algebra_constant_check(u: SpectralField, v: SpectralField, r: float = 2.0) -> tuple[float, float]:
    """Return ``(||u v||_r, C_r ||u||_r ||v||_r)`` for single-component fields.

    The product is the full continuum convolution of the two spectra, so the
    left side is not affected by aliasing on the grid.
    """
    u._check(v)
    rhs_const = algebra_constant(u.grid, r)
    if u.m != 1 or v.m != 1:
        raise ValueError("algebra_constant_check expects single-component fields")
    lhs = _linear_product_norm(u, v, r)
    return lhs, rhs_const * xr_norm(u, r) * xr_norm(v, r)


@dataclass(frozen=True)
class ModeFilterSpec:
    """Sharp Fourier band ``|k - j k_c| <= width`` around ``center_index * k_c``."""

    center_index: int
    k_c: float
    width: float | None = None

    def __post_init__(self):
        if self.center_index not in range(-3, 4):
            raise ValueError("center_index must lie in -3..3")
        if self.width is None:
            object.__setattr__(self, "width", self.k_c / 10.0)
        if not 0 < self.width < self.k_c / 2:
            raise ValueError(f"filter width must lie in (0, k_c/2), got {self.width}")

    def mask(self, grid: Grid1D) -> np.ndarray:
        return np.abs(grid.k - self.center_index * self.k_c) <= self.width


def mode_filter(u: SpectralField, spec: ModeFilterSpec) -> SpectralField:
    return SpectralField(u.grid, np.where(spec.mask(u.grid), u.coeffs, 0.0))


def critical_mask(grid: Grid1D, k_c: float, width: float | None = None) -> np.ndarray:
    plus = ModeFilterSpec(1, k_c, width).mask(grid)
    minus = ModeFilterSpec(-1, k_c, width).mask(grid)
    return plus | minus


def ec_es_split(u: SpectralField, k_c: float, width: float | None = None) -> tuple[SpectralField, SpectralField]:
    """Split into the critical part (bands around +-k_c) and the stable remainder."""
    mask = critical_mask(u.grid, k_c, width)
    return (
        SpectralField(u.grid, np.where(mask, u.coeffs, 0.0)),
        SpectralField(u.grid, np.where(mask, 0.0, u.coeffs)),
    )


def convolve_direct(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Circular convolution ``w_j = sum_m u_m v_{j-m}`` by O(n^2) summation.

    In the coefficient normalisation of this module this is the spectrum of
    the pointwise product of the two physical fields.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    n = u.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return (u[None, :] * v[idx]).sum(axis=1)


def convolve_fft(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Same as :func:`convolve_direct`, through the transforms."""
    return forward(inverse(np.asarray(u, dtype=complex)) * inverse(np.asarray(v, dtype=complex)))
