"""Dispersion relation, Turing point location and Ginzburg-Landau coefficients.

All eigen-computations use the closed form for 2x2 matrices.  Eigenvectors are
normalised to unit Euclidean length with their first non-negligible component
real and positive; adjoint vectors are the rows of the inverse eigenvector
matrix, so ``f_adj . f = 1`` with the plain (unconjugated) dot product.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DefectiveMatrixError,
    HomogeneousInstabilityError,
    NoTuringPointError,
    ResonantSolveError,
    TuringHopfError,
)
from .model import FixedPoint, GSKModel, ModelParams, gsk_fixed_points

logger = logging.getLogger(__name__)

__all__ = [
    "EigenData",
    "CriticalPoint",
    "GLCoefficients",
    "eig2",
    "dispersion",
    "growth_rate",
    "growth_max_over_k",
    "find_critical",
    "gl_coefficients",
    "cubic_coefficient",
]

_DEFECT_TOL = 1e-12


def _minus_branch(params: ModelParams) -> FixedPoint:
    for fp in gsk_fixed_points(params):
        if fp.branch == "minus":
            return fp
    raise ValueError(f"a={params.a} < 4 b^2={4 * params.b**2}: the vegetated branches do not exist")


def _eigvals2(M: np.ndarray):
    a, b, c, d = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    root = np.sqrt(0.25 * (a - d) ** 2 + b * c + 0j)
    # add the root with the sign that avoids cancellation; the other root via det
    sign = np.where(np.real(np.conj(half_tr) * root) >= 0, 1.0, -1.0)
    big = half_tr + sign * root
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / np.where(big != 0, big, 1.0), half_tr - sign * root)
    swap = (small.real > big.real) | ((small.real == big.real) & (small.imag > big.imag))
    lam1 = np.where(swap, small, big)
    lam2 = np.where(swap, big, small)
    return lam1, lam2


def _eigvec2(M: np.ndarray, lam: np.ndarray) -> np.ndarray:
    a, b, c, d = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    u1 = np.stack([b, lam - a], axis=-1)
    u2 = np.stack([lam - d, c], axis=-1)
    n1 = np.linalg.norm(u1, axis=-1)
    n2 = np.linalg.norm(u2, axis=-1)
    vec = np.where((n1 >= n2)[..., None], u1, u2)
    norm = np.maximum(n1, n2)
    scalar = norm == 0
    vec = np.where(scalar[..., None], np.array([1.0, 0.0]), vec)
    vec = vec / np.where(scalar, 1.0, norm)[..., None]
    # phase: first non-negligible component real positive
    use0 = np.abs(vec[..., 0]) > 1e-12
    lead = np.where(use0, vec[..., 0], vec[..., 1])
    vec = vec * (np.abs(lead) / lead)[..., None]
    # pin the leading component to exactly real
    vec[..., 0] = np.where(use0, np.abs(lead), vec[..., 0])
    vec[..., 1] = np.where(use0, vec[..., 1], np.abs(lead))
    return vec


def eig2(M: np.ndarray):
    """Closed-form eigen-decomposition of a stack of 2x2 matrices.

    Returns ``(lam1, lam2, f1, f2, f1_adj, f2_adj)`` ordered by real part
    (ties by imaginary part, descending).  Defective entries give NaN adjoints.
    """
    M = np.asarray(M, dtype=complex)
    lam1, lam2 = _eigvals2(M)
    f1 = _eigvec2(M, lam1)
    f2 = _eigvec2(M, lam2)
    scale = np.maximum(1.0, np.maximum(np.abs(lam1), np.abs(lam2)))
    is_scalar = (np.abs(M[..., 0, 1]) + np.abs(M[..., 1, 0]) == 0) & (M[..., 0, 0] == M[..., 1, 1])
    f2 = np.where(is_scalar[..., None], np.array([0.0, 1.0]), f2)
    detS = f1[..., 0] * f2[..., 1] - f1[..., 1] * f2[..., 0]
    defective = (np.abs(lam1 - lam2) < _DEFECT_TOL * scale) & ~is_scalar
    detS = np.where(defective, np.nan, detS)
    with np.errstate(invalid="ignore"):
        f1_adj = np.stack([f2[..., 1], -f2[..., 0]], axis=-1) / detS[..., None]
        f2_adj = np.stack([-f1[..., 1], f1[..., 0]], axis=-1) / detS[..., None]
    return lam1, lam2, f1, f2, f1_adj, f2_adj


@dataclass(frozen=True)
class EigenData:
    k: float
    lambda1: complex
    lambda2: complex
    f1: np.ndarray
    f2: np.ndarray
    f1_adj: np.ndarray
    f2_adj: np.ndarray


def dispersion(k: float, params: ModelParams, fp: FixedPoint | None = None) -> EigenData:
    """Eigen-data of the linear symbol at wavenumber ``k`` (minus branch by default)."""
    fp = fp or _minus_branch(params)
    M = GSKModel(params, fp).linear_symbol(float(k))
    lam1, lam2, f1, f2, f1a, f2a = eig2(M)
    if np.isnan(f1a).any():
        raise DefectiveMatrixError(f"eigenvalues collide at k={k}: {lam1} ~ {lam2}")
    return EigenData(float(k), complex(lam1), complex(lam2), f1, f2, f1a, f2a)


def growth_rate(k, params: ModelParams, fp: FixedPoint | None = None) -> np.ndarray:
    """Leading eigenvalue ``lambda1(k)`` (complex), vectorised over ``k``."""
    fp = fp or _minus_branch(params)
    return _eigvals2(GSKModel(params, fp).linear_symbol(k))[0]


def _k_upper(params: ModelParams, fp: FixedPoint) -> float:
    return 4.0 * math.sqrt(max(params.b, params.a, 1.0) / min(params.d, 2.0 * fp.w_star))


def growth_max_over_k(a: float, params: ModelParams, samples: int = 512) -> tuple[float, float]:
    """Maximise ``Re lambda1(k)`` over ``k >= 0`` for rainfall ``a``.

    Returns ``(k_max, Re lambda1(k_max))``.
    """
    p = params.with_a(a)
    fp = _minus_branch(p)
    ks = np.linspace(0.0, _k_upper(p, fp), samples)
    vals = growth_rate(ks, p, fp).real
    i = int(np.argmax(vals))
    if i == 0:
        lo, hi = 0.0, ks[1]
    else:
        lo, hi = ks[i - 1], ks[min(i + 1, samples - 1)]
    res = minimize_scalar(
        lambda k: -float(growth_rate(k, p, fp).real),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    k_best, g_best = float(res.x), -float(res.fun)
    if vals[i] > g_best:
        k_best, g_best = float(ks[i]), float(vals[i])
    return k_best, g_best


@dataclass(frozen=True)
class CriticalPoint:
    a_crit: float
    k_c: float
    lambda_max: float
    curvature: float
    params: ModelParams

    @property
    def fixed_point(self) -> FixedPoint:
        return _minus_branch(self.params)


def _second_derivative_k(params, fp, k, h):
    lam = growth_rate(np.array([k - h, k, k + h]), params, fp)
    return (lam[0] - 2.0 * lam[1] + lam[2]) / h**2


def find_critical(params: ModelParams, a_upper: float | None = None, scan_points: int = 64) -> CriticalPoint:
    """Locate the Turing point by root-finding ``a -> max_k Re lambda1(k; a) = 0``.

    ``params.a`` is ignored; ``b``, ``c``, ``d`` are held fixed.
    """
    a_min = 4.0 * params.b**2
    if a_upper is None:
        a_upper = max(5.0, 10.0 * a_min)
    offsets = np.geomspace(1e-6 * max(a_min, 1e-3), a_upper - a_min, scan_points)
    grid_a = a_min + offsets

    def g(a):
        return growth_max_over_k(a, params)[1]

    values = np.array([g(a) for a in grid_a])
    crossings = np.nonzero((values[:-1] > 0) & (values[1:] < 0))[0]
    if crossings.size == 0:
        raise NoTuringPointError(
            f"max growth never changes sign on [{a_min:.6g}, {a_upper:.6g}] for b={params.b}, c={params.c}, d={params.d}"
        )
    i = crossings[-1]
    a_lo, a_hi = grid_a[i], grid_a[i + 1]
    a_crit = brentq(g, a_lo, a_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # secant polish on the residual growth
    a0, a1 = a_crit, a_crit * (1 + 1e-9)
    g0, g1 = g(a0), g(a1)
    for _ in range(8):
        if abs(g0) <= 1e-12 or g1 == g0:
            break
        a0, a1 = a0 - g0 * (a0 - a1) / (g0 - g1), a0
        g0, g1 = g(a0), g0
    a_crit = a0 if abs(g0) <= abs(g(a_crit)) else a_crit
    k_c, lam_max = growth_max_over_k(a_crit, params)
    p = params.with_a(a_crit)
    fp = _minus_branch(p)
    if k_c <= 1e-6 * _k_upper(p, fp):
        raise HomogeneousInstabilityError(f"instability at k=0 for a={a_crit:.6g}")
    lam = complex(growth_rate(k_c, p, fp))
    if abs(lam.imag) > 1e-8:
        raise TuringHopfError(f"critical eigenvalue {lam} is complex (Turing-Hopf point)")
    curvature = float(_second_derivative_k(p, fp, k_c, 1e-4 * k_c).real)
    logger.debug("critical point a=%.12g k=%.12g growth=%.3e", a_crit, k_c, lam_max)
    return CriticalPoint(float(a_crit), float(k_c), float(lam_max), curvature, p)


@dataclass(frozen=True)
class GLCoefficients:
    """Ginzburg-Landau data ``dA/dT = alpha0 A + alpha2 A_XX + alpha3 |A|^2 A``.

    ``nu0`` and ``nu2`` are the quadratic corrections per unit ``|A|^2`` and
    ``A^2``; ``eigen`` holds the eigen-data at the critical wavenumber.
    """

    alpha0: complex
    alpha2: complex
    alpha3: complex
    nu0: np.ndarray
    nu2: np.ndarray
    k_c: float
    a_crit: float
    eigen: EigenData
    nu0_residual: float
    nu2_residual: float

    @property
    def f1(self) -> np.ndarray:
        return self.eigen.f1

    @property
    def f1_adj(self) -> np.ndarray:
        return self.eigen.f1_adj


def _solve_correction(L: np.ndarray, rhs: np.ndarray, label: str):
    cond = np.linalg.cond(L)
    if not np.isfinite(cond) or cond > 1e8:
        raise ResonantSolveError(f"{label} solve is resonant (condition number {cond:.3g})")
    x = np.linalg.solve(L, rhs)
    return x, float(np.linalg.norm(L @ x - rhs))


def cubic_coefficient(model, k_c: float, f1: np.ndarray, f1_adj: np.ndarray):
    """Quadratic corrections and the cubic Landau coefficient for given eigenvectors.

    Returns ``(alpha3, nu0, nu2, nu0_residual, nu2_residual)``.  ``f1_adj`` must
    satisfy ``f1_adj . f1 = 1`` (unconjugated product).
    """
    nu0, res0 = _solve_correction(model.linear_symbol(0.0), -2.0 * model.b2_symbol(0.0, f1, np.conj(f1)), "k=0")
    nu2, res2 = _solve_correction(model.linear_symbol(2.0 * k_c), -model.b2_symbol(2.0 * k_c, f1, f1), "k=2k_c")
    alpha3 = (
        2.0 * f1_adj @ model.b2_symbol(k_c, f1, nu0)
        + 2.0 * f1_adj @ model.b2_symbol(k_c, np.conj(f1), nu2)
        + 3.0 * f1_adj @ model.b3_symbol(np.conj(f1), f1, f1)
    )
    return complex(alpha3), nu0, nu2, res0, res2


def gl_coefficients(cp: CriticalPoint, params: ModelParams | None = None, step_scale: float = 1.0) -> GLCoefficients:
    """Ginzburg-Landau coefficients at a critical point.

    ``alpha0 = -d lambda1 / da`` so that ``a = a_crit - eps^2`` grows at rate
    ``eps^2 alpha0``; ``alpha2 = -d^2 lambda1 / dk^2 / 2``.  Both derivatives are
    central differences with relative steps ``1e-5`` (in a) and ``1e-4`` (in k),
    multiplied by ``step_scale``.
    """
    base = (params or cp.params).with_a(cp.a_crit)
    fp = _minus_branch(base)
    model = GSKModel(base, fp)
    k_c = cp.k_c

    h_a = 1e-5 * cp.a_crit * step_scale
    lam_plus = complex(growth_rate(k_c, base.with_a(cp.a_crit + h_a)))
    lam_minus = complex(growth_rate(k_c, base.with_a(cp.a_crit - h_a)))
    alpha0 = -(lam_plus - lam_minus) / (2.0 * h_a)
    alpha2 = -complex(_second_derivative_k(base, fp, k_c, 1e-4 * k_c * step_scale)) / 2.0

    eig = dispersion(k_c, base, fp)
    alpha3, nu0, nu2, res0, res2 = cubic_coefficient(model, k_c, eig.f1, eig.f1_adj)
    return GLCoefficients(
        alpha0=complex(alpha0),
        alpha2=complex(alpha2),
        alpha3=complex(alpha3),
        nu0=nu0,
        nu2=nu2,
        k_c=k_c,
        a_crit=cp.a_crit,
        eigen=eig,
        nu0_residual=res0,
        nu2_residual=res2,
    )
