"""Multiple-scales approximation on the grid: assembly, residual and error split.

Slow and fast grids are tied together by ``slow_length = eps * fast_length``;
slow index ``j`` then sits at fast index ``j`` and the carrier ``k_c`` at fast
index ``M``.  The ansatz is assembled directly in coefficient space:

    eps * A_j f1(k_c + eps K_j)    at  M + j            (and conjugate)
    eps^2 nu0 (|A|^2)_j            at  j
    eps^2 nu2 (A^2)_j              at  2M + j            (and conjugate)

Slow products are formed on a zero-padded slow grid so they are alias free.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bifurcation import GLCoefficients, eig2
from .dynamics import gl_rhs
from .errors import GridMismatchError, UnresolvedEnvelopeError
from .model import GSKModel, ModelParams, PatternModel
from .spectral import Grid1D, SpectralField, ec_es_split, forward, inverse, xr_norm

__all__ = [
    "EIGVEC_MODES",
    "AnsatzBundle",
    "ResidualReport",
    "ErrorReport",
    "sideband_eigenvectors",
    "build_ansatz",
    "ansatz_time_derivative",
    "residual",
    "error_decomposition",
]

EIGVEC_MODES = ("sideband", "frozen")


@dataclass(frozen=True, eq=False)
class AnsatzBundle:
    """Everything needed to assemble ``eps * psi_GL`` at one slow time.

    ``eigvec`` selects the vector multiplying the carrier sidebands: ``sideband``
    uses ``f1(k)`` at each fast wavenumber ``k`` near ``k_c`` (evaluated at
    ``a_crit``); ``frozen`` uses ``f1(k_c)`` throughout.
    """

    eps: float
    A: SpectralField
    coeffs: GLCoefficients
    params: ModelParams
    fast_grid: Grid1D
    T: float = 0.0
    eigvec: str = "sideband"
    model: PatternModel | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 < self.eps:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.A.m != 1:
            raise ValueError("the amplitude must be a single-component field")
        expected = self.eps * self.fast_grid.length
        if abs(self.A.grid.length - expected) > 1e-12 * expected:
            raise GridMismatchError(
                f"slow grid length {self.A.grid.length} != eps * fast length {expected}"
            )
        self.fast_grid.index_of(self.coeffs.k_c, atol=1e-9)
        if not self.params.a > 4.0 * self.params.b**2:
            raise ValueError(f"a = {self.params.a} leaves no vegetated branch (needs a > 4 b^2)")
        if self.eigvec not in EIGVEC_MODES:
            raise ValueError(f"eigvec must be one of {EIGVEC_MODES}")
        carrier = self.carrier_index
        half = self.A.grid.n // 2
        if 3 * (carrier + half) >= self.fast_grid.n // 2:
            raise UnresolvedEnvelopeError(
                f"slow band +-{half} around carrier index {carrier} is not resolved by n={self.fast_grid.n}"
            )
        if self.model is None:
            object.__setattr__(self, "model", GSKModel(self.params))

    @property
    def carrier_index(self) -> int:
        return self.fast_grid.index_of(self.coeffs.k_c, atol=1e-9)

    @property
    def t(self) -> float:
        return self.T / self.eps**2

    def with_amplitude(self, A: SpectralField, T: float) -> "AnsatzBundle":
        return AnsatzBundle(self.eps, A, self.coeffs, self.params, self.fast_grid, T, self.eigvec, self.model)


def sideband_eigenvectors(bundle: AnsatzBundle) -> np.ndarray:
    """Vectors attached to fast indices ``M + j`` for signed slow indices ``j``; shape (2, n_slow)."""
    j = bundle.A.grid.indices
    if bundle.eigvec == "frozen":
        return np.repeat(bundle.coeffs.f1[:, None], j.size, axis=1)
    k = (bundle.carrier_index + j) * bundle.fast_grid.dk
    crit = GSKModel(bundle.params.with_a(bundle.coeffs.a_crit))
    f1 = eig2(crit.linear_symbol(k))[2]
    return np.moveaxis(f1, -1, 0)


def _padded_products(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Alias-free slow spectra of ``conj(A) B + A conj(B)`` and ``2 A B`` on doubled index range.

    Returns ``(indices, sym, dbl)`` with ``indices`` the signed slow indices
    ``-n..n-1`` of the padded grid.
    """
    n = A.size
    big = 2 * n

    def pad(c):
        out = np.zeros(big, dtype=complex)
        out[: n // 2 + 1] = c[: n // 2 + 1]
        out[big - n // 2 + 1 :] = c[n // 2 + 1 :]
        return out

    a, b = inverse(pad(A)), inverse(pad(B))
    sym = forward(np.conj(a) * b + a * np.conj(b))
    dbl = forward(2.0 * a * b)
    idx = np.fft.fftfreq(big, d=1.0 / big).astype(np.int64)
    return idx, sym, dbl


def _assemble(
    bundle: AnsatzBundle, A: np.ndarray, B: np.ndarray, linear_part: np.ndarray, quad_weight: float = 1.0
) -> np.ndarray:
    """Coefficients of the ansatz polarised in ``(A, B)``.

    ``A = B`` with ``linear_part = A`` gives the ansatz itself; ``B = dA/dT``
    with ``linear_part = B`` and ``quad_weight = 2`` gives its slow-time derivative.
    """
    eps, g = bundle.eps, bundle.fast_grid
    n, M = g.n, bundle.carrier_index
    out = np.zeros((2, n), dtype=complex)
    j = bundle.A.grid.indices
    first = eps * linear_part[None, :] * sideband_eigenvectors(bundle)
    out[:, (M + j) % n] += first
    out[:, (-(M + j)) % n] += np.conj(first)
    idx, sym, dbl = _padded_products(A, B)
    nu0, nu2 = bundle.coeffs.nu0, bundle.coeffs.nu2
    # sym/2 = |A|^2 for A == B, dbl/2 = A^2
    mean = eps**2 * 0.5 * quad_weight * nu0[:, None] * sym[None, :]
    out[:, idx % n] += mean
    second = eps**2 * 0.5 * quad_weight * nu2[:, None] * dbl[None, :]
    out[:, (2 * M + idx) % n] += second
    out[:, (-(2 * M + idx)) % n] += np.conj(second)
    return out


def build_ansatz(bundle: AnsatzBundle) -> SpectralField:
    """``eps * psi_GL`` on the fast grid for the amplitude stored in ``bundle``."""
    A = bundle.A.coeffs[0]
    return _hermitian(bundle.fast_grid, _assemble(bundle, A, A, A))


def ansatz_time_derivative(bundle: AnsatzBundle) -> SpectralField:
    """``d/dt (eps psi_GL)`` by the chain rule through ``dA/dT`` from the amplitude equation."""
    A = bundle.A.coeffs[0]
    Adot = gl_rhs(bundle.A, bundle.coeffs).coeffs[0]
    c = _assemble(bundle, A, Adot, Adot, quad_weight=2.0)
    return _hermitian(bundle.fast_grid, bundle.eps**2 * c)


def _hermitian(grid: Grid1D, c: np.ndarray) -> SpectralField:
    n = grid.n
    c[:, n // 2] = c[:, n // 2].real
    return SpectralField(grid, 0.5 * (c + np.conj(c[:, (-grid.indices) % n])))


def _exact_nonlinear(model: PatternModel, V: SpectralField) -> SpectralField:
    """Nonlinearity evaluated on a doubled grid so the products are not truncated."""
    g = V.grid
    n = g.n
    big = Grid1D(2 * n, g.length)
    c = np.zeros((V.m, 2 * n), dtype=complex)
    c[:, : n // 2] = V.coeffs[:, : n // 2]
    c[:, 2 * n - n // 2 + 1 :] = V.coeffs[:, n // 2 + 1 :]
    out = model.nonlinear(SpectralField(big, c)).coeffs
    back = np.concatenate([out[:, : n // 2], np.zeros((V.m, 1)), out[:, 2 * n - n // 2 + 1 :]], axis=1)
    return SpectralField(g, back)


@dataclass(frozen=True)
class ResidualReport:
    eps: float
    t: float
    res_c_norm: float
    res_s_norm: float
    r: float


def residual_field(bundle: AnsatzBundle) -> SpectralField:
    """``-dV/dt + Lambda V + B2(V,V) + B3(V,V,V)`` at ``V = eps psi_GL``."""
    V = build_ansatz(bundle)
    L = bundle.model.linear_symbol(bundle.fast_grid.k)
    lin = np.einsum("kij,jk->ik", L, V.coeffs)
    res = SpectralField(V.grid, lin) + _exact_nonlinear(bundle.model, V) - ansatz_time_derivative(bundle)
    return res


def residual(bundle: AnsatzBundle, r: float = 2.0) -> ResidualReport:
    res = residual_field(bundle)
    crit, stable = ec_es_split(res, bundle.coeffs.k_c)
    return ResidualReport(bundle.eps, bundle.t, xr_norm(crit, r), xr_norm(stable, r), r)


@dataclass(frozen=True)
class ErrorReport:
    eps: float
    t: float
    rc_norm: float
    rs_norm: float
    sup_error: float
    sup_error_l1: float


def error_decomposition(V: SpectralField, bundle: AnsatzBundle, r: float = 2.0, t: float | None = None) -> ErrorReport:
    """Split ``R = (V - eps psi_GL)/eps^2`` into critical and (rescaled) stable parts.

    ``t`` may be passed to assert that ``V`` belongs to the bundle's time.
    """
    if V.grid != bundle.fast_grid:
        raise GridMismatchError(f"{V.grid} != {bundle.fast_grid}")
    if t is not None and abs(t - bundle.t) > 1e-9 * max(1.0, bundle.t):
        raise ValueError(f"solution time {t} does not match ansatz time {bundle.t}")
    eps = bundle.eps
    diff = V - build_ansatz(bundle)
    R = diff * (1.0 / eps**2)
    Rc, Rs = ec_es_split(R, bundle.coeffs.k_c)
    return ErrorReport(
        eps,
        bundle.t,
        xr_norm(Rc, r),
        xr_norm(Rs, r) / eps,
        float(np.max(np.abs(diff.to_physical()))),
        float(np.max(np.sum(np.abs(diff.coeffs), axis=-1))),
    )
