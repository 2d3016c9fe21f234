"""Exponential time differencing for the full system and the amplitude equation.

The full state is advanced on the non-negative half spectrum of a real field,
so Hermitian symmetry of returned fields holds by construction.  The linear
part is propagated exactly with closed-form 2x2 matrix functions per mode;
the nonlinearity (including the deviation part of the porous-medium term) is
explicit.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bifurcation import GLCoefficients
from .errors import BlowUpError
from .matfun import expm2, matvec2, phi, phim2
from .model import GSKModel, ModelParams, PatternModel
from .spectral import Grid1D, SpectralField, dealias, forward, half_to_full, inverse

logger = logging.getLogger(__name__)

__all__ = [
    "SCHEMES",
    "IntegratorConfig",
    "PropagatorTable",
    "Trajectory",
    "FullIntegrator",
    "GLIntegrator",
    "step_full",
    "integrate_full",
    "gl_rhs",
    "step_gl",
    "integrate_gl",
    "quasilinear_dt",
    "SemigroupBound",
    "semigroup_decay_probe",
]

SCHEMES = ("etdrk2", "etdrk4")


def _scheme(name: str) -> str:
    key = name.lower().replace("-", "").replace("_", "")
    if key not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of ETD-RK2, ETD-RK4")
    return key


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``clip_threshold`` is an absolute sup-norm bound; when ``None`` it defaults
    to ``clip_factor`` times the initial sup-norm.
    """

    dt: float
    t_end: float
    scheme: str = "etdrk4"
    record_every: int = 1
    clip_threshold: float | None = None
    clip_factor: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "scheme", _scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.clip_threshold is not None and not self.clip_threshold > 0:
            raise ValueError("clip_threshold must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    def steps(self) -> tuple[int, float]:
        """Number of steps and the (possibly slightly reduced) step that hits ``t_end``."""
        if self.t_end == 0:
            return 0, self.dt
        n = int(np.ceil(self.t_end / self.dt - 1e-9))
        return n, self.t_end / n

    def threshold(self, initial_sup: float) -> float:
        if self.clip_threshold is not None:
            return self.clip_threshold
        return self.clip_factor * initial_sup if initial_sup > 0 else np.inf


def _etd_weights(scheme: str, hL: np.ndarray, h: float, fun) -> dict:
    """Weight matrices (or scalars) of the Cox-Matthews ETD schemes for ``z = h L``."""
    if scheme == "etdrk2":
        return {
            "E": fun(0, hL),
            "P1": h * fun(1, hL),
            "P2": h * fun(2, hL),
        }
    p1, p2, p3 = (fun(j, hL) for j in (1, 2, 3))
    return {
        "E": fun(0, hL),
        "E2": fun(0, hL / 2),
        "Q": (h / 2) * fun(1, hL / 2),
        "F1": h * (p1 - 3 * p2 + 4 * p3),
        "F2": h * (p2 - 2 * p3),
        "F3": h * (4 * p3 - p2),
    }


def _matrix_fun(j, M):
    return expm2(M) if j == 0 else phim2(j, M)


@dataclass(frozen=True, eq=False)
class PropagatorTable:
    """Per-mode exponential and phi-weight matrices on the half spectrum ``k >= 0``.

    Negative wavenumbers use the complex conjugate matrices.
    """

    grid: Grid1D
    dt: float
    scheme: str
    symbol: np.ndarray = field(repr=False)
    weights: dict = field(repr=False)

    @classmethod
    def build(cls, model: PatternModel, grid: Grid1D, dt: float, scheme: str = "etdrk4") -> "PropagatorTable":
        scheme = _scheme(scheme)
        L = model.linear_symbol(grid.k_half)
        return cls(grid, float(dt), scheme, L, _etd_weights(scheme, dt * L, dt, _matrix_fun))

    @property
    def exp(self) -> np.ndarray:
        return self.weights["E"]

    def full_exp(self) -> np.ndarray:
        """``exp(Lambda(k) dt)`` for every grid wavenumber in FFT order."""
        n = self.grid.n
        E = np.empty((n, 2, 2), dtype=complex)
        E[: n // 2 + 1] = self.exp
        E[n // 2 + 1 :] = np.conj(self.exp[1 : n // 2][::-1])
        return E


def _to_half(V: SpectralField) -> np.ndarray:
    h = np.array(V.coeffs[:, : V.grid.n // 2 + 1])
    h[:, -1] = 0.0
    return h


def _l1_sup_bound(half: np.ndarray) -> float:
    return float(np.max(np.abs(half[:, 0]) + 2.0 * np.sum(np.abs(half[:, 1:]), axis=-1)))


class FullIntegrator:
    """Reusable ETD stepper for a model on a fixed grid and step."""

    def __init__(self, model: PatternModel, grid: Grid1D, dt: float, scheme: str = "etdrk4", nonlinear: bool = True):
        self.model = model
        self.grid = grid
        self.table = PropagatorTable.build(model, grid, dt, scheme)
        self.nonlinear = nonlinear

    def _N(self, half):
        if not self.nonlinear:
            return np.zeros_like(half)
        return self.model.nonlinear_half(half, self.grid)

    def step(self, u: np.ndarray) -> np.ndarray:
        w = self.table.weights
        if not self.nonlinear:
            return matvec2(w["E"], u)
        Nu = self._N(u)
        if self.table.scheme == "etdrk2":
            a = matvec2(w["E"], u) + matvec2(w["P1"], Nu)
            return a + matvec2(w["P2"], self._N(a) - Nu)
        E2u = matvec2(w["E2"], u)
        a = E2u + matvec2(w["Q"], Nu)
        Na = self._N(a)
        b = E2u + matvec2(w["Q"], Na)
        Nb = self._N(b)
        c = matvec2(w["E2"], a) + matvec2(w["Q"], 2.0 * Nb - Nu)
        Nc = self._N(c)
        return (
            matvec2(w["E"], u)
            + matvec2(w["F1"], Nu)
            + 2.0 * matvec2(w["F2"], Na + Nb)
            + matvec2(w["F3"], Nc)
        )

    def advance(self, u: np.ndarray, nsteps: int, threshold: float = np.inf, t0: float = 0.0) -> np.ndarray:
        for i in range(nsteps):
            u = self.step(u)
            bound = _l1_sup_bound(u)
            if not np.isfinite(bound) or bound > threshold:
                sup = float(np.max(np.abs(self.physical(u)))) if np.isfinite(bound) else np.inf
                if not np.isfinite(sup) or sup > threshold:
                    t_fail = t0 + (i + 1) * self.table.dt
                    raise BlowUpError(f"sup-norm {sup:.3g} exceeded {threshold:.3g} at t={t_fail:.6g}", time=t_fail)
        return u

    def physical(self, half: np.ndarray) -> np.ndarray:
        return np.fft.irfft(half, n=self.grid.n, axis=-1) * self.grid.n

    def to_field(self, half: np.ndarray) -> SpectralField:
        return SpectralField(self.grid, half_to_full(half, self.grid.n))


def step_full(
    state: SpectralField,
    table: PropagatorTable,
    model: PatternModel,
    clip_threshold: float = np.inf,
    nonlinear: bool = True,
) -> SpectralField:
    """One exponential-integrator step of the deviation dynamics."""
    stepper = FullIntegrator.__new__(FullIntegrator)
    stepper.model, stepper.grid, stepper.table, stepper.nonlinear = model, table.grid, table, nonlinear
    return stepper.to_field(stepper.advance(_to_half(state), 1, clip_threshold))


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def append(self, t, state):
        self.times.append(float(t))
        self.states.append(state)

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]


def integrate_full(
    initial: SpectralField, config: IntegratorConfig, model: PatternModel, nonlinear: bool = True
) -> Trajectory:
    """Integrate the full system, recording every ``record_every`` steps and at ``t_end``."""
    nsteps, dt = config.steps()
    traj = Trajectory()
    traj.append(0.0, initial)
    if nsteps == 0:
        return traj
    stepper = FullIntegrator(model, initial.grid, dt, config.scheme, nonlinear)
    u = _to_half(initial)
    threshold = config.threshold(initial.sup_norm())
    done = 0
    while done < nsteps:
        chunk = min(config.record_every, nsteps - done)
        u = stepper.advance(u, chunk, threshold, t0=done * dt)
        done += chunk
        traj.append(done * dt, stepper.to_field(u))
    return traj


def quasilinear_dt(model: GSKModel, grid: Grid1D, w_sup: float, dt_max: float = 0.05, safety: float = 0.5) -> float:
    """Step size for the explicit treatment of the porous-medium deviation.

    Accuracy is tied to the reaction time scale ``1/rho(Lambda(0))``.  The explicit
    coupling ``2 w~ k^2`` is stiff only relative to the exact linear damping
    ``2 w* k^2``; when that ratio exceeds ``safety`` the step is additionally
    limited by ``safety / (2 ||w~|| k_max^2)``.
    """
    rho0 = float(np.max(np.abs(np.linalg.eigvals(model.linear_symbol(0.0)))))
    dt = min(dt_max, safety / rho0)
    ratio = w_sup / model.fp.w_star
    if ratio > safety:
        k_max = grid.k[grid.n // 3]
        dt = min(dt, safety / (2.0 * w_sup * k_max**2))
    return dt


# --- Ginzburg-Landau -------------------------------------------------------------


def gl_symbol(coeffs: GLCoefficients, grid: Grid1D) -> np.ndarray:
    return coeffs.alpha0 - coeffs.alpha2 * grid.k**2


def gl_nonlinear(A: np.ndarray, coeffs: GLCoefficients) -> np.ndarray:
    a = inverse(dealias(A, 3))
    return dealias(coeffs.alpha3 * forward(np.abs(a) ** 2 * a), 3)


def gl_rhs(A: SpectralField, coeffs: GLCoefficients) -> SpectralField:
    """``dA/dT`` in coefficient space, with the same dealiasing as the integrator."""
    c = A.coeffs[0]
    return SpectralField(A.grid, gl_symbol(coeffs, A.grid) * c + gl_nonlinear(c, coeffs))


class GLIntegrator:
    """Scalar ETD stepper for the amplitude equation on a periodic slow grid."""

    def __init__(self, coeffs: GLCoefficients, grid: Grid1D, dT: float, scheme: str = "etdrk4", cubic: bool = True):
        self.coeffs = coeffs
        self.grid = grid
        self.dT = dT
        self.scheme = _scheme(scheme)
        self.cubic = cubic
        L = gl_symbol(coeffs, grid)
        self.weights = _etd_weights(self.scheme, dT * L, dT, phi)

    def _N(self, A):
        return gl_nonlinear(A, self.coeffs) if self.cubic else np.zeros_like(A)

    def step(self, A: np.ndarray) -> np.ndarray:
        w = self.weights
        NA = self._N(A)
        if self.scheme == "etdrk2":
            a = w["E"] * A + w["P1"] * NA
            return a + w["P2"] * (self._N(a) - NA)
        E2A = w["E2"] * A
        a = E2A + w["Q"] * NA
        Na = self._N(a)
        b = E2A + w["Q"] * Na
        Nb = self._N(b)
        c = w["E2"] * a + w["Q"] * (2.0 * Nb - NA)
        Nc = self._N(c)
        return w["E"] * A + w["F1"] * NA + 2.0 * w["F2"] * (Na + Nb) + w["F3"] * Nc

    def advance(self, A: np.ndarray, nsteps: int, threshold: float = np.inf, T0: float = 0.0) -> np.ndarray:
        for i in range(nsteps):
            A = self.step(A)
            bound = float(np.sum(np.abs(A)))
            if not np.isfinite(bound) or bound > threshold:
                sup = float(np.max(np.abs(inverse(A)))) if np.isfinite(bound) else np.inf
                if not np.isfinite(sup) or sup > threshold:
                    T_fail = T0 + (i + 1) * self.dT
                    raise BlowUpError(f"|A| reached {sup:.3g} > {threshold:.3g} at T={T_fail:.6g}", time=T_fail)
        return A


def step_gl(A: SpectralField, coeffs: GLCoefficients, dT: float, scheme: str = "etdrk4") -> SpectralField:
    return SpectralField(A.grid, GLIntegrator(coeffs, A.grid, dT, scheme).step(A.coeffs[0]))


def integrate_gl(A0: SpectralField, coeffs: GLCoefficients, config: IntegratorConfig, cubic: bool = True) -> Trajectory:
    """Integrate the amplitude equation; ``config.dt`` and ``t_end`` are slow times."""
    nsteps, dT = config.steps()
    traj = Trajectory()
    traj.append(0.0, A0)
    if nsteps == 0:
        return traj
    stepper = GLIntegrator(coeffs, A0.grid, dT, config.scheme, cubic)
    A = np.array(A0.coeffs[0])
    threshold = config.threshold(A0.sup_norm())
    done = 0
    while done < nsteps:
        chunk = min(config.record_every, nsteps - done)
        A = stepper.advance(A, chunk, threshold, T0=done * dT)
        done += chunk
        traj.append(done * dT, SpectralField(A0.grid, A))
    return traj


# --- semigroup estimates ---------------------------------------------------------


@dataclass(frozen=True)
class SemigroupBound:
    """``sup_k ||exp(Lambda(k) t)|| <= constant * exp(-sigma t)`` over a band."""

    constant: float
    sigma: float
    band: str


def _band_wavenumbers(k_c: float, band: str, k_upper: float, samples: int, width: float) -> np.ndarray:
    if band == "critical":
        return np.linspace(k_c - width, k_c + width, samples)
    if band == "stable":
        ks = np.linspace(0.0, k_upper, samples)
        return ks[np.abs(ks - k_c) >= width]
    raise ValueError(f"band must be 'critical' or 'stable', got {band!r}")


def semigroup_decay_probe(
    params: ModelParams,
    k_c: float,
    band: str,
    t_max: float,
    fp=None,
    width: float | None = None,
    k_samples: int = 4001,
    t_samples: int = 201,
) -> SemigroupBound:
    """Measure the decay of the linear semigroup on the stable or critical band.

    Only non-negative wavenumbers are sampled: the symbol at ``-k`` is the
    complex conjugate, with identical matrix norms.
    """
    model = GSKModel(params, fp or "minus")
    width = k_c / 10.0 if width is None else width
    k_upper = max(4.0 * k_c, 4.0 * np.sqrt(max(params.b, params.a, 1.0) / min(params.d, 2 * model.fp.w_star)))
    ks = _band_wavenumbers(k_c, band, k_upper, k_samples, width)
    L = model.linear_symbol(ks)
    if t_max == 0:
        return SemigroupBound(1.0, float("nan"), band)
    ts = np.linspace(0.0, t_max, t_samples)
    sup = np.array([np.max(np.linalg.norm(expm2(t * L), ord=2, axis=(-2, -1))) for t in ts])
    if band == "critical":
        lam_max = float(np.max(np.linalg.eigvals(L).real))
        constant = float(np.max(sup * np.exp(-lam_max * ts)))
        return SemigroupBound(constant, -lam_max, band)
    tail = ts >= 0.5 * t_max
    slope = np.polyfit(ts[tail], np.log(sup[tail]), 1)[0]
    sigma = -float(slope)
    if sigma <= 0:
        raise ArithmeticError(f"stable band does not decay (fitted sigma={sigma:.3g}); not a pure Turing point")
    constant = float(np.max(sup * np.exp(sigma * ts)))
    return SemigroupBound(constant, sigma, band)
