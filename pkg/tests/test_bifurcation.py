import numpy as np
import pytest

from gskgl.bifurcation import (
    cubic_coefficient,
    dispersion,
    eig2,
    find_critical,
    gl_coefficients,
    growth_max_over_k,
    growth_rate,
)
from gskgl.errors import (
    DefectiveMatrixError,
    HomogeneousInstabilityError,
    NoTuringPointError,
    ResonantSolveError,
)
from gskgl.model import GSKModel, ModelParams, gsk_fixed_points

# frozen from the first run of the coarse-scan + Brent search (b=0.2, c=0, d=0.018)
A_CRIT = 0.24097172813502774
K_C = 2.0473451733341537
ALPHA0 = 1.4143050914513975
ALPHA2 = 0.04556682467460911
ALPHA3 = -0.1176825273628121
NU0 = np.array([-0.18359342705784987, 0.15237756601469354])
NU2 = np.array([-0.5441004650351305, -0.005243669523334267])


def companion_eigs(M):
    """Eigenvalues as roots of the characteristic polynomial (companion matrix)."""
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return np.roots([1.0, -tr, det])


def test_dispersion_at_zero():
    e = dispersion(0.0, ModelParams(a=0.25, b=0.2))
    # trace -1.05, det 0.15
    assert e.lambda1.real == pytest.approx((-1.05 + np.sqrt(1.05**2 - 0.6)) / 2, abs=1e-14)
    assert e.lambda2.real == pytest.approx((-1.05 - np.sqrt(1.05**2 - 0.6)) / 2, abs=1e-14)
    assert e.lambda1.real == pytest.approx(-0.17057, abs=1e-5)
    assert e.lambda2.real == pytest.approx(-0.87943, abs=1e-5)


def test_large_k_asymptotics():
    p = ModelParams(a=0.2412, b=0.2, d=0.018)
    fp = [f for f in gsk_fixed_points(p) if f.branch == "minus"][0]
    e = dispersion(100.0, p)
    assert e.lambda1.real / 100**2 == pytest.approx(-p.d, rel=0.05)
    assert e.lambda2.real / 100**2 == pytest.approx(-2 * fp.w_star, rel=0.05)


def test_conjugate_pairs_with_advection():
    p = ModelParams(a=0.25, b=0.2, c=1.0)
    for k in (0.3, 1.7, 4.0):
        e_plus, e_minus = dispersion(k, p), dispersion(-k, p)
        assert e_minus.lambda1 == pytest.approx(np.conj(e_plus.lambda1), abs=1e-13)
        assert e_minus.lambda2 == pytest.approx(np.conj(e_plus.lambda2), abs=1e-13)


def test_eigen_solver_against_companion_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        b = rng.uniform(0.05, 0.5)
        a = rng.uniform(4 * b * b * 1.01, 3.0)
        p = ModelParams(a=a, b=b, c=rng.uniform(-2, 2), d=rng.uniform(0.005, 2.0))
        k = rng.uniform(-10, 10)
        M = GSKModel(p).linear_symbol(k)
        lam1, lam2, f1, f2, f1a, f2a = eig2(M)
        ref = companion_eigs(M)
        ref = ref[np.lexsort((-ref.imag, -ref.real))]
        scale = max(1.0, np.abs(ref).max())
        worst = max(worst, abs(lam1 - ref[0]) / scale, abs(lam2 - ref[1]) / scale)
        np.testing.assert_allclose(M @ f1, lam1 * f1, atol=1e-10 * scale)
        np.testing.assert_allclose(M @ f2, lam2 * f2, atol=1e-10 * scale)
        assert abs(f1a @ f1 - 1) <= 1e-10 and abs(f2a @ f2 - 1) <= 1e-10
        assert abs(f1a @ f2) <= 1e-10 and abs(f2a @ f1) <= 1e-10
        assert np.linalg.norm(f1) == pytest.approx(1.0, abs=1e-14)
        assert lam1.real >= lam2.real
    assert worst <= 1e-10


def test_eigenvector_phase_convention():
    e = dispersion(K_C, ModelParams(a=A_CRIT, b=0.2, c=0.5))
    for f in (e.f1, e.f2):
        first = f[np.flatnonzero(np.abs(f) > 0)[0]]
        assert first.imag == 0.0 and first.real > 0


def test_defective_matrix_detected():
    lam1, lam2, f1, f2, f1a, f2a = eig2(np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex))
    assert np.isnan(f1a).all()
    # find a collision point of the GSK symbol: the discriminant changes sign in k
    p = ModelParams(a=0.176, b=0.2)
    model = GSKModel(p)

    def disc(k):
        M = model.linear_symbol(k)
        return ((M[0, 0] - M[1, 1]) ** 2 + 4 * M[0, 1] * M[1, 0]).real

    from scipy.optimize import brentq

    ks = np.linspace(0, 1, 1001)
    vals = np.array([disc(k) for k in ks])
    i = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    k_star = brentq(disc, ks[i], ks[i + 1], xtol=1e-15)
    with pytest.raises(DefectiveMatrixError):
        dispersion(k_star, p)


def test_growth_max_examples():
    base = ModelParams(a=0.2412, b=0.2)
    assert abs(growth_max_over_k(0.2412, base)[1]) < 1e-3
    assert abs(growth_max_over_k(A_CRIT, base)[1]) < 1e-6
    assert growth_max_over_k(0.2412 + 0.02, base)[1] < 0
    assert growth_max_over_k(0.2412 - 0.02, base)[1] > 0
    with pytest.raises(ValueError):
        growth_max_over_k(0.1, base)


def test_critical_point_regression(critical):
    assert critical.a_crit == pytest.approx(0.2412, abs=5e-4)
    assert critical.a_crit == pytest.approx(A_CRIT, rel=1e-9)
    assert critical.k_c == pytest.approx(K_C, rel=1e-7)
    assert abs(critical.lambda_max) <= 1e-9
    assert critical.curvature < 0


def test_critical_point_band_stability(critical):
    ks = np.linspace(0, 40, 20001)
    ks = ks[np.abs(ks - critical.k_c) > critical.k_c / 10]
    assert np.all(growth_rate(ks, critical.params).real < 0)


def test_no_turing_for_equal_diffusion():
    with pytest.raises(NoTuringPointError):
        find_critical(ModelParams(a=1.0, b=0.2, d=1.0))


def test_homogeneous_instability_detected():
    # with weak differential diffusion the k = 0 mode loses stability first
    with pytest.raises(HomogeneousInstabilityError):
        find_critical(ModelParams(a=1.0, b=0.05, d=0.5))


def test_gl_coefficients_regression(coeffs):
    assert coeffs.alpha0.real == pytest.approx(ALPHA0, rel=1e-6)
    assert coeffs.alpha2.real == pytest.approx(ALPHA2, rel=1e-6)
    assert coeffs.alpha3.real == pytest.approx(ALPHA3, rel=1e-8)
    np.testing.assert_allclose(coeffs.nu0, NU0, rtol=1e-8)
    np.testing.assert_allclose(coeffs.nu2, NU2, rtol=1e-8)
    assert coeffs.alpha0.real > 0 and coeffs.alpha2.real > 0
    assert abs(coeffs.alpha0.imag) < 1e-12 and abs(coeffs.alpha3.imag) < 1e-12


def test_correction_solves(coeffs, critical):
    model = GSKModel(critical.params)
    f1 = coeffs.f1
    r0 = model.linear_symbol(0.0) @ coeffs.nu0 + 2 * model.b2_symbol(0.0, f1, np.conj(f1))
    r2 = model.linear_symbol(2 * K_C) @ coeffs.nu2 + model.b2_symbol(2 * K_C, f1, f1)
    assert np.abs(r0).max() <= 1e-10 and np.abs(r2).max() <= 1e-10
    assert coeffs.nu0_residual <= 1e-10 and coeffs.nu2_residual <= 1e-10


def test_alpha0_is_growth_per_detuning(critical, coeffs):
    eps2 = 1e-4
    lam = growth_rate(critical.k_c, critical.params.with_a(critical.a_crit - eps2)).real
    assert lam / eps2 == pytest.approx(coeffs.alpha0.real, rel=1e-3)


def test_alpha2_matches_curvature(critical, coeffs):
    assert coeffs.alpha2.real == pytest.approx(-critical.curvature / 2, rel=1e-6)


def test_richardson_step_halving(critical, coeffs):
    half = gl_coefficients(critical, step_scale=0.5)
    assert abs(half.alpha0 - coeffs.alpha0) <= 1e-6 * abs(coeffs.alpha0)
    assert abs(half.alpha2 - coeffs.alpha2) <= 1e-6 * abs(coeffs.alpha2)


def test_alpha3_bit_stable(critical, coeffs):
    again = gl_coefficients(critical)
    assert again.alpha3 == coeffs.alpha3


@pytest.mark.parametrize("theta", [0.3, 1.7, -2.5])
def test_alpha3_phase_invariance(critical, coeffs, theta):
    model = GSKModel(critical.params)
    rot = np.exp(1j * theta)
    # f1 -> e^{i theta} f1 and the biorthogonal adjoint -> e^{-i theta} f1_adj
    alpha3, nu0, nu2, _, _ = cubic_coefficient(model, critical.k_c, rot * coeffs.f1, coeffs.f1_adj / rot)
    assert abs(alpha3 - coeffs.alpha3) <= 1e-10 * abs(coeffs.alpha3)
    np.testing.assert_allclose(nu0, coeffs.nu0, atol=1e-12)
    np.testing.assert_allclose(nu2, rot**2 * coeffs.nu2, atol=1e-12)


def test_resonant_solve_detected():
    class Resonant(GSKModel):
        def linear_symbol(self, k):
            M = super().linear_symbol(k)
            if np.ndim(k) == 0 and k == 0.0:
                return np.zeros((2, 2), dtype=complex)
            return M

    p = ModelParams(a=A_CRIT, b=0.2)
    e = dispersion(K_C, p)
    with pytest.raises(ResonantSolveError):
        cubic_coefficient(Resonant(p), K_C, e.f1, e.f1_adj)
