from types import SimpleNamespace

import numpy as np
import pytest
from scipy import linalg

from gkdv_stability import (Monodromy, closed_form_m0, coefficient_matrix, evans,
                            integrate_monodromy, monodromy_derivatives)
from gkdv_stability.monodromy import (evans_direct, floquet_multipliers, jordan_multiplicities,
                                      monodromy_batch, monodromy_with_derivative)

from _params import make


def constant_stub(p=1, u_star=0.7, c=1.0, T=3.0):
    """Profile stand-in for the constant solution u = u*."""
    params = make(p, 0.0, 0.0, c)
    return SimpleNamespace(params=params, T=T,
                           evaluator=lambda x: np.array([u_star, 0.0]))


@pytest.mark.parametrize("x_frac,mu", [(0.0, 1.0), (0.3, 0.2 + 0.5j), (0.77, -2j), (1.0, 0.0)])
def test_coefficient_matrix_is_traceless(kdv, x_frac, mu):
    _, _, prof = kdv
    H = coefficient_matrix(x_frac * prof.T, mu, prof)
    assert np.trace(H) == 0


def test_coefficient_matrix_at_turning_point(kdv):
    _, _, prof = kdv
    H = coefficient_matrix(0.0, 1.0, prof)
    assert H[2, 0] == -1.0
    u_minus = prof.turning_points.u_minus
    assert H[2, 1] == pytest.approx(1.0 - 2 * u_minus, abs=1e-13)


def test_constant_solution_gives_constant_companion_matrix():
    stub = constant_stub()
    H0 = coefficient_matrix(0.0, 0.0, stub)
    H1 = coefficient_matrix(2.5, 0.0, stub)
    np.testing.assert_array_equal(H0, H1)
    expected = np.array([[0, 1, 0], [0, 0, 1], [0, 1.0 - 2 * 0.7, 0]])
    np.testing.assert_allclose(H0, expected)


def test_constant_solution_monodromy_equals_matrix_exponential():
    stub = constant_stub()
    for mu in (0.0, 0.4, 0.3 - 0.8j):
        M = integrate_monodromy(stub, mu, 1e-12).matrix
        ref = linalg.expm(coefficient_matrix(0.0, mu, stub) * stub.T)
        np.testing.assert_allclose(M, ref, rtol=1e-9, atol=1e-10)


@pytest.mark.parametrize("mu", [0.0, 0.7, -0.7, 1.5j, -0.4 + 0.9j, 2.0])
def test_det_is_one(kdv, mu):
    _, _, prof = kdv
    m = integrate_monodromy(prof, mu, 1e-12)
    assert m.det_residual <= 1e-8


def test_trace_at_zero_is_three(kdv):
    _, _, prof = kdv
    assert integrate_monodromy(prof, 0.0, 1e-13, check_det=False).trace == pytest.approx(3.0, abs=1e-7)


def test_tol_below_double_precision_rejected(kdv):
    with pytest.raises(ValueError):
        integrate_monodromy(kdv[2], 0.1, 1e-15)


def test_conjugate_symmetry(kdv):
    _, _, prof = kdv
    mu = 0.3 + 0.45j
    M = integrate_monodromy(prof, mu, 1e-12).matrix
    Mc = integrate_monodromy(prof, np.conj(mu), 1e-12).matrix
    np.testing.assert_allclose(Mc, np.conj(M), rtol=1e-9, atol=1e-10)


def test_mu_derivative_matches_finite_difference(kdv):
    _, _, prof = kdv
    mu, h = 0.2 + 0.1j, 1e-4
    _, Mmu = monodromy_with_derivative(prof, mu, 1e-12)
    fd = (integrate_monodromy(prof, mu + h, 1e-12).matrix
          - integrate_monodromy(prof, mu - h, 1e-12).matrix) / (2 * h)
    np.testing.assert_allclose(Mmu, fd, rtol=1e-6, atol=1e-7)


def test_derivatives_at_zero_match_finite_differences_of_trace(kdv):
    _, _, prof = kdv
    d = monodromy_derivatives(prof, 3, 1e-13)
    h = 0.02
    a = {k: integrate_monodromy(prof, k * h, 1e-13, check_det=False).trace.real
         for k in (-2, -1, 0, 1, 2)}
    fd1 = (a[1] - a[-1]) / (2 * h)
    fd2 = (a[1] - 2 * a[0] + a[-1]) / h ** 2
    fd3 = (a[2] - 2 * a[1] + 2 * a[-1] - a[-2]) / (2 * h ** 3)
    assert abs(d.tr1) <= 1e-6
    # odd part of a(mu): tr1 h + tr3 h^3 / 6 + O(h^5)
    assert fd1 * h == pytest.approx(d.tr1 * h + d.tr3 * h ** 3 / 6, rel=1e-3)
    assert d.tr2 == pytest.approx(fd2, rel=1e-3)
    assert d.tr3 == pytest.approx(fd3, rel=1e-2)


def test_evans_of_identity():
    mono = Monodromy.synthetic(0.0, np.eye(3))
    for lam in (0.0, 1.0, 2.0, -1.5 + 0.5j, 1j):
        assert evans(mono, mono, lam) == pytest.approx(-(lam - 1) ** 3, abs=1e-14)


def test_evans_trace_formula_matches_determinant(kdv):
    _, _, prof = kdv
    mu = 0.25 - 0.4j
    mp = integrate_monodromy(prof, mu, 1e-12)
    mn = integrate_monodromy(prof, -mu, 1e-12)
    for lam in (1.0, -1.0, np.exp(0.7j), 2.0 + 1j):
        assert evans(mp, mn, lam) == pytest.approx(evans_direct(mp.matrix, lam), rel=1e-8, abs=1e-9)


def test_evans_vanishes_at_origin(kdv):
    _, _, prof = kdv
    m0 = integrate_monodromy(prof, 0.0, 1e-13, check_det=False)
    assert abs(evans(m0, m0, 1.0)) <= 1e-7


@pytest.mark.parametrize("mu", [0.1, 0.5, 1.2])
def test_evans_is_odd_on_real_axis(kdv, mu):
    _, _, prof = kdv
    mp = integrate_monodromy(prof, mu, 1e-13, check_det=False)
    mn = integrate_monodromy(prof, -mu, 1e-13, check_det=False)
    assert abs(evans(mp, mn, 1.0) + evans(mn, mp, 1.0)) <= 1e-7


@pytest.mark.parametrize("omega", [0.05, 0.3, 0.9, 2.0])
def test_stable_wave_has_unit_multiplier_on_imaginary_axis(kdv, omega):
    # the KdV cnoidal spectrum covers the imaginary axis
    _, _, prof = kdv
    lam = floquet_multipliers(integrate_monodromy(prof, 1j * omega, 1e-12).matrix)
    assert np.min(np.abs(np.abs(lam) - 1.0)) <= 1e-6


def test_closed_form_m0_matches_integration(kdv):
    _, g, prof = kdv
    cf = closed_form_m0(prof, g)
    M0 = integrate_monodromy(prof, 0.0, 1e-13, check_det=False).matrix
    assert np.max(np.abs(cf.M0 - M0)) <= 1e-6
    assert cf.det_U00 == pytest.approx(-1.0, abs=1e-7)


def test_jordan_structure_and_kernel(kdv):
    _, g, prof = kdv
    cf = closed_form_m0(prof, g)
    assert cf.jordan == (3, 2)
    assert jordan_multiplicities(integrate_monodromy(prof, 0.0, 1e-13, check_det=False).matrix) == (3, 2)
    # the kernel columns (1,0,0) and (0,T_E,-T_a) are annihilated by N - I
    resid = (cf.N - np.eye(3)) @ cf.kernel_basis
    assert np.max(np.abs(resid)) <= 1e-8 * max(1.0, np.abs(cf.N).max())
    np.testing.assert_allclose(cf.kernel_basis[:, 1], [0.0, g["T_E"], -g["T_a"]])


def test_jordan_multiplicities_on_known_matrices():
    J = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert jordan_multiplicities(J) == (3, 2)
    assert jordan_multiplicities(np.eye(3)) == (3, 3)
    assert jordan_multiplicities(np.diag([1.0, 2.0, 0.5])) == (1, 1)
    P = np.array([[2.0, 1.0, 0.0], [1.0, 1.0, 3.0], [0.0, 1.0, 1.0]])
    assert jordan_multiplicities(P @ J @ np.linalg.inv(P)) == (3, 2)


def test_batch_agrees_with_adaptive(kdv):
    _, _, prof = kdv
    mus = [0.1, 0.6, -0.3]
    batch = monodromy_batch(prof, mus, n_steps=4000)
    for mu, Mb in zip(mus, batch):
        np.testing.assert_allclose(Mb, integrate_monodromy(prof, mu, 1e-12).matrix,
                                   rtol=1e-7, atol=1e-8)
