import numpy as np
import pytest

from gkdv_stability import (DegenerateCubic, TruncationNotConverged, compute_indices,
                            hill_spectrum, normal_form_roots, null_basis, real_axis_scan,
                            trace_bands)
from gkdv_stability.spectrum import hill_matrix, kappa_grid

from conftest import wave_bundle
from test_indices import synthetic


# ---------------------------------------------------------------- normal form

def test_cubic_with_vanishing_tr2():
    nf = normal_form_roots(synthetic(0.0, 3.0))
    expected = [-1.0, np.exp(-1j * np.pi / 3), np.exp(1j * np.pi / 3)]
    np.testing.assert_allclose(nf.y, expected, atol=1e-14)
    assert nf.n_real == 1 and nf.consistent


def test_root_count_follows_discriminant():
    pos = normal_form_roots(synthetic(4.0, -1.0))
    neg = normal_form_roots(synthetic(1.0, 2.0))
    assert pos.delta > 0 and pos.n_real == 3
    assert neg.delta < 0 and neg.n_real == 1
    assert neg.y[1] == pytest.approx(np.conj(neg.y[2]))


def test_degenerate_cubic_rejected():
    with pytest.raises(DegenerateCubic):
        normal_form_roots(synthetic(2.0, 0.0))


# ----------------------------------------------------------------- band tracing

@pytest.fixture(scope="module")
def kdv_bands(kdv):
    _, g, prof = kdv
    idx = compute_indices(g)
    return idx, trace_bands(prof, idx, 0.2, kappas=kappa_grid(0.2, 12))


@pytest.fixture(scope="module")
def p5_bands(p5_long):
    _, g, prof = p5_long
    idx = compute_indices(g)
    return idx, trace_bands(prof, idx, 0.2, kappas=kappa_grid(0.2, 16))


def test_stable_bands_stay_on_imaginary_axis(kdv_bands):
    _, bands = kdv_bands
    assert len(bands) == 3
    for branch in bands:
        for pt in branch:
            assert abs(pt.mu.real) <= 1e-7


def test_bands_leave_origin_along_normal_form_slopes(kdv_bands):
    idx, bands = kdv_bands
    nf = normal_form_roots(idx)
    for j, branch in enumerate(bands):
        first = branch[0]
        assert first.mu / first.kappa == pytest.approx(nf.slopes[j], rel=0.05)
        # mu(kappa) -> 0 as kappa -> 0, linearly
        assert abs(first.mu) <= 2 * abs(nf.slopes[j]) * first.kappa


def test_unstable_bands_have_linear_real_parts(p5_bands):
    idx, bands = p5_bands
    nf = normal_form_roots(idx)
    assert nf.n_real == 1
    for j in (1, 2):
        pts = [b for b in bands[j] if b.kappa <= 0.05]
        k = np.array([b.kappa for b in pts])
        re = np.array([b.mu.real for b in pts])
        slope = np.polyfit(k, re, 1)[0]
        assert abs(slope) > 0
        assert slope == pytest.approx(nf.slopes[j].real, rel=0.05)
    assert all(abs(b.mu.real) <= 1e-6 for b in bands[0])


# ------------------------------------------------------------------------ Hill

def test_hill_origin_cluster(kdv):
    _, _, prof = kdv
    h = hill_spectrum(prof, 0.0, 128)
    assert np.max(np.abs(h.near_origin)) <= 1e-6


@pytest.mark.parametrize("gamma", [0.05, 0.1, 0.2])
def test_hill_agrees_with_band_points(kdv, gamma):
    _, g, prof = kdv
    idx = compute_indices(g)
    h = hill_spectrum(prof, gamma, 128)
    bands = trace_bands(prof, idx, gamma, kappas=kappa_grid(gamma, 8))
    for branch in bands:
        mu = branch[-1].mu
        assert branch[-1].kappa == pytest.approx(gamma)
        assert np.min(np.abs(h.eigenvalues - mu)) <= 5e-3 * abs(mu)


def test_small_gamma_hill_matches_normal_form(p5_long):
    _, g, prof = p5_long
    nf = normal_form_roots(compute_indices(g))
    gamma = 0.01
    h = hill_spectrum(prof, gamma, 128)
    for s in nf.slopes:
        pred = s * gamma
        assert np.min(np.abs(h.near_origin - pred)) <= 0.05 * abs(pred)


def test_hill_conjugate_symmetry(kdv):
    _, _, prof = kdv
    plus = hill_spectrum(prof, 0.13, 64, check=False).eigenvalues
    minus = np.conj(hill_spectrum(prof, -0.13, 64, check=False).eigenvalues)
    # eigenvalues are mostly imaginary with roundoff real parts, so compare as
    # sets by nearest neighbour rather than by sorting
    dist = [np.min(np.abs(minus - z)) for z in plus]
    assert max(dist) <= 1e-12 * np.abs(plus).max()


def test_hill_matrix_constant_coefficients_is_diagonal():
    # at the well bottom f'(u) is constant: modes decouple
    from types import SimpleNamespace
    from _params import make
    params = make(1, 0.0, 0.0)
    n = 256
    stub = SimpleNamespace(params=params, T=2 * np.pi, n=n,
                           evaluator=lambda x: np.vstack([np.full_like(x, 0.4), 0 * x]))
    A, _ = hill_matrix(stub, 0.0, 8)
    assert np.max(np.abs(A - np.diag(np.diag(A)))) <= 1e-12
    k = np.arange(-8, 9)
    np.testing.assert_allclose(np.diag(A), 1j * k * (k ** 2 + 1.0 - 0.8), atol=1e-12)


def test_hill_truncation_check_fires():
    _, _, prof = wave_bundle(5, 1e-4, -1e-6)
    with pytest.raises(TruncationNotConverged):
        hill_spectrum(prof, 0.1, 32, tol=1e-10)


# ------------------------------------------------------------------- real axis

def test_real_axis_scan_kdv(kdv):
    _, g, prof = kdv
    idx = compute_indices(g)
    scan = real_axis_scan(prof, idx.tr3)
    assert 0.0 in scan.periodic
    assert scan.n_antiperiodic_positive % 2 == 0
    assert scan.n_periodic_positive % 2 == 0  # tr3 < 0


def test_real_axis_scan_p5_long_period(p5_long):
    _, g, prof = p5_long
    idx = compute_indices(g)
    assert idx.tr3 > 0
    scan = real_axis_scan(prof, idx.tr3)
    assert 0.0 in scan.periodic
    assert scan.n_periodic_positive == 1
    assert scan.n_antiperiodic_positive % 2 == 0


# ------------------------------------------------------------------ null basis

@pytest.mark.parametrize("pae", [(1, 0.0, -0.1), (2, 0.0, -0.1), (5, 0.0, -0.05)])
def test_null_basis_chain(pae):
    _, g, prof = wave_bundle(*pae)
    nb = null_basis(prof, g)
    assert nb.residuals["phi0"] <= 1e-5
    assert nb.residuals["phi1"] <= 1e-5
    assert nb.residuals["phi2_chain"] <= 1e-4
    assert max(nb.periodicity.values()) <= 1e-6
    if nb.inner_rel_err is not None:
        assert nb.inner_rel_err <= 1e-3
