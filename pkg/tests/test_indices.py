import numpy as np
import pytest

from gkdv_stability import (CrossCheckFailure, NotPowerLaw, Nonlinearity, WaveParameters,
                            classify, compute_indices, gradients, monodromy_derivatives,
                            rescale_to_unit_speed, solitary_limit_report)
from gkdv_stability.indices import Modulational, RealAxis, StabilityIndices
from gkdv_stability.monodromy import MonodromyDerivatives

from _params import at_fraction, make


def synthetic(tr2, tr3):
    return StabilityIndices(tr2=tr2, tr3=tr3, orientation_jacobian=-tr3 / 1.5,
                            delta=0.5 * tr2 ** 3 - 3 * tr3 ** 2, alt_forms={}, cross_check={})


def test_delta_is_discriminant_of_normal_form_cubic(kdv):
    _, g, _ = kdv
    idx = compute_indices(g)
    a, b, c, d = idx.tr3 / 3, -idx.tr2 / 2, 0.0, 1.0
    disc = 18 * a * b * c * d - 4 * b ** 3 * d + b ** 2 * c ** 2 - 4 * a * c ** 3 - 27 * a ** 2 * d ** 2
    assert idx.delta == pytest.approx(disc, rel=1e-12)


def test_trace_identities_against_variational_ode(kdv):
    _, g, prof = kdv
    d = monodromy_derivatives(prof, 3, 1e-13)
    idx = compute_indices(g, d)
    assert idx.cross_check["tr2_rel_err"] <= 1e-4
    assert idx.cross_check["tr3_rel_err"] <= 1e-4
    assert idx.cross_check["tr1_abs"] <= 1e-6
    assert idx.ode_traces == pytest.approx(d.traces)


def test_alternative_forms_agree(kdv):
    _, g, _ = kdv
    alt = compute_indices(g).alt_forms
    assert alt["hessian_K_rel_err"] <= 1e-6
    assert alt["mph_over_E_rel_err"] <= 1e-5
    assert alt["hessian_K_asymmetry"] <= 1e-6


def test_cross_check_failure_raised_on_disagreement(kdv):
    _, g, prof = kdv
    d = monodromy_derivatives(prof, 3, 1e-12)
    bad = MonodromyDerivatives(d.M0, d.M1, 1.1 * d.M2, d.M3)
    with pytest.raises(CrossCheckFailure):
        compute_indices(g, bad)


@pytest.mark.parametrize("E", [-0.16, -0.13, -0.1, -0.05, -0.01, -0.002])
def test_kdv_cnoidal_waves_have_positive_delta(E):
    idx = compute_indices(gradients(make(1, 0.0, E)))
    assert idx.delta > 0
    assert classify(idx).modulational is Modulational.STABLE_TRIPLE_IMAGINARY


def test_delta_vanishes_toward_stationary_solution():
    for p in (1, 5):
        rel = [abs(compute_indices(gradients(at_fraction(p, 0.0, s))).delta) for s in (0.1, 0.01)]
        scale = [compute_indices(gradients(at_fraction(p, 0.0, s))).scale ** 6 for s in (0.1, 0.01)]
        r0, r1 = rel[0] / scale[0], rel[1] / scale[1]
        # Delta / scale^6 is linear in the energy above the well bottom
        assert r1 < 0.2 * r0


def test_p5_long_period_is_modulationally_unstable(p5_long):
    _, g, _ = p5_long
    idx = compute_indices(g)
    assert idx.delta < 0
    assert idx.orientation_jacobian < 0
    cls = classify(idx)
    assert cls.modulational is Modulational.UNSTABLE_TWO_BRANCHES
    assert cls.real_axis is RealAxis.ODD_PERIODIC_COUNT


def test_classify_synthetic_cases():
    c = classify(synthetic(4.0, -1.0))
    assert (c.modulational, c.real_axis) == (Modulational.STABLE_TRIPLE_IMAGINARY,
                                             RealAxis.EVEN_PERIODIC_COUNT)
    c = classify(synthetic(1.0, 2.0))
    assert (c.modulational, c.real_axis) == (Modulational.UNSTABLE_TWO_BRANCHES,
                                             RealAxis.ODD_PERIODIC_COUNT)
    c = classify(synthetic(5.0, 1e-9))
    assert c.modulational is Modulational.DEGENERATE
    assert any("Jordan structure change" in n for n in c.notes)
    c = classify(synthetic(-2.0, -1.0))
    assert any("tr2 < 0" in n for n in c.notes)


def test_rescale_identity_and_example():
    p1 = make(1, 0.03, -0.1, 1.0)
    assert rescale_to_unit_speed(p1) == p1
    r = rescale_to_unit_speed(make(1, 0.0, -0.1, 4.0))
    assert (r.c, r.a) == (1.0, 0.0)
    assert r.E == pytest.approx(-0.1 / 64, rel=1e-15)


def test_rescale_rejects_custom_and_zero_speed():
    nl = Nonlinearity.custom(f=lambda u: u ** 2, F=lambda u: u ** 3 / 3)
    with pytest.raises(NotPowerLaw):
        rescale_to_unit_speed(WaveParameters(0.0, -0.1, 2.0, nl, seed=1.0))
    with pytest.raises(ValueError):
        rescale_to_unit_speed(make(1, 0.0, -0.1, 0.0))


@pytest.mark.parametrize("p,a,s,c", [(1, 0.02, 0.5, 2.5), (2, 0.0, 0.4, 0.6), (5, 0.01, 0.3, 1.7)])
def test_rescaling_preserves_signs_and_scales_period(p, a, s, c):
    params = at_fraction(p, a, s, c)
    unit = rescale_to_unit_speed(params)
    g, gu = gradients(params), gradients(unit)
    i, iu = compute_indices(g), compute_indices(gu)
    assert np.sign(i.delta) == np.sign(iu.delta)
    assert np.sign(i.orientation_jacobian) == np.sign(iu.orientation_jacobian)
    # u(x) = c^(1/p) u'(c^(1/2) x): T = T' / sqrt(c), M = c^(1/p - 1/2) M'
    assert g.values.T == pytest.approx(gu.values.T / np.sqrt(c), rel=1e-10)
    assert g.values.M == pytest.approx(c ** (1 / p - 0.5) * gu.values.M, rel=1e-10)


@pytest.mark.parametrize("p,sign", [(1, 1), (5, -1)])
def test_solitary_limit_orientation_sign(p, sign):
    rep = solitary_limit_report(p)
    assert rep.stabilized
    assert np.sign(rep.final.orientation_jacobian) == sign
    assert np.sign(rep.final.delta) == np.sign(4 - p)


@pytest.mark.parametrize("a", [0.01, 0.005])
def test_kdv_mass_decreases_in_a_on_zero_energy(a):
    assert gradients(make(1, a, 0.0))["M_a"] < 0
