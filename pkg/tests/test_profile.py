import numpy as np
import pytest
from scipy import optimize

from gkdv_stability import (DegenerateOrbit, NoPeriodicOrbit, Nonlinearity, WaveParameters,
                            conserved_quantities, find_turning_points, gradients,
                            reconstruct_profile, schaaf_check, time_of_flight)
from gkdv_stability.profile import energy_gap

from _params import make


def test_turning_points_kdv_match_bisection():
    tp = find_turning_points(make(1, 0.0, -0.1))
    g = lambda u: u ** 3 / 3 - u ** 2 / 2 + 0.1
    lo = optimize.bisect(g, 0.5, 0.9, xtol=1e-13)
    hi = optimize.bisect(g, 1.1, 1.5, xtol=1e-13)
    assert 0.56 < tp.u_minus < 0.57 and 1.32 < tp.u_plus < 1.34
    assert tp.u_minus == pytest.approx(lo, abs=1e-12)
    assert tp.u_plus == pytest.approx(hi, abs=1e-12)


@pytest.mark.parametrize("E", [1e-3, 0.05, 0.3, 2.0])
def test_turning_points_symmetric_for_odd_f(E):
    # above the central barrier V(0) = 0 the orbit encircles both wells
    tp = find_turning_points(make(2, 0.0, E))
    assert tp.u_minus == pytest.approx(-tp.u_plus, rel=1e-12)


def test_single_wells_of_odd_f_are_mirror_images():
    # V(-u; a) = V(u; -a) for odd f: the left well at a mirrors the right well at -a
    cubic = Nonlinearity.custom(f=lambda u: u ** 3, F=lambda u: u ** 4 / 4,
                                df=lambda u: 3 * u ** 2, d2f=lambda u: 6 * u,
                                d3f=lambda u: 6.0 + 0 * u)
    left = find_turning_points(WaveParameters(0.01, -0.1, 1.0, cubic, seed=-1.0))
    right = find_turning_points(make(2, -0.01, -0.1))
    assert left.u_minus == pytest.approx(-right.u_plus, rel=1e-12)
    assert left.u_plus == pytest.approx(-right.u_minus, rel=1e-12)


def test_well_bottom_is_degenerate():
    with pytest.raises(DegenerateOrbit):
        find_turning_points(make(1, 0.0, -1.0 / 6.0))


def test_below_well_and_above_separatrix_rejected():
    with pytest.raises(NoPeriodicOrbit):
        find_turning_points(make(1, 0.0, -0.2))
    with pytest.raises(NoPeriodicOrbit):
        find_turning_points(make(1, 0.0, 0.01))


def test_mass_vanishes_for_symmetric_orbit():
    cs = conserved_quantities(make(2, 0.0, 0.2))
    assert abs(cs.M) < 1e-10 * cs.T


def test_period_matches_time_of_flight(kdv):
    params, g, _ = kdv
    assert g.values.T == pytest.approx(time_of_flight(params), rel=1e-6)


def test_conserved_quantities_match_trapezoid_on_profile(kdv):
    # independent oracle: uniform samples of the periodic profile integrate
    # spectrally with the trapezoid rule
    params, g, prof = kdv
    u, ux = prof.u, prof.ux
    dx = g.values.T / prof.n
    F = params.nonlinearity.F(u)
    assert g.values.M == pytest.approx(np.sum(u) * dx, rel=1e-9)
    assert g.values.P == pytest.approx(np.sum(u ** 2) * dx, rel=1e-9)
    assert g.values.H == pytest.approx(np.sum(0.5 * ux ** 2 - F) * dx, rel=1e-8)
    assert g.values.K == pytest.approx(np.sum(ux ** 2) * dx, rel=1e-8)


@pytest.mark.parametrize("pae", [(1, 0.0, -0.1), (2, 0.0, -0.1), (5, 0.0, -0.05), (3, 0.02, -0.05)])
def test_action_identities(pae):
    g = gradients(make(*pae))
    v = g.values
    assert g["K_E"] == pytest.approx(v.T, rel=1e-5)
    assert g["K_c"] == pytest.approx(0.5 * v.P, rel=1e-5)
    assert abs(g["K_a"] - v.M) <= 1e-5 * max(abs(v.M), 1e-3 * v.T)
    p = g.params
    lin = p.E * g.grad("T") + p.a * g.grad("M") + 0.5 * p.c * g.grad("P") + g.grad("H")
    scale = (abs(p.E) * np.abs(g.grad("T")).max() + abs(p.a) * np.abs(g.grad("M")).max()
             + 0.5 * p.c * np.abs(g.grad("P")).max() + np.abs(g.grad("H")).max())
    assert np.abs(lin).max() <= 1e-5 * scale


def test_gradients_self_convergence(kdv):
    _, g, _ = kdv
    params = g.params
    # recompute with halved step caps; each partial must agree to 1e-4
    from gkdv_stability import StepPolicy
    base = StepPolicy()
    half = gradients(params, StepPolicy(rel_step=0.5 * base.rel_step,
                                        gap_fraction=0.5 * base.gap_fraction))
    scale = np.abs(g.matrix).max(axis=1, keepdims=True)
    assert np.all(np.abs(g.matrix - half.matrix) <= 1e-4 * np.maximum(np.abs(half.matrix), 1e-3 * scale))
    assert np.max(g.self_convergence) < 1e-4


def test_gradients_match_plain_finite_differences(kdv):
    _, g, _ = kdv
    params = g.params
    h = 1e-4
    for j, name in enumerate(("a", "E", "c")):
        up = conserved_quantities(params.shifted(j, h)).as_array()
        dn = conserved_quantities(params.shifted(j, -h)).as_array()
        fd = (up - dn) / (2 * h)
        np.testing.assert_allclose(g.matrix[:, j], fd, rtol=1e-5, atol=1e-7)


def test_T_E_positive_where_schaaf_guarantees():
    for pae in [(1, 0.0, -0.1), (2, 0.0, -0.2), (3, 0.0, -0.1)]:
        params = make(*pae)
        rep = schaaf_check(params)
        assert rep.holds and rep.guaranteed
        assert gradients(params)["T_E"] > 0


def test_schaaf_near_bottom_of_mkdv_well():
    params = make(2, 0.0, -0.25 + 1e-4)
    assert schaaf_check(params).holds


def test_schaaf_reports_violation_at_tangential_critical_point():
    # G = V' = x - x^2 + x^3/3 with x = u - 1: G' = (1 - x)^2 vanishes at x = 1
    # where G G'' = 0, so the critical-point condition fails
    x = lambda u: u - 1.0
    nl = Nonlinearity.custom(
        f=lambda u: u + x(u) - x(u) ** 2 + x(u) ** 3 / 3,
        F=lambda u: u ** 2 / 2 + x(u) ** 2 / 2 - x(u) ** 3 / 3 + x(u) ** 4 / 12,
        df=lambda u: 1 + (1 - x(u)) ** 2, d2f=lambda u: -2 * (1 - x(u)),
        d3f=lambda u: 2.0 + 0 * u)
    rep = schaaf_check(WaveParameters(0.0, 0.5, 1.0, nl, seed=1.0))
    assert not rep.critical_condition
    assert not rep.guaranteed
    assert rep.notes == "conditions violated"


def test_schaaf_no_guarantee_for_orbit_around_several_critical_points():
    rep = schaaf_check(make(2, 0.0, 0.1))
    assert not rep.single_well and not rep.guaranteed


def test_profile_energy_and_wronskians(kdv):
    params, _, prof = kdv
    assert np.max(prof.energy_residual()) <= 1e-8
    w = prof.wronskians()
    assert np.max(np.abs(w["E"] - 1.0)) <= 1e-5
    assert np.max(np.abs(w["a"] - prof.u)) <= 1e-5
    assert np.max(np.abs(w["c"] - 0.5 * prof.u ** 2)) <= 1e-5
    assert prof.closure_error() <= 1e-8


def test_variational_return_matches_finite_difference(kdv):
    params, _, prof = kdv
    h = 1e-5
    fd = (find_turning_points(params.replace(E=params.E + h)).u_minus
          - find_turning_points(params.replace(E=params.E - h)).u_minus) / (2 * h)
    assert prof.end_state[4] == pytest.approx(fd, rel=1e-6)


def test_profile_starts_at_minimum_and_is_periodic(kdv):
    params, g, prof = kdv
    tp = g.values.turning_points
    assert prof.u[0] == pytest.approx(tp.u_minus, abs=1e-13)
    assert prof.ux[0] == 0.0
    assert prof.u.max() == pytest.approx(tp.u_plus, abs=1e-6)
    assert prof.x[-1] < g.values.T


def test_energy_gap_positive_and_shrinks_near_separatrix():
    assert energy_gap(make(1, 0.0, -0.1)) > energy_gap(make(1, 0.0, -1e-3)) > 0
