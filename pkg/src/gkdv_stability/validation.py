"""Invariant suite for a single wave: every computable identity, with its tolerance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import GKdVError
from .indices import compute_indices
from .monodromy import closed_form_m0, evans, integrate_monodromy, monodromy_derivatives
from .nonlinearity import WaveParameters
from .profile import (find_turning_points, gradients, reconstruct_profile, schaaf_check,
                      time_of_flight)
from .spectrum import hill_spectrum, null_basis, real_axis_scan, trace_bands

__all__ = ["Check", "ValidationResult", "run_invariant_suite", "gradient_identity_errors",
           "jacobian_relation_errors"]


@dataclass(frozen=True)
class Check:
    name: str
    value: Optional[float]
    tolerance: Optional[float]
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


@dataclass
class ValidationResult:
    params: WaveParameters
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, tolerance, detail=""):
        value = None if value is None else float(value)
        ok = value is not None and np.isfinite(value) and value <= tolerance
        self.checks.append(Check(name, value, tolerance, bool(ok), detail))

    def add_flag(self, name, ok, detail=""):
        self.checks.append(Check(name, None, None, bool(ok), detail))

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]


def _rel(x, ref):
    return abs(x - ref) / max(abs(ref), np.finfo(float).tiny)


def gradient_identity_errors(g) -> dict:
    """Relative errors of the action-gradient and linear gradient identities."""
    p = g.params
    v = g.values
    out = {
        "K_E_equals_T": _rel(g["K_E"], v.T),
        "K_a_equals_M": abs(g["K_a"] - v.M) / max(abs(v.M), abs(g["K_a"]), v.T * 1e-3),
        "K_c_equals_half_P": _rel(g["K_c"], 0.5 * v.P),
    }
    terms = np.vstack([p.E * g.grad("T"), p.a * g.grad("M"), 0.5 * p.c * g.grad("P"), g.grad("H")])
    # each component is scaled by the sizes of the four gradient vectors, so
    # components that vanish by symmetry are not compared noise against noise
    scale = float(np.sum(np.max(np.abs(terms), axis=1)))
    out["linear_relation"] = float(np.max(np.abs(terms.sum(axis=0)))) / scale
    return out


def _jac2_scale(g, f, h, x, y):
    # natural size of {f, h}: product of the gradient norms
    return float(np.max(np.abs(g.grad(f))) * np.max(np.abs(g.grad(h))))


def jacobian_relation_errors(g) -> dict:
    """Relative errors of the three 2x2 Jacobian relations.

    The error is relative to the larger side, floored at 1e-3 of the natural
    size of the Jacobians (product of gradient norms) so that relations whose
    two sides vanish by symmetry are not compared noise against noise.
    """
    pairs = {
        "MP_aE_vs_TM_ac": ((1.0, "M", "P", "a", "E"), (-2.0, "T", "M", "a", "c")),
        "TM_Ec_vs_TP_aE": ((1.0, "T", "M", "E", "c"), (-0.5, "T", "P", "a", "E")),
        "TP_ac_vs_MP_Ec": ((1.0, "T", "P", "a", "c"), (1.0, "M", "P", "E", "c")),
    }
    out = {}
    for name, (lhs, rhs) in pairs.items():
        x = lhs[0] * g.jac2(*lhs[1:])
        y = rhs[0] * g.jac2(*rhs[1:])
        scale = max(abs(x), abs(y), abs(lhs[0]) * _jac2_scale(g, *lhs[1:]) * 1e-3,
                    abs(rhs[0]) * _jac2_scale(g, *rhs[1:]) * 1e-3, np.finfo(float).tiny)
        out[name] = abs(x - y) / scale
    return out


def run_invariant_suite(params: WaveParameters, tol: float = 1e-13, nodes: int = 512,
                        hill_N: int = 128, kappa: float = 0.1,
                        spectral: bool = True) -> ValidationResult:
    """Evaluate every invariant for one parameter set.

    A computation error inside a group of checks is recorded as a failed check
    named after the group; it does not abort the suite.
    """
    res = ValidationResult(params)

    def guarded(group: str, fn: Callable[[], None]):
        try:
            fn()
        except GKdVError as exc:
            res.add_flag(group, False, f"{type(exc).__name__}: {exc}")

    tp = find_turning_points(params)
    lvl = max(abs(params.V(tp.u_minus) - params.E), abs(params.V(tp.u_plus) - params.E))
    res.add("turning_points.level", lvl / max(1.0, abs(params.E)), 1e-10)
    res.add_flag("turning_points.order", tp.u_minus < tp.u_plus)

    g = gradients(params)
    v = g.values
    res.add("conserved.error", max(v.errors.values()), 1e-10)
    res.add_flag("conserved.positive", v.T > 0 and v.K > 0, f"T={v.T!r}, K={v.K!r}")
    res.add("conserved.period_time_of_flight", _rel(time_of_flight(params), v.T), 1e-6)
    for name, err in gradient_identity_errors(g).items():
        res.add(f"gradients.{name}", err, 1e-5)
    for name, err in jacobian_relation_errors(g).items():
        res.add(f"gradients.jacobian_{name}", err, 1e-4)

    prof = reconstruct_profile(params, nodes, with_variational=True, conserved=v)
    res.add("profile.energy_residual", float(np.max(prof.energy_residual())),
            1e-8 * max(1.0, abs(params.E)))
    res.add("profile.closure", prof.closure_error(), 1e-7)
    w = prof.wronskians()
    res.add("profile.wronskian_E", float(np.max(np.abs(w["E"] - 1.0))), 1e-5)
    res.add("profile.wronskian_a", float(np.max(np.abs(w["a"] - prof.u))), 1e-5)
    res.add("profile.wronskian_c", float(np.max(np.abs(w["c"] - 0.5 * prof.u ** 2))), 1e-5)
    res.add("profile.variational_return",
            abs(prof.end_state[4] - prof.du_minus["E"]) / max(1.0, abs(prof.du_minus["E"])), 1e-6)

    sch = schaaf_check(params)
    if sch.guaranteed:
        res.add_flag("profile.schaaf_T_E_positive", g["T_E"] > 0, sch.notes)

    def monodromy_group():
        dets = []
        for mu in (0.5, -0.5, 0.5j, 0.3 + 0.2j):
            m = integrate_monodromy(prof, mu, tol, check_det=False)
            # roundoff in det grows like |M|^2; compare in those units
            dets.append(m.det_residual / max(1.0, np.linalg.norm(m.matrix, 2)) ** 2)
        res.add("monodromy.det_scaled", max(dets), 1e-8)
        m0 = integrate_monodromy(prof, 0.0, tol, check_det=False)
        res.add("monodromy.a0", abs(m0.trace - 3.0), 1e-7)
        d = monodromy_derivatives(prof, 3, tol)
        res.add("monodromy.tr1", abs(d.tr1), 1e-6)
        idx = compute_indices(g, d)
        res.add("monodromy.tr2_identity", idx.cross_check["tr2_rel_err"], 1e-4)
        res.add("monodromy.tr3_identity", idx.cross_check["tr3_rel_err"], 1e-4)
        cf = closed_form_m0(prof, g)
        res.add("monodromy.closed_form_M0", float(np.max(np.abs(cf.M0 - m0.matrix))), 1e-6)
        res.add("monodromy.det_U00", abs(cf.det_U00 + 1.0), 1e-7)
        res.add_flag("monodromy.jordan_closed_form", cf.jordan == (3, 2), str(cf.jordan))
        res.add("evans.D_0_1", abs(evans(m0, m0, 1.0)), 1e-7)
        mp = integrate_monodromy(prof, 0.5, tol, check_det=False)
        mn = integrate_monodromy(prof, -0.5, tol, check_det=False)
        odd = abs(evans(mp, mn, 1.0) + evans(mn, mp, 1.0))
        res.add("evans.odd_on_real_axis", odd / max(1.0, abs(mp.trace)), 1e-7)

    guarded("monodromy", monodromy_group)

    idx = compute_indices(g)
    res.add("indices.alt_hessian_K", idx.alt_forms["hessian_K_rel_err"], 1e-3)
    if idx.alt_forms["mph_over_E_rel_err"] is not None:
        res.add("indices.alt_mph_over_E", idx.alt_forms["mph_over_E_rel_err"], 1e-3)

    if not spectral:
        return res

    def null_group():
        nb = null_basis(prof, g)
        res.add("spectrum.null_phi0", nb.residuals["phi0"], 1e-5)
        res.add("spectrum.null_phi1", nb.residuals["phi1"], 1e-5)
        res.add("spectrum.null_chain", nb.residuals["phi2_chain"], 1e-4)
        res.add("spectrum.null_periodicity", max(nb.periodicity.values()), 1e-6)
        if nb.inner_rel_err is not None:
            res.add("spectrum.null_inner_product", nb.inner_rel_err, 1e-3)

    def hill_group():
        h0 = hill_spectrum(prof, 0.0, hill_N)
        res.add("spectrum.hill_origin_cluster", float(np.max(np.abs(h0.near_origin))), 1e-6)
        h = hill_spectrum(prof, kappa, hill_N)
        bands = trace_bands(prof, idx, kappa, kappas=[kappa / 4, kappa / 2, kappa])
        worst = 0.0
        for b in bands:
            mu = b[-1].mu
            worst = max(worst, float(np.min(np.abs(h.eigenvalues - mu))) / abs(mu))
        res.add("spectrum.hill_vs_band", worst, 5e-3)

    def real_group():
        scan = real_axis_scan(prof, idx.tr3)
        res.add_flag("spectrum.real_axis_zero_root", 0.0 in scan.periodic)
        res.add_flag("spectrum.real_axis_antiperiodic_even", scan.n_antiperiodic_positive % 2 == 0,
                     f"{scan.n_antiperiodic_positive} roots")
        res.add_flag("spectrum.real_axis_parity",
                     (scan.n_periodic_positive % 2 == 1) == (idx.tr3 > 0),
                     f"{scan.n_periodic_positive} positive periodic roots, tr3={idx.tr3!r}")

    guarded("spectrum.null_basis", null_group)
    guarded("spectrum.hill", hill_group)
    guarded("spectrum.real_axis", real_group)
    return res
