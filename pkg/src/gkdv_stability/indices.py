"""Orientation index, modulational discriminant and stability classification.

Both indices are built from Jacobians of the conserved quantities:

* ``tr M_mumu(0)  = {T, P}_{E, c} + 2 {M, P}_{a, E}``
* ``tr M_mumumu(0) = -3/2 {T, M, P}_{a, E, c}``
* ``Delta = tr2**3 / 2 - 3 tr3**2``

A positive ``tr3`` (negative orientation Jacobian) forces an odd number of
positive real periodic eigenvalues.  ``Delta < 0`` means two of the three
spectral curves through the origin leave the imaginary axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import (CrossCheckFailure, GKdVError, NotPowerLaw, PathLeavesAdmissibleRegion)
from .monodromy import MonodromyDerivatives
from .nonlinearity import Nonlinearity, WaveParameters
from .profile import GradientSet, StepPolicy, gradients

__all__ = [
    "Modulational", "RealAxis", "Classification", "StabilityIndices", "compute_indices",
    "classify", "rescale_to_unit_speed", "solitary_limit_report", "SolitaryLimitReport",
    "SolitaryStep", "degeneracy_scale", "DEGENERACY_TOL",
]

DEGENERACY_TOL = 1e-6
CROSS_CHECK_WARN = 1e-3
CROSS_CHECK_FAIL = 1e-2


class Modulational(str, enum.Enum):
    STABLE_TRIPLE_IMAGINARY = "StableTripleImaginary"
    UNSTABLE_TWO_BRANCHES = "UnstableTwoBranches"
    DEGENERATE = "Degenerate"


class RealAxis(str, enum.Enum):
    ODD_PERIODIC_COUNT = "OddPeriodicCount"
    EVEN_PERIODIC_COUNT = "EvenPeriodicCount"


@dataclass(frozen=True)
class Classification:
    modulational: Modulational
    real_axis: RealAxis
    notes: Tuple[str, ...] = ()
    thresholds: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"modulational": self.modulational.value, "real_axis": self.real_axis.value,
                "notes": list(self.notes), "thresholds": dict(self.thresholds)}


def degeneracy_scale(tr2: float, tr3: float) -> float:
    """max(|tr2|^(1/2), |tr3|^(1/3), 1): the natural size of the normal-form cubic."""
    return max(math.sqrt(abs(tr2)), abs(tr3) ** (1.0 / 3.0), 1.0)


@dataclass(frozen=True)
class StabilityIndices:
    """Trace invariants of M(0) and the derived indices.

    ``alt_forms`` holds the two alternative expressions for ``-3 {T, M, P}``
    (six times the determinant of the Hessian of K, and ``(3/E) {M, P, H}``)
    together with their relative disagreement from the Jacobian form.
    ``cross_check`` holds relative errors against variational-ODE traces when
    they were supplied.
    """

    tr2: float
    tr3: float
    orientation_jacobian: float
    delta: float
    alt_forms: Dict[str, Optional[float]]
    cross_check: Dict[str, float]
    ode_traces: Optional[Tuple[float, float, float]] = None

    @property
    def scale(self) -> float:
        return degeneracy_scale(self.tr2, self.tr3)

    @property
    def tr3_degenerate(self) -> bool:
        return abs(self.tr3) < DEGENERACY_TOL * self.scale ** 3

    @property
    def delta_degenerate(self) -> bool:
        return abs(self.delta) < DEGENERACY_TOL * self.scale ** 6

    def as_dict(self) -> dict:
        return {
            "tr2": self.tr2, "tr3": self.tr3,
            "orientation_jacobian": self.orientation_jacobian, "delta": self.delta,
            "alt_forms": dict(self.alt_forms), "cross_check": dict(self.cross_check),
            "ode_traces": list(self.ode_traces) if self.ode_traces is not None else None,
        }


def _rel(x: float, ref: float) -> float:
    return abs(x - ref) / max(abs(ref), np.finfo(float).tiny)


def compute_indices(grads: GradientSet,
                    derivs: Optional[MonodromyDerivatives] = None) -> StabilityIndices:
    """Indices from the conserved-quantity Jacobians, optionally cross-checked.

    Raises
    ------
    CrossCheckFailure
        The Jacobian traces and the variational-ODE traces disagree by more than
        1e-2 relative.
    """
    tr2 = grads.jac2("T", "P", "E", "c") + 2.0 * grads.jac2("M", "P", "a", "E")
    J = grads.jac3("T", "M", "P")
    tr3 = -1.5 * J
    delta = 0.5 * tr2 ** 3 - 3.0 * tr3 ** 2

    # gradient of K is (M, T, P/2); symmetrize the finite-difference Hessian
    hess = np.vstack([grads.grad("M"), grads.grad("T"), 0.5 * grads.grad("P")])
    hess = 0.5 * (hess + hess.T)
    hess_form = 6.0 * float(np.linalg.det(hess))
    ref = -3.0 * J
    alt: Dict[str, Optional[float]] = {
        "hessian_K": hess_form,
        "hessian_K_rel_err": _rel(hess_form, ref),
        "hessian_K_asymmetry": float(np.max(np.abs(
            np.vstack([grads.grad("M"), grads.grad("T"), 0.5 * grads.grad("P")]) - hess))),
    }
    E = grads.params.E
    if abs(E) >= 1e-8:
        mph = 3.0 / E * grads.jac3("M", "P", "H")
        alt["mph_over_E"] = mph
        alt["mph_over_E_rel_err"] = _rel(mph, ref)
    else:
        alt["mph_over_E"] = None
        alt["mph_over_E_rel_err"] = None

    cross: Dict[str, float] = {}
    ode = None
    if derivs is not None:
        ode = derivs.traces
        cross["tr2_rel_err"] = _rel(derivs.tr2, tr2)
        cross["tr3_rel_err"] = _rel(derivs.tr3, tr3)
        cross["tr1_abs"] = abs(derivs.tr1)
        worst = max(cross["tr2_rel_err"], cross["tr3_rel_err"])
        if worst > CROSS_CHECK_FAIL:
            raise CrossCheckFailure(
                f"trace identities disagree with the variational ODE: tr2 {tr2:.6g} vs "
                f"{derivs.tr2:.6g}, tr3 {tr3:.6g} vs {derivs.tr3:.6g}")
    return StabilityIndices(tr2=tr2, tr3=tr3, orientation_jacobian=J, delta=delta,
                            alt_forms=alt, cross_check=cross, ode_traces=ode)


def classify(idx: StabilityIndices) -> Classification:
    """Map the indices onto the spectral picture near the origin.

    ``Delta > 0`` with ``tr3 != 0`` gives three curves on the imaginary axis,
    ``Delta < 0`` gives two curves leaving it.  ``tr3 > 0`` forces an odd number
    of positive real periodic eigenvalues.  Values within the degeneracy
    thresholds are reported as ``Degenerate``.
    """
    scale = idx.scale
    thresholds = {"scale": scale, "tr3_threshold": DEGENERACY_TOL * scale ** 3,
                  "delta_threshold": DEGENERACY_TOL * scale ** 6}
    notes: List[str] = []
    if idx.tr3_degenerate:
        mod = Modulational.DEGENERATE
        notes.append("tr3 vanishes within threshold: Jordan structure change, "
                     "normal form does not apply")
    elif idx.delta_degenerate:
        mod = Modulational.DEGENERATE
        notes.append("Delta vanishes within threshold: branches coalesce")
    elif idx.delta > 0:
        mod = Modulational.STABLE_TRIPLE_IMAGINARY
    else:
        mod = Modulational.UNSTABLE_TWO_BRANCHES
    if idx.tr3 > 0:
        real = RealAxis.ODD_PERIODIC_COUNT
        notes.append("tr3 > 0: odd number of positive real periodic eigenvalues, "
                     "real-axis instability")
    else:
        real = RealAxis.EVEN_PERIODIC_COUNT
    if idx.tr3_degenerate:
        notes.append("parity of the real periodic count is undetermined")
    if idx.tr2 < 0:
        notes.append("tr2 < 0: sufficient for modulational instability")
    return Classification(mod, real, tuple(notes), thresholds)


def rescale_to_unit_speed(params: WaveParameters) -> WaveParameters:
    """Equivalent parameters with ``c' = sgn(c)`` under the power-law scaling.

    ``a' = a / |c|^(1 + 1/p)`` and ``E' = E / |c|^(1 + 2/p)``; the profile
    transforms as ``u(x) = |c|^(1/p) u'(|c|^(1/2) x)``.
    """
    nl = params.nonlinearity
    if not nl.is_power_law:
        raise NotPowerLaw("rescaling requires f(u) = u^(p+1)")
    c = params.c
    if c == 0:
        raise ValueError("rescaling is undefined for c = 0")
    p = nl.p
    s = abs(c)
    return params.replace(a=params.a / s ** (1.0 + 1.0 / p), E=params.E / s ** (1.0 + 2.0 / p),
                          c=math.copysign(1.0, c),
                          seed=None if params.seed is None else params.seed / s ** (1.0 / p))


# ----------------------------------------------------------------------------
# solitary-wave limit
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SolitaryStep:
    t: float
    a: float
    E: float
    T: float
    T_E: float
    M_a: float
    P: float
    asymptotic: float          # -T_E M_a (2/(p c) - 1/(2 c)) P
    orientation_jacobian: float
    tr2: float
    delta: float

    @property
    def signs_agree(self) -> bool:
        """Asymptotic product matches the Jacobian, and tr2**3 dominates Delta."""
        return (np.sign(self.asymptotic) == np.sign(self.orientation_jacobian)
                and np.sign(self.delta) == np.sign(self.tr2))


@dataclass(frozen=True)
class SolitaryLimitReport:
    p: float
    c: float
    steps: Tuple[SolitaryStep, ...]
    stabilized: bool

    @property
    def final(self) -> SolitaryStep:
        return self.steps[-1]

    @property
    def exponent_factor(self) -> float:
        return 2.0 / self.p - 0.5

    def as_dict(self) -> dict:
        return {"p": self.p, "c": self.c, "stabilized": self.stabilized,
                "steps": [s.__dict__.copy() for s in self.steps]}


def solitary_limit_report(p: float, c: float = 1.0, a0: float = 0.05, E0: float = -0.1,
                          t0: float = 1.0, t_min: float = 1e-5, stable_run: int = 3,
                          policy: StepPolicy = StepPolicy()) -> SolitaryLimitReport:
    """Follow ``(a, E) = (a0 t, E0 t**2)`` towards the solitary wave at ``(0, 0)``.

    ``t`` is halved until the signs of the orientation Jacobian, of Delta and
    of the asymptotic product ``-T_E M_a (2/(pc) - 1/(2c)) P`` have been
    constant for ``stable_run`` consecutive steps, or until ``t < t_min``.
    A step only counts once the asymptotic product has the sign of the
    Jacobian and Delta has the sign of tr2 (the cubic term dominates, as it
    must when T_E blows up).

    Raises
    ------
    PathLeavesAdmissibleRegion
        A point of the path has no periodic orbit or unreliable gradients.
    """
    nl = Nonlinearity.power(p)
    steps: List[SolitaryStep] = []
    run = 0
    t = t0
    last_signs = None
    while t >= t_min:
        params = WaveParameters(a0 * t, E0 * t * t, c, nl)
        try:
            g = gradients(params, policy)
        except GKdVError as exc:
            raise PathLeavesAdmissibleRegion(
                f"path left the admissible region at t = {t:g}: {exc}") from exc
        idx = compute_indices(g)
        asym = -g["T_E"] * g["M_a"] * (2.0 / (p * c) - 1.0 / (2.0 * c)) * g.values.P
        step = SolitaryStep(t=t, a=params.a, E=params.E, T=g.values.T, T_E=g["T_E"],
                            M_a=g["M_a"], P=g.values.P, asymptotic=asym,
                            orientation_jacobian=idx.orientation_jacobian, tr2=idx.tr2,
                            delta=idx.delta)
        steps.append(step)
        signs = (np.sign(asym), np.sign(idx.orientation_jacobian), np.sign(idx.delta))
        run = run + 1 if (signs == last_signs and step.signs_agree) else (1 if step.signs_agree else 0)
        last_signs = signs
        if run >= stable_run:
            break
        t /= 2.0
    return SolitaryLimitReport(p=float(p), c=float(c), steps=tuple(steps),
                               stabilized=run >= stable_run)
