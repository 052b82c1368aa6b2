"""Periodic traveling-wave profiles of gKdV and their conserved quantities.

A periodic profile solves ``u_x**2 / 2 + V(u; a, c) = E`` with the effective
potential ``V(u) = F(u) - c u**2 / 2 - a u``.  The wave oscillates between the
two simple roots ``u_- < u_+`` of ``V(u) = E`` that bracket a local minimum of V.

Period, mass, momentum, Hamiltonian and classical action are evaluated as
regularized integrals in the angle ``theta`` of the substitution
``u = (u_+ + u_-)/2 + (u_+ - u_-)/2 sin(theta)``, and their gradients in
``(a, E, c)`` by Richardson-extrapolated central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import (ClosureFailure, DegenerateOrbit, GKdVError, IntegratorFailure,
                     NearSeparatrix, NoPeriodicOrbit, NotApplicable, QuadratureFailure)
from .nonlinearity import WaveParameters

__all__ = [
    "TurningPoints", "ConservedSet", "GradientSet", "StepPolicy", "ProfileSamples",
    "SchaafReport", "find_turning_points", "conserved_quantities", "gradients",
    "reconstruct_profile", "schaaf_check", "time_of_flight", "energy_gap", "QUANTITIES", "PARAMETERS",
]

QUANTITIES = ("T", "M", "P", "H", "K")
PARAMETERS = ("a", "E", "c")

# growth factor of the outward log-spaced scan for turning points
_SCAN_RATIO = 2.0 ** 0.25
_TAYLOR_ZONE = 1e-4


# ----------------------------------------------------------------------------
# turning points
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TurningPoints:
    u_minus: float
    u_plus: float
    v_prime_minus: float
    v_prime_plus: float
    u_min: float
    v_min: float

    @property
    def width(self) -> float:
        return self.u_plus - self.u_minus


def _polish_root(g, dg, lo, hi):
    root = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # one guarded Newton step
    d = float(dg(root))
    if d != 0.0:
        cand = root - float(g(root)) / d
        if lo <= cand <= hi and abs(float(g(cand))) < abs(float(g(root))):
            root = cand
    return root


def _power_critical_points(params: WaveParameters) -> np.ndarray:
    p = params.nonlinearity.p
    if float(p).is_integer():
        n = int(p) + 1
        coeffs = np.zeros(n + 1)
        coeffs[0] = 1.0
        coeffs[-2] -= params.c
        coeffs[-1] -= params.a
        roots = np.roots(coeffs)
        scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
        real = np.sort(roots[np.abs(roots.imag) <= 1e-9 * scale].real)
        pts = []
        for r in real:
            # Newton polish on V'
            for _ in range(3):
                d = float(params.d2V(r))
                if d == 0.0:
                    break
                r = r - float(params.dV(r)) / d
            pts.append(r)
        return np.unique(np.round(np.array(pts), 14))
    # non-integer exponent: only u > 0 is in the domain
    grid = np.geomspace(1e-8, 1e4, 4000)
    vals = params.dV(grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return np.array([_polish_root(params.dV, params.d2V, grid[i], grid[i + 1]) for i in idx])


def _well_minimum(params: WaveParameters) -> float:
    nl = params.nonlinearity
    if nl.is_power_law:
        crit = _power_critical_points(params)
        if crit.size == 0:
            raise NoPeriodicOrbit("effective potential has no critical points")
        minima = crit[params.d2V(crit) > 0]
        if minima.size == 0:
            raise NoPeriodicOrbit("effective potential has no local minimum")
        positive = crit[crit > 0]
        ref = positive.min() if positive.size else 0.0
        return float(minima[np.argmin(np.abs(minima - ref))])
    if params.seed is None:
        raise NotApplicable("a seed point inside the well is required for a custom nonlinearity")
    x0 = float(params.seed)
    g0 = float(params.dV(x0))
    if g0 == 0.0:
        return x0
    step = 1e-3 * max(1.0, abs(x0))
    direction = 1.0 if g0 < 0 else -1.0
    prev = x0
    for _ in range(200):
        x = prev + direction * step
        gx = float(params.dV(x))
        if np.sign(gx) != np.sign(g0):
            lo, hi = sorted((prev, x))
            xm = _polish_root(params.dV, params.d2V, lo, hi)
            if direction > 0 and gx > 0 or direction < 0 and gx < 0:
                return xm
            raise NoPeriodicOrbit("seed does not lie in a potential well")
        prev = x
        step *= 1.5
    raise NoPeriodicOrbit("no local minimum of V found near the seed")


def _scan_root(params: WaveParameters, u_min: float, direction: float, scale: float) -> float:
    E = params.E
    in_domain = not (params.nonlinearity.is_power_law
                     and not float(params.nonlinearity.p).is_integer())
    prev = u_min
    delta = 1e-9 * scale
    while delta < 1e5 * scale:
        x = u_min + direction * delta
        if not in_domain and x <= 0:
            raise NoPeriodicOrbit("orbit leaves the domain u > 0 of the nonlinearity")
        g = float(params.V(x)) - E
        if g > 0:
            lo, hi = sorted((prev, x))
            return _polish_root(lambda v: params.V(v) - E, params.dV, lo, hi)
        if direction * float(params.dV(x)) <= 0:
            # passed a local maximum of V between prev and x
            lo, hi = sorted((prev, x))
            if np.sign(params.dV(lo)) != np.sign(params.dV(hi)):
                xm = _polish_root(params.dV, params.d2V, lo, hi)
                gm = float(params.V(xm)) - E
                if abs(gm) <= 1e-13 * max(1.0, abs(E)):
                    raise NoPeriodicOrbit("energy level sits on a separatrix (non-simple root)")
                if gm > 0:
                    a, b = sorted((prev, xm))
                    return _polish_root(lambda v: params.V(v) - E, params.dV, a, b)
        prev = x
        delta *= _SCAN_RATIO
    raise NoPeriodicOrbit("level set of V is unbounded: no periodic orbit at this energy")


def find_turning_points(params: WaveParameters) -> TurningPoints:
    """Locate the simple roots u_- < u_+ of V(u) = E around the potential well.

    Raises
    ------
    NoPeriodicOrbit
        V has no local minimum, E lies below the well bottom, or the level set
        is unbounded / touches a separatrix.
    DegenerateOrbit
        E sits at the well bottom so the two roots coincide.
    """
    u_min = _well_minimum(params)
    v_min = float(params.V(u_min))
    E = params.E
    scale = max(1.0, abs(u_min))
    if abs(E - v_min) <= 1e-13 * max(1.0, abs(E), abs(v_min)):
        raise DegenerateOrbit(f"E={E!r} equals the well bottom V(u_min)={v_min!r}")
    if E < v_min:
        raise NoPeriodicOrbit(f"E={E!r} lies below the well bottom V(u_min)={v_min!r}")
    u_plus = _scan_root(params, u_min, +1.0, scale)
    u_minus = _scan_root(params, u_min, -1.0, scale)
    if u_plus - u_minus <= 1e-7 * scale:
        raise DegenerateOrbit(f"turning points coincide: width {u_plus - u_minus:.3e}")
    vpm = float(params.dV(u_minus))
    vpp = float(params.dV(u_plus))
    if abs(vpm) <= 1e-12 * scale or abs(vpp) <= 1e-12 * scale:
        raise NoPeriodicOrbit("turning point is not a simple root of V(u) = E")
    return TurningPoints(u_minus, u_plus, vpm, vpp, u_min, v_min)


def _nearest_barrier(params: WaveParameters, start: float, direction: float,
                     width: float) -> float:
    # energy of the first local maximum of V beyond a turning point (inf if none nearby)
    x_prev = start
    delta = 1e-6 * width
    s0 = np.sign(params.dV(start))
    while delta < 50.0 * max(width, 1.0):
        x = start + direction * delta
        if not np.isfinite(params.dV(x)):
            break
        if np.sign(params.dV(x)) != s0:
            lo, hi = sorted((x_prev, x))
            xm = _polish_root(params.dV, params.d2V, lo, hi)
            return float(params.V(xm)), float(xm)
        x_prev = x
        delta *= _SCAN_RATIO
    return math.inf, math.nan


def _critical_levels(params: WaveParameters, tp: TurningPoints):
    # (energy distance, location) of the well bottom and the enclosing barriers
    levels = [(params.E - tp.v_min, tp.u_min)]
    for start, d in ((tp.u_plus, 1.0), (tp.u_minus, -1.0)):
        vb, ub = _nearest_barrier(params, start, d, tp.width)
        if np.isfinite(vb):
            levels.append((vb - params.E, ub))
    return levels


def energy_gap(params: WaveParameters, tp: Optional[TurningPoints] = None) -> float:
    """Energy distance from E to the well bottom or the nearest enclosing barrier."""
    tp = tp or find_turning_points(params)
    return min(g for g, _ in _critical_levels(params, tp))


# ----------------------------------------------------------------------------
# regularized integrals
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ConservedSet:
    """Period, mass, momentum, Hamiltonian and action with quadrature errors."""

    T: float
    M: float
    P: float
    H: float
    K: float
    errors: Dict[str, float]
    turning_points: TurningPoints
    mesh: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array([self.T, self.M, self.P, self.H, self.K])

    def as_dict(self) -> Dict[str, float]:
        return {q: float(v) for q, v in zip(QUANTITIES, self.as_array())}


def _theta_integrand(params: WaveParameters, tp: TurningPoints) -> Callable:
    """Vectorized integrand in theta; returns shape (5, n) for (T, M, P, H, K)."""
    um, up = tp.u_minus, tp.u_plus
    w = up - um
    zone = _TAYLOR_ZONE * w
    E = params.E
    # Taylor coefficients of (E - V(u)) / (distance to endpoint) at each endpoint
    dm = np.array([-float(params.dV(um)), -0.5 * float(params.d2V(um)),
                   -float(params.d3V(um)) / 6.0, -float(params.d4V(um)) / 24.0])
    dp = np.array([float(params.dV(up)), -0.5 * float(params.d2V(up)),
                   float(params.d3V(up)) / 6.0, -float(params.d4V(up)) / 24.0])
    F = params.nonlinearity.F

    def integrand(theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phase = 0.5 * theta + 0.25 * math.pi
        s = w * np.sin(phase) ** 2      # u - u_-
        r = w * np.cos(phase) ** 2      # u_+ - u
        left = s <= r
        u = np.where(left, um + s, up - r)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = 2.0 * (E - params.V(u)) / (s * r)
            qm = 2.0 * (dm[0] + s * (dm[1] + s * (dm[2] + s * dm[3]))) / r
            qp = 2.0 * (dp[0] + r * (dp[1] + r * (dp[2] + r * dp[3]))) / s
        q = np.where(left & (s < zone), qm, q)
        q = np.where(~left & (r < zone), qp, q)
        if not np.all(q > 0.0):
            bad = np.argmin(np.where(np.isnan(q), -np.inf, q))
            raise QuadratureFailure(f"Q(u) = {q[bad]!r} is not positive at u = {u[bad]!r}")
        sq = np.sqrt(q)
        ev = 0.5 * q * s * r            # E - V(u) = u_x^2 / 2
        inv = 2.0 / sq
        return np.array([inv, inv * u, inv * u * u, inv * (ev - F(u)), 2.0 * sq * s * r])

    return integrand


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _mesh_quadrature(fun: Callable, mesh: np.ndarray) -> np.ndarray:
    # fixed Gauss-Legendre rule on every interval of a frozen partition
    lo, hi = mesh[:, 0], mesh[:, 1]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    theta = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    vals = fun(theta).reshape(5, mesh.shape[0], _GL_NODES.size)
    return np.einsum("qij,j,i->q", vals, _GL_WEIGHTS, half)


def conserved_quantities(params: WaveParameters, tol: float = 1e-12,
                         tp: Optional[TurningPoints] = None,
                         mesh: Optional[np.ndarray] = None) -> ConservedSet:
    """Evaluate T, M, P, H, K by adaptive Gauss-Kronrod quadrature in theta.

    H is the Hamiltonian density u_x**2/2 - F(u) integrated over one period and
    K the classical action (integral of u_x**2).  Passing ``mesh`` (an array of
    theta intervals from a previous call) skips adaptivity and applies a fixed
    rule on that partition, which makes the result a smooth function of the
    parameters for finite differencing.
    """
    tp = tp or find_turning_points(params)
    fun = _theta_integrand(params, tp)
    if mesh is not None:
        res = _mesh_quadrature(fun, mesh)
        err = math.nan
    else:
        # E - V(u) is a difference of O(|V|) numbers of size O(E - V_min): near
        # the well bottom roundoff limits the attainable relative accuracy
        gap = params.E - tp.v_min
        floor = 100.0 * np.finfo(float).eps * max(1.0, abs(params.E), abs(tp.v_min)) / gap
        tol = max(tol, floor)
        res, err, info = integrate.quad_vec(lambda t: fun(t)[:, 0], -0.5 * math.pi, 0.5 * math.pi,
                                            epsabs=tol * 1e-3, epsrel=tol, norm="max",
                                            quadrature="gk21", limit=20000, full_output=True)
        if err > max(tol * np.max(np.abs(res)), tol * 1e-3) * 10:
            raise QuadratureFailure(f"quadrature error {err:.2e} exceeds tolerance {tol:.1e}")
        mesh = np.array(sorted(map(tuple, info.intervals)))
    if not np.all(np.isfinite(res)):
        raise QuadratureFailure("non-finite conserved quantity")
    errs = {q: float(err) for q in QUANTITIES}
    return ConservedSet(*(float(v) for v in res), errors=errs, turning_points=tp, mesh=mesh)


# ----------------------------------------------------------------------------
# parameter gradients
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class StepPolicy:
    """Finite-difference step control for :func:`gradients`.

    ``rel_step`` scales the initial step ``h = rel_step * max(1, |param|)``;
    ``gap_fraction`` caps it so the stencil stays well inside the orbit family.
    """

    rel_step: float = 1e-4
    gap_fraction: float = 0.1
    convergence: float = 1e-6
    max_halvings: int = 8
    quad_tol: float = 1e-13


@dataclass(frozen=True)
class GradientSet:
    """Partials of (T, M, P, H, K) with respect to (a, E, c).

    ``matrix[i, j]`` is d(QUANTITIES[i]) / d(PARAMETERS[j]).
    """

    matrix: np.ndarray
    steps: np.ndarray
    self_convergence: np.ndarray
    values: ConservedSet
    params: WaveParameters = field(repr=False)

    def __getitem__(self, key: str) -> float:
        # "T_E" -> dT/dE
        q, p = key.split("_")
        return float(self.matrix[QUANTITIES.index(q), PARAMETERS.index(p)])

    def grad(self, q: str) -> np.ndarray:
        return self.matrix[QUANTITIES.index(q)]

    def jac2(self, f: str, g: str, x: str, y: str) -> float:
        """2x2 Jacobian {f, g}_{x, y} = f_x g_y - f_y g_x."""
        return self[f"{f}_{x}"] * self[f"{g}_{y}"] - self[f"{f}_{y}"] * self[f"{g}_{x}"]

    def jac3(self, f: str, g: str, h: str) -> float:
        """3x3 Jacobian {f, g, h}_{a, E, c} (rows: parameters, columns: quantities)."""
        return float(np.linalg.det(np.column_stack([self.grad(f), self.grad(g), self.grad(h)])))


def _parameter_caps(params: WaveParameters, tp: TurningPoints, fraction: float) -> np.ndarray:
    """Largest steps in (a, E, c) that move no critical level by more than ``fraction`` of its gap.

    A critical point u* of V moves with the parameters, so its level V(u*) shifts by
    ``|u*| h + h^2 / (2 |V''|)`` under a -> a + h and by
    ``u*^2 h / 2 + u*^2 h^2 / (2 |V''|)`` under c -> c + h.
    """
    caps = np.full(3, np.inf)
    for gap, ustar in _critical_levels(params, tp):
        g = fraction * gap
        curv = max(abs(float(params.d2V(ustar))), 1e-300)
        u2 = ustar * ustar
        caps[0] = min(caps[0], g / max(abs(ustar), 1e-300), math.sqrt(2.0 * g * curv))
        caps[1] = min(caps[1], g)
        caps[2] = min(caps[2], 2.0 * g / max(u2, 1e-300), math.sqrt(2.0 * g * curv / max(u2, 1e-300)))
    return caps


def _central(fvals_plus, fvals_minus, h):
    return (fvals_plus - fvals_minus) / (2.0 * h)


def gradients(params: WaveParameters, policy: StepPolicy = StepPolicy()) -> GradientSet:
    """All 15 partials of (T, M, P, H, K) in (a, E, c).

    Central differences with one Richardson level; each column is accepted once
    the extrapolant agrees with the half-step recomputation, otherwise the step
    is halved.

    Raises
    ------
    NearSeparatrix
        The stencil leaves the periodic family, or no step size converges.
    """
    tp = find_turning_points(params)
    base = conserved_quantities(params, tol=policy.quad_tol, tp=tp)
    caps = _parameter_caps(params, tp, policy.gap_fraction)
    matrix = np.zeros((5, 3))
    steps = np.zeros(3)
    conv = np.zeros((5, 3))
    cache: Dict[tuple, np.ndarray] = {}

    def value(j, h):
        key = (j, h)
        if key not in cache:
            try:
                cache[key] = conserved_quantities(params.shifted(j, h), mesh=base.mesh).as_array()
            except GKdVError as exc:
                raise _StencilError(str(exc)) from exc
        return cache[key]

    def richardson(j, h):
        d1 = _central(value(j, h), value(j, -h), h)
        d2 = _central(value(j, h / 2), value(j, -h / 2), h / 2)
        return (4.0 * d2 - d1) / 3.0

    for j in range(3):
        pj = params.vector[j]
        h = min(policy.rel_step * max(1.0, abs(pj)), caps[j])
        for _ in range(policy.max_halvings + 1):
            try:
                r1 = richardson(j, h)
                r2 = richardson(j, h / 2)
            except _StencilError:
                h /= 2
                continue
            # components far below the column size (zero by symmetry, say) are
            # held to an absolute standard relative to the column
            scale = np.maximum(np.abs(r1), np.max(np.abs(r1)) * 1e-2)
            rel = np.abs(r1 - r2) / np.maximum(scale, np.finfo(float).tiny)
            if np.all(rel <= policy.convergence):
                break
            h /= 2
        else:
            raise NearSeparatrix(
                f"d/d{PARAMETERS[j]} did not converge (last step {h:.3e}); "
                "the parameters are too close to a separatrix or the well bottom")
        matrix[:, j] = r1
        steps[j] = h
        conv[:, j] = rel
    return GradientSet(matrix=matrix, steps=steps, self_convergence=conv,
                       values=base, params=params)


class _StencilError(Exception):
    pass


# ----------------------------------------------------------------------------
# profile reconstruction
# ----------------------------------------------------------------------------

@dataclass
class ProfileSamples:
    """One period of the profile on a uniform grid ``x_i = i T / n``.

    ``evaluator(x)`` returns the integrated state at arbitrary ``x`` in [0, T]
    (rows: u, u_x, then u_a, u_ax, u_E, u_Ex, u_c, u_cx when variational).
    ``end_state`` is the state at ``x = T``.
    """

    params: WaveParameters
    T: float
    x: np.ndarray
    u: np.ndarray
    ux: np.ndarray
    uxx: np.ndarray
    evaluator: Callable = field(repr=False)
    end_state: np.ndarray = field(repr=False)
    turning_points: TurningPoints = field(repr=False)
    conserved: ConservedSet = field(repr=False)
    ua: Optional[np.ndarray] = None
    uax: Optional[np.ndarray] = None
    uE: Optional[np.ndarray] = None
    uEx: Optional[np.ndarray] = None
    uc: Optional[np.ndarray] = None
    ucx: Optional[np.ndarray] = None
    du_minus: Optional[Dict[str, float]] = None

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def has_variational(self) -> bool:
        return self.ua is not None

    def state(self, x) -> np.ndarray:
        return self.evaluator(x)

    def energy_residual(self) -> np.ndarray:
        p = self.params
        return np.abs(0.5 * self.ux ** 2 + p.V(self.u) - p.E)

    def closure_error(self) -> float:
        um = self.turning_points.u_minus
        return max(abs(self.end_state[0] - um), abs(self.end_state[1]))

    def wronskians(self) -> Dict[str, np.ndarray]:
        """{u, u_x}_{x, q} = u_x u_qx - u_xx u_q for q in a, E, c."""
        if not self.has_variational:
            raise ValueError("profile was reconstructed without variational derivatives")
        return {
            "a": self.ux * self.uax - self.uxx * self.ua,
            "E": self.ux * self.uEx - self.uxx * self.uE,
            "c": self.ux * self.ucx - self.uxx * self.uc,
        }


def _turning_point_derivatives(params: WaveParameters, tp: TurningPoints) -> Dict[str, float]:
    # differentiate E - V(u_-; a, c) = 0
    um, vp = tp.u_minus, tp.v_prime_minus
    return {"a": um / vp, "E": 1.0 / vp, "c": 0.5 * um * um / vp}


def reconstruct_profile(params: WaveParameters, n: int = 512, with_variational: bool = False,
                        rtol: float = 1e-13, atol: float = 1e-13,
                        conserved: Optional[ConservedSet] = None) -> ProfileSamples:
    """Integrate u_xx = a - f(u) + c u from u(0) = u_-, u_x(0) = 0 over one period.

    With ``with_variational`` the variational equations
    ``v_xx + (f'(u) - c) v = r`` (r = 1, 0, u for a, E, c) are integrated alongside,
    starting from the derivatives of u_- and zero slope.
    """
    if n < 64:
        raise ValueError("n must be at least 64")
    nl = params.nonlinearity
    tp = conserved.turning_points if conserved else find_turning_points(params)
    cons = conserved or conserved_quantities(params, tp=tp)
    T = cons.T
    a, c = params.a, params.c
    dum = _turning_point_derivatives(params, tp)

    if with_variational:
        y0 = np.array([tp.u_minus, 0.0, dum["a"], 0.0, dum["E"], 0.0, dum["c"], 0.0])

        def rhs(x, y):
            u = y[0]
            k = float(nl.df(u)) - c
            return np.array([y[1], a - float(nl.f(u)) + c * u,
                             y[3], 1.0 - k * y[2],
                             y[5], -k * y[4],
                             y[7], u - k * y[6]])
    else:
        y0 = np.array([tp.u_minus, 0.0])

        def rhs(x, y):
            u = y[0]
            return np.array([y[1], a - float(nl.f(u)) + c * u])

    sol = integrate.solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=rtol, atol=atol,
                              dense_output=True)
    if not sol.success:
        raise IntegratorFailure(sol.message)
    x = np.linspace(0.0, T, n, endpoint=False)
    Y = sol.sol(x)
    end = sol.y[:, -1]
    u, ux = Y[0], Y[1]
    uxx = a - nl.f(u) + c * u
    prof = ProfileSamples(params=params, T=T, x=x, u=u, ux=ux, uxx=uxx,
                          evaluator=sol.sol, end_state=end, turning_points=tp,
                          conserved=cons)
    if with_variational:
        prof.ua, prof.uax, prof.uE, prof.uEx, prof.uc, prof.ucx = Y[2:8]
        prof.du_minus = dum
    closure = prof.closure_error()
    if closure > 1e-7 * max(1.0, abs(tp.u_minus)):
        raise ClosureFailure(f"orbit does not close after one period: mismatch {closure:.2e}")
    return prof


def time_of_flight(params: WaveParameters, rtol: float = 1e-12, atol: float = 1e-12) -> float:
    """Period measured by integrating the orbit until it returns to u_-.

    Independent of the quadrature: the orbit starts at ``u = u_-, u_x = 0`` and
    the period is the second zero of ``u_x``, where ``u_x`` turns from negative
    to positive.
    """
    tp = find_turning_points(params)
    nl = params.nonlinearity
    a, c = params.a, params.c

    def rhs(x, y):
        return [y[1], a - float(nl.f(y[0])) + c * y[0]]

    def slope_event(direction):
        def event(x, y):
            return y[1]

        event.direction = direction
        event.terminal = True
        return event

    first = integrate.solve_ivp(rhs, (0.0, 1e6), [tp.u_minus, 0.0], method="DOP853",
                                rtol=rtol, atol=atol, events=slope_event(-1.0))
    if not first.t_events[0].size:
        raise IntegratorFailure("orbit never reached the upper turning point")
    x_half = float(first.t_events[0][0])
    second = integrate.solve_ivp(rhs, (x_half, 4.0 * x_half), first.y[:, -1], method="DOP853",
                                 rtol=rtol, atol=atol, events=slope_event(1.0))
    if not second.t_events[0].size:
        raise IntegratorFailure("orbit did not return to the lower turning point")
    return float(second.t_events[0][0])


# ----------------------------------------------------------------------------
# Schaaf monotonicity conditions
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SchaafReport:
    convex_condition: bool      # G' > 0  =>  5 G''^2 - 3 G' G''' > 0
    critical_condition: bool    # G' = 0  =>  G G'' < 0
    guaranteed: bool            # T_E > 0 is implied
    n_samples: int
    notes: str = ""
    single_well: bool = True

    @property
    def holds(self) -> bool:
        return self.convex_condition and self.critical_condition


def schaaf_check(params: WaveParameters, n: int = 1000, strict: bool = False) -> SchaafReport:
    """Sample G = V' on the orbit interval and test the two Schaaf conditions.

    The guarantee T_E > 0 is only claimed for power-law f with c = 1.  With
    ``strict=True`` other cases raise :class:`NotApplicable` instead of being
    reported without a guarantee.
    """
    applicable = params.nonlinearity.is_power_law and params.c == 1.0
    if strict and not applicable:
        raise NotApplicable("Schaaf guarantee needs a power-law nonlinearity and c = 1")
    tp = find_turning_points(params)
    u = np.linspace(tp.u_minus, tp.u_plus, n)
    G = params.dV(u)
    G1 = params.d2V(u)
    G2 = params.d3V(u)
    G3 = params.d4V(u)
    scale = max(1.0, float(np.max(np.abs(G1))))
    pos = G1 > 1e-12 * scale
    cond1 = bool(np.all(5 * G2[pos] ** 2 - 3 * G1[pos] * G3[pos] > 0))
    # zeros of G': exact zeros on the grid or sign changes between nodes
    zero = np.abs(G1) <= 1e-12 * scale
    crit_vals = list(G[zero] * G2[zero])
    for i in np.nonzero(np.sign(G1[:-1]) * np.sign(G1[1:]) < 0)[0]:
        xc = optimize.brentq(params.d2V, u[i], u[i + 1], xtol=1e-14)
        crit_vals.append(float(params.dV(xc)) * float(params.d3V(xc)))
    # tangential zeros of G' (no sign change): refine local minima of |G'|
    A = np.abs(G1)
    for i in np.nonzero((A[1:-1] <= A[:-2]) & (A[1:-1] <= A[2:]) & ~zero[1:-1])[0] + 1:
        r = optimize.minimize_scalar(lambda s: abs(float(params.d2V(s))),
                                     bounds=(u[i - 1], u[i + 1]), method="bounded",
                                     options={"xatol": 1e-12})
        if r.fun <= 1e-9 * scale:
            crit_vals.append(float(params.dV(r.x)) * float(params.d3V(r.x)))
    # strict negativity must beat roundoff in the product G G''
    floor = 1e-10 * max(float(np.max(np.abs(G))), 1e-300) * max(float(np.max(np.abs(G2))), 1e-300)
    cond2 = bool(all(v < -floor for v in crit_vals))
    # the monotonicity lemma concerns a single well: G = V' has one zero inside
    single = int(np.sum(np.sign(G[:-1]) * np.sign(G[1:]) < 0)) == 1
    holds = cond1 and cond2
    if not single:
        notes = "orbit encloses several critical points of V; the conditions give no guarantee"
        return SchaafReport(cond1, cond2, False, n, notes, single_well=False)
    if not holds:
        notes = "conditions violated"
    elif applicable:
        notes = "T_E > 0 guaranteed"
    else:
        notes = "conditions hold numerically; no guarantee claimed for this nonlinearity"
    return SchaafReport(cond1, cond2, applicable and holds, n, notes)
