"""Spectrum of the linearized gKdV operator near the origin.

Three tools live here:

* the normal-form cubic ``1 - y**2 tr2 / 2 + y**3 tr3 / 3 = 0`` whose roots give
  the leading slopes of the three spectral curves through the origin,
* continuation of those curves as zeros of ``D(mu, exp(i kappa))`` and a
  sign-change scan of ``D(mu, +-1)`` on the positive real axis,
* an independent Fourier-Bloch (Hill's method) eigenvalue solver together with
  the generalized null basis of ``d/dx L`` at the origin.

The Floquet multiplier phase ``kappa`` and the Bloch exponent ``gamma`` are the
same number: a Bloch mode ``exp(i gamma x / T) w(x)`` with ``w`` T-periodic has
multiplier ``exp(i gamma)``.  With ``y = i mu / kappa`` the cubic above is the
leading balance of the Evans function, so a root ``y_j`` seeds the curve
``mu_j(kappa) = -i y_j kappa + O(kappa**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize

from .errors import (BranchCollision, DegenerateCubic, GenericityViolation, NewtonDivergence,
                     ParityViolation, ScanTooShort, TruncationNotConverged)
from .indices import StabilityIndices
from .monodromy import integrate_monodromy, monodromy_batch, monodromy_with_derivative
from .profile import GradientSet, ProfileSamples

__all__ = [
    "BandPoint", "NormalFormRoots", "RealAxisEigenvalues", "HillSpectrum", "NullBasis",
    "normal_form_roots", "trace_bands", "real_axis_scan", "hill_spectrum", "null_basis",
    "kappa_grid", "band_seed",
]


# ----------------------------------------------------------------------------
# normal form
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFormRoots:
    """Roots of ``1 - (tr2/2) y**2 + (tr3/3) y**3``.

    Real roots come first (ascending), then the complex pair ordered by
    imaginary part.  ``consistent`` records whether "three real roots" agrees
    with ``Delta > 0``.
    """

    y: np.ndarray
    tr2: float
    tr3: float
    delta: float
    residual: float
    consistent: bool

    @property
    def n_real(self) -> int:
        return int(np.sum(_is_real(self.y)))

    @property
    def slopes(self) -> np.ndarray:
        """d mu / d kappa at kappa = 0 for each branch."""
        return -1j * self.y


def _is_real(y, rel=1e-9):
    y = np.asarray(y)
    return np.abs(y.imag) <= rel * np.maximum(np.abs(y), 1.0)


def normal_form_roots(idx: StabilityIndices) -> NormalFormRoots:
    """Solve the projective cubic of the normal form.

    Raises
    ------
    DegenerateCubic
        tr3 vanishes within the degeneracy threshold, so the cubic drops degree.
    """
    if idx.tr3_degenerate:
        raise DegenerateCubic("tr3 is zero within threshold: the normal form changes balance")
    return _cubic_roots(idx.tr2, idx.tr3)


def _cubic_roots(tr2: float, tr3: float) -> NormalFormRoots:
    coeffs = np.array([tr3 / 3.0, -tr2 / 2.0, 0.0, 1.0])
    y = np.roots(coeffs).astype(complex)
    poly = np.polynomial.Polynomial(coeffs[::-1])
    dpoly = poly.deriv()
    for _ in range(3):  # Newton polish on the companion eigenvalues
        y = y - poly(y) / dpoly(y)
    real = _is_real(y)
    y = np.where(real, y.real + 0j, y)
    order = np.lexsort((y.real, y.imag, ~real))
    y = y[order]
    delta = 0.5 * tr2 ** 3 - 3.0 * tr3 ** 2
    residual = float(np.max(np.abs(poly(y))))
    consistent = (int(np.sum(_is_real(y))) == 3) == (delta > 0)
    return NormalFormRoots(y=y, tr2=tr2, tr3=tr3, delta=delta, residual=residual,
                           consistent=consistent)


# ----------------------------------------------------------------------------
# band tracing
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class BandPoint:
    branch: int
    kappa: float
    mu: complex
    residual: float
    newton_steps: int = 0


def _adjugate3(A: np.ndarray) -> np.ndarray:
    # adj(A)[j, i] = cofactor (i, j); exact for 3x3 and well defined when A is singular
    C = np.empty((3, 3), dtype=A.dtype)
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != i]
            cols = [k for k in range(3) if k != j]
            m = A[np.ix_(rows, cols)]
            C[i, j] = (-1) ** (i + j) * (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return C.T


def _evans_and_derivatives(profile, mu, lam, tol):
    """D(mu, lam), dD/dmu and dD/dlam from one augmented monodromy solve."""
    M, Mmu = monodromy_with_derivative(profile, mu, tol)
    A = M - lam * np.eye(3)
    adj = _adjugate3(A)
    D = complex(np.linalg.det(A))
    dmu = complex(np.trace(adj @ Mmu))
    dlam = complex(-np.trace(adj))
    scale = 1.0 + abs(lam) ** 3 + abs(np.trace(M)) * abs(lam) ** 2 + np.linalg.norm(M) * abs(lam)
    return D, dmu, dlam, scale


def kappa_grid(kappa_max: float, steps: int = 24, ratio: float = 0.8,
               tail: int = 0, extra: Sequence[float] = ()) -> np.ndarray:
    """Geometric grid ``kappa_max * ratio**k`` (k < steps), optional uniform tail, extras."""
    geo = kappa_max * ratio ** np.arange(steps)
    grid = [geo]
    if tail > 0:
        grid.append(np.linspace(geo.min(), kappa_max, tail + 2)[1:-1])
    grid.append(np.asarray(list(extra), dtype=float))
    k = np.unique(np.concatenate(grid))
    return k[(k > 0) & (k <= kappa_max * (1 + 1e-12))]


def band_seed(roots: NormalFormRoots, kappa: float) -> np.ndarray:
    return -1j * roots.y * kappa


class _NewtonFailed(Exception):
    pass


def _newton_mu(profile, mu0, kappa, tol, step_tol, max_iter=30):
    lam = np.exp(1j * kappa)
    mu = complex(mu0)
    best = None
    for it in range(1, max_iter + 1):
        D, dmu, _, scale = _evans_and_derivatives(profile, mu, lam, tol)
        if dmu == 0 or not np.isfinite(dmu):
            raise _NewtonFailed("vanishing derivative")
        if best is not None and abs(D) <= 1e3 * tol * scale and abs(D) >= 0.5 * best[1]:
            # stagnation at the noise floor of the monodromy integration
            return best + (it,)
        if best is None or abs(D) < best[1]:
            best = (mu, abs(D), abs(dmu))
        step = D / dmu
        mu -= step
        if abs(step) <= step_tol * max(abs(mu), kappa):
            D, dmu, _, scale = _evans_and_derivatives(profile, mu, lam, tol)
            return mu, abs(D), abs(dmu), it
    raise _NewtonFailed(f"no convergence in {max_iter} iterations")


def _arclength_step(profile, z0, tangent, ds, tol, max_iter=30):
    """Pseudo-arclength corrector in (Re mu, Im mu, kappa) for D(mu, e^{i kappa}) = 0."""
    z = z0 + ds * tangent
    for _ in range(max_iter):
        mu = z[0] + 1j * z[1]
        lam = np.exp(1j * z[2])
        D, dmu, dlam, _ = _evans_and_derivatives(profile, mu, lam, tol)
        dk = dlam * 1j * lam
        # real Jacobian of (Re D, Im D, arclength) w.r.t. (Re mu, Im mu, kappa)
        J = np.array([[dmu.real, -dmu.imag, dk.real],
                      [dmu.imag, dmu.real, dk.imag],
                      tangent])
        F = np.array([D.real, D.imag, tangent @ (z - z0) - ds])
        dz = np.linalg.solve(J, -F)
        z = z + dz
        if np.linalg.norm(dz) <= 1e-12 * max(1.0, np.linalg.norm(z)):
            return z
    raise _NewtonFailed("arclength corrector did not converge")


def _continue_to(profile, prev: List[Tuple[float, complex]], kappa, tol, step_tol):
    """Reach kappa on one branch by arclength continuation from the last two points."""
    (k0, m0), (k1, m1) = prev[-2], prev[-1]
    z_prev = np.array([m0.real, m0.imag, k0])
    z = np.array([m1.real, m1.imag, k1])
    for _ in range(200):
        t = z - z_prev
        t /= np.linalg.norm(t)
        remaining = kappa - z[2]
        ds = min(np.linalg.norm(z - z_prev), abs(remaining) / max(abs(t[2]), 1e-3))
        z_new = _arclength_step(profile, z, t, ds, tol)
        z_prev, z = z, z_new
        if abs(kappa - z[2]) <= 0.05 * abs(remaining) or (z[2] - kappa) * np.sign(remaining) > 0:
            break
    return _newton_mu(profile, z[0] + 1j * z[1], kappa, tol, step_tol)


def trace_bands(profile: ProfileSamples, idx: StabilityIndices, kappa_max: float = 0.2,
                steps: int = 16, kappas: Optional[Sequence[float]] = None,
                tol: float = 1e-11, step_tol: float = 1e-10,
                merge_radius: float = 1e-6) -> List[List[BandPoint]]:
    """Follow the three spectral curves ``mu_j(kappa)`` leaving the origin.

    Each branch starts from the normal-form seed ``-i y_j kappa`` at the
    smallest kappa and is continued outward: the predictor extrapolates the
    two previous points linearly, Newton in ``mu`` corrects it, and on failure
    a pseudo-arclength continuation in ``(mu, kappa)`` takes over.

    Returns
    -------
    list of list of BandPoint
        One list per branch (ordered as the normal-form roots), ascending kappa.

    Raises
    ------
    NewtonDivergence
        A branch could not be continued; ``last_kappa`` is the last good value.
    BranchCollision
        Two branches landed within ``merge_radius`` (relative) of each other.
    """
    roots = normal_form_roots(idx)
    grid = kappa_grid(kappa_max, steps) if kappas is None else np.unique(np.asarray(kappas, float))
    if grid.size == 0 or grid[0] <= 0:
        raise ValueError("kappa grid must contain positive values")
    branches: List[List[BandPoint]] = []
    for j, y in enumerate(roots.y):
        pts: List[BandPoint] = []
        history: List[Tuple[float, complex]] = []
        for kappa in grid:
            if len(history) >= 2:
                (k0, m0), (k1, m1) = history[-2], history[-1]
                guess = m1 + (m1 - m0) / (k1 - k0) * (kappa - k1)
            elif len(history) == 1:
                guess = history[-1][1] * kappa / history[-1][0]
            else:
                guess = -1j * y * kappa
            try:
                mu, res, dmu, its = _newton_mu(profile, guess, kappa, tol, step_tol)
                # reject jumps onto another branch
                if history and abs(mu - guess) > 0.5 * abs(guess - history[-1][1]) + 1e-3 * kappa:
                    raise _NewtonFailed("jumped branches")
            except _NewtonFailed as exc:
                if len(history) < 2:
                    raise NewtonDivergence(f"branch {j}: {exc} at kappa={kappa:g}",
                                           last_kappa=history[-1][0] if history else None)
                try:
                    mu, res, dmu, its = _continue_to(profile, history, kappa, tol, step_tol)
                except (_NewtonFailed, np.linalg.LinAlgError) as exc2:
                    raise NewtonDivergence(f"branch {j}: {exc2} at kappa={kappa:g}",
                                           last_kappa=history[-1][0])
            history.append((float(kappa), mu))
            pts.append(BandPoint(branch=j, kappa=float(kappa), mu=mu, residual=res,
                                 newton_steps=its))
        branches.append(pts)
    for i in range(len(grid)):
        mus = [b[i].mu for b in branches]
        for j in range(3):
            for k in range(j + 1, 3):
                if abs(mus[j] - mus[k]) <= merge_radius * max(abs(mus[j]), grid[i]):
                    raise BranchCollision(
                        f"branches {j} and {k} meet near kappa={grid[i]:g}", kappa=float(grid[i]))
    return branches


# ----------------------------------------------------------------------------
# real axis
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RealAxisEigenvalues:
    """Real roots of D(mu, 1) (periodic) and D(mu, -1) (antiperiodic) on [0, mu_max]."""

    periodic: Tuple[float, ...]
    antiperiodic: Tuple[float, ...]
    mu_max: float
    n: int
    tr3_sign: int
    mu_max_heuristic: bool

    @property
    def periodic_positive(self) -> Tuple[float, ...]:
        return tuple(m for m in self.periodic if m > 0)

    @property
    def n_periodic_positive(self) -> int:
        return len(self.periodic_positive)

    @property
    def n_antiperiodic_positive(self) -> int:
        return len(self.antiperiodic)

    def as_dict(self) -> dict:
        return {"periodic": list(self.periodic), "antiperiodic": list(self.antiperiodic),
                "mu_max": self.mu_max, "n": self.n,
                "n_periodic_positive": self.n_periodic_positive,
                "n_antiperiodic_positive": self.n_antiperiodic_positive,
                "tr3_sign": self.tr3_sign, "mu_max_heuristic": self.mu_max_heuristic}


def default_mu_max(T: float) -> float:
    return 8.0 * (2.0 * math.pi / T) ** 3


def _real_evans(profile, mu, sign, tol=1e-11):
    a_pos = integrate_monodromy(profile, mu, tol, check_det=False).trace.real
    a_neg = integrate_monodromy(profile, -mu, tol, check_det=False).trace.real
    return (a_pos - a_neg) if sign > 0 else (2.0 + a_pos + a_neg)


def _refine(profile, lo, hi, sign):
    g = lambda m: _real_evans(profile, m, sign)
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if np.sign(glo) == np.sign(ghi):
        # the coarse sweep saw a change the accurate solver does not: report the midpoint
        return 0.5 * (lo + hi)
    return optimize.brentq(g, lo, hi, xtol=1e-13, rtol=1e-12)


def real_axis_scan(profile: ProfileSamples, tr3: float, mu_max: Optional[float] = None,
                   n: int = 2048, n_steps: int = 4000,
                   max_doublings: int = 4) -> RealAxisEigenvalues:
    """Locate real periodic and antiperiodic eigenvalues on ``(0, mu_max]``.

    A vectorized fixed-step sweep evaluates ``D(mu, 1) = a(mu) - a(-mu)`` and
    ``D(mu, -1) = 2 + a(mu) + a(-mu)`` on ``n`` uniform nodes; every sign change
    is refined with the adaptive integrator.  Near ``mu = 0`` the periodic
    Evans function behaves like ``tr3 mu**3 / 3``, which fixes its sign at
    ``0+``.

    Without an explicit ``mu_max`` the default ``8 (2 pi / T)**3`` is doubled
    (at most ``max_doublings`` times) until both Evans functions show their
    large-mu signs.

    Raises
    ------
    ScanTooShort
        ``D(mu_max, 1)`` is not negative or ``D(mu_max, -1)`` is not positive.
    ParityViolation
        The root counts contradict the parity laws.
    """
    heuristic = mu_max is None
    if mu_max is None:
        mu_max = default_mu_max(profile.T)
    for _ in range(max_doublings + 1 if heuristic else 1):
        if _real_evans(profile, mu_max, +1) < 0 and _real_evans(profile, mu_max, -1) > 0:
            break
        if heuristic:
            mu_max *= 2.0
    else:
        raise ScanTooShort(f"no asymptotic sign regime at mu_max={mu_max:g}; increase mu_max")
    mus = mu_max * np.arange(1, n + 1) / n
    Mp = monodromy_batch(profile, mus, n_steps)
    Mn = monodromy_batch(profile, -mus, n_steps)
    ap = np.trace(Mp, axis1=1, axis2=2).real
    an = np.trace(Mn, axis1=1, axis2=2).real
    dper = ap - an
    danti = 2.0 + ap + an
    s3 = int(np.sign(tr3))

    periodic = [0.0]
    sper = np.sign(dper)
    if s3 != 0 and sper[0] != s3:
        # a root hides in (0, mu_1)
        periodic.append(_refine(profile, mus[0] * 1e-3, mus[0], +1))
    for i in np.nonzero(sper[:-1] * sper[1:] < 0)[0]:
        periodic.append(_refine(profile, mus[i], mus[i + 1], +1))
    santi = np.sign(danti)
    antiperiodic = []
    if santi[0] < 0:  # D(0, -1) = 8 > 0
        antiperiodic.append(optimize.brentq(lambda m: _real_evans(profile, m, -1),
                                            0.0, mus[0], xtol=1e-13))
    for i in np.nonzero(santi[:-1] * santi[1:] < 0)[0]:
        antiperiodic.append(_refine(profile, mus[i], mus[i + 1], -1))
    result = RealAxisEigenvalues(periodic=tuple(periodic), antiperiodic=tuple(antiperiodic),
                                 mu_max=float(mu_max), n=n, tr3_sign=s3,
                                 mu_max_heuristic=heuristic)
    if result.n_antiperiodic_positive % 2:
        raise ParityViolation(f"odd antiperiodic count {result.n_antiperiodic_positive}")
    if s3 != 0 and (result.n_periodic_positive % 2 == 1) != (s3 > 0):
        raise ParityViolation(
            f"{result.n_periodic_positive} positive periodic roots but tr3 has sign {s3}")
    return result


# ----------------------------------------------------------------------------
# Hill's method
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class HillSpectrum:
    gamma: float
    N: int
    eigenvalues: np.ndarray
    near_origin: np.ndarray       # the three eigenvalues closest to 0
    convergence: float            # max shift of near_origin between N and N/2

    def nearest(self, mu: complex, k: int = 1) -> np.ndarray:
        order = np.argsort(np.abs(self.eigenvalues - mu))
        return self.eigenvalues[order[:k]]


def _fourier_coefficients(values: np.ndarray) -> np.ndarray:
    return np.fft.fft(values) / values.size


def hill_matrix(profile: ProfileSamples, gamma: float, N: int, n_samples: Optional[int] = None):
    """Fourier-Galerkin matrix of ``J_gamma L_gamma`` on modes ``k = -N..N``.

    ``J_gamma = d/dx + i gamma / T`` and ``L_gamma = -(d/dx + i gamma/T)**2 - f'(u) + c``
    both act diagonally on ``exp(2 pi i k x / T)`` except for the multiplication
    by ``f'(u)``, which becomes a Toeplitz convolution of its Fourier coefficients.
    """
    T = profile.T
    n_samples = n_samples or max(8 * N, profile.n)
    x = np.arange(n_samples) * T / n_samples
    u = profile.evaluator(x)[0]
    q = _fourier_coefficients(np.asarray(profile.params.nonlinearity.df(u), dtype=float))
    k = np.arange(-N, N + 1)
    xi = (2.0 * math.pi * k + gamma) / T
    idx = k[:, None] - k[None, :]
    C = q[idx % n_samples]
    L = np.diag(xi ** 2 + profile.params.c).astype(complex) - C
    return (1j * xi)[:, None] * L, xi


def _hill_eigs(profile, gamma, N):
    A, xi = hill_matrix(profile, gamma, N)
    if gamma != 0.0:
        return linalg.eigvals(A)
    # At gamma = 0 the eigenvalue 0 carries a Jordan block, whose eigenvalues
    # roundoff would split by sqrt(eps |A|).  Deflate the two exact kernel
    # directions instead: the k = 0 row vanishes identically, and the
    # translation mode u_x (zero mean) is annihilated up to truncation error.
    keep = np.nonzero(xi != 0)[0]
    A1 = A[np.ix_(keep, keep)]
    n = max(8 * N, profile.n)
    u = profile.evaluator(np.arange(n) * profile.T / n)[0]
    uhat = _fourier_coefficients(u)[np.arange(-N, N + 1)[keep] % n]
    v = (1j * xi[keep] * uhat)[:, None]
    Q, _ = linalg.qr(v)
    B = Q.conj().T @ A1 @ Q
    return np.concatenate([[0.0 + 0j, 0.0 + 0j], linalg.eigvals(B[1:, 1:])])


def _three_nearest(ev):
    near = ev[np.argsort(np.abs(ev))[:3]]
    return near[np.lexsort((near.real, near.imag))]


def hill_spectrum(profile: ProfileSamples, gamma: float, N: int = 128,
                  check: bool = True, tol: float = 1e-4) -> HillSpectrum:
    """Eigenvalues of the Bloch operator at exponent ``gamma`` by Hill's method.

    Raises
    ------
    TruncationNotConverged
        The three eigenvalues nearest the origin move by more than ``tol``
        between truncations N and N/2.
    """
    if N < 32:
        raise ValueError("N must be at least 32")
    ev = _hill_eigs(profile, gamma, N)
    near = _three_nearest(ev)
    shift = 0.0
    if check:
        near_half = _three_nearest(_hill_eigs(profile, gamma, N // 2))
        shift = float(max(np.min(np.abs(near_half - z)) for z in near))
        if shift > tol:
            raise TruncationNotConverged(
                f"eigenvalues near 0 moved by {shift:.2e} between N={N} and N={N // 2}")
    return HillSpectrum(gamma=float(gamma), N=N, eigenvalues=ev, near_origin=near,
                        convergence=shift)


# ----------------------------------------------------------------------------
# generalized null basis
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class NullBasis:
    """Jordan chain of ``d/dx L`` at the origin sampled on the profile grid.

    ``phi0 = {T, u}_{a, E}``, ``phi1 = {T, M}_{a, E} u_x`` and
    ``phi2 = {u, T, M}_{a, E, c}`` with ``d/dx L phi2 = -phi1``; the adjoint
    vectors are ``psi0 = 1`` and ``psi2 = {T, M}_{E, c} + {T, M}_{a, E} u``.
    When ``{T, M}_{a, E}`` vanishes, P replaces M throughout (``uses_P``).
    """

    x: np.ndarray
    phi0: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    psi0: np.ndarray
    psi2: Optional[np.ndarray]
    residuals: Dict[str, float]
    periodicity: Dict[str, float]
    inner_psi2_phi2: Optional[float]
    predicted_inner: Optional[float]
    uses_P: bool = False

    @property
    def inner_rel_err(self) -> Optional[float]:
        if self.inner_psi2_phi2 is None:
            return None
        return abs(self.inner_psi2_phi2 - self.predicted_inner) / abs(self.predicted_inner)


def spectral_dxL(values: np.ndarray, profile: ProfileSamples, T: float) -> np.ndarray:
    """Apply ``d/dx (-d_xx - f'(u) + c)`` with Fourier differentiation."""
    n = values.size
    k = 2.0 * math.pi * np.fft.fftfreq(n, d=T / n)
    dxx = np.fft.ifft(-(k ** 2) * np.fft.fft(values)).real
    Lv = -dxx - profile.params.nonlinearity.df(profile.u) * values + profile.params.c * values
    return np.fft.ifft(1j * k * np.fft.fft(Lv)).real


def null_basis(profile: ProfileSamples, grads: GradientSet) -> NullBasis:
    """Build the generalized kernel of ``d/dx L`` and check the chain relations.

    Residual norms are discrete 2-norms relative to the norm of the vector the
    operator was applied to (``phi0``, ``phi1``) or of ``phi1`` (for the chain
    relation ``d/dx L phi2 + phi1``).

    Raises
    ------
    GenericityViolation
        Both ``{T, M}_{a, E}`` and ``{T, P}_{a, E}`` vanish.
    """
    if not profile.has_variational:
        raise ValueError("null_basis needs a profile with variational derivatives")
    g = grads
    scale = max(abs(g["T_a"]), abs(g["T_E"]), 1.0)
    jm = g.jac2("T", "M", "a", "E")
    jp = g.jac2("T", "P", "a", "E")
    uses_P = abs(jm) <= 1e-8 * scale * max(abs(g["M_a"]), abs(g["M_E"]), 1.0)
    if uses_P and abs(jp) <= 1e-8 * scale * max(abs(g["P_a"]), abs(g["P_E"]), 1.0):
        raise GenericityViolation("{T,M}_{a,E} and {T,P}_{a,E} both vanish")
    Q = "P" if uses_P else "M"
    jq = jp if uses_P else jm
    T = profile.T
    ua, uE, uc, u, ux = profile.ua, profile.uE, profile.uc, profile.u, profile.ux
    Ta, TE, Tc = g["T_a"], g["T_E"], g["T_c"]
    Qa, QE, Qc = g[f"{Q}_a"], g[f"{Q}_E"], g[f"{Q}_c"]

    def combos(state):
        # state rows: u, u_x, u_a, u_ax, u_E, u_Ex, u_c, u_cx
        s = state
        p0 = Ta * s[4] - TE * s[2]
        p1 = jq * s[1]
        p2 = (s[2] * (TE * Qc - QE * Tc) - s[4] * (Ta * Qc - Qa * Tc) + s[6] * (Ta * QE - Qa * TE))
        return np.array([p0, p1, p2])

    phi0, phi1, phi2 = combos(np.vstack([u, ux, ua, profile.uax, uE, profile.uEx,
                                         uc, profile.ucx]))
    # endpoint mismatch of values and slopes
    dcombo = _combo_slopes(Ta, TE, Tc, Qa, QE, Qc, jq, profile)
    start = combos(profile.evaluator(0.0))
    end = combos(profile.end_state)
    s0, s1 = dcombo(profile.evaluator(0.0)), dcombo(profile.end_state)
    periodicity = {}
    for name, i, ref in (("phi0", 0, phi0), ("phi1", 1, phi1), ("phi2", 2, phi2)):
        norm = max(np.max(np.abs(ref)), 1e-300)
        periodicity[name] = float(max(abs(end[i] - start[i]), abs(s1[i] - s0[i])) / norm)

    def norm(v):
        return float(np.sqrt(np.mean(np.abs(v) ** 2)))

    r0 = spectral_dxL(phi0, profile, T)
    r1 = spectral_dxL(phi1, profile, T)
    r2 = spectral_dxL(phi2, profile, T) + phi1
    residuals = {"phi0": norm(r0) / norm(phi0), "phi1": norm(r1) / norm(phi1),
                 "phi2_chain": norm(r2) / norm(phi1)}

    psi0 = np.ones_like(u)
    if uses_P:
        psi2 = None
        inner = predicted = None
    else:
        psi2 = g.jac2("T", "M", "E", "c") + jm * u
        inner = float(np.mean(psi2 * phi2) * T)
        predicted = 0.5 * jm * g.jac3("T", "M", "P")
    return NullBasis(x=profile.x, phi0=phi0, phi1=phi1, phi2=phi2, psi0=psi0, psi2=psi2,
                     residuals=residuals, periodicity=periodicity,
                     inner_psi2_phi2=inner, predicted_inner=predicted, uses_P=uses_P)


def _combo_slopes(Ta, TE, Tc, Qa, QE, Qc, jq, profile):
    p = profile.params

    def slopes(s):
        uxx = p.a - float(p.nonlinearity.f(s[0])) + p.c * s[0]
        d0 = Ta * s[5] - TE * s[3]
        d1 = jq * uxx
        d2 = (s[3] * (TE * Qc - QE * Tc) - s[5] * (Ta * Qc - Qa * Tc) + s[7] * (Ta * QE - Qa * TE))
        return np.array([d0, d1, d2])

    return slopes
