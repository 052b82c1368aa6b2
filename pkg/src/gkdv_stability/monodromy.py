"""Monodromy matrix of the linearized gKdV operator and the periodic Evans function.

The eigenvalue problem ``d/dx L[u] v = mu v`` with ``L = -d_xx - f'(u) + c`` is
written as the first-order system ``Phi_x = H(x; mu) Phi`` whose period map
``M(mu) = Phi(T, mu)`` is the monodromy matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import DetDrift, GenericityViolation, IntegratorFailure
from .profile import GradientSet, ProfileSamples

__all__ = [
    "Monodromy", "MonodromyDerivatives", "ClosedFormM0", "coefficient_matrix",
    "integrate_monodromy", "evans", "evans_direct", "closed_form_m0", "monodromy_derivatives",
    "monodromy_with_derivative", "monodromy_batch", "jordan_multiplicities",
    "floquet_multipliers",
]

# constant mu-derivative of H: -1 in entry (3, 1)
H_MU = np.zeros((3, 3))
H_MU[2, 0] = -1.0


@dataclass(frozen=True)
class Monodromy:
    mu: complex
    matrix: np.ndarray
    det_residual: float

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @classmethod
    def synthetic(cls, mu: complex, matrix) -> "Monodromy":
        m = np.asarray(matrix, dtype=complex)
        return cls(complex(mu), m, float(abs(np.linalg.det(m) - 1.0)))


@dataclass(frozen=True)
class MonodromyDerivatives:
    """M(0) and its first three mu-derivatives at mu = 0."""

    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray

    @property
    def tr1(self) -> float:
        return float(np.trace(self.M1).real)

    @property
    def tr2(self) -> float:
        return float(np.trace(self.M2).real)

    @property
    def tr3(self) -> float:
        return float(np.trace(self.M3).real)

    @property
    def traces(self) -> Tuple[float, float, float]:
        return self.tr1, self.tr2, self.tr3


@dataclass(frozen=True)
class ClosedFormM0:
    U00: np.ndarray
    update_row: np.ndarray      # (V'(u_-) T_a, V'(u_-) T_E)
    UT0: np.ndarray
    M0: np.ndarray
    N: np.ndarray               # U00^{-1} M0 U00
    sigma: float
    kernel_basis: np.ndarray    # columns spanning Ker(N - I)
    jordan: Tuple[int, int]     # (algebraic, geometric) multiplicity of eigenvalue 1
    det_U00: float


def _profile_uux(profile: ProfileSamples, x):
    s = profile.evaluator(x)
    return s[0], s[1]


def coefficient_matrix(x: float, mu: complex, profile: ProfileSamples) -> np.ndarray:
    """Companion matrix H(x; mu) of the third-order linearized problem."""
    if not (-1e-12 * profile.T <= x <= profile.T * (1 + 1e-12)):
        raise ValueError(f"x={x} outside [0, T={profile.T}]")
    nl = profile.params.nonlinearity
    u, ux = _profile_uux(profile, x)
    H = np.zeros((3, 3), dtype=complex)
    H[0, 1] = 1.0
    H[1, 2] = 1.0
    H[2, 0] = -mu - ux * float(nl.d2f(u))
    H[2, 1] = -float(nl.df(u)) + profile.params.c
    return H


def _coefficients(profile: ProfileSamples, x):
    nl = profile.params.nonlinearity
    u, ux = _profile_uux(profile, x)
    return -ux * nl.d2f(u), -nl.df(u) + profile.params.c


def _apply_H(h31, h32, mu, Y):
    # H(x; mu) @ Y for Y of shape (3, k) using the companion structure
    out = np.empty_like(Y)
    out[0] = Y[1]
    out[1] = Y[2]
    out[2] = (h31 - mu) * Y[0] + h32 * Y[1]
    return out


def _solve_matrix_ode(profile, mu, n_blocks, tol):
    """Integrate Phi and its first n_blocks - 1 mu-derivatives from Phi(0) = I."""
    real = np.isreal(mu)
    dtype = float if real else complex
    mu = float(np.real(mu)) if real else complex(mu)
    y0 = np.zeros((n_blocks, 3, 3), dtype=dtype)
    y0[0] = np.eye(3)

    def rhs(x, y):
        Y = y.reshape(n_blocks, 3, 3)
        h31, h32 = _coefficients(profile, x)
        out = np.empty_like(Y)
        out[0] = _apply_H(h31, h32, mu, Y[0])
        for k in range(1, n_blocks):
            # d^k/dmu^k of H Phi: H Phi^(k) + k H_mu Phi^(k-1)
            out[k] = _apply_H(h31, h32, mu, Y[k])
            out[k][2] -= k * Y[k - 1][0]
        return out.ravel()

    sol = integrate.solve_ivp(rhs, (0.0, profile.T), y0.ravel(), method="DOP853",
                              rtol=tol, atol=tol)
    if not sol.success:
        raise IntegratorFailure(sol.message)
    return sol.y[:, -1].reshape(n_blocks, 3, 3)


def integrate_monodromy(profile: ProfileSamples, mu: complex, tol: float = 1e-11,
                        check_det: bool = True) -> Monodromy:
    """M(mu) = Phi(T, mu) by adaptive integration of the 9-component matrix ODE.

    Raises
    ------
    DetDrift
        |det M - 1| exceeds 100 tol (scaled by |M|^2 for growing solutions).
    """
    if tol < 1e-13:
        raise ValueError("tol below 1e-13 is not attainable in double precision")
    M = _solve_matrix_ode(profile, mu, 1, tol)[0].astype(complex)
    res = float(abs(np.linalg.det(M) - 1.0))
    if check_det and res > 100 * tol * max(1.0, np.linalg.norm(M, 2)) ** 2:
        raise DetDrift(f"|det M - 1| = {res:.2e} at mu = {mu}")
    return Monodromy(complex(mu), M, res)


def monodromy_with_derivative(profile: ProfileSamples, mu: complex,
                              tol: float = 1e-11) -> Tuple[np.ndarray, np.ndarray]:
    """M(mu) and dM/dmu(mu) from the augmented variational system."""
    Y = _solve_matrix_ode(profile, mu, 2, tol).astype(complex)
    return Y[0], Y[1]


def monodromy_derivatives(profile: ProfileSamples, order: int = 3,
                          tol: float = 1e-12) -> MonodromyDerivatives:
    """M(0), M_mu(0), M_mumu(0), M_mumumu(0) from the augmented system at mu = 0."""
    if not 1 <= order <= 3:
        raise ValueError("order must be 1, 2 or 3")
    Y = _solve_matrix_ode(profile, 0.0, order + 1, tol)
    blocks = [Y[k] for k in range(order + 1)] + [np.full((3, 3), np.nan)] * (3 - order)
    return MonodromyDerivatives(*blocks)


def evans_direct(M: np.ndarray, lam: complex) -> complex:
    return complex(np.linalg.det(M - lam * np.eye(3)))


def evans(mono: Monodromy, mono_neg: Monodromy, lam: complex) -> complex:
    """D(mu, lambda) = -lambda^3 + a(mu) lambda^2 - a(-mu) lambda + 1."""
    a_pos = mono.trace
    a_neg = mono_neg.trace
    D = -lam ** 3 + a_pos * lam ** 2 - a_neg * lam + 1.0
    if __debug__:
        direct = evans_direct(mono.matrix, lam)
        scale = max(1.0, abs(lam) ** 3, abs(a_pos * lam ** 2), abs(a_neg * lam))
        if abs(D - direct) > 1e-7 * scale:
            raise AssertionError(
                f"trace formula {D} disagrees with det(M - lambda I) = {direct}")
    return D


def jordan_multiplicities(M: np.ndarray, rel_cutoff: float = 1e-8) -> Tuple[int, int]:
    """(algebraic, geometric) multiplicity of the eigenvalue 1 of a 3x3 matrix.

    Both are nullities: geometric of (M - I), algebraic of (M - I)^3, with rank
    decided by singular values below ``rel_cutoff`` times the largest one.
    """
    A = np.asarray(M) - np.eye(3)
    scale = max(1.0, float(np.linalg.norm(M, 2)))

    def nullity(B, ref):
        s = np.linalg.svd(B, compute_uv=False)
        return int(np.sum(s <= rel_cutoff * ref))

    geometric = nullity(A, scale)
    algebraic = nullity(np.linalg.matrix_power(A, 3), scale ** 3)
    return algebraic, geometric


def closed_form_m0(profile: ProfileSamples, grads: GradientSet,
                   tol: float = 1e-12) -> ClosedFormM0:
    """Monodromy at mu = 0 from the tangent vectors u_x, u_a, u_E of the wave family.

    Raises
    ------
    GenericityViolation
        T_a and T_E both vanish, so the Jordan analysis does not apply.
    """
    if not profile.has_variational:
        raise ValueError("closed_form_m0 needs a profile with variational derivatives")
    p = profile.params
    nl = p.nonlinearity
    um = profile.turning_points.u_minus
    vpm = profile.turning_points.v_prime_minus
    dum = profile.du_minus
    k = p.c - float(nl.df(um))
    U00 = np.array([
        [0.0, dum["a"], dum["E"]],
        [p.a - float(nl.f(um)) + p.c * um, 0.0, 0.0],
        [0.0, 1.0 + k * dum["a"], k * dum["E"]],
    ])
    det_u = float(np.linalg.det(U00))
    if abs(det_u + 1.0) > 1e-7:
        raise AssertionError(f"det U(0,0) = {det_u}, expected -1")
    Ta, TE = grads["T_a"], grads["T_E"]
    row = np.array([vpm * Ta, vpm * TE])
    UT0 = U00.copy()
    UT0[1, 1:] += row
    M0 = UT0 @ np.linalg.inv(U00)
    N = np.linalg.solve(U00, M0 @ U00)
    if abs(Ta) + abs(TE) <= tol * max(1.0, abs(grads.values.T)):
        raise GenericityViolation("T_a and T_E vanish simultaneously")
    sigma = Ta ** 2 + TE ** 2
    kernel = np.array([[1.0, 0.0], [0.0, TE], [0.0, -Ta]])
    return ClosedFormM0(U00=U00, update_row=row, UT0=UT0, M0=M0, N=N, sigma=sigma,
                        kernel_basis=kernel, jordan=jordan_multiplicities(M0), det_U00=det_u)


def floquet_multipliers(M: np.ndarray) -> np.ndarray:
    return np.linalg.eigvals(M)


def monodromy_batch(profile: ProfileSamples, mus: Sequence[complex],
                    n_steps: int = 4000) -> np.ndarray:
    """M(mu) for many mu at once with a fixed-step classical RK4 sweep.

    Intended for coarse scans (sign detection); use :func:`integrate_monodromy`
    for accurate single evaluations.
    """
    mus = np.asarray(mus, dtype=complex)
    real = bool(np.all(mus.imag == 0))
    mus = mus.real if real else mus
    T = profile.T
    h = T / n_steps
    xs = np.linspace(0.0, T, 2 * n_steps + 1)
    h31, h32 = _coefficients(profile, xs)
    Y = np.broadcast_to(np.eye(3), (mus.size, 3, 3)).astype(mus.dtype).copy()
    m = mus[:, None]

    def f(Yc, i):
        out = np.empty_like(Yc)
        out[:, 0] = Yc[:, 1]
        out[:, 1] = Yc[:, 2]
        out[:, 2] = (h31[i] - m) * Yc[:, 0] + h32[i] * Yc[:, 1]
        return out

    for k in range(n_steps):
        i0, i1, i2 = 2 * k, 2 * k + 1, 2 * k + 2
        k1 = f(Y, i0)
        k2 = f(Y + 0.5 * h * k1, i1)
        k3 = f(Y + 0.5 * h * k2, i1)
        k4 = f(Y + h * k3, i2)
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return Y.astype(complex)
