"""Parameter samplers shared by the test modules."""

from __future__ import annotations

import numpy as np

from gkdv_stability import Nonlinearity, WaveParameters


def well_levels(p: int, a: float, c: float):
    """(V at the right-hand well bottom, V at the nearest barrier) for f = u^(p+1).

    Critical points are the real roots of u^(p+1) - c u - a, found with
    numpy's companion-matrix solver; this is independent of the package's own
    turning-point search.
    """
    params = WaveParameters(a, 0.0, c, Nonlinearity.power(p))
    coeffs = np.zeros(p + 2)
    coeffs[0] = 1.0
    coeffs[-2] = -c
    coeffs[-1] = -a
    roots = np.roots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    minima = [r for r in real if params.d2V(r) > 0]
    bottom = max(minima)
    maxima = [r for r in real if r < bottom and params.d2V(r) < 0]
    barrier = params.V(max(maxima)) if maxima else np.inf
    return float(params.V(bottom)), float(barrier)


def make(p, a, E, c=1.0) -> WaveParameters:
    return WaveParameters(float(a), float(E), float(c), Nonlinearity.power(p))


def at_fraction(p, a, s, c=1.0) -> WaveParameters:
    """Wave whose energy sits a fraction s of the way from well bottom to barrier."""
    vmin, vbar = well_levels(p, a, c)
    return make(p, a, vmin + s * (vbar - vmin), c)


def random_params(rng: np.random.Generator, ps=(1, 2, 3, 5), s_range=(0.1, 0.9),
                  c_range=(0.5, 2.0)) -> WaveParameters:
    """Random admissible power-law wave: energy strictly inside the right-hand well."""
    p = int(rng.choice(ps))
    c = float(rng.uniform(*c_range))
    # a in its natural units c^(1 + 1/p), small enough to keep the barrier
    a = float(rng.uniform(-0.02, 0.05)) * c ** (1.0 + 1.0 / p)
    return at_fraction(p, a, float(rng.uniform(*s_range)), c)


# ten moderate-period sets used by several acceptance checks
GENERIC_SETS = [
    (1, 0.0, 0.3), (1, 0.02, 0.6), (2, 0.0, 0.5), (2, 0.01, 0.8), (3, 0.0, 0.4),
    (3, 0.02, 0.7), (5, 0.0, 0.5), (5, 0.01, 0.3), (6, 0.0, 0.6), (1, -0.01, 0.85),
]


def generic_params():
    return [at_fraction(p, a, s) for p, a, s in GENERIC_SETS]
