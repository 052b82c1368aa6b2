"""Nonlinearities f(u) for gKdV and the wave-parameter triple (a, E, c)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Func = Callable[[np.ndarray], np.ndarray]


def _numeric_derivative(g: Func, scale: float = 1.0) -> Func:
    # fourth-order central difference; only used when the caller omits a derivative
    def dg(u):
        u = np.asarray(u, dtype=float)
        h = 1e-3 * np.maximum(scale, np.abs(u))
        return (-g(u + 2 * h) + 8 * g(u + h) - 8 * g(u - h) + g(u - 2 * h)) / (12 * h)

    return dg


@dataclass(frozen=True)
class Nonlinearity:
    """A smooth nonlinearity f with antiderivative F (F(0) = 0) and derivatives.

    Use :meth:`power` for f(u) = u**(p+1) or :meth:`custom` for a user function.
    """

    kind: str
    f: Func = field(repr=False)
    F: Func = field(repr=False)
    df: Func = field(repr=False)
    d2f: Func = field(repr=False)
    d3f: Func = field(repr=False)
    p: Optional[float] = None
    name: str = ""

    @classmethod
    def power(cls, p: float) -> "Nonlinearity":
        if not p > 0:
            raise ValueError(f"power-law exponent must be positive, got {p}")
        p = float(p)

        def pw(u, k):
            u = np.asarray(u, dtype=float)
            if k == 0:
                return np.ones_like(u)
            return np.power(u, k)

        def coef_pow(c, k):
            # c * u**k, with c == 0 giving exact zeros (avoids 0 * inf at u = 0)
            def g(u):
                u = np.asarray(u, dtype=float)
                if c == 0.0:
                    return np.zeros_like(u)
                return c * pw(u, k)

            return g

        return cls(
            kind="power",
            f=coef_pow(1.0, p + 1),
            F=coef_pow(1.0 / (p + 2), p + 2),
            df=coef_pow(p + 1, p),
            d2f=coef_pow((p + 1) * p, p - 1),
            d3f=coef_pow((p + 1) * p * (p - 1), p - 2),
            p=p,
            name=f"u^{p + 1:g}",
        )

    @classmethod
    def custom(cls, f: Func, F: Func, df: Optional[Func] = None,
               d2f: Optional[Func] = None, d3f: Optional[Func] = None,
               name: str = "custom") -> "Nonlinearity":
        """User-supplied nonlinearity; missing derivatives are differenced numerically."""
        df = df or _numeric_derivative(f)
        d2f = d2f or _numeric_derivative(df)
        d3f = d3f or _numeric_derivative(d2f)
        return cls(kind="custom", f=f, F=F, df=df, d2f=d2f, d3f=d3f, name=name)

    @property
    def is_power_law(self) -> bool:
        return self.kind == "power"

    @property
    def is_odd(self) -> bool:
        # u**(p+1) is odd exactly when p is an even integer
        return self.is_power_law and float(self.p).is_integer() and int(self.p) % 2 == 0


@dataclass(frozen=True)
class WaveParameters:
    """Integration constants (a, E, c) of the profile ODE plus the nonlinearity.

    ``seed`` is a point inside the potential well; it is required for custom
    nonlinearities and ignored for power laws.
    """

    a: float
    E: float
    c: float
    nonlinearity: Nonlinearity
    seed: Optional[float] = None

    def replace(self, **changes) -> "WaveParameters":
        values = dict(a=self.a, E=self.E, c=self.c,
                      nonlinearity=self.nonlinearity, seed=self.seed)
        values.update(changes)
        return WaveParameters(**values)

    def shifted(self, index: int, h: float) -> "WaveParameters":
        name = "aEc"[index]
        return self.replace(**{name: getattr(self, name) + h})

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.E, self.c])

    # effective potential V(u; a, c) = F(u) - c u^2 / 2 - a u and its derivatives
    def V(self, u):
        u = np.asarray(u, dtype=float)
        return self.nonlinearity.F(u) - 0.5 * self.c * u * u - self.a * u

    def dV(self, u):
        u = np.asarray(u, dtype=float)
        return self.nonlinearity.f(u) - self.c * u - self.a

    def d2V(self, u):
        u = np.asarray(u, dtype=float)
        return self.nonlinearity.df(u) - self.c

    def d3V(self, u):
        return self.nonlinearity.d2f(np.asarray(u, dtype=float))

    def d4V(self, u):
        return self.nonlinearity.d3f(np.asarray(u, dtype=float))
