"""Gas models restricted to a fixed entropy level.

On the isentrope sigma = R sigma0 every quantity is a function of the
specific volume v alone.  The central object for the flow problem is

    f(v) = integral of v p'(v) dv,

fixed here to the closed forms below (no extra integration constant):

* ideal:  f = R c (n/2 + 1) v^{-2/n}
* vdW:    f = 8c / (3 (3v-1)^{2/n+1}) + 4c(n+2) / (3 (3v-1)^{2/n}) - 6/v
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exceptions import DomainError
from .thermo import VDW_POLE_TOL, MassieuPotential, ideal_potential, vdw_potential

IDEAL = "ideal"
VDW = "vdw-reduced"
_KIND_ALIASES = {"ideal": IDEAL, "vdw": VDW, "vdw-reduced": VDW}


@dataclass(frozen=True)
class IsentropeModel:
    """A gas model at entropy level ``sigma0``.

    For the ideal gas ``c = exp(2 sigma0 / n)``; for the reduced van der
    Waals gas ``c = exp(3 sigma0 / (4 n))`` and ``R`` is ignored (reduced
    units).
    """

    kind: str
    n: float
    sigma0: float
    R: float = 1.0
    pole_tol: float = VDW_POLE_TOL
    c: float = field(init=False)

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind)
        if kind is None:
            raise DomainError(f"unknown gas kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not self.n > 0:
            raise DomainError("n must be positive")
        if kind == IDEAL:
            if not self.R > 0:
                raise DomainError("R must be positive")
            c = math.exp(2.0 * self.sigma0 / self.n)
        else:
            object.__setattr__(self, "R", 1.0)
            c = math.exp(3.0 * self.sigma0 / (4.0 * self.n))
        if not (c > 0 and math.isfinite(c)):
            raise DomainError(f"entropy constant c={c} is not a positive finite number")
        object.__setattr__(self, "c", c)

    @classmethod
    def from_c(cls, kind, n, c, R=1.0, **kw):
        """Build a model from the entropy constant ``c`` instead of sigma0."""
        if not c > 0:
            raise DomainError("c must be positive")
        kind = _KIND_ALIASES.get(kind, kind)
        sigma0 = 0.5 * n * math.log(c) if kind == IDEAL else 4.0 * n / 3.0 * math.log(c)
        return cls(kind, n, sigma0, R, **kw)

    @property
    def is_vdw(self):
        return self.kind == VDW

    @property
    def v_pole(self):
        """Left end of the physical v-domain (0 for ideal, 1/3 for vdW)."""
        return 1.0 / 3.0 if self.is_vdw else 0.0

    @property
    def potential(self) -> MassieuPotential:
        return vdw_potential(self.n) if self.is_vdw else ideal_potential(self.n, self.R)

    def check(self, v):
        v = np.asarray(v, dtype=float)
        lo = 1.0 / 3.0 + self.pole_tol if self.is_vdw else 0.0
        if np.any(~np.isfinite(v)) or np.any(v <= lo):
            raise DomainError(f"{self.kind}: v must exceed {lo}, got {v}")
        return v


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def temperature_on_isentrope(m: IsentropeModel, v):
    v = m.check(v)
    if m.is_vdw:
        return _ret(m.c * (3.0 * v - 1.0) ** (-2.0 / m.n))
    return _ret(m.c * v ** (-2.0 / m.n))


def pressure_on_isentrope(m: IsentropeModel, v):
    v = m.check(v)
    a = 1.0 + 2.0 / m.n
    if m.is_vdw:
        return _ret(8.0 * m.c / (3.0 * v - 1.0) ** a - 3.0 / v**2)
    return _ret(m.R * m.c * v ** (-a))


def pressure_derivative(m: IsentropeModel, v):
    """dp/dv along the isentrope."""
    v = m.check(v)
    a = 1.0 + 2.0 / m.n
    if m.is_vdw:
        return _ret(-24.0 * a * m.c * (3.0 * v - 1.0) ** (-a - 1.0) + 6.0 / v**3)
    return _ret(-a * m.R * m.c * v ** (-a - 1.0))


def f_of_v(m: IsentropeModel, v):
    v = m.check(v)
    n, c = m.n, m.c
    if m.is_vdw:
        s = 3.0 * v - 1.0
        return _ret(8.0 * c / (3.0 * s ** (2.0 / n + 1.0)) + 4.0 * c * (n + 2.0) / (3.0 * s ** (2.0 / n)) - 6.0 / v)
    return _ret(m.R * c * (0.5 * n + 1.0) * v ** (-2.0 / n))


def f_prime(m: IsentropeModel, v):
    """f'(v) = v p'(v)."""
    v = m.check(v)
    a = 1.0 + 2.0 / m.n
    if m.is_vdw:
        return _ret(-24.0 * a * m.c * v * (3.0 * v - 1.0) ** (-a - 1.0) + 6.0 / v**2)
    return _ret(-a * m.R * m.c * v ** (-a))


def f_second(m: IsentropeModel, v):
    v = m.check(v)
    a = 1.0 + 2.0 / m.n
    if m.is_vdw:
        s = 3.0 * v - 1.0
        # d/dv [v s^{-a-1}] = s^{-a-2} (s - 3(a+1) v)
        return _ret(-24.0 * a * m.c * s ** (-a - 2.0) * (s - 3.0 * (a + 1.0) * v) - 12.0 / v**3)
    return _ret(a * a * m.R * m.c * v ** (-a - 1.0))


# --- invertibility -----------------------------------------------------------

@dataclass(frozen=True)
class Invertibility:
    """Outcome of the monotonicity analysis of f.

    ``stationary_points`` is empty when f is globally invertible.
    """

    globally_invertible: bool
    stationary_points: tuple = ()


def critical_c(n):
    """Threshold on c above which the vdW f(v) is strictly decreasing.

    With alpha = 1 + 2/n the bound is (1+alpha)^(1+alpha) (2-alpha)^(2-alpha) / (4 alpha).
    For alpha > 2 (n < 2) f is never monotone and ``inf`` is returned.
    """
    alpha = 1.0 + 2.0 / n
    if alpha > 2.0:
        return math.inf
    return (1.0 + alpha) ** (1.0 + alpha) * (2.0 - alpha) ** (2.0 - alpha) / (4.0 * alpha)


def stationary_points(m: IsentropeModel, v_max=1e3, points=10_000, xtol=1e-12):
    """Roots of f'(v) = 0, bracketed on a log grid and refined by bisection."""
    if not m.is_vdw:
        return ()
    a = 1.0 + 2.0 / m.n
    if a < 2.0:
        v_max = max(v_max, 10.0 / (2.0 - a))
    delta = max(m.pole_tol, 1e-9)
    v = 1.0 / 3.0 + np.geomspace(delta, v_max - 1.0 / 3.0, points)
    d = f_prime(m, v)
    s = np.sign(d)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    roots = [v[i] for i in np.nonzero(d == 0)[0]]
    for i in idx:
        roots.append(brentq(lambda x: f_prime(m, x), v[i], v[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    return tuple(sorted(roots))


def invertibility(m: IsentropeModel) -> Invertibility:
    if not m.is_vdw:
        return Invertibility(True)
    if m.c > critical_c(m.n):
        return Invertibility(True)
    return Invertibility(False, stationary_points(m))
