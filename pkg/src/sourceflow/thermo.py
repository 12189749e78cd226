"""Thermodynamic states generated by a Massieu-Planck potential phi(v, T).

Given phi, the state equations are

    sigma = R (phi + T phi_T),   p = R T phi_v,   e = R T^2 phi_T

and a state is applicable where phi_vv < 0 and phi_TT + 2 phi_T / T > 0.

Two potentials are provided.  Both are normalised so that ``sigma`` equals
the textbook entropy exactly (no extra additive constant):

* ideal gas:   phi = ln v + (n/2) ln T - n/2,  sigma = R ln(T^{n/2} v)
* van der Waals (reduced units, R = 1):
      phi = (8/3) ln(3v - 1) + (4n/3) ln T - 4n/3 + 3/(T v)
  giving p = 8T/(3v-1) - 3/v^2, e = 4nT/3 - 3/v, sigma = ln(T^{4n/3}(3v-1)^{8/3}).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DomainError

#: Smallest admissible distance from the van der Waals pole at v = 1/3.
VDW_POLE_TOL = 1e-12


@dataclass(frozen=True)
class MassieuPotential:
    """A potential phi(v, T) together with its analytic partial derivatives."""

    label: str
    gas_constant: float
    evaluate: Callable
    phi_v: Callable
    phi_T: Callable
    phi_vv: Callable
    phi_TT: Callable
    phi_vT: Callable
    v_min: float = 0.0
    n: float | None = None

    def check_domain(self, v, T):
        v = np.asarray(v, dtype=float)
        T = np.asarray(T, dtype=float)
        if np.any(~np.isfinite(v)) or np.any(~np.isfinite(T)):
            raise DomainError("v and T must be finite")
        if np.any(T <= 0):
            raise DomainError(f"temperature must be positive, got {T}")
        if np.any(v <= self.v_min):
            raise DomainError(f"{self.label}: specific volume must exceed {self.v_min}, got {v}")


@dataclass(frozen=True)
class StatePoint:
    e: float
    v: float
    T: float
    p: float
    sigma: float


def ideal_potential(n, R=1.0):
    """Massieu-Planck potential of an ideal gas with ``n`` degrees of freedom."""
    if n <= 0 or R <= 0:
        raise DomainError("n and R must be positive")
    h = 0.5 * n
    return MassieuPotential(
        label="ideal",
        gas_constant=float(R),
        evaluate=lambda v, T: np.log(v) + h * np.log(T) - h,
        phi_v=lambda v, T: 1.0 / v,
        phi_T=lambda v, T: h / T,
        phi_vv=lambda v, T: -1.0 / v**2,
        phi_TT=lambda v, T: -h / T**2,
        phi_vT=lambda v, T: 0.0 * v * T,
        v_min=0.0,
        n=float(n),
    )


def vdw_potential(n):
    """Reduced van der Waals potential; the critical point is (1, 1, 1, 1, 1) for n = 3."""
    if n <= 0:
        raise DomainError("n must be positive")
    a = 4.0 * n / 3.0
    return MassieuPotential(
        label="vdw-reduced",
        gas_constant=1.0,
        evaluate=lambda v, T: 8.0 / 3.0 * np.log(3.0 * v - 1.0) + a * np.log(T) - a + 3.0 / (T * v),
        phi_v=lambda v, T: 8.0 / (3.0 * v - 1.0) - 3.0 / (T * v**2),
        phi_T=lambda v, T: a / T - 3.0 / (T**2 * v),
        phi_vv=lambda v, T: -24.0 / (3.0 * v - 1.0) ** 2 + 6.0 / (T * v**3),
        phi_TT=lambda v, T: -a / T**2 + 6.0 / (T**3 * v),
        phi_vT=lambda v, T: 3.0 / (T**2 * v**2),
        v_min=1.0 / 3.0 + VDW_POLE_TOL,
        n=float(n),
    )


def state_from_potential(phi: MassieuPotential, v, T) -> StatePoint:
    """Evaluate (e, v, T, p, sigma) on the Legendrian manifold defined by ``phi``."""
    phi.check_domain(v, T)
    R = phi.gas_constant
    phT = phi.phi_T(v, T)
    return StatePoint(
        e=R * T**2 * phT,
        v=v,
        T=T,
        p=R * T * phi.phi_v(v, T),
        sigma=R * (phi.evaluate(v, T) + T * phT),
    )


def applicability(phi: MassieuPotential, v, T):
    """True where both stability inequalities hold (strictly)."""
    phi.check_domain(v, T)
    ok = (phi.phi_vv(v, T) < 0) & (phi.phi_TT(v, T) + 2.0 * phi.phi_T(v, T) / T > 0)
    return bool(ok) if np.ndim(ok) == 0 else ok


def entropy_level(phi: MassieuPotential, v, T):
    """Dimensionless entropy sigma / R = phi + T phi_T."""
    phi.check_domain(v, T)
    return phi.evaluate(v, T) + T * phi.phi_T(v, T)
