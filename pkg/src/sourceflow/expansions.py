"""Asymptotic expansions of the viscous source flow.

Dividing the radial Navier-Stokes equation by the viscosity k = 4 eta / 3 + zeta
gives

    (I v / r^3)(r v'' - 2 v') = k^{-1} d/dr ( I^2 v^2 / (2 r^4) + f(v) ).

*Singular series.*  With r = I^alpha x and v = I^beta w the equation becomes

    (w / x^3)(x w'' - 2 w') = k^{-1} d/dx ( I^{1-alpha} w^2/(2x^4) + I^{3 alpha - 2 beta - 1} f(I^beta w) )

and for |f(v)| <= C v^A the right side is small when 1 - alpha > 0 and
3 alpha - 2 beta - 1 + A beta > 0 (small I, eps = sqrt(I)) or both are
negative (large I, eps = 1/I).  Then w = w0 + eps w1 + O(eps^2).

*Regular series.*  For small I, v = v0 + I v1 + I^2 v2(r) + I^3 v3(r) with
v0 = f^{-1}(f0), v1 constant and

    v2 = -v0^2 / (2 f'(v0) r^4) + alpha1
    v3 = 2 k v0^3 / (f'(v0)^2 r^7) + v0 v1 (v0 f''(v0) - 2 f'(v0)) / (2 f'(v0)^2 r^4) + alpha2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import DomainError, NonInvertibleError, RegimeError, SingularityError
from .isentrope import IsentropeModel, f_of_v, f_prime, f_second, invertibility, stationary_points

SMALL_I = "SmallI"
LARGE_I = "LargeI"
_REGIMES = {"smalli": SMALL_I, "small": SMALL_I, "largei": LARGE_I, "large": LARGE_I}


def _regime(name):
    key = str(name).replace("_", "").replace("-", "").lower()
    if key not in _REGIMES:
        raise RegimeError(f"unknown regime {name!r}")
    return _REGIMES[key]


@dataclass(frozen=True)
class ScalingChoice:
    """Exponents of the stretching r = I^alpha x, v = I^beta w."""

    regime: str
    alpha: float
    beta: float
    A: float

    @property
    def viscous_exponent(self):
        """Exponent of I in front of the kinetic term, 1 - alpha."""
        return 1.0 - self.alpha

    @property
    def pressure_exponent(self):
        return 3.0 * self.alpha - 2.0 * self.beta - 1.0 + self.A * self.beta

    def feasible(self):
        a, b = self.viscous_exponent, self.pressure_exponent
        if self.regime == SMALL_I:
            return a > 0 and b > 0
        return a < 0 and b < 0

    def epsilon(self, I):
        if not I > 0:
            raise DomainError("I must be positive")
        return math.sqrt(I) if self.regime == SMALL_I else 1.0 / I


def growth_exponent(model: IsentropeModel):
    """A such that |f(v)| <= C v^A for large v; -2/n for both gases."""
    return -2.0 / model.n


def _feasible_search(regime, A, alpha_max=4, beta_max=8, den=4):
    """Lexicographically smallest (alpha, beta) on a 1/den grid satisfying the regime."""
    for i in range(alpha_max * den + 1):
        for j in range(beta_max * den + 1):
            ch = ScalingChoice(regime, i / den, j / den, A)
            if ch.feasible():
                return ch
    raise RegimeError(f"no feasible exponents for {regime} with A={A}")


def scaling_exponents(model: IsentropeModel, regime) -> ScalingChoice:
    regime = _regime(regime)
    A = growth_exponent(model)
    n = model.n
    if not model.is_vdw:
        alpha = 0.5 if regime == SMALL_I else 2.0
        choice = ScalingChoice(regime, alpha, n * (2 * alpha - 1) / (n + 1), A)
    elif regime == LARGE_I:
        if n != 3:
            raise RegimeError("large-I scaling for vdw is given only for n = 3")
        choice = ScalingChoice(regime, 2.0, 6.0, A)
    else:
        choice = _feasible_search(regime, A)
    if not choice.feasible():
        raise RegimeError(f"exponents {choice} violate the {regime} inequalities")
    return choice


# --- constants ---------------------------------------------------------------

@dataclass(frozen=True)
class SeriesCoefficients:
    """Free integration constants of both series (supplied by the caller)."""

    c1: float = 0.0
    c2: float = 1.0
    c3: float = 0.0
    c4: float = 0.0
    f0: float | None = None
    v1: float = 0.0
    alpha1: float = 0.0
    alpha2: float = 0.0

    def __post_init__(self):
        vals = [self.c1, self.c2, self.c3, self.c4, self.v1, self.alpha1, self.alpha2]
        if self.f0 is not None:
            vals.append(self.f0)
        if not all(math.isfinite(x) for x in vals):
            raise DomainError("series constants must be finite")


# --- singular series ---------------------------------------------------------

def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be positive")
    return x


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def _w0(x, co):
    return co.c1 * x**3 + co.c2, 3.0 * co.c1 * x**2, 6.0 * co.c1 * x


def _w1_poly(x, co, k):
    """Homogeneous plus kinetic part of w1: C3 x^3/3 - C1 x^2/(2k) + C4 - C2/(2k x)."""
    c1, c2, c3, c4 = co.c1, co.c2, co.c3, co.c4
    w = c3 * x**3 / 3.0 - c1 * x**2 / (2.0 * k) + c4 - c2 / (2.0 * k * x)
    dw = c3 * x**2 - c1 * x / k + c2 / (2.0 * k * x**2)
    d2w = 2.0 * c3 * x - c1 / k - c2 / (k * x**3)
    return w, dw, d2w


def _compose(G, dG, d2G, x, co):
    """Value and x-derivatives of G(w0(x))."""
    w0, dw0, d2w0 = _w0(x, co)
    g1 = dG(w0)
    return G(w0), g1 * dw0, d2G(w0) * dw0**2 + g1 * d2w0


def _pressure_part(model, x, co, k):
    """Particular solution G(w0) of (w0/x^3)(x G'' - 2G') = k^{-1} d/dx f(w0).

    Requires G''(w) = f'(w) / (3 C1 k w).
    """
    if co.c1 == 0:
        raise ZeroDivisionError("C1 = 0: the first-order singular term is undefined")
    n, c = model.n, model.c
    K = 1.0 / (3.0 * co.c1 * k)
    if not model.is_vdw:
        p = -2.0 / n
        A = -model.R * c * n / (6.0 * co.c1 * k)
        return _compose(lambda w: A * w**p, lambda w: A * p * w ** (p - 1.0),
                        lambda w: A * p * (p - 1.0) * w ** (p - 2.0), x, co)
    # vdW: double antiderivative of f'(w)/w is -4cn(3w-1)^{-2/n}/3 + 3/w
    p = -2.0 / n
    B = -4.0 * c * n / 3.0
    return _compose(
        lambda w: K * (B * (3 * w - 1) ** p + 3.0 / w),
        lambda w: K * (3 * B * p * (3 * w - 1) ** (p - 1.0) - 3.0 / w**2),
        lambda w: K * (9 * B * p * (p - 1.0) * (3 * w - 1) ** (p - 2.0) + 6.0 / w**3),
        x, co,
    )


def _series(x, eps, parts, derivs):
    w0 = parts[0]
    total = [w0[i] + eps * sum(p[i] for p in parts[1:]) for i in range(3)]
    if derivs:
        return tuple(_out(t) for t in total)
    return _out(total[0])


def singular_series_ideal(x, coeffs: SeriesCoefficients, eps, model: IsentropeModel, k=1.0, derivs=False):
    """w0 + eps w1 for the ideal gas.

    w1 = -R c n / (6 C1 k) w0^{-2/n} + C3 x^3/3 - C1 x^2/(2k) + C4 - C2/(2k x).
    With ``derivs`` the tuple (w, w', w'') is returned.
    """
    if model.is_vdw:
        raise DomainError("singular_series_ideal needs an ideal-gas model")
    x = _check_x(x)
    parts = [_w0(x, coeffs), _pressure_part(model, x, coeffs, k), _w1_poly(x, coeffs, k)]
    return _series(x, eps, parts, derivs)


def singular_series_vdw3(x, coeffs: SeriesCoefficients, eps, k=1.0, derivs=False):
    """w0 + eps w1 for the vdW gas (n = 3) at large I, where f drops out of w1.

    w1 = (2 x^4 C3 k - 3 C1 x^3 + 6 C4 k x - 3 C2) / (6 x k).
    """
    x = _check_x(x)
    parts = [_w0(x, coeffs), _w1_poly(x, coeffs, k)]
    return _series(x, eps, parts, derivs)


def singular_series(model: IsentropeModel, choice: ScalingChoice, x, coeffs, eps, k=1.0, derivs=False):
    """Dispatch to the right singular series.

    For vdW at small I (beta = 0) the pressure term enters w1 as well and the
    particular solution G(w0) above is added.
    """
    if not model.is_vdw:
        return singular_series_ideal(x, coeffs, eps, model, k, derivs)
    if choice.regime == LARGE_I:
        return singular_series_vdw3(x, coeffs, eps, k, derivs)
    if choice.beta != 0 or choice.alpha != 0.5:
        raise RegimeError("vdw small-I series implemented only for alpha = 1/2, beta = 0")
    x = _check_x(x)
    parts = [_w0(x, coeffs), _pressure_part(model, x, coeffs, k), _w1_poly(x, coeffs, k)]
    return _series(x, eps, parts, derivs)


def singular_residual(model, choice: ScalingChoice, I, x, w, dw, d2w, k=1.0):
    """Residual of the full scaled equation at (x, w, w', w'')."""
    x = np.asarray(x, dtype=float)
    a, b = choice.viscous_exponent, 3.0 * choice.alpha - 2.0 * choice.beta - 1.0
    s = I**choice.beta
    lhs = (w / x**3) * (x * d2w - 2.0 * dw)
    kin = I**a * (w * dw / x**4 - 2.0 * w**2 / x**5)
    pres = I**b * s * f_prime(model, s * w) * dw
    return _out(lhs - (kin + pres) / k)


# --- regular series ----------------------------------------------------------

def f_roots(model: IsentropeModel, f0, v_max=1e8):
    """All roots of f(v) = f0 (sorted), split at the stationary points of f."""
    lo = model.v_pole + 10.0 * max(model.pole_tol, 1e-14)
    edges = [lo, *stationary_points(model), v_max]
    g = lambda v: f_of_v(model, v) - f0  # noqa: E731
    roots = []
    for a, b in zip(edges[:-1], edges[1:]):
        ga, gb = g(a), g(b)
        if ga == 0:
            roots.append(a)
        elif ga * gb < 0:
            roots.append(brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))
    return roots


def invert_f(model: IsentropeModel, f0):
    """v0 = f^{-1}(f0) for a globally invertible model."""
    f0 = float(f0)
    if not model.is_vdw:
        if not f0 > 0:
            raise DomainError("f0 outside the range (0, inf) of the ideal-gas f")
        return (2.0 * f0 / (model.R * model.c * (model.n + 2.0))) ** (-0.5 * model.n)
    if not invertibility(model).globally_invertible:
        raise NonInvertibleError("f is not monotone for this entropy level", f_roots(model, f0))
    if not f0 > 0:
        raise DomainError("f0 outside the range (0, inf) of the vdW f")
    g = lambda u: f_of_v(model, model.v_pole + u) - f0  # noqa: E731
    a, b = 1e-3, 1.0
    while g(a) < 0:
        a *= 1e-3
        if a < model.pole_tol:
            raise DomainError("f0 too large to bracket")
    while g(b) > 0:
        b *= 10.0
        if b > 1e300:
            raise DomainError("f0 too small to bracket")
    u = brentq(g, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return model.v_pole + u


def _regular_terms(model, coeffs, k):
    if coeffs.f0 is None:
        raise DomainError("regular series needs f0")
    v0 = invert_f(model, coeffs.f0)
    f1 = f_prime(model, v0)
    if f1 == 0:
        raise SingularityError("f'(v0) = 0")
    f2 = f_second(model, v0)
    a2 = -v0**2 / (2.0 * f1)
    a3 = 2.0 * k * v0**3 / f1**2
    b3 = v0 * coeffs.v1 * (v0 * f2 - 2.0 * f1) / (2.0 * f1**2)
    return v0, a2, a3, b3


def regular_series(model: IsentropeModel, coeffs: SeriesCoefficients, I, r, order=3, k=1.0, derivs=False):
    """Regular small-I series truncated after the I^order term.

    With ``derivs`` returns (v, v', v'') in r.
    """
    if order not in (0, 1, 2, 3):
        raise DomainError("order must be 0..3")
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("r must be positive")
    v0, a2, a3, b3 = _regular_terms(model, coeffs, k)
    v = v0 + 0.0 * r
    dv = 0.0 * r
    d2v = 0.0 * r
    if order >= 1:
        v = v + I * coeffs.v1
    if order >= 2:
        v = v + I**2 * (a2 / r**4 + coeffs.alpha1)
        dv = dv - 4.0 * I**2 * a2 / r**5
        d2v = d2v + 20.0 * I**2 * a2 / r**6
    if order >= 3:
        v = v + I**3 * (a3 / r**7 + b3 / r**4 + coeffs.alpha2)
        dv = dv + I**3 * (-7.0 * a3 / r**8 - 4.0 * b3 / r**5)
        d2v = d2v + I**3 * (56.0 * a3 / r**9 + 20.0 * b3 / r**6)
    if derivs:
        return _out(v), _out(dv), _out(d2v)
    return _out(v)


def regular_terms(model, coeffs, r, k=1.0):
    """Individual terms (v0, v1, v2(r), v3(r))."""
    r = np.asarray(r, dtype=float)
    v0, a2, a3, b3 = _regular_terms(model, coeffs, k)
    return v0, coeffs.v1, _out(a2 / r**4 + coeffs.alpha1), _out(a3 / r**7 + b3 / r**4 + coeffs.alpha2)


def far_field_volume(model, coeffs, I):
    """v at r = infinity of the order-2 truncation, v0 + I v1 + I^2 alpha1."""
    return invert_f(model, coeffs.f0) + I * coeffs.v1 + I**2 * coeffs.alpha1


def regular_euler_residual(model, coeffs, I, r, order=2, k=1.0):
    """I^2 F of the truncated series with C0 = I^{-2} f(v_inf).

    Multiplying by I^2 keeps the residual finite as I -> 0; it is O(I^3),
    or O(I^4) when v1 = 0.
    """
    v = regular_series(model, coeffs, I, r, order=order, k=k)
    r = np.asarray(r, dtype=float)
    v_inf = far_field_volume(model, coeffs, I)
    return _out(I**2 * v**2 / (2.0 * r**4) + f_of_v(model, v) - f_of_v(model, v_inf))


def regular_ode_residual(model, coeffs, I, r, order=3, k=1.0):
    """Residual of the viscous equation (divided by k) on the truncated series."""
    v, dv, d2v = regular_series(model, coeffs, I, r, order=order, k=k, derivs=True)
    r = np.asarray(r, dtype=float)
    lhs = (I * v / r**3) * (r * d2v - 2.0 * dv)
    rhs = (I**2 * (v * dv / r**4 - 2.0 * v**2 / r**5) + f_prime(model, v) * dv) / k
    return _out(lhs - rhs)


# --- order fitting -----------------------------------------------------------

def fit_order(params, errors):
    """Least-squares slope of log|error| against log(param)."""
    p = np.asarray(params, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    if p.size < 2 or np.any(p <= 0) or np.any(e <= 0):
        raise DomainError("order fit needs >= 2 positive parameters and nonzero errors")
    return float(np.polyfit(np.log(p), np.log(e), 1)[0])


def order_report(regime, choice, fitted_order, threshold):
    return {
        "regime": regime,
        "alpha": None if choice is None else choice.alpha,
        "beta": None if choice is None else choice.beta,
        "fitted_order": fitted_order,
        "pass": bool(fitted_order >= threshold),
    }


def singular_order_check(model, regime, coeffs, x, eps_values=(1e-2, 5e-3, 2.5e-3), k=1.0, threshold=1.8):
    """Fit the order in eps of the max residual of the singular series over ``x``."""
    choice = scaling_exponents(model, regime)
    x = _check_x(x)
    errs = []
    for eps in eps_values:
        I = eps**2 if choice.regime == SMALL_I else 1.0 / eps
        w, dw, d2w = singular_series(model, choice, x, coeffs, eps, k, derivs=True)
        errs.append(np.max(np.abs(singular_residual(model, choice, I, x, w, dw, d2w, k))))
    return order_report(choice.regime, choice, fit_order(eps_values, errs), threshold)


def regular_order_check(model, coeffs, r, I_values=(1e-2, 5e-3, 2.5e-3), k=1.0, threshold=2.5):
    """Fit the order in I of the max scaled Euler residual of the order-2 series."""
    errs = [np.max(np.abs(regular_euler_residual(model, coeffs, I, r, 2, k))) for I in I_values]
    return order_report("regular", None, fit_order(I_values, errs), threshold)
