"""Inviscid source flow.

The stationary Euler equations with a spherically symmetric source of
intensity I = J / (4 pi) integrate to the implicit relation

    F(r, v) = v^2 / (2 r^4) + f(v) / I^2 - C0 = 0,

where f is the isentrope function from :mod:`sourceflow.isentrope`.  For
fixed r the relation has (generically) two roots in v: the *higher* branch
(smaller v, density tends to rho_inf) and the *lower* branch (larger v,
density decays like r^-2).  Both meet at the fold radius r_min below which
no inviscid flow exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .exceptions import BranchLossError, DomainError, NoSolutionError, RegimeError
from .isentrope import (
    IsentropeModel,
    f_of_v,
    f_prime,
    pressure_on_isentrope,
    temperature_on_isentrope,
)

HIGHER = "higher"
LOWER = "lower"
_EPS = np.finfo(float).eps

#: Log-grid resolution of the root bracketing window.
BRACKET_CELLS = 4096
V_FLOOR = 1e-9
V_CEIL = 1e6


@dataclass(frozen=True)
class FlowConfig:
    """Source intensity plus calibration of the Euler constant C0.

    Pass exactly one of ``C0`` or ``rho_inf``.  After construction both are
    populated: ``rho_inf`` derived from ``C0`` is the far-field density of
    the higher branch.  ``rho_inf=0`` together with an explicit ``C0``
    selects the vacuum regime.
    """

    model: IsentropeModel
    I: float
    C0: float | None = None
    rho_inf: float | None = None

    def __post_init__(self):
        if not (self.I > 0 and math.isfinite(self.I)):
            raise DomainError(f"source intensity must be positive, got {self.I}")
        if self.C0 is None and self.rho_inf is None:
            raise RegimeError("one of C0 or rho_inf is required")
        if self.C0 is not None and self.rho_inf is not None:
            if self.rho_inf != 0.0:
                raise RegimeError("give either C0 or rho_inf, not both (rho_inf=0 marks the vacuum regime)")
            return
        if self.C0 is None:
            object.__setattr__(self, "C0", calibrate(self.model, self.I, self.rho_inf))
        else:
            object.__setattr__(self, "C0", float(self.C0))
            object.__setattr__(self, "rho_inf", _far_field_density(self.model, self.I, self.C0))

    @classmethod
    def from_reference(cls, model, I, r_ref, rho_ref):
        """Calibrate C0 from one point (r_ref, rho_ref) of the flow."""
        if r_ref <= 0 or rho_ref <= 0:
            raise DomainError("reference radius and density must be positive")
        v = 1.0 / rho_ref
        C0 = v**2 / (2.0 * r_ref**4) + f_of_v(model, v) / I**2
        return cls(model, I, C0=C0)

    @property
    def J(self):
        return 4.0 * math.pi * self.I

    @property
    def scale(self):
        return max(1.0, abs(self.C0))


@dataclass
class DensityProfile:
    """Sampled flow along one solution branch."""

    branch: str
    r: np.ndarray
    v: np.ndarray
    T: np.ndarray
    p: np.ndarray
    U: np.ndarray
    phase: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def rho(self):
        return 1.0 / self.v

    def __len__(self):
        return len(self.r)


# --- calibration -------------------------------------------------------------

def calibrate(model: IsentropeModel, I, rho_inf):
    """C0 from the density at infinity, C0 = f(1/rho_inf) / I^2."""
    if rho_inf is None or rho_inf == 0:
        raise RegimeError("rho_inf = 0 does not determine C0; supply C0 or a reference point")
    if not rho_inf > 0:
        raise DomainError(f"rho_inf must be positive, got {rho_inf}")
    if model.is_vdw and not rho_inf < 3.0:
        raise DomainError("van der Waals density must be below 3 (v > 1/3)")
    if model.is_vdw:
        return f_of_v(model, 1.0 / rho_inf) / I**2
    n = model.n
    return model.R * model.c * (n + 2.0) * rho_inf ** (2.0 / n) / (2.0 * I**2)


def calibrate_vdw_relation(model: IsentropeModel, I, rho_inf):
    """C0 from the density-at-infinity relation written directly in rho.

    3 C0 rho I^2 / 2 = 2c (3/rho - 1)^{-(1+2/n)} (3n + 6 - n rho) - 9 rho^2
    """
    if not model.is_vdw:
        raise DomainError("relation applies to the van der Waals model only")
    if not 0 < rho_inf < 3:
        raise DomainError("rho_inf must lie in (0, 3)")
    n, c, rho = model.n, model.c, rho_inf
    rhs = 2.0 * c * (3.0 / rho - 1.0) ** (-(1.0 + 2.0 / n)) * (3.0 * n + 6.0 - n * rho) - 9.0 * rho**2
    return 2.0 * rhs / (3.0 * rho * I**2)


def _far_field_density(model, I, C0):
    """Density of the higher branch as r -> inf (smallest root of f = I^2 C0)."""
    target = I**2 * C0
    if not model.is_vdw:
        if target <= 0:
            return 0.0
        n = model.n
        v0 = (2.0 * target / (model.R * model.c * (n + 2.0))) ** (-n / 2.0)
        return 1.0 / v0
    u = np.geomspace(V_FLOOR, V_CEIL, BRACKET_CELLS + 1)
    v = model.v_pole + u
    g = f_of_v(model, v) - target
    idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    if len(idx) == 0:
        return 0.0
    i = idx[0]
    v0 = brentq(lambda x: f_of_v(model, x) - target, v[i], v[i + 1], xtol=1e-15, rtol=4 * _EPS)
    return 1.0 / v0


# --- pointwise relations -----------------------------------------------------

def euler_residual(cfg: FlowConfig, r, v):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    v = np.asarray(v, dtype=float)
    out = v**2 / (2.0 * r**4) + f_of_v(cfg.model, v) / cfg.I**2 - cfg.C0
    return float(out) if np.ndim(out) == 0 else out


def euler_residual_dv(cfg: FlowConfig, r, v):
    """Partial derivative of F with respect to v."""
    return v / r**4 + f_prime(cfg.model, v) / cfg.I**2


def velocity(cfg: FlowConfig, r, v):
    """U(r) = I v / r^3; the radial speed is U r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    out = cfg.I * np.asarray(v, dtype=float) / r**3
    return float(out) if np.ndim(out) == 0 else out


def mass_flux(cfg: FlowConfig, r, v):
    """J = 4 pi r^3 U / v, identically 4 pi I."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(r <= 0) or np.any(v <= 0):
        raise DomainError("r and v must be positive")
    out = 4.0 * math.pi * cfg.I * np.ones(np.broadcast(r, v).shape)
    return float(out) if np.ndim(out) == 0 else out


# --- roots and folds ---------------------------------------------------------

def _v_window(cfg, r):
    # every root satisfies v^2/(2 r^4) <= C0 - min f / I^2; min f >= -18 for vdW
    fmin = 18.0 if cfg.model.is_vdw else 0.0
    bound = 2.0 * r**2 * math.sqrt(2.0 * (abs(cfg.C0) + fmin / cfg.I**2))
    return max(V_CEIL, bound)


def _polish(F, a, b, scale):
    x = brentq(F, a, b, xtol=1e-300, rtol=4 * _EPS, maxiter=200)
    return x


def solve_branches(cfg: FlowConfig, r, cells=BRACKET_CELLS):
    """All roots of F(r, .) = 0 in the model domain, ascending.

    Sign changes on a log grid are bisected; cells around interior minima
    of F that stay positive on the grid are searched for a hidden dip below
    zero, which resolves root pairs close to a fold.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    m = cfg.model
    vp = m.v_pole
    lo = max(V_FLOOR, m.pole_tol * 2) if m.is_vdw else V_FLOOR
    u = np.geomspace(lo, _v_window(cfg, r), cells + 1)
    v = vp + u
    with np.errstate(over="ignore"):
        g = euler_residual(cfg, r, v)

    def F(x):
        return euler_residual(cfg, r, x)

    brackets = []
    sg = np.sign(g)
    for i in np.nonzero(sg[:-1] == 0)[0]:
        brackets.append((v[i], v[i]))
    for i in np.nonzero(sg[:-1] * sg[1:] < 0)[0]:
        brackets.append((v[i], v[i + 1]))
    # interior local extrema without a sign change next to them
    gm, gc, gp = g[:-2], g[1:-1], g[2:]
    same = (sg[:-2] == sg[1:-1]) & (sg[1:-1] == sg[2:]) & (sg[1:-1] != 0)
    dips = same & (((sg[1:-1] > 0) & (gc <= gm) & (gc <= gp)) | ((sg[1:-1] < 0) & (gc >= gm) & (gc >= gp)))
    for i in np.nonzero(dips)[0] + 1:
        sgn = 1.0 if sg[i] > 0 else -1.0
        res = minimize_scalar(
            lambda x: sgn * F(x), bounds=(v[i - 1], v[i + 1]), method="bounded",
            options={"xatol": 1e-14 * v[i]},
        )
        # sgn * F < 0 at the extremum means a hidden root pair
        if sgn * res.fun <= 0 and sgn * F(res.x) <= 0:
            brackets.append((v[i - 1], res.x))
            brackets.append((res.x, v[i + 1]))
    roots = []
    for a, b in brackets:
        if a == b:
            roots.append(a)
            continue
        fa, fb = F(a), F(b)
        if fa == 0:
            roots.append(a)
        elif fb == 0:
            roots.append(b)
        elif fa * fb < 0:
            roots.append(_polish(F, a, b, cfg.scale))
        else:
            # tangency within round-off
            roots.append(a if abs(fa) < abs(fb) else b)
    roots = sorted(set(roots))
    return roots


def fold_points(cfg: FlowConfig, cells=BRACKET_CELLS):
    """All (r, v) with F = dF/dv = 0, sorted by r.

    Eliminating r gives f(v) - v f'(v)/2 - I^2 C0 = 0 on the set f'(v) < 0,
    then r^4 = -I^2 v / f'(v).
    """
    m = cfg.model
    target = cfg.I**2 * cfg.C0
    u = np.geomspace(max(V_FLOOR, 2 * m.pole_tol), V_CEIL * 1e3, cells + 1)
    v = m.v_pole + u

    def h(x):
        return f_of_v(m, x) - 0.5 * x * f_prime(m, x) - target

    with np.errstate(over="ignore"):
        g = h(v)
    out = []
    for i in range(cells):
        if np.sign(g[i]) * np.sign(g[i + 1]) <= 0 and np.isfinite(g[i]) and np.isfinite(g[i + 1]):
            if g[i] == 0:
                x = v[i]
            elif g[i + 1] == 0:
                continue
            else:
                x = brentq(h, v[i], v[i + 1], xtol=1e-300, rtol=4 * _EPS)
            fp = f_prime(m, x)
            if fp < 0:
                out.append(((-cfg.I**2 * x / fp) ** 0.25, x))
    return sorted(out)


def existence_radius(cfg: FlowConfig):
    """Smallest radius at which an inviscid solution exists.

    Returns ``math.inf`` when no radius admits a solution and ``0.0`` when
    solutions exist at every r > 0 (no lower bound).
    """
    m = cfg.model
    if not m.is_vdw:
        C0, I, n, R, c = cfg.C0, cfg.I, m.n, m.R, m.c
        if C0 <= 0:
            return math.inf
        rho_s = (2.0 * I**2 * n * C0 / (R * c * (n + 1.0) * (n + 2.0))) ** (n / 2.0)
        arg = 2.0 * rho_s**2 * (C0 - R * c * (n / 2.0 + 1.0) * rho_s ** (2.0 / n) / I**2)
        if arg <= 0:
            return math.inf
        return arg ** -0.25
    folds = fold_points(cfg)
    if folds:
        return folds[0][0]
    if solve_branches(cfg, 1e-6):
        return 0.0
    return math.inf


def min_residual(cfg: FlowConfig, r, points=2000):
    """min over v of I^2 F(r, v); a root exists at r iff this is <= 0."""
    m = cfg.model
    u = np.geomspace(max(V_FLOOR, 2 * m.pole_tol), _v_window(cfg, r), points)
    v = m.v_pole + u
    G = lambda x: cfg.I**2 * euler_residual(cfg, r, x)  # noqa: E731
    with np.errstate(over="ignore"):
        g = G(v)
    best = float(np.min(g))
    for i in np.nonzero((g[1:-1] <= g[:-2]) & (g[1:-1] <= g[2:]))[0] + 1:
        res = minimize_scalar(lambda s: G(m.v_pole + math.exp(s)), method="bounded",
                              bounds=(math.log(u[i - 1]), math.log(u[i + 1])), options={"xatol": 1e-13})
        best = min(best, float(res.fun))
    return best


def existence_radius_bisect(cfg: FlowConfig, rtol=1e-13):
    """Existence radius by bisection in r on the sign of :func:`min_residual`.

    F decreases in r for every fixed v, so solvability is monotone in r.
    Independent of the closed form and of the fold equations.
    """
    ok = lambda r: min_residual(cfg, r) <= 0  # noqa: E731
    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    lo = hi
    while ok(lo):
        lo *= 0.5
        if lo < 1e-12:
            return 0.0
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def fold_volume(cfg: FlowConfig):
    """Specific volume at which the two branches merge at r_min."""
    folds = fold_points(cfg)
    if not folds:
        raise NoSolutionError("no fold point")
    return folds[0][1]


# --- branch continuation -----------------------------------------------------

def _pick(roots, branch):
    return roots[0] if branch == HIGHER else roots[-1]


def _match(cfg, r, v_pred, parity, max_jump):
    roots = solve_branches(cfg, r)
    if len(roots) % 2:
        # a tangency collapsed a root pair; parity is ambiguous
        cands = roots
    else:
        cands = [x for k, x in enumerate(roots) if k % 2 == parity]
    if not cands:
        return None
    best = min(cands, key=lambda x: abs(math.log(x / v_pred)))
    if abs(math.log(best / v_pred)) > max_jump:
        return None
    return best


def _predict(hist, r):
    # linear extrapolation of log v in log r from the last two accepted points
    (r0, v0), (r1, v1) = hist
    if r0 is None:
        return v1
    slope = math.log(v1 / v0) / math.log(r1 / r0)
    return v1 * (r / r1) ** slope


def density_profile(cfg: FlowConfig, r_grid, branch=HIGHER, max_jump=0.05, min_step=1e-12):
    """Follow one branch across ``r_grid``.

    The first point picks the smallest (``higher``) or largest (``lower``)
    root.  Each later point takes the root of the same fold parity nearest
    to a log-log linear predictor; if it misses the prediction by more than
    ``max_jump`` in log v the step is halved.  When
    halving stalls the branch has ended at a fold and
    :class:`BranchLossError` is raised.
    """
    if branch not in (HIGHER, LOWER):
        raise ValueError(f"branch must be 'higher' or 'lower', got {branch!r}")
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or len(r_grid) < 1:
        raise ValueError("r_grid must be a non-empty 1-D array")
    if np.any(np.diff(r_grid) <= 0) or r_grid[0] <= 0:
        raise ValueError("r_grid must be positive and strictly increasing")
    roots = solve_branches(cfg, r_grid[0])
    if not roots:
        raise NoSolutionError(
            f"no solution branch at r={r_grid[0]:g} (existence radius {existence_radius(cfg):g})"
        )
    v = _pick(roots, branch)
    # smallest root has dF/dv < 0, largest dF/dv > 0
    parity = 0 if branch == HIGHER else 1
    vs = [v]
    hist = [(None, None), (r_grid[0], v)]
    for r0, r1 in zip(r_grid[:-1], r_grid[1:]):
        r_cur, v_cur = r0, v
        step = r1 - r0
        while r_cur < r1:
            r_try = min(r_cur + step, r1)
            nxt = _match(cfg, r_try, _predict(hist, r_try), parity, max_jump)
            if nxt is None:
                step *= 0.5
                if step < min_step * r_try:
                    raise BranchLossError(
                        f"{branch} branch lost near r={r_cur:.12g} (fold)", fold_r=r_cur
                    )
                continue
            r_cur, v_cur = r_try, nxt
            hist = [hist[1], (r_cur, v_cur)]
            step *= 2.0
        v = v_cur
        vs.append(v)
    return make_profile(cfg, r_grid, np.array(vs), branch)


def make_profile(cfg: FlowConfig, r, v, branch):
    m = cfg.model
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    rmin = existence_radius(cfg)
    return DensityProfile(
        branch=branch,
        r=r,
        v=v,
        T=np.asarray(temperature_on_isentrope(m, v), dtype=float),
        p=np.asarray(pressure_on_isentrope(m, v), dtype=float),
        U=np.asarray(velocity(cfg, r, v), dtype=float),
        meta={"model": m.kind, "n": m.n, "sigma0": m.sigma0, "I": cfg.I, "C0": cfg.C0, "r_min": rmin},
    )


# --- far-field asymptotics ---------------------------------------------------

def beta1(cfg: FlowConfig):
    """Coefficient of r^-4 in rho(r) = rho_inf + beta1 / r^4 + ...

    Expanding F = 0 with v = v0 + v1 / r^4 gives v1 = -I^2 v0^2 / (2 f'(v0)),
    hence beta1 = -v1 rho_inf^2 = I^2 / (2 f'(v0)).
    """
    if not cfg.rho_inf:
        raise RegimeError("beta1 requires a nonzero density at infinity")
    fp = f_prime(cfg.model, 1.0 / cfg.rho_inf)
    return cfg.I**2 / (2.0 * fp)


def asymptotic_density(cfg: FlowConfig, r, order=0, branch=None):
    """Far-field density.

    ``branch='lower'`` (or ``rho_inf == 0``) gives the vacuum-regime leading
    term 1 / (sqrt(2 C0) r^2); otherwise rho_inf (+ beta1 / r^4 at order 1).
    """
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    r = np.asarray(r, dtype=float)
    if branch == LOWER or cfg.rho_inf == 0:
        if cfg.C0 <= 0:
            raise RegimeError("vacuum regime needs C0 > 0")
        return 1.0 / (math.sqrt(2.0 * cfg.C0) * r**2)
    if order == 0:
        return cfg.rho_inf + 0.0 * r
    return cfg.rho_inf + beta1(cfg) / r**4
