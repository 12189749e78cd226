"""Viscous radial flow: a singularly perturbed two-point problem for v(r).

The momentum balance with viscosity reduces to

    -mu (v / r^3) (r v'' - 2 v') + d/dr( v^2 / (2 r^4) + f(v) / I^2 ) = 0,

with mu = (zeta + 4 eta / 3) / I.  For small mu the solution follows Euler
branches except in thin layers.  Integrating once shows that

    E(r) = v^2/(2 r^4) + f(v)/I^2 - mu v v' / r^2

is non-increasing (E' = -mu v'^2 / r^2), so an interior step from the
lower (large-v) branch to the higher branch needs boundary data taken from
Euler families with C0_left > C0_right.  With equal constants the layer
sits at the left boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .euler import HIGHER, LOWER, DensityProfile, FlowConfig, make_profile, solve_branches
from .exceptions import ConvergenceError, DomainError, NoSolutionError, NoStepError
from .isentrope import f_prime, f_second


@dataclass(frozen=True)
class ViscousConfig:
    """Viscous problem on [r_a, r_b] with Dirichlet data v(r_a), v(r_b).

    Missing boundary values default to the lower Euler branch at ``r_a``
    and the higher branch at ``r_b``; the right value uses ``flow_right``
    when given, else ``flow``.
    """

    flow: FlowConfig
    eta: float
    zeta: float
    r_a: float
    r_b: float
    v_a: float | None = None
    v_b: float | None = None
    flow_right: FlowConfig | None = None
    N: int = 400
    tol: float = 1e-8
    max_newton: int = 80

    def __post_init__(self):
        if self.eta < 0 or self.zeta < 0:
            raise DomainError("viscosities must be non-negative")
        if not 0 < self.r_a < self.r_b:
            raise DomainError("need 0 < r_a < r_b")
        if self.N < 4:
            raise DomainError("mesh needs at least 4 intervals")
        if self.flow_right is not None and self.flow_right.I != self.flow.I:
            raise DomainError("left and right families must share the source intensity")
        if self.v_a is None:
            object.__setattr__(self, "v_a", _branch_value(self.flow, self.r_a, LOWER))
        if self.v_b is None:
            object.__setattr__(self, "v_b", _branch_value(self.flow_right or self.flow, self.r_b, HIGHER))
        m = self.flow.model
        for val in (self.v_a, self.v_b):
            m.check(val)

    @property
    def k(self):
        return self.zeta + 4.0 * self.eta / 3.0

    @property
    def mu(self):
        return self.k / self.flow.I

    @property
    def I(self):
        return self.flow.I

    def with_mu(self, mu):
        """Same problem with both viscosities rescaled to give ``mu``."""
        if not mu > 0:
            raise DomainError("mu must be positive")
        if self.k == 0:
            return replace(self, eta=0.75 * mu * self.I, zeta=0.0)
        s = mu / self.mu
        return replace(self, eta=self.eta * s, zeta=self.zeta * s)


def _branch_value(cfg, r, branch):
    roots = solve_branches(cfg, r)
    if not roots:
        raise NoSolutionError(f"no Euler branch at r={r:g}; boundary value cannot be set")
    return roots[0] if branch == HIGHER else roots[-1]


@dataclass
class ViscousSolution:
    """Converged mesh function plus solver diagnostics."""

    r: np.ndarray
    v: np.ndarray
    mu: float
    residual_norm: float
    newton_iters: int
    stages: int

    def profile(self, cfg: ViscousConfig) -> DensityProfile:
        p = make_profile(cfg.flow, self.r, self.v, "viscous")
        p.meta.update(mu=self.mu, residual_norm=self.residual_norm, newton_iters=self.newton_iters)
        return p


def ns_residual(cfg: ViscousConfig, r, v, dv, d2v, mu=None):
    """Left-hand side of the viscous equation in expanded form."""
    mu = cfg.mu if mu is None else mu
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    fp = f_prime(cfg.flow.model, v)
    out = -mu * (v / r**3) * (r * d2v - 2.0 * dv) + v * dv / r**4 - 2.0 * v**2 / r**5 + fp * dv / cfg.I**2
    return float(out) if np.ndim(out) == 0 else out


# --- discretisation ----------------------------------------------------------

def _stencils(r):
    """Three-point first/second derivative weights at interior nodes."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    s = hm * hp * (hm + hp)
    a = np.stack([-hp**2 / s, (hp**2 - hm**2) / s, hm**2 / s])
    b = np.stack([2.0 * hp / s, -2.0 * (hm + hp) / s, 2.0 * hm / s])
    return a, b


def discrete_residual(cfg: ViscousConfig, r, v, mu=None):
    """Finite-difference residual at interior nodes."""
    a, b = _stencils(r)
    d1 = a[0] * v[:-2] + a[1] * v[1:-1] + a[2] * v[2:]
    d2 = b[0] * v[:-2] + b[1] * v[1:-1] + b[2] * v[2:]
    return ns_residual(cfg, r[1:-1], v[1:-1], d1, d2, mu)


def _jacobian(cfg, r, v, mu):
    a, b = _stencils(r)
    ri = r[1:-1]
    vi = v[1:-1]
    d1 = a[0] * v[:-2] + a[1] * vi + a[2] * v[2:]
    d2 = b[0] * v[:-2] + b[1] * vi + b[2] * v[2:]
    m = cfg.flow.model
    g = f_prime(m, vi) / cfg.I**2
    gp = f_second(m, vi) / cfg.I**2
    q = ri * d2 - 2.0 * d1
    res = -mu * vi * q / ri**3 + vi * d1 / ri**4 - 2.0 * vi**2 / ri**5 + g * d1
    # dR/dv_j for j = i-1, i, i+1
    coef = -mu * vi / ri**3
    J = [coef * (ri * b[j] - 2.0 * a[j]) + vi * a[j] / ri**4 + g * a[j] for j in range(3)]
    J[1] = J[1] - mu * q / ri**3 + d1 / ri**4 - 4.0 * vi / ri**5 + gp * d1
    n = len(vi)
    ab = np.zeros((3, n))
    ab[0, 1:] = J[2][:-1]
    ab[1] = J[1]
    ab[2, :-1] = J[0][1:]
    return res, ab


def _newton(cfg, r, v0, mu, tol, max_iter):
    """Damped Newton with the natural monotonicity test.

    A trial step is accepted when the simplified correction J^-1 R(trial),
    computed with the current Jacobian, is smaller than the full correction.
    """
    v = v0.copy()
    v[0], v[-1] = cfg.v_a, cfg.v_b
    floor = cfg.flow.model.v_pole
    scale = cfg.flow.scale
    res, ab = _jacobian(cfg, r, v, mu)
    norm = np.max(np.abs(res))
    lam = 1.0
    for it in range(1, max_iter + 1):
        if not np.isfinite(norm):
            break
        dv = solve_banded((1, 1), ab, -res)
        if not np.all(np.isfinite(dv)):
            break
        dnorm = np.linalg.norm(dv)
        lam = min(1.0, 2.0 * lam)
        # keep iterates inside the model domain
        neg = dv < 0
        if np.any(neg):
            room = (v[1:-1][neg] - floor) / (-dv[neg])
            lam = min(lam, 0.9 * np.min(room))
        while lam > 1e-8:
            trial = v.copy()
            trial[1:-1] += lam * dv
            with np.errstate(all="ignore"):
                tres = discrete_residual(cfg, r, trial, mu)
                bar = solve_banded((1, 1), ab, -tres)
            if np.all(np.isfinite(bar)) and np.linalg.norm(bar) <= (1.0 - 0.25 * lam) * dnorm:
                break
            lam *= 0.5
        else:
            break
        v = trial
        res, ab = _jacobian(cfg, r, v, mu)
        norm = np.max(np.abs(res))
        if norm <= tol * scale and lam * np.max(np.abs(dv)) <= 1e-9 * np.max(np.abs(v)):
            return v, norm, it
        if norm <= 1e-3 * tol * scale:
            return v, norm, it
    raise ConvergenceError(f"Newton failed at mu={mu:g} (residual {norm:.3e})", iterate=v, residual_norm=norm)


def uniform_mesh(cfg: ViscousConfig, N=None):
    return np.linspace(cfg.r_a, cfg.r_b, (N or cfg.N) + 1)


def graded_mesh(r_a, r_b, N, center, width, strength=20.0):
    """Mesh whose node density is raised by ``strength`` near ``center``.

    The map from a uniform parameter is smooth, so central differences keep
    second-order accuracy on it.
    """
    fine = np.linspace(r_a, r_b, 20 * N + 1)
    dens = 1.0 + strength / (1.0 + ((fine - center) / width) ** 2)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
    cdf /= cdf[-1]
    r = np.interp(np.linspace(0.0, 1.0, N + 1), cdf, fine)
    r[0], r[-1] = r_a, r_b
    return r


def _continuation(cfg, r, guess, stages=20):
    """Newton at the target mu, falling back to halving from a larger mu."""
    mu = cfg.mu
    try:
        v, norm, its = _newton(cfg, r, guess, mu, cfg.tol, cfg.max_newton)
        return v, norm, its, 0
    except ConvergenceError:
        pass
    # find a starting mu where Newton converges from the guess
    start = None
    for j in range(1, stages + 1):
        try:
            v, norm, its = _newton(cfg, r, guess, mu * 2.0**j, cfg.tol, cfg.max_newton)
            start = j
            break
        except ConvergenceError:
            continue
    if start is None:
        raise ConvergenceError(f"no continuation start found within {stages} stages", iterate=guess)
    total = its
    for j in range(start - 1, -1, -1):
        v, norm, its = _halve(cfg, r, v, mu * 2.0 ** (j + 1), mu * 2.0**j)
        total += its
    return v, norm, total, start


def _halve(cfg, r, v, mu_from, mu_to, depth=0):
    # one continuation stage; split geometrically when Newton's basin is too small
    try:
        return _newton(cfg, r, v, mu_to, cfg.tol, cfg.max_newton)
    except ConvergenceError:
        if depth >= 6:
            raise
    mid = math.sqrt(mu_from * mu_to)
    v, _, its1 = _halve(cfg, r, v, mu_from, mid, depth + 1)
    v, norm, its2 = _halve(cfg, r, v, mid, mu_to, depth + 1)
    return v, norm, its1 + its2


def solve_bvp(cfg: ViscousConfig, r=None, guess=None, remesh=True) -> ViscousSolution:
    """Finite-difference Newton solve with mu-continuation.

    When ``remesh`` is set and the first solution has a step, nodes are
    redistributed toward it and the problem is solved again on the graded
    mesh (same node count).
    """
    if not cfg.mu > 0:
        raise DomainError("viscous solve needs mu > 0")
    if r is None:
        r = uniform_mesh(cfg)
    r = np.asarray(r, dtype=float)
    if guess is None:
        guess = np.linspace(cfg.v_a, cfg.v_b, len(r))
    v, norm, its, stages = _continuation(cfg, r, np.asarray(guess, dtype=float))
    if remesh:
        try:
            rs, width = _step_and_width(r, v)
        except NoStepError:
            rs = None
        if rs is not None:
            r2 = graded_mesh(cfg.r_a, cfg.r_b, len(r) - 1, rs, max(width, 1e-6 * (cfg.r_b - cfg.r_a)))
            try:
                v2, norm2, its2 = _newton(cfg, r2, np.interp(r2, r, v), cfg.mu, cfg.tol, cfg.max_newton)
                st2 = 0
            except ConvergenceError:
                # the coarse step can sit several widths off; restart the continuation
                v2, norm2, its2, st2 = _continuation(cfg, r2, np.linspace(cfg.v_a, cfg.v_b, len(r2)))
            r, v, norm, its, stages = r2, v2, norm2, its + its2, max(stages, st2)
    return ViscousSolution(r=r, v=v, mu=cfg.mu, residual_norm=float(norm), newton_iters=int(its), stages=stages)


# --- step diagnostics --------------------------------------------------------

def _slopes(r, v):
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.5 * (r[1:] + r[:-1]), np.diff(v) / np.diff(r)


def step_location(profile) -> float:
    """Radius of the steepest point of a step-like profile.

    Uses the largest |dv/dr| between adjacent nodes, refined by fitting a
    parabola through the neighbouring discrete slopes.
    """
    r, v = _rv(profile)
    mid, s = _slopes(r, v)
    a = np.abs(s)
    nb = max(2, len(a) // 20)
    edge = max(np.max(a[:nb]), np.max(a[-nb:]))
    k = int(np.argmax(a))
    if a[k] < 3.0 * edge or k < 1 or k > len(a) - 2:
        raise NoStepError("maximum slope is not well above the boundary-region slope")
    x0, x1, x2 = mid[k - 1 : k + 2]
    y0, y1, y2 = a[k - 1 : k + 2]
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    B = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / den
    if A >= 0:
        return float(x1)
    xv = -B / (2.0 * A)
    return float(min(max(xv, x0), x2))


def step_width(profile, rel_flat=0.05) -> float:
    """Distance between the 10% and 90% levels of the transition.

    Plateau values are read where |dv/dr| falls below ``rel_flat`` times its
    maximum on either side of the step.
    """
    return _step_and_width(*_rv(profile), rel_flat=rel_flat)[1]


def _rv(profile):
    if isinstance(profile, (DensityProfile, ViscousSolution)):
        return np.asarray(profile.r), np.asarray(profile.v)
    r, v = profile
    return np.asarray(r, dtype=float), np.asarray(v, dtype=float)


def _step_and_width(r, v, rel_flat=0.05):
    rs = step_location((r, v))
    mid, s = _slopes(r, v)
    a = np.abs(s)
    k = int(np.argmax(a))
    lo = k
    while lo > 0 and a[lo] > rel_flat * a[k]:
        lo -= 1
    hi = k
    while hi < len(a) - 1 and a[hi] > rel_flat * a[k]:
        hi += 1
    v_left, v_right = v[lo], v[hi + 1]
    seg_r = r[lo : hi + 2]
    seg_v = v[lo : hi + 2]
    t = (seg_v - v_left) / (v_right - v_left)
    # t runs monotonically 0 -> 1 across the step (up to round-off)
    order = np.argsort(t)
    r10 = np.interp(0.1, t[order], seg_r[order])
    r90 = np.interp(0.9, t[order], seg_r[order])
    return rs, float(abs(r90 - r10))


def summary(sol: ViscousSolution) -> dict:
    """JSON-ready summary of a viscous solve."""
    try:
        rs, w = _step_and_width(sol.r, sol.v)
    except NoStepError:
        rs, w = None, None
    return {
        "mu": sol.mu,
        "r_step": rs,
        "step_width": w,
        "residual_norm": sol.residual_norm,
        "newton_iters": sol.newton_iters,
    }


def euler_deviation(r, v, families, cells=512):
    """Relative distance of each v(r) to the nearest Euler root of any family.

    ``cells`` sets the bracketing resolution passed to the root finder; the
    coarse default is enough away from folds and much faster.
    """
    out = np.empty(len(r))
    for i, (ri, vi) in enumerate(zip(r, v)):
        roots = [x for cfg in families for x in solve_branches(cfg, ri, cells=cells)]
        out[i] = min(abs(vi - x) / x for x in roots) if roots else math.inf
    return out
