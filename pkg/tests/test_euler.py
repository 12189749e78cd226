import math

import numpy as np
import pytest

from sourceflow.euler import (
    HIGHER,
    LOWER,
    FlowConfig,
    asymptotic_density,
    beta1,
    calibrate,
    calibrate_vdw_relation,
    density_profile,
    euler_residual,
    existence_radius,
    existence_radius_bisect,
    fold_points,
    fold_volume,
    mass_flux,
    min_residual,
    solve_branches,
    velocity,
)
from sourceflow.exceptions import BranchLossError, DomainError, NoSolutionError, RegimeError
from sourceflow.isentrope import IsentropeModel, f_of_v


def test_residual_examples(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=3.0)
    assert euler_residual(cfg, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert euler_residual(cfg, 1.0, 2.0) == pytest.approx(2 + 2.5 * 2 ** (-2 / 3) - 3, rel=1e-14)
    assert euler_residual(cfg, 1e8, 2.0) == pytest.approx(f_of_v(ideal3, 2.0) - 3.0, rel=1e-14)


def test_flow_config_calibration_sources(ideal3):
    a = FlowConfig(ideal3, 1.0, rho_inf=1.0)
    assert a.C0 == pytest.approx(2.5)
    b = FlowConfig(ideal3, 1.0, C0=2.5)
    assert b.rho_inf == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(RegimeError):
        FlowConfig(ideal3, 1.0)
    with pytest.raises(RegimeError):
        FlowConfig(ideal3, 1.0, C0=2.5, rho_inf=1.0)
    vac = FlowConfig(ideal3, 1.0, C0=2.5, rho_inf=0.0)
    assert vac.rho_inf == 0.0
    with pytest.raises(DomainError):
        FlowConfig(ideal3, 0.0, C0=1.0)


def test_reference_calibration(ideal3):
    cfg = FlowConfig.from_reference(ideal3, 0.7, 2.0, 0.5)
    assert euler_residual(cfg, 2.0, 2.0) == pytest.approx(0.0, abs=1e-13)


def test_calibrate_examples(ideal3, vdw1):
    assert calibrate(ideal3, 1.0, 1.0) == pytest.approx(2.5)
    assert calibrate(ideal3, 0.5, 1.0) == pytest.approx(4 * 2.5)
    assert calibrate(vdw1, 1.0, 1.5) == pytest.approx(1 / 3, rel=1e-13)
    assert calibrate_vdw_relation(vdw1, 1.0, 1.5) == pytest.approx(1 / 3, rel=1e-13)
    with pytest.raises(DomainError):
        calibrate(vdw1, 1.0, 3.0)
    with pytest.raises(RegimeError):
        calibrate(ideal3, 1.0, 0.0)


def test_vdw_calibration_relation_random():
    rng = np.random.default_rng(5)
    m = IsentropeModel("vdw", 3, 0.7)
    for rho in rng.uniform(0.1, 2.9, 20):
        I = 10 ** rng.uniform(-1, 1)
        a, b = calibrate_vdw_relation(m, I, rho), calibrate(m, I, rho)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_solve_branches_against_bruteforce(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=3.0)
    roots = solve_branches(cfg, 1.0)
    assert any(abs(x - 1.0) < 1e-12 for x in roots)
    v = np.geomspace(1e-6, 1e6, 1_000_000)
    s = np.sign(euler_residual(cfg, 1.0, v))
    assert len(roots) == int(np.sum(s[1:] != s[:-1]))
    for x in roots:
        assert abs(euler_residual(cfg, 1.0, x)) <= 1e-12 * cfg.scale


def test_roots_merge_at_fold(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=10.0)
    rmin = existence_radius(cfg)
    assert solve_branches(cfg, 0.99 * rmin) == []
    gaps = []
    for eps in (1e-2, 1e-4, 1e-6):
        roots = solve_branches(cfg, rmin * (1 + eps))
        assert len(roots) == 2
        gaps.append(roots[1] / roots[0] - 1)
    assert gaps[0] > gaps[1] > gaps[2]
    vf = fold_volume(cfg)
    lo, hi = solve_branches(cfg, rmin * (1 + 1e-12))
    assert lo / vf - 1 > -1e-5 and hi / vf - 1 < 1e-5


def test_existence_radius_example(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=10.0)
    assert existence_radius(cfg) == pytest.approx(135 ** -0.25, rel=1e-12)
    assert existence_radius_bisect(cfg) == pytest.approx(135 ** -0.25, rel=1e-10)
    # fold solve agrees with the closed form for the ideal gas too
    assert fold_points(cfg)[0][0] == pytest.approx(135 ** -0.25, rel=1e-10)


def test_existence_radius_scaling(ideal3):
    # C0 I^2 fixed: r_min scales like sqrt(I) since rho* is unchanged and C0 - ... ~ I^-2
    a = existence_radius(FlowConfig(ideal3, 1.0, C0=10.0))
    b = existence_radius(FlowConfig(ideal3, 2.0, C0=2.5))
    assert b == pytest.approx(a * math.sqrt(2.0), rel=1e-12)


def test_existence_radius_degenerate(ideal3):
    # C0 giving zero argument: only for C0 <= 0 in this normalisation
    assert existence_radius(FlowConfig(ideal3, 1.0, C0=0.0, rho_inf=0.0)) == math.inf
    assert existence_radius(FlowConfig(ideal3, 1.0, C0=-1.0, rho_inf=0.0)) == math.inf


def test_min_residual_sign(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=10.0)
    rmin = existence_radius(cfg)
    assert min_residual(cfg, 0.999 * rmin) > 0
    assert min_residual(cfg, 1.001 * rmin) < 0


@pytest.mark.parametrize("s0,rho0", [(0.5, 1.587), (20.0, 1 / 1.2), (3.0, 0.5)])
def test_vdw_existence_radius_vs_bisection(s0, rho0):
    m = IsentropeModel("vdw", 3, math.log(s0))
    cfg = FlowConfig(m, 1.0, rho_inf=rho0)
    a, b = existence_radius(cfg), existence_radius_bisect(cfg)
    assert a == pytest.approx(b, rel=1e-5)


def test_velocity_and_flux(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=3.0)
    assert velocity(cfg, 1.0, 1.0) == 1.0
    assert velocity(cfg, 2.0, 1.0) == pytest.approx(1 / 8)
    assert velocity(FlowConfig(ideal3, 2.0, C0=3.0), 1.0, 3.0) == 6.0
    assert mass_flux(cfg, 3.7, 0.2) == pytest.approx(4 * math.pi, rel=1e-15)
    assert mass_flux(FlowConfig(ideal3, 1 / (4 * math.pi), C0=3.0), 2.0, 5.0) == pytest.approx(1.0, rel=1e-15)


def test_single_point_profile(ideal3):
    cfg = FlowConfig(ideal3, 1.0, C0=3.0)
    roots = solve_branches(cfg, 1.0)
    branch = HIGHER if abs(roots[0] - 1) < 1e-12 else LOWER
    p = density_profile(cfg, [1.0], branch)
    assert p.v[0] == pytest.approx(1.0, rel=1e-12)
    assert p.U[0] == pytest.approx(1.0, rel=1e-12)


def test_higher_branch_decay(flow_unit):
    r = np.geomspace(2.0, 1e3, 300)
    p = density_profile(flow_unit, r, HIGHER)
    dev = np.abs(p.rho - 1.0)
    sel = (r >= 5) & (r <= 50)
    slope = np.polyfit(np.log(r[sel]), np.log(dev[sel]), 1)[0]
    assert slope == pytest.approx(-4, abs=0.1)
    assert np.all(np.diff(p.rho) > 0)


def test_lower_branch_limit(flow_unit):
    rmin = existence_radius(flow_unit)
    r = np.geomspace(rmin * (1 + 1e-9), 1e3, 400)
    p = density_profile(flow_unit, r, LOWER)
    assert p.rho[-1] * r[-1] ** 2 == pytest.approx(1 / math.sqrt(5), rel=1e-3)
    assert asymptotic_density(flow_unit, 1e3, branch=LOWER) == pytest.approx(p.rho[-1], rel=1e-3)


def test_profile_invariants(flow_unit):
    rmin = existence_radius(flow_unit)
    r = np.geomspace(rmin * (1 + 1e-6), 50, 200)
    for branch in (HIGHER, LOWER):
        p = density_profile(flow_unit, r, branch)
        assert np.all(np.abs(euler_residual(flow_unit, p.r, p.v)) <= 1e-9 * flow_unit.scale)
        assert np.all(mass_flux(flow_unit, p.r, p.v) == flow_unit.J)
        assert p.meta["r_min"] == pytest.approx(rmin)
        assert np.allclose(p.rho, 1 / p.v)
        # no branch jumping: increments bounded by a modest multiple of the median
        jumps = np.abs(np.diff(np.log(p.v)))
        assert np.max(jumps) < 0.2


def test_branches_disagree_away_from_fold(flow_unit):
    r = np.linspace(2, 5, 10)
    hi = density_profile(flow_unit, r, HIGHER)
    lo = density_profile(flow_unit, r, LOWER)
    assert np.all(lo.v > hi.v)


def test_below_existence_radius(flow_unit):
    rmin = existence_radius(flow_unit)
    with pytest.raises(NoSolutionError, match="no solution branch"):
        density_profile(flow_unit, [0.5 * rmin, rmin], HIGHER)


def test_branch_loss_reports_position(flow_unit):
    # F decreases in r at fixed v, so branches tracked outward never end;
    # an impossible jump tolerance exercises the loss path instead
    with pytest.raises(BranchLossError) as ei:
        density_profile(flow_unit, [2.0, 3.0], HIGHER, max_jump=1e-12, min_step=1e-3)
    assert ei.value.fold_r == pytest.approx(2.0)


def test_new_root_pair_does_not_disturb_branches():
    # two folds: a second root pair appears near r = 27.7
    m = IsentropeModel("vdw", 3, math.log(2.0))
    cfg = FlowConfig(m, 1.0, rho_inf=0.3)
    assert len(fold_points(cfg)) == 2
    r = np.linspace(1.3, 40, 60)
    lo = density_profile(cfg, r, LOWER)
    assert lo.v[-1] == pytest.approx(solve_branches(cfg, 40.0)[1], rel=1e-12)
    hi = density_profile(cfg, r, HIGHER)
    assert hi.v[-1] == pytest.approx(solve_branches(cfg, 40.0)[0], rel=1e-12)


def test_grid_validation(flow_unit):
    with pytest.raises(ValueError):
        density_profile(flow_unit, [2.0, 1.5], HIGHER)
    with pytest.raises(ValueError):
        density_profile(flow_unit, [2.0, 3.0], "middle")


def test_asymptotic_density(flow_unit, ideal3):
    assert asymptotic_density(flow_unit, 7.0) == 1.0
    vac = FlowConfig(ideal3, 1.0, C0=2.5, rho_inf=0.0)
    assert asymptotic_density(vac, 100.0) == pytest.approx(1 / (math.sqrt(5) * 1e4))
    with pytest.raises(RegimeError):
        beta1(vac)


def test_beta1_plateau(flow_unit):
    assert beta1(flow_unit) == pytest.approx(-0.3)
    r = np.geomspace(1e2, 1e3, 20)
    p = density_profile(flow_unit, r, HIGHER)
    plateau = (p.rho - 1.0) * r**4
    assert np.allclose(plateau, beta1(flow_unit), rtol=5e-3)
    assert asymptotic_density(flow_unit, 10.0, order=1) == pytest.approx(p_at(flow_unit, 10.0), rel=1e-6)


def p_at(cfg, r):
    return 1.0 / solve_branches(cfg, r)[0]


def test_vdw_beta1_plateau():
    m = IsentropeModel("vdw", 3, 2.0)
    cfg = FlowConfig(m, 0.8, rho_inf=1.2)
    # beta1 is small here, so stay where rho - rho_inf is well above round-off
    r = np.geomspace(10, 1e2, 10)
    p = density_profile(cfg, r, HIGHER)
    assert np.allclose((p.rho - 1.2) * r**4, beta1(cfg), rtol=5e-3)
