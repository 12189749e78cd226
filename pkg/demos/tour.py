"""A short tour of the package: inviscid branches, phases, a viscous step
and the series checks.  Run with ``python3 demos/tour.py``."""
import math

import numpy as np

from sourceflow import HIGHER, LOWER, FlowConfig, IsentropeModel, density_profile, existence_radius, phase_profile
from sourceflow import expansions as ex
from sourceflow.isentrope import critical_c
from sourceflow.phases import zones
from sourceflow.viscous import ViscousConfig, solve_bvp, summary

# Ideal gas: two branches meet at the existence radius.
ideal = IsentropeModel.from_c("ideal", 3, 1.0)
flow = FlowConfig(ideal, 1.0, rho_inf=1.0)
rmin = existence_radius(flow)
print(f"ideal n=3, C0={flow.C0}: r_min = {rmin:.12f}")
r = rmin * (1 + np.geomspace(1e-6, 100, 8))
hi = density_profile(flow, r, HIGHER)
lo = density_profile(flow, r, LOWER)
for ri, a, b in zip(r, hi.rho, lo.rho):
    print(f"  r={ri:10.4f}  rho_higher={a:.6f}  rho_lower={b:.3e}")

# van der Waals: invertibility threshold and phase labels along the flow.
print(f"vdW n=3 critical c = {critical_c(3):.10f}")
names = {0.0: "gas", 0.5: "intermediate", 1.0: "liquid"}
for s0, rho0 in ((0.5, 1.587), (20.0, 1 / 1.2), (0.5, 1.8)):
    m = IsentropeModel("vdw", 3, math.log(s0))
    cfg = FlowConfig(m, 1.0, rho_inf=rho0)
    rm = existence_radius(cfg)
    grid = rm * (1 + np.geomspace(1e-9, 99, 200))
    p = phase_profile(cfg, density_profile(cfg, grid, HIGHER))
    print(f"  s0={s0}, rho_inf={rho0:.4f}: r_min={rm:.5f}, higher branch "
          + " > ".join(names[z[0]] for z in zones(p.phase)))

# Viscous step joining the lower branch of one family to the higher branch of another.
left, right = FlowConfig(ideal, 1.0, C0=3.0), FlowConfig(ideal, 1.0, C0=1.5)
base = ViscousConfig(left, 0.075, 0.0, 1.3, 4.0, flow_right=right, N=800)
for mu in (0.01, 0.005, 0.0025):
    s = summary(solve_bvp(base.with_mu(mu)))
    print(f"  mu={mu}: step at r={s['r_step']:.4f}, width {s['step_width']:.4f}")

# Residual orders of the asymptotic series.
co = ex.SeriesCoefficients(c1=1.0, c2=2.0, c3=0.3)
x = np.linspace(0.5, 2.0, 41)
for regime in ("SmallI", "LargeI"):
    rep = ex.singular_order_check(ideal, regime, co, x)
    print(f"  singular {regime}: alpha={rep['alpha']}, beta={rep['beta']}, order {rep['fitted_order']:.2f}")
rep = ex.regular_order_check(ideal, ex.SeriesCoefficients(f0=2.5, v1=0.3), np.array([1.0, 2.0]))
print(f"  regular series: order {rep['fitted_order']:.2f}")
