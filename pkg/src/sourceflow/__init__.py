"""Stationary spherical source flows of ideal and van der Waals gases."""
from .euler import (
    HIGHER,
    LOWER,
    DensityProfile,
    FlowConfig,
    calibrate,
    density_profile,
    euler_residual,
    existence_radius,
    mass_flux,
    solve_branches,
)
from .exceptions import (
    BranchLossError,
    ConvergenceError,
    DomainError,
    ModelKindError,
    NoSolutionError,
    NonInvertibleError,
    NoStepError,
    RegimeError,
    SingularityError,
)
from .isentrope import IsentropeModel, critical_c, f_of_v, invertibility
from .phases import classify, phase_profile
from .thermo import applicability, ideal_potential, state_from_potential, vdw_potential
from .viscous import ViscousConfig, solve_bvp

__version__ = "0.1.0"
