"""Phase labels along a van der Waals flow.

The intermediate (condensation) region is bounded by the spinodal of the
isotherm through the point, i.e. the roots of

    dp/dv |_T = -24 T / (3v - 1)^2 + 6 / v^3 = 0   <=>   4 T v^3 = (3v - 1)^2,

which exist only for T < 1.  Labels: 0 gas, 0.5 intermediate, 1 liquid.
Maxwell coexistence is not used.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from .euler import DensityProfile, FlowConfig
from .exceptions import DomainError, ModelKindError
from .isentrope import IsentropeModel, temperature_on_isentrope

GAS = 0.0
INTERMEDIATE = 0.5
LIQUID = 1.0
PHASE_LABELS = (GAS, INTERMEDIATE, LIQUID)


def isotherm_slope(v, T):
    """dp/dv of the reduced van der Waals isotherm."""
    return -24.0 * T / (3.0 * v - 1.0) ** 2 + 6.0 / v**3


def spinodal(T):
    """Spinodal volumes (v_left, v_right) of the isotherm T, or None for T >= 1."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    if T >= 1.0:
        return None
    g = lambda v: 4.0 * T * v**3 - (3.0 * v - 1.0) ** 2  # noqa: E731
    # (3v-1)^2 / v^3 peaks at v = 1 with value 4 and is below 9/v for v > 1
    v_left = brentq(g, 1.0 / 3.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    v_right = brentq(g, 1.0, 9.0 / (4.0 * T) + 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return v_left, v_right


def _require_vdw(model):
    if not model.is_vdw:
        raise ModelKindError("phases defined only for vdw")


def classify(model: IsentropeModel, v):
    """Phase label of the state with specific volume ``v`` on the isentrope."""
    _require_vdw(model)
    T = temperature_on_isentrope(model, v)
    if T >= 1.0:
        return GAS
    v_left, v_right = spinodal(T)
    if v < v_left:
        return LIQUID
    if v <= v_right:
        return INTERMEDIATE
    return GAS


def phase_profile(cfg: FlowConfig, profile: DensityProfile) -> DensityProfile:
    """Copy of ``profile`` with the ``phase`` column filled in."""
    _require_vdw(cfg.model)
    labels = np.array([classify(cfg.model, float(v)) for v in profile.v])
    return replace(profile, phase=labels, meta=dict(profile.meta))


def label_switches(labels):
    """Indices i where labels[i] != labels[i-1]."""
    labels = np.asarray(labels)
    return list(np.nonzero(labels[1:] != labels[:-1])[0] + 1)


def zones(labels):
    """Run-length summary [(label, count), ...] of a label sequence."""
    out = []
    for x in labels:
        if out and out[-1][0] == x:
            out[-1][1] += 1
        else:
            out.append([x, 1])
    return [(float(a), b) for a, b in out]


def entropy_from_s0(s0):
    """sigma0 for a given s0 = exp(sigma0)."""
    if not s0 > 0:
        raise DomainError("s0 must be positive")
    return math.log(s0)
