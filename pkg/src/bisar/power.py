"""Rotary-wing propulsion power model and its convex reformulation.

The model splits propulsion power into blade-profile, induced and parasite
terms.  The induced term contains a nested square root that is handled
through an auxiliary variable q with 1/q^2 = q^2 + V^2/v0^2, which turns the
power expression into a form with only convex pieces.
"""
from __future__ import annotations

import numpy as np


def _induced_root(speed, rotor_induced_velocity):
    """sqrt(1 + V^4/(4 v0^4)) - V^2/(2 v0^2), evaluated without cancellation."""
    x = np.square(speed) / (2.0 * rotor_induced_velocity**2)
    return 1.0 / (np.sqrt(1.0 + x * x) + x)


def propulsion_power(speed, pp):
    """Propulsion power in watts at horizontal speed(s) `speed`.

    `pp` is a PowerParams (see bisar.scenario).  Accepts scalars or arrays.
    """
    v = np.asarray(speed, dtype=float)
    if np.any(v < 0.0):
        raise ValueError("speed must be nonnegative")
    blade = pp.blade_profile_power_w * (1.0 + 3.0 * v**2 / pp.tip_speed_mps**2)
    induced = pp.induced_power_w * np.sqrt(_induced_root(v, pp.rotor_induced_velocity_mps))
    parasite = 0.5 * pp.fuselage_drag_ratio * pp.air_density_kg_per_m3 \
        * pp.rotor_solidity * pp.rotor_disc_area_m2 * v**3
    out = blade + induced + parasite
    return float(out) if np.isscalar(speed) else out


def parasite_coefficient(pp):
    """Coefficient of V^3 in the parasite power term."""
    return 0.5 * pp.fuselage_drag_ratio * pp.air_density_kg_per_m3 \
        * pp.rotor_solidity * pp.rotor_disc_area_m2


def q_star(speed, pp):
    """Auxiliary variable value that makes the reformulation exact.

    Solves 1/q^2 = q^2 + V^2/v0^2 for q > 0.  Vectorized over `speed`.
    """
    v = np.asarray(speed, dtype=float)
    out = np.sqrt(_induced_root(v, pp.rotor_induced_velocity_mps))
    return float(out) if np.isscalar(speed) else out


def reformulated_power(speed, q, pp):
    """Convex surrogate power: equals propulsion_power when q = q_star(V).

    For q >= q_star(V) this upper-bounds the true power, which is the form
    the planner minimizes.
    """
    v = np.asarray(speed, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0.0):
        raise ValueError("q must be positive")
    blade = pp.blade_profile_power_w * (1.0 + 3.0 * v**2 / pp.tip_speed_mps**2)
    out = blade + pp.induced_power_w * q + parasite_coefficient(pp) * v**3
    return float(out) if np.isscalar(speed) and np.isscalar(q) else out


def hover_power(pp):
    """Power at zero speed: blade-profile plus induced terms only."""
    return pp.blade_profile_power_w + pp.induced_power_w


def min_power_speed(pp, v_max=70.0, step=0.01):
    """Grid argmin of the power curve on [0, v_max]; returns (speed, power)."""
    grid = np.arange(0.0, v_max + step / 2, step)
    p = propulsion_power(grid, pp)
    i = int(np.argmin(p))
    return float(grid[i]), float(p[i])


def power_curve(pp, v_max=70.0, step=0.5):
    """Arrays (V, P(V)) sampled on a uniform grid, for reports and plots."""
    grid = np.arange(0.0, v_max + step / 2, step)
    return grid, propulsion_power(grid, pp)
