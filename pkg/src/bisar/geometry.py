"""Side-looking bistatic sensing geometry.

Heading angles, sensing-center placement, incidence angle at the ground
target, range/azimuth resolutions, footprint size, and the verification of
a full trajectory against the original mission constraints.

Conventions: the sensing center sits at distance H*tan(eta) from the
platform, perpendicular-right of the heading; heading ratios are
(sin, cos) = (dy, dx) / (slot_duration * speed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT_MPS = 299792458.0

_V_EPS = 1e-12


class GeometryError(ValueError):
    pass


def heading(q_prev, q_cur, speed, slot_duration):
    """Heading ratios (sin_alpha, cos_alpha) for one displacement.

    Normalizes by slot_duration*speed, not by the displacement length, so
    the ratios shrink below unit norm when the platform moves less than a
    full slot's worth of distance.
    """
    if speed <= _V_EPS:
        raise GeometryError("heading undefined at zero speed")
    d = slot_duration * speed
    return (q_cur[1] - q_prev[1]) / d, (q_cur[0] - q_prev[0]) / d


def heading_ratios(positions, speeds, slot_duration):
    """Per-slot heading ratios for a whole trajectory.

    positions has one more row than speeds (row 0 is the start point).
    Zero-speed slots reuse the previous slot's ratios; returns (w, u,
    degenerate_mask) with the reused slots flagged.
    """
    p = np.asarray(positions, dtype=float)
    v = np.asarray(speeds, dtype=float)
    if len(p) != len(v) + 1:
        raise GeometryError("positions must have exactly one more row than speeds")
    diff = np.diff(p, axis=0)
    degenerate = v <= _V_EPS
    denom = slot_duration * np.where(degenerate, 1.0, v)
    w = diff[:, 1] / denom
    u = diff[:, 0] / denom
    cur_w, cur_u = 0.0, 1.0  # default +x heading if the very first slot stalls
    for t in range(len(v)):
        if degenerate[t]:
            w[t], u[t] = cur_w, cur_u
        else:
            cur_w, cur_u = w[t], u[t]
    return w, u, degenerate


def sensing_center(q, sin_alpha, cos_alpha, sar):
    """Center of the sensing footprint: offset perpendicular-right of heading."""
    off = sar.altitude_m * math.tan(sar.observation_angle_rad)
    q = np.asarray(q, dtype=float)
    shift = np.stack([off * np.asarray(sin_alpha, dtype=float),
                      -off * np.asarray(cos_alpha, dtype=float)], axis=-1)
    return q + shift


def incidence_sine(q_c, bs):
    """Sine of the signal incidence angle at the sensing center."""
    q_c = np.asarray(q_c, dtype=float)
    d = np.linalg.norm(q_c - np.array([bs.x_m, bs.y_m]), axis=-1)
    return d / np.sqrt(d * d + bs.height_m**2)


def resolutions(sin_theta, speed, sar):
    """(range, azimuth) resolution in meters at the given incidence and speed."""
    sin_eta = math.sin(sar.observation_angle_rad)
    delta_r = SPEED_OF_LIGHT_MPS / (sar.bandwidth_hz * (sin_eta + np.asarray(sin_theta)))
    v = np.asarray(speed, dtype=float)
    with np.errstate(divide="ignore"):
        delta_a = sar.wavelength_m * sar.altitude_m / (
            sar.integration_time_s * v * math.cos(sar.observation_angle_rad))
    return delta_r, delta_a


def min_feasible_speed(sar):
    """Slowest speed whose azimuth resolution still meets min_object_distance_m."""
    return sar.wavelength_m * sar.altitude_m / (
        sar.integration_time_s * sar.min_object_distance_m
        * math.cos(sar.observation_angle_rad))


def sensing_area_size(sar):
    """Elliptic footprint size (pi/4) * (lambda/L_a) * (lambda H / (W_a cos^2 eta)).

    Requires the antenna dimensions; configurations that only give a sensing
    radius should use circular_sensing_area instead.
    """
    if sar.antenna_length_m is None or sar.antenna_height_m is None:
        raise GeometryError(
            "sensing_area_size needs antenna_length_m and antenna_height_m")
    c = math.cos(sar.observation_angle_rad)
    return (math.pi / 4.0) * (sar.wavelength_m / sar.antenna_length_m) \
        * (sar.wavelength_m * sar.altitude_m / (sar.antenna_height_m * c * c))


def circular_sensing_area(radius_m):
    return math.pi * radius_m * radius_m


def range_kappa(sar):
    """Incidence-sine threshold for the range-resolution requirement."""
    return SPEED_OF_LIGHT_MPS / (sar.bandwidth_hz * sar.min_object_distance_m) \
        - math.sin(sar.observation_angle_rad)


def range_standoff_sq(sar, bs):
    """Squared horizontal BS standoff that enforces the range resolution.

    Derived from sin(theta) >= kappa by squaring; negative/zero means the
    squared form is inactive.  kappa >= 1 is unattainable at any geometry.
    """
    kappa = range_kappa(sar)
    if kappa >= 1.0:
        raise GeometryError(
            f"range resolution unattainable: c/(B*d_min) - sin(eta) = {kappa:.6f} >= 1 "
            f"(bandwidth_hz={sar.bandwidth_hz:g}, min_object_distance_m={sar.min_object_distance_m:g})")
    if kappa <= -1.0:
        return 0.0
    h2 = bs.height_m**2
    return h2 / (1.0 - kappa * kappa) - h2


@dataclass
class ConstraintCheck:
    name: str
    passed: bool
    worst_margin: float
    worst_slot: int
    violations: int

    def to_dict(self):
        return {"pass": bool(self.passed),
                "worst_margin": float(self.worst_margin),
                "worst_slot": int(self.worst_slot)}


@dataclass
class FeasibilityReport:
    checks: dict
    overall_pass: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"per_constraint": {k: c.to_dict() for k, c in self.checks.items()},
                "overall_pass": bool(self.overall_pass),
                "notes": list(self.notes)}


_CORE_CHECKS = ("range_resolution", "azimuth_resolution", "mobility",
                "speed_limit", "landmark_in_sensing_area")


def _check(name, margins, tol):
    margins = np.asarray(margins, dtype=float)
    worst = int(np.argmin(margins))
    viol = int(np.count_nonzero(margins < -tol))
    return ConstraintCheck(name, viol == 0, float(margins[worst]), worst + 1, viol)


def verify_trajectory(positions, speeds, sc, range_mode="paper",
                      coverage_radius_m=5000.0, tol=1e-6):
    """Check a trajectory against the original per-slot mission constraints.

    Margins are positive when satisfied: resolution margins in meters of
    spacing, mobility in meters, speed in m/s, landmark containment in
    meters.  Heading ratios come from the actual displacements, never from
    planner slack variables.  The BS-coverage containment of the sensing
    center is reported but does not count toward overall_pass.
    """
    p = np.asarray(positions, dtype=float)
    v = np.asarray(speeds, dtype=float)
    T = len(v)
    if len(p) != T + 1:
        raise GeometryError("positions must have exactly one more row than speeds")
    if range_mode not in ("paper", "exact"):
        raise GeometryError(f"unknown range mode {range_mode!r}")
    lm = sc.landmark_array()
    if len(lm) != T:
        raise GeometryError(f"scenario has {len(lm)} slots, trajectory has {T}")
    delta = sc.slot_duration_s

    w, u, degen = heading_ratios(p, v, delta)
    centers = sensing_center(p[1:], w, u, sc.sar)
    sin_th = incidence_sine(centers, sc.bs)
    d_r, d_a = resolutions(sin_th, v, sc.sar)
    d_min = sc.sar.min_object_distance_m

    checks = {}
    if range_mode == "exact":
        checks["range_resolution"] = _check("range_resolution", d_min - d_r, tol)
    else:
        c_r = range_standoff_sq(sc.sar, sc.bs)
        bs_dist = np.linalg.norm(centers - np.array([sc.bs.x_m, sc.bs.y_m]), axis=1)
        checks["range_resolution"] = _check(
            "range_resolution", bs_dist - math.sqrt(max(c_r, 0.0)), tol)
    checks["azimuth_resolution"] = _check("azimuth_resolution", d_min - d_a, tol)
    hops = np.linalg.norm(np.diff(p, axis=0), axis=1)
    checks["mobility"] = _check("mobility", delta * v - hops, tol)
    checks["speed_limit"] = _check("speed_limit", sc.power.max_speed_mps - v, tol)
    miss = np.linalg.norm(lm - centers, axis=1)
    checks["landmark_in_sensing_area"] = _check(
        "landmark_in_sensing_area", sc.sensing_radius_m - miss, tol)
    checks["center_within_coverage"] = _check(
        "center_within_coverage",
        coverage_radius_m - np.linalg.norm(centers, axis=1), tol)

    notes = []
    if degen.any():
        notes.append(f"{int(degen.sum())} zero-speed slots reuse the previous heading")
    if range_mode == "paper" and range_kappa(sc.sar) <= 0.0:
        notes.append("range threshold kappa <= 0: squared-form standoff is "
                     "stricter than the exact requirement")
    if range_mode == "exact" and range_kappa(sc.sar) <= 0.0:
        notes.append("range requirement holds for every incidence angle (kappa <= 0)")

    overall = all(checks[k].passed for k in _CORE_CHECKS)
    return FeasibilityReport(checks=checks, overall_pass=overall, notes=notes)
