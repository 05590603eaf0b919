"""Minimum-energy trajectory planning by alternating convex steps.

Each outer iteration solves a trajectory step over per-slot blocks
(x, y, V, q) with the heading slacks (w, u) frozen, then a per-slot
feasibility step that refreshes the slacks.  The nonconvex pieces (the
induced-power root and the heading coupling) enter through linearizations
refreshed at the previous iterate, so every subproblem is convex and the
optimized objective never increases.

A distance-minimizing baseline shares the whole constraint machinery and
swaps the objective.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from . import geometry, power, solver

Q_FLOOR = 1e-4
SLACK_TOL = 1e-6
MU_PROX = 1e-3
# widens the frozen-heading wedge: with unit-norm slacks the two heading
# rows and the mobility cone pin a slot's step to a ray (empty interior),
# which a barrier method cannot start inside.  The width is budgeted per
# slot from the slot's own constraint margins, and the sensing rows are
# tightened by the matching blind spot (offset * width * sqrt2), so a step
# can never rotate a heading far enough to push the true center out of
# its ball.  Tight slots freeze their headings; slack slots keep mobility.
EPS_WEDGE_MAX = 1e-2
EPS_MARGIN_DIV = 20.0
# narrowest heading box, in meters of displacement; thinner boxes push the
# Newton system past float64 conditioning
EPS_BOX_MIN_M = 1e-4
# sensing-row reserve: rows are tightened by the rotation blind spot plus
# up to this much held-back margin, so iterates rest a little inside the
# true constraint instead of on it
MARGIN_KEEP_M = 0.05
# anchors the position block to the previous iterate; the energy objective
# is flat in position, so without this the barrier's analytic centering
# walks the sensing centers off their landmarks a little every iteration
MU_POS = 1e-6


class PlannerError(ValueError):
    pass


@dataclass
class Trajectory:
    positions: np.ndarray   # (T+1, 2), row 0 is the start point
    speeds: np.ndarray      # (T,)
    slack_w: np.ndarray     # (T,) heading-sine slack
    slack_u: np.ndarray     # (T,) heading-cosine slack
    aux_q: np.ndarray       # (T,) induced-power auxiliary
    per_slot_power: np.ndarray  # (T,) true propulsion power, W
    total_energy: float     # J

    @property
    def slot_count(self):
        return len(self.speeds)

    def true_ratios(self, sc):
        w, u, _ = geometry.heading_ratios(self.positions, self.speeds,
                                          sc.slot_duration_s)
        return w, u

    def true_centers(self, sc):
        w, u = self.true_ratios(sc)
        return geometry.sensing_center(self.positions[1:], w, u, sc.sar)

    def slack_unity_residual(self):
        return float(np.max(np.abs(self.slack_w**2 + self.slack_u**2 - 1.0)))

    def verify(self, sc, range_mode="paper"):
        return geometry.verify_trajectory(self.positions, self.speeds, sc,
                                          range_mode=range_mode)


@dataclass
class IterationRecord:
    iteration: int
    objective_j: float       # true propulsion energy, J
    opt_objective: float     # objective actually minimized this iteration
    step_status: str
    max_slack_m: float
    step_norm_m: float
    true_ball_margin_m: float

    def to_dict(self):
        return {
            "iteration": self.iteration,
            "objective_J": self.objective_j,
            "opt_objective": self.opt_objective,
            "step_status": self.step_status,
            "max_slack_m": self.max_slack_m,
            "step_norm_m": self.step_norm_m,
            "true_ball_margin_m": self.true_ball_margin_m,
        }


@dataclass
class SolveReport:
    planner: str
    iterations: list
    converged: bool
    total_energy_j: float
    wallclock_s: float
    range_mode: str
    range_constant_m2: float | None
    slack_unity_residual: float
    warning: str | None = None
    feasibility: geometry.FeasibilityReport | None = None
    eps: float = 0.0
    max_iter: int = 0

    def to_dict(self):
        return {
            "planner": self.planner,
            "iterations": [r.to_dict() for r in self.iterations],
            "converged": bool(self.converged),
            "total_energy_J": self.total_energy_j,
            "wallclock_s": self.wallclock_s,
            "range_mode": self.range_mode,
            "range_constant_m2": self.range_constant_m2,
            "slack_unity_residual": self.slack_unity_residual,
            "warning": self.warning,
            "feasibility": None if self.feasibility is None
            else self.feasibility.to_dict(),
            "eps": self.eps,
            "max_iter": self.max_iter,
        }


def range_constant(sc, mode="paper"):
    """Squared standoff of the sensing center from the BS ground point.

    Returns None when the requirement is dropped (exact mode with a
    nonpositive threshold); the squared form stays on by default because it
    reproduces the published formulation even where it is stricter.
    """
    if mode not in ("paper", "exact"):
        raise PlannerError(f"unknown range mode {mode!r}")
    kappa = geometry.range_kappa(sc.sar)
    if mode == "exact" and kappa <= 0.0:
        return None
    return geometry.range_standoff_sq(sc.sar, sc.bs)


def cruise_speed(sc):
    """Most power-efficient admissible speed (grid argmin, 0.01 m/s)."""
    lo = sc.min_speed_mps
    hi = sc.power.max_speed_mps
    grid = np.arange(lo, hi + 0.005, 0.01)
    p = power.propulsion_power(grid, sc.power)
    return float(grid[int(np.argmin(p))])


def _tow_schedule(lm, min_step):
    """Gliding anchor path, tow phase, and phase-lock flags per slot.

    The anchor glides from midpoint to midpoint of consecutive
    landmarks, advancing continuously at the schedule's own pace.  The
    tow phase is the bearing a follower should keep from the anchor:
    a quarter turn left of the local march direction, since the
    sensing offset points right of the motion.  Phases are smoothed
    with a centered window, so a turn's rotation is split evenly
    before and after it: the follower crosses the halfway bearing at
    the turn itself, staying inside the band of phases that can keep
    pace with both the old and the new leg.  The
    lock flag marks slots whose march pace is at least the minimum
    flyable step: only there can a follower hold the phase in
    lockstep; slower stretches leave the phase free so the follower
    may orbit the anchor instead of dithering below cruise.
    """
    T = len(lm)
    starts = [0]
    for t in range(1, T):
        if abs(lm[t, 0] - lm[t - 1, 0]) > 1e-9 or \
           abs(lm[t, 1] - lm[t - 1, 1]) > 1e-9:
            starts.append(t)
    n_blk = len(starts)
    g = np.empty_like(lm)
    phase_raw = np.zeros(T)
    last_dir = 0.0
    for i in range(n_blk):
        a = starts[i]
        b = starts[i + 1] if i + 1 < n_blk else T
        pt = lm[a]
        lo = pt if i == 0 else 0.5 * (lm[starts[i - 1]] + pt)
        hi = pt if i == n_blk - 1 else 0.5 * (pt + lm[starts[i + 1]])
        f = (np.arange(b - a) + 1.0)[:, None] / (b - a)
        g[a:b] = lo + (hi - lo) * f
        if i + 1 < n_blk:
            d = lm[starts[i + 1]] - pt
            last_dir = math.atan2(d[1], d[0])
        phase_raw[a:b] = last_dir + 0.5 * math.pi
    phase_raw = np.unwrap(phase_raw)
    half = int(min(100, max(1, T // 6)))
    padded = np.concatenate([np.full(half, phase_raw[0]), phase_raw,
                             np.full(half, phase_raw[-1])])
    kernel = np.full(2 * half + 1, 1.0 / (2 * half + 1))
    phase = np.convolve(padded, kernel, mode="valid")
    step = np.linalg.norm(np.diff(g, axis=0, prepend=g[:1]), axis=1)
    step[0] = step[1] if T > 1 else 0.0
    lock = step >= min_step
    return g, phase, lock


def _huber(x, cap):
    """Quadratic inside the cap, linear outside, continuous slope.

    Ring errors use this instead of a plain square so a large opening gap
    cannot justify a sprint: beyond the cap the pull grows at 2*cap per
    meter, below the power premium of flying flat out, so the chase closes
    big gaps by leaning at cruise instead of burning toward the ring.
    """
    a = np.abs(x)
    return np.where(a <= cap, x * x, cap * (2.0 * a - cap))


def _block_anchors(lm):
    """Per-slot gliding lead point and after-next block landmark.

    The lead glides from the current landmark to the next block's over
    the course of each hold, so a chaser pulled toward its ring drifts
    ahead smoothly instead of sprinting at every switch.  The far
    anchor is the block after next, which biases the drift to cut
    corners on the cheap side.
    """
    T = len(lm)
    starts = [0]
    for t in range(1, T):
        if abs(lm[t, 0] - lm[t - 1, 0]) > 1e-9 or \
           abs(lm[t, 1] - lm[t - 1, 1]) > 1e-9:
            starts.append(t)
    n = len(starts)
    lead = np.empty_like(lm)
    aft = np.empty_like(lm)
    for i in range(n):
        a = starts[i]
        b = starts[i + 1] if i + 1 < n else T
        cur = lm[a]
        nxt = lm[starts[i + 1]] if i + 1 < n else cur
        far = lm[starts[i + 2]] if i + 2 < n else nxt
        f = (np.arange(b - a) + 1.0)[:, None] / (b - a)
        lead[a:b] = cur + (nxt - cur) * f
        aft[a:b] = far
    return lead, aft


def initialize(sc, range_mode="paper"):
    """Feasible starting trajectory that orbits each slot's landmark.

    The sensing center rides a fixed offset to the right of the motion,
    so covered flight is roughly tangential: the craft orbits the
    active landmark clockwise at near the offset radius.  Each slot
    scans a heading-by-speed grid, keeps the candidates whose center
    covers the slot's landmark with a safety margin, and among those
    picks the cheapest step by one of two pilots.  The tow pilot holds
    ring distance from a gliding anchor and, where the schedule moves
    fast enough to follow in lockstep, the scheduled tow bearing; it
    flies tight efficient arcs but can paint itself into a corner on
    sharp turns taken at speed.  The ring pilot drops the bearing term
    and instead blends ring pulls toward the current, next and
    after-next landmarks, which wanders more but slips through corners
    the tow pilot cannot.  Each pilot runs over a ladder of ring-pull
    caps: a small cap keeps the chase at frugal speeds but cannot close
    an opening gap against a tight deadline, so failed attempts retry
    with stronger pulls that buy pace with power.  The first attempt to
    produce a verified trajectory wins.  Raises when none can cover
    every slot.
    """
    delta = sc.slot_duration_s
    off = sc.center_offset_m
    v_lo = sc.min_speed_mps
    v_hi = sc.power.max_speed_mps
    if v_lo > v_hi:
        raise PlannerError("minimum feasible speed exceeds the speed limit")
    v_c = cruise_speed(sc)
    lm = sc.landmark_array()
    T = sc.slot_count

    r_s = sc.sensing_radius_m
    margin = min(5.0, 0.05 * r_s)
    allow = r_s - margin
    g, phase, lock = _tow_schedule(lm, delta * v_lo)
    lead, aft = _block_anchors(lm)

    ang = np.linspace(-math.pi, math.pi, 2880, endpoint=False)
    cosg, sing = np.cos(ang), np.sin(ang)
    # keep the grid strictly inside the speed box: a slot sitting exactly
    # on a bound leaves the barrier subproblems no interior to start from
    vgrid = np.unique(np.clip(
        [v_lo * (1.0 + 1e-6), 10.0, 14.0, v_c, 22.0, 30.0, 38.0, v_hi],
        v_lo * (1.0 + 1e-6), v_hi * (1.0 - 1e-6)))
    pgrid = power.propulsion_power(vgrid, sc.power) * delta
    steps = (delta * vgrid)[:, None]

    def chase(tow, cap):
        pos = np.zeros((T + 1, 2))
        pos[0] = sc.q0
        speeds = np.zeros(T)
        w = np.zeros(T)
        u = np.zeros(T)
        p = sc.q0.astype(float)
        for t in range(T):
            px = p[0] + steps * cosg
            py = p[1] + steps * sing
            cx = px + off * sing - lm[t, 0]
            cy = py - off * cosg - lm[t, 1]
            md = cx * cx + cy * cy
            ok = md <= allow * allow
            if not ok.any():
                gap = float(np.sqrt(md.min())) - allow
                raise PlannerError(
                    f"no feasible initialization: slot {t + 1} landmark "
                    f"misses every reachable sensing area by {gap:.1f} m "
                    f"(coverage radius {r_s:.1f} m)")
            if tow:
                rx = px - g[t, 0]
                ry = py - g[t, 1]
                rad = np.hypot(rx, ry) - off
                score = _huber(rad, cap) + pgrid[:, None]
                if lock[t]:
                    ux, uy = math.cos(phase[t]), math.sin(phase[t])
                    swing = off * np.arctan2(ux * ry - uy * rx,
                                             ux * rx + uy * ry)
                    # saturate so a dislocated start or a schedule switch
                    # cannot drown the ring term; the free orbit already
                    # rotates the right way
                    score = score + np.minimum(swing * swing, 300.0 ** 2)
            else:
                r0 = np.hypot(px - lm[t, 0], py - lm[t, 1]) - off
                r1 = np.hypot(px - lead[t, 0], py - lead[t, 1]) - off
                r2 = np.hypot(px - aft[t, 0], py - aft[t, 1]) - off
                score = (_huber(r0, cap) + _huber(r1, cap)
                         + 0.5 * _huber(r2, cap) + pgrid[:, None])
            score = np.where(ok, score, np.inf)
            k, j = np.unravel_index(int(np.argmin(score)), score.shape)
            V = float(vgrid[k])
            p = p + delta * V * np.array([cosg[j], sing[j]])
            pos[t + 1] = p
            speeds[t] = V
            w[t] = sing[j]
            u[t] = cosg[j]

        pw = power.propulsion_power(speeds, sc.power)
        traj = Trajectory(positions=pos, speeds=speeds, slack_w=w, slack_u=u,
                          aux_q=power.q_star(speeds, sc.power),
                          per_slot_power=pw,
                          total_energy=float(delta * pw.sum()))
        rep = traj.verify(sc, range_mode=range_mode)
        if not rep.overall_pass:
            bad = [(k, c) for k, c in rep.checks.items() if not c.passed]
            name, chk = bad[0]
            raise PlannerError(
                f"no feasible initialization: {name} violated at slot "
                f"{chk.worst_slot} (margin {chk.worst_margin:.3g})")
        return traj

    last = None
    for tow, cap in ((True, 4.0), (False, 4.0), (False, 20.0),
                     (True, 20.0), (False, 40.0)):
        try:
            return chase(tow, cap)
        except PlannerError as err:
            last = err
    raise last


def _var_names(T):
    names = []
    for t in range(1, T + 1):
        names += [f"x{t}", f"y{t}", f"V{t}", f"q{t}"]
    return names


def build_trajectory_step(prev, sc, c_r=None, objective="energy"):
    """Convex subproblem over (x, y, V, q) blocks with frozen heading slacks.

    The induced-power coupling is kept through 1/q^2 <= the linearization
    of q^2 + V^2/v0^2 at the previous iterate (expansion point reset to the
    exact auxiliary value), mobility through per-slot cones, and the
    landmark constraint through balls around the slack-offset centers.
    Returns (problem, warm_start_vector).
    """
    T = prev.slot_count
    pp = sc.power
    delta = sc.slot_duration_s
    off = sc.center_offset_m
    v0sq = pp.rotor_induced_velocity_mps**2
    lm = sc.landmark_array()
    r_s = sc.sensing_radius_m

    n = 4 * T
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    iV = np.arange(T) * 4 + 2
    iq = np.arange(T) * 4 + 3
    lo[iV] = sc.min_speed_mps
    hi[iV] = pp.max_speed_mps
    lo[iq] = Q_FLOOR
    hi[iq] = 2.0  # the auxiliary satisfies 1/q^2 >= q^2, so q <= 1
    prob = solver.ConvexSubproblem(n, lo, hi, var_names=_var_names(T))

    lin = np.zeros(n)
    quad = np.zeros(n)
    cubic = np.zeros(n)
    const = 0.0
    ixy = np.concatenate([np.arange(T) * 4, np.arange(T) * 4 + 1])
    prev_xy = np.concatenate([prev.positions[1:, 0], prev.positions[1:, 1]])
    quad[ixy] += MU_POS
    lin[ixy] += -2.0 * MU_POS * prev_xy
    const += MU_POS * float(prev_xy @ prev_xy)
    if objective == "energy":
        quad[iV] += delta * 3.0 * pp.blade_profile_power_w / pp.tip_speed_mps**2
        cubic[iV] = delta * power.parasite_coefficient(pp)
        lin[iq] += delta * pp.induced_power_w
        const += T * delta * pp.blade_profile_power_w
        prob.set_objective(const=const, lin=lin, quad=quad, cubic=cubic)
    elif objective == "distance":
        lin[iV] += delta
        prob.set_objective(const=const, lin=lin, quad=quad)
    elif objective == "distance_literal":
        prob.set_objective(const=const, lin=lin, quad=quad)
        for t in range(T):
            prob.add_norm_term(4 * t, 4 * t + 1, weight=1.0, eps=1e-3)
    else:
        raise PlannerError(f"unknown objective {objective!r}")

    v_bar = prev.speeds
    q_bar = power.q_star(v_bar, pp)
    w_bar = prev.slack_w
    u_bar = prev.slack_u
    prev_centers = prev.positions[1:] + off * np.column_stack([w_bar, -u_bar])
    qb = np.array([sc.bs.x_m, sc.bs.y_m])

    ball_margin = r_s - np.linalg.norm(lm - prev_centers, axis=1)
    sense_margin = ball_margin.copy()
    if c_r is not None and c_r > 0.0:
        standoff = np.linalg.norm(prev_centers - qb, axis=1) - math.sqrt(c_r)
        sense_margin = np.minimum(sense_margin, standoff)
    eps_floor = EPS_BOX_MIN_M / (delta * np.maximum(v_bar, sc.min_speed_mps))
    eps_w = np.clip(np.maximum(sense_margin / (EPS_MARGIN_DIV * off),
                               eps_floor),
                    None, EPS_WEDGE_MAX)
    blind = math.sqrt(2.0) * off * eps_w
    tighten = blind + np.clip(sense_margin - blind, 0.0, MARGIN_KEEP_M)

    for t in range(T):
        ix, iy, ivt, iqt = 4 * t, 4 * t + 1, 4 * t + 2, 4 * t + 3
        h_bar = q_bar[t]**2 + v_bar[t]**2 / v0sq
        prob.add_invsq(iqt, a0=-h_bar, aq=2.0 * q_bar[t],
                       iv=ivt, av=2.0 * v_bar[t] / v0sq)
        # both-sided heading pins: the one-sided ties alone leave the
        # realized heading free to rotate away whenever the step is shorter
        # than delta*V, which would move the true center without the frozen
        # ball noticing
        wn = w_bar[t] - eps_w[t]
        un = u_bar[t] + eps_w[t]
        wp = w_bar[t] + eps_w[t]
        um = u_bar[t] - eps_w[t]
        if t == 0:
            prob.add_soc(ix, iy, ivt, cx=-sc.start_x_m, cy=-sc.start_y_m,
                         dcoef=delta)
            prob.add_linear([ivt, iy], [wn * delta, -1.0], -sc.start_y_m)
            prob.add_linear([ix, ivt], [1.0, -un * delta], sc.start_x_m)
            prob.add_linear([iy, ivt], [1.0, -wp * delta], sc.start_y_m)
            prob.add_linear([ivt, ix], [um * delta, -1.0], -sc.start_x_m)
        else:
            prob.add_soc(ix, iy, ivt, jx=ix - 4, jy=iy - 4, dcoef=delta)
            prob.add_linear([ivt, iy, iy - 4], [wn * delta, -1.0, 1.0], 0.0)
            prob.add_linear([ix, ix - 4, ivt], [1.0, -1.0, -un * delta], 0.0)
            prob.add_linear([iy, iy - 4, ivt], [1.0, -1.0, -wp * delta], 0.0)
            prob.add_linear([ivt, ix, ix - 4], [um * delta, -1.0, 1.0], 0.0)
        prob.add_ball(ix, iy, dx=off * w_bar[t] - lm[t, 0],
                      dy=-off * u_bar[t] - lm[t, 1], rho=r_s - tighten[t])
        if c_r is not None and c_r > 0.0:
            g = prev_centers[t] - qb
            gn = float(np.hypot(g[0], g[1]))
            if gn < 1e-9:
                raise PlannerError(
                    f"range linearization degenerate at slot {t + 1}: previous "
                    "sensing center sits on the BS ground point")
            # linearized standoff, normalized to meters: the center may not
            # move toward the BS past the tangent plane of the standoff disk
            ghat = g / gn
            margin = (gn * gn - c_r) / (2.0 * gn)
            cw = -ghat[0]
            cu = -ghat[1]
            b = cw * prev_centers[t, 0] + cu * prev_centers[t, 1] + margin
            b -= cw * off * w_bar[t] - cu * off * u_bar[t]
            prob.add_linear([ix, iy], [cw, cu], b - tighten[t])

    warm = np.zeros(n)
    warm[0::4] = prev.positions[1:, 0]
    warm[1::4] = prev.positions[1:, 1]
    # iterates whose steps use their full speed sit exactly on the mobility
    # cones; a relative nudge opens every cone (and only relaxes the speed-
    # coupled rows) so the barrier can start without a phase-one rescue
    warm[iV] = np.minimum(v_bar * (1.0 + 1e-7), hi[iV] * (1.0 - 1e-9))
    warm[iq] = q_bar * (1.0 + 1e-6) + 1e-9
    return prob.finalize(), warm


def build_feasibility_step(traj, sc, slot, c_r=None):
    """Per-slot slack subproblem in center-offset coordinates.

    Variables are (offset*w, offset*u, s): the ball radius and the reported
    slack are then in meters.  Returns (problem, prox spec, scale).
    """
    t = slot
    delta = sc.slot_duration_s
    off = sc.center_offset_m
    p = traj.positions[t + 1]
    g = sc.landmark_array()[t]
    V = traj.speeds[t]
    wt = float(np.clip((p[1] - traj.positions[t, 1]) / (delta * V), -1.0, 1.0))
    ut = float(np.clip((p[0] - traj.positions[t, 0]) / (delta * V), -1.0, 1.0))

    lo = np.array([-off, min(ut * off, off - 1e-9)])
    hi = np.array([max(wt * off, -off + 1e-9), off])
    prob = solver.ConvexSubproblem(2, lo, hi, var_names=[f"w{t+1}", f"u{t+1}"])
    prob.add_ball(0, 1, dx=p[0] - g[0], dy=-(p[1] - g[1]),
                  rho=sc.sensing_radius_m)
    if c_r is not None and c_r > 0.0:
        c_tilde = p + off * np.array([wt, -ut])
        gv = c_tilde - np.array([sc.bs.x_m, sc.bs.y_m])
        gn = float(np.hypot(gv[0], gv[1]))
        if gn >= 1e-9:
            ghat = gv / gn
            margin = (gn * gn - c_r) / (2.0 * gn)
            a = np.array([-ghat[0], ghat[1]])
            z_tilde = off * np.array([wt, ut])
            prob.add_linear([0, 1], a, float(a @ z_tilde) + margin)
    prox = ([0, 1], [off * wt, off * ut], MU_PROX / (off * off))
    return prob.finalize(), prox, (wt, ut)


def refresh_slacks(traj, sc, c_r=None):
    """Feasibility pass: per-slot closest admissible (w, u) to the true heading.

    Returns (w, u, slack_m) arrays; slack_m is the extra sensing radius (in
    meters) a slot would need, zero for satisfiable slots.
    """
    T = traj.slot_count
    delta = sc.slot_duration_s
    off = sc.center_offset_m
    r_s = sc.sensing_radius_m
    lm = sc.landmark_array()
    w_true, u_true = traj.true_ratios(sc)
    centers = geometry.sensing_center(traj.positions[1:], w_true, u_true, sc.sar)
    miss = np.linalg.norm(lm - centers, axis=1)
    range_ok = np.ones(T, dtype=bool)
    if c_r is not None and c_r > 0.0:
        qb = np.array([sc.bs.x_m, sc.bs.y_m])
        range_ok = np.linalg.norm(centers - qb, axis=1) >= math.sqrt(c_r) + 1e-9

    w = w_true.copy()
    u = u_true.copy()
    slack = np.zeros(T)
    for t in range(T):
        if miss[t] <= r_s - 1e-9 and range_ok[t]:
            continue  # the true heading already satisfies the slot
        prob, prox, _ = build_feasibility_step(traj, sc, t, c_r=c_r)
        po = solver.phase_one(prob, s_floor=0.0, prox=prox, kkt_tol=1e-8)
        w[t] = po.z[0] / off
        u[t] = po.z[1] / off
        slack[t] = max(po.min_slack, 0.0)
    return w, u, slack


def _opt_objective_value(traj, sc, objective):
    delta = sc.slot_duration_s
    if objective == "energy":
        return float(delta * power.propulsion_power(traj.speeds, sc.power).sum())
    if objective == "distance":
        return float(delta * traj.speeds.sum())
    p = traj.positions[1:]
    return float(np.sqrt((p * p).sum(axis=1) + 1e-6).sum())


def plan_sca_bcd(sc, eps=1e-4, max_iter=100, range_mode="paper",
                 objective="energy", dump_dir=None):
    """Alternating trajectory/slack optimization from the chasing start.

    Stops when the optimized objective's relative decrease falls below eps
    while every slot's feasibility slack is below 1e-6 m, or at max_iter.
    Returns (Trajectory, SolveReport).
    """
    if eps < 0 or max_iter < 1:
        raise PlannerError("eps must be >= 0 and max_iter >= 1")
    t0 = time.perf_counter()
    c_r = range_constant(sc, range_mode)
    traj = initialize(sc, range_mode=range_mode)
    prev_obj = _opt_objective_value(traj, sc, objective)
    records = []
    converged = False
    warning = None
    lm = sc.landmark_array()
    for it in range(1, max_iter + 1):
        prob, warm = build_trajectory_step(traj, sc, c_r=c_r, objective=objective)
        if dump_dir is not None:
            with open(os.path.join(dump_dir, f"trajectory_step_{it:03d}.txt"),
                      "w", encoding="utf-8") as fh:
                prob.dump(fh)
        out = solver.solve(prob, warm_start=warm)
        if out.status == "infeasible-detected":
            warning = (f"trajectory step reported infeasible at iteration {it}; "
                       "keeping the last feasible iterate")
            records.append(IterationRecord(it, traj.total_energy,
                                           prev_obj, out.status, 0.0, 0.0, 0.0))
            break
        z = out.z
        new_pos = np.vstack([sc.q0, np.column_stack([z[0::4], z[1::4]])])
        speeds = z[2::4].copy()
        step_norm = float(np.max(np.linalg.norm(new_pos - traj.positions, axis=1)))
        pw = power.propulsion_power(speeds, sc.power)
        cand = Trajectory(positions=new_pos, speeds=speeds,
                          slack_w=traj.slack_w, slack_u=traj.slack_u,
                          aux_q=z[3::4].copy(), per_slot_power=pw,
                          total_energy=float(sc.slot_duration_s * pw.sum()))
        w, u, slack = refresh_slacks(cand, sc, c_r=c_r)
        cand.slack_w, cand.slack_u = w, u
        max_slack = float(slack.max()) if len(slack) else 0.0
        true_margin = float(np.min(sc.sensing_radius_m
                                   - np.linalg.norm(lm - cand.true_centers(sc),
                                                    axis=1)))
        cur_obj = _opt_objective_value(cand, sc, objective)
        if cur_obj > prev_obj + 1e-9 * max(1.0, abs(prev_obj)):
            # the subproblem optimum can never be worse than its own warm
            # start, so a worse candidate means the solve hit its numerical
            # floor; descent is exhausted
            last_slack = records[-1].max_slack_m if records else 0.0
            records.append(IterationRecord(it, traj.total_energy, prev_obj,
                                           "stalled", last_slack, 0.0,
                                           records[-1].true_ball_margin_m
                                           if records else 0.0))
            converged = last_slack < SLACK_TOL
            break
        records.append(IterationRecord(it, cand.total_energy, cur_obj,
                                       out.status, max_slack, step_norm,
                                       true_margin))
        cand_rep = cand.verify(sc, range_mode=range_mode)
        if not cand_rep.overall_pass:
            # the blind-spot budget makes this unreachable; keep the last
            # verified iterate rather than accept a violating one
            bad = min((c for c in cand_rep.checks.values() if not c.passed),
                      key=lambda c: c.worst_margin)
            warning = (f"iteration {it} candidate failed {bad.name} "
                       f"(margin {bad.worst_margin:.3g} m); keeping the "
                       "previous iterate")
            break
        traj = cand
        rel = (prev_obj - cur_obj) / max(1.0, abs(prev_obj))
        prev_obj = cur_obj
        if rel < eps and max_slack < SLACK_TOL:
            converged = True
            break
    if not converged and warning is None and records:
        if records[-1].max_slack_m >= SLACK_TOL:
            warning = ("feasibility slack above tolerance at the final "
                       "iteration; slacks may not match realizable headings")
    rep = SolveReport(
        planner="sca" if objective == "energy" else "baseline",
        iterations=records,
        converged=converged,
        total_energy_j=traj.total_energy,
        wallclock_s=time.perf_counter() - t0,
        range_mode=range_mode,
        range_constant_m2=c_r,
        slack_unity_residual=traj.slack_unity_residual(),
        warning=warning,
        feasibility=traj.verify(sc, range_mode=range_mode),
        eps=eps,
        max_iter=max_iter,
    )
    return traj, rep


def plan_baseline(sc, eps=1e-4, max_iter=100, range_mode="paper",
                  literal=False, dump_dir=None):
    """Distance-minimizing reference planner on the same constraint machinery.

    Default objective is the total flight distance (through the speed sum
    that upper-bounds it); `literal` switches to the sum of distances to the
    origin.  Power and energy are evaluated from the realized speeds.
    """
    objective = "distance_literal" if literal else "distance"
    return plan_sca_bcd(sc, eps=eps, max_iter=max_iter, range_mode=range_mode,
                        objective=objective, dump_dir=dump_dir)
