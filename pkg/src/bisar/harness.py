"""Experiment runner: plan a scenario, write CSV/JSON artifacts.

Every file is written with repr() floats and fixed key order, so a rerun
with the same inputs is byte-identical.
"""

import dataclasses
import json
import os
import time

import numpy as np

from . import planner, power, scenario

PRESETS = ("turn30", "turn200", "staircase30", "square100", "random100")


class HarnessError(ValueError):
    pass


@dataclasses.dataclass
class ExperimentResult:
    out_dir: str
    report: dict
    report_path: str
    errors: list


def _fmt(value):
    return repr(float(value))


def write_trajectory_csv(path, sc, traj):
    """Rows are slot arrivals; row 0 is the start point with blank slot fields.

    The sensing center columns satisfy cx = x + offset*w, cy = y - offset*u,
    so downstream plots never need the geometry.
    """
    off = sc.center_offset_m
    delta = sc.slot_duration_s
    lines = ["t_index,t_s,x_m,y_m,V_mps,w,u,cx_m,cy_m,power_W,energy_J"]
    lines.append(",".join(["0", _fmt(0.0), _fmt(traj.positions[0, 0]),
                           _fmt(traj.positions[0, 1]), "", "", "", "", "",
                           "", ""]))
    for t in range(traj.slot_count):
        x = traj.positions[t + 1, 0]
        y = traj.positions[t + 1, 1]
        w = traj.slack_w[t]
        u = traj.slack_u[t]
        p = traj.per_slot_power[t]
        lines.append(",".join([
            str(t + 1), _fmt(delta * (t + 1)), _fmt(x), _fmt(y),
            _fmt(traj.speeds[t]), _fmt(w), _fmt(u),
            _fmt(x + off * w), _fmt(y - off * u),
            _fmt(p), _fmt(delta * p),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path):
    """Positions (T+1, 2) and speeds (T,) back from a trajectory file."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    ix = header.index("x_m")
    iy = header.index("y_m")
    iv = header.index("V_mps")
    positions = np.array([[float(r[ix]), float(r[iy])] for r in rows])
    speeds = np.array([float(r[iv]) for r in rows[1:]])
    return positions, speeds


def _write_plotdata(plot_dir, sc, traj):
    delta = sc.slot_duration_s
    off = sc.center_offset_m
    lm = sc.landmark_array()
    lines = ["t_index,t_s,power_W"]
    for t in range(traj.slot_count):
        lines.append(",".join([str(t + 1), _fmt(delta * (t + 1)),
                               _fmt(traj.per_slot_power[t])]))
    with open(os.path.join(plot_dir, "power_vs_time.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")

    stride = max(1, traj.slot_count // 60)
    lines = ["t_index,x_m,y_m,cx_m,cy_m,r_s_m,gx_m,gy_m"]
    for t in range(0, traj.slot_count, stride):
        x = traj.positions[t + 1, 0]
        y = traj.positions[t + 1, 1]
        lines.append(",".join([
            str(t + 1), _fmt(x), _fmt(y),
            _fmt(x + off * traj.slack_w[t]),
            _fmt(y - off * traj.slack_u[t]),
            _fmt(sc.sensing_radius_m), _fmt(lm[t, 0]), _fmt(lm[t, 1]),
        ]))
    with open(os.path.join(plot_dir, "trajectory_circles.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


_PLANNERS = {
    "sca": planner.plan_sca_bcd,
    "baseline": planner.plan_baseline,
}


def run(scenario_path, algo="both", out_dir="out", seed=0, eps=1e-4,
        max_iters=100, range_mode="paper", dump_dir=None):
    """Plan, verify, and report; returns the report with artifact paths.

    A planner failure is re-raised after the report and any finished
    artifacts are written, so partial output survives for inspection.
    """
    if algo not in ("sca", "baseline", "both"):
        raise HarnessError(f"unknown algo {algo!r}")
    sc = scenario.load_scenario(scenario_path)
    os.makedirs(out_dir, exist_ok=True)
    wanted = ("sca", "baseline") if algo == "both" else (algo,)

    report = {
        "scenario": {
            "id": os.path.splitext(os.path.basename(scenario_path))[0],
            "path": os.path.abspath(scenario_path),
            "slot_count": sc.slot_count,
            "slot_duration_s": sc.slot_duration_s,
        },
        "seed": int(seed),
        "eps": eps,
        "max_iters": int(max_iters),
        "range_mode": range_mode,
        "planners": {},
        "energy_saving_fraction": None,
    }
    errors = []
    for name in wanted:
        sub = os.path.join(out_dir, name)
        os.makedirs(os.path.join(sub, "plotdata"), exist_ok=True)
        t0 = time.perf_counter()
        try:
            traj, srep = _PLANNERS[name](sc, eps=eps, max_iter=max_iters,
                                         range_mode=range_mode,
                                         dump_dir=dump_dir)
        except planner.PlannerError as err:
            report["planners"][name] = {"error": str(err)}
            errors.append(err)
            continue
        wall = time.perf_counter() - t0
        csv_path = os.path.join(sub, "trajectory.csv")
        write_trajectory_csv(csv_path, sc, traj)
        _write_plotdata(os.path.join(sub, "plotdata"), sc, traj)
        feas = traj.verify(sc, range_mode=range_mode)
        slot_energy = sc.slot_duration_s * traj.per_slot_power
        report["planners"][name] = {
            "trajectory_csv": os.path.relpath(csv_path, out_dir),
            "total_energy_J": traj.total_energy,
            "per_slot_energy_J": [float(e) for e in slot_energy],
            "per_slot_energy_std_J": float(slot_energy.std()),
            "iterations": len(srep.iterations),
            "converged": srep.converged,
            "wallclock_s": wall,
            "warning": srep.warning,
            "feasibility": feas.to_dict(),
        }

    both = [report["planners"].get(n) for n in ("sca", "baseline")]
    if all(p and "error" not in p and p["converged"] for p in both):
        e_sca = both[0]["total_energy_J"]
        e_base = both[1]["total_energy_J"]
        if e_base > 0:
            report["energy_saving_fraction"] = 1.0 - e_sca / e_base

    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if errors:
        raise errors[0]
    return ExperimentResult(out_dir=out_dir, report=report,
                            report_path=report_path, errors=errors)


def preset(name, out_path, spacing=None, altitude=None, seed=None):
    """Write one of the named scenario files; returns the path.

    turn30/turn200: landmarks march up the y-axis then continue along x,
    300 s mission.  staircase30: four alternating legs, 600 s.  square100:
    closed 100 m loop, 600 s.  random100: turn-shaped walk with uniform
    random spacing, 300 s.  spacing/altitude/seed override the defaults.
    """
    if name not in PRESETS:
        raise HarnessError(f"unknown preset {name!r}")
    pattern, def_spacing, count, hold, slots = {
        "turn30": ("turn", 30.0, 30, 20, 600),
        "turn200": ("turn", 200.0, 30, 20, 600),
        "staircase30": ("staircase", 30.0, 30, 40, 1200),
        "square100": ("square", 100.0, 29, None, 1200),
        "random100": ("random", 100.0, 30, 20, 600),
    }[name]
    spacing = def_spacing if spacing is None else float(spacing)

    lines = ["[power]", "", "[sar]"]
    if altitude is not None:
        lines.append(f"altitude_m = {_fmt(altitude)}")
    lines += [
        "", "[bs]", "",
        "[mission]",
        "start_x_m = -500.0",
        "start_y_m = -1000.0",
        "slot_duration_s = 0.5",
        f"slot_count = {slots}",
        "",
        "[landmarks]",
        f'pattern = "{pattern}"',
        f"spacing_m = {_fmt(spacing)}",
        f"count = {count}",
    ]
    if hold is not None:
        lines.append(f"hold_slots = {hold}")
    if pattern == "random":
        lines.append(f"seed = {0 if seed is None else int(seed)}")
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return out_path
