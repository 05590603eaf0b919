"""Command line front end.

Exit codes: 0 success, 2 bad scenario, 3 planner failure or
non-convergence, 4 feasibility verification failure.
"""

import json
import logging
import os
import sys

import click

from . import geometry, harness, planner, power, scenario, stochastic


def _configure_logging():
    level = os.environ.get("BISAR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


@click.group()
def main():
    _configure_logging()


def _run_options(fn):
    opts = [
        click.option("--scenario", "scenario_path", required=True,
                     type=click.Path(exists=True, dir_okay=False),
                     help="Scenario TOML file."),
        click.option("--out", "out_dir", required=True,
                     type=click.Path(file_okay=False),
                     help="Output directory for CSV/JSON artifacts."),
        click.option("--eps", default=1e-4, show_default=True,
                     help="Relative objective-change convergence threshold."),
        click.option("--max-iters", default=100, show_default=True,
                     help="Outer iteration cap."),
        click.option("--range-mode", default="paper", show_default=True,
                     type=click.Choice(["paper", "exact"]),
                     help="Range-resolution constraint form."),
        click.option("--seed", default=0, show_default=True,
                     help="Recorded in the report; planning is deterministic."),
        click.option("--dump-subproblems", "dump_dir", default=None,
                     type=click.Path(file_okay=False),
                     help="Directory for per-iteration subproblem dumps."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _do_run(algo, scenario_path, out_dir, eps, max_iters, range_mode, seed,
            dump_dir):
    if dump_dir is not None:
        os.makedirs(dump_dir, exist_ok=True)
    try:
        result = harness.run(scenario_path, algo=algo, out_dir=out_dir,
                             seed=seed, eps=eps, max_iters=max_iters,
                             range_mode=range_mode, dump_dir=dump_dir)
    except scenario.ScenarioError as err:
        click.echo(f"scenario error: {err}", err=True)
        sys.exit(2)
    except planner.PlannerError as err:
        click.echo(f"planner error: {err}", err=True)
        sys.exit(3)
    bad_feasibility = False
    unconverged = False
    for name, entry in result.report["planners"].items():
        feas = entry["feasibility"]["overall_pass"]
        bad_feasibility |= not feas
        unconverged |= not entry["converged"]
        click.echo(f"{name}: energy {entry['total_energy_J']:.2f} J in "
                   f"{entry['iterations']} iterations "
                   f"(converged={entry['converged']}, feasible={feas})")
    saving = result.report["energy_saving_fraction"]
    if saving is not None:
        click.echo(f"energy saving fraction: {saving:.4f}")
    click.echo(f"report: {result.report_path}")
    if bad_feasibility:
        sys.exit(4)
    if unconverged:
        sys.exit(3)


@main.command(name="plan", help="Plan with the energy-minimizing solver.")
@_run_options
def plan_cmd(**kw):
    _do_run("sca", **kw)


@main.command(name="baseline", help="Plan with the distance-minimizing "
                                    "benchmark.")
@_run_options
def baseline_cmd(**kw):
    _do_run("baseline", **kw)


@main.command(name="both", help="Run both planners and report the saving.")
@_run_options
def both_cmd(**kw):
    _do_run("both", **kw)


@main.command(name="preset", help="Write a named scenario file.")
@click.argument("name", type=click.Choice(harness.PRESETS))
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--spacing", default=None, type=float,
              help="Landmark spacing override, meters.")
@click.option("--altitude", default=None, type=float,
              help="Flight altitude override, meters.")
@click.option("--seed", default=None, type=int,
              help="Spacing seed for the random pattern.")
def preset_cmd(name, out_path, spacing, altitude, seed):
    path = harness.preset(name, out_path, spacing=spacing, altitude=altitude,
                          seed=seed)
    click.echo(path)


@main.command(name="verify", help="Check a trajectory CSV against a "
                                  "scenario's constraints.")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--trajectory", "trajectory_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--range-mode", default="paper", show_default=True,
              type=click.Choice(["paper", "exact"]))
def verify_cmd(scenario_path, trajectory_path, range_mode):
    try:
        sc = scenario.load_scenario(scenario_path)
    except scenario.ScenarioError as err:
        click.echo(f"scenario error: {err}", err=True)
        sys.exit(2)
    positions, speeds = harness.read_trajectory_csv(trajectory_path)
    report = geometry.verify_trajectory(positions, speeds, sc,
                                        range_mode=range_mode)
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if not report.overall_pass:
        sys.exit(4)


@main.group(name="stats", help="Object-field spacing statistics.")
def stats_group():
    pass


@stats_group.command(name="dmin", help="Expected nearest-object distance "
                                       "in a uniform disk field.")
@click.option("--n", default=1000, show_default=True,
              help="Object count, including the designated one.")
@click.option("--radius", default=5000.0, show_default=True,
              help="Field radius, meters.")
@click.option("--method", default="integrate", show_default=True,
              type=click.Choice(list(stochastic.METHODS)))
@click.option("--trials", default=10000, show_default=True,
              help="Monte Carlo sample count (mc method).")
@click.option("--seed", default=0, show_default=True)
def dmin_cmd(n, radius, method, trials, seed):
    result = stochastic.expected_dmin(n, radius, method=method,
                                      trials=trials, seed=seed)
    payload = result.to_dict()
    payload["n"] = n
    payload["radius_m"] = radius
    payload["asymptotic_m"] = stochastic.asymptotic_dmin(n, radius)
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@main.group(name="power", help="Propulsion power model queries.")
def power_group():
    pass


@power_group.command(name="curve", help="CSV of the power curve on a "
                                        "uniform speed grid.")
@click.option("--vmax", default=70.0, show_default=True,
              help="Top speed of the grid, m/s.")
@click.option("--step", default=0.5, show_default=True,
              help="Grid spacing, m/s.")
def curve_cmd(vmax, step):
    pp = scenario.PowerParams()
    grid, powers = power.power_curve(pp, v_max=vmax, step=step)
    click.echo("V_mps,P_W")
    for v, p in zip(grid, powers):
        click.echo(f"{repr(float(v))},{repr(float(p))}")


if __name__ == "__main__":
    main()
