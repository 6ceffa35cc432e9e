"""Command-line front end: plan (single run), bench (multi-trial tables),
oracle (brute-force equilibria on tiny instances), render (SVG), gen
(scenario files). Relative output paths resolve under $INASH_OUT_DIR."""
from __future__ import annotations

import json
import os
import pathlib

import click

from .baselines import brute_force_equilibria, discrete_game_from_scenario
from .environment import Scenario, load_scenario, save_scenario
from .game import PlannerConfig, RunRecord
from .metrics import ALGORITHMS, run_algorithm, run_experiment
from .render import render_svg
from .scenarios import RandomScenarioParams, builtin_scenario, generate_random_scenario

OUT_DIR_ENV = "INASH_OUT_DIR"


def _out_path(path: str) -> pathlib.Path:
    p = pathlib.Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = pathlib.Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load(scenario: str | None, preset: str | None, seed: int) -> Scenario:
    if (scenario is None) == (preset is None):
        raise click.UsageError("provide exactly one of --scenario or --preset")
    if scenario is not None:
        return load_scenario(scenario)
    return builtin_scenario(preset, seed)


def _config(**kw) -> PlannerConfig:
    return PlannerConfig(
        iterations=kw["iterations"],
        seed=kw["seed"],
        margin=kw["margin"],
        path_cap=kw["path_cap"],
        best_response=kw["best_response"],
        goal_by_center=kw["goal_by_center"],
        speed=kw["speed"],
        eta=kw["eta"],
        gamma=kw["gamma"],
        cost_mode=kw["cost_mode"],
        strict_nearest_only_edges=kw["strict_nearest_edges"],
        inactive_as_static=kw["inactive_as_static"],
        vanish_at_goal=kw["vanish_at_goal"],
    )


def planner_options(fn):
    opts = [
        click.option("--iterations", "-K", default=300, show_default=True, help="growth/game iterations"),
        click.option("--seed", type=int, default=None, help="run seed (default: scenario seed)"),
        click.option("--margin", default=0.0, show_default=True, help="extra inter-robot clearance"),
        click.option("--path-cap", default=10_000, show_default=True, help="per-robot path enumeration cap"),
        click.option("--best-response", is_flag=True, help="scan candidates in ascending cost order"),
        click.option("--goal-by-center/--goal-by-disc", default=True, show_default=True,
                     help="goal reached by center point vs whole disc"),
        click.option("--speed", default=1.0, show_default=True),
        click.option("--eta", type=float, default=None, help="max steer length (default: 7.5% of extent)"),
        click.option("--gamma", type=float, default=None, help="connection radius coefficient"),
        click.option("--cost-mode", type=click.Choice(["length", "length-time"]), default="length",
                     show_default=True),
        click.option("--strict-nearest-edges", is_flag=True,
                     help="connect new samples to the nearest vertex only (tree growth)"),
        click.option("--inactive-as-static", is_flag=True,
                     help="treat not-yet-active robots as parked obstacles"),
        click.option("--vanish-at-goal", is_flag=True,
                     help="robots leave the workspace when their path ends"),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


@click.group()
def main():
    """Multi-robot motion planning: sequential better-response equilibrium
    search on per-robot random graphs, plus prioritized and centralized
    baselines."""


@main.command()
@click.option("--scenario", type=click.Path(exists=True), default=None)
@click.option("--preset", type=click.Choice(["intersection-6", "random-8"]), default=None)
@click.option("--algorithm", type=click.Choice(list(ALGORITHMS)), default="inash", show_default=True)
@click.option("--out", default="run.json", show_default=True)
@click.option("--svg", default=None, help="also render the terminal paths")
@planner_options
def plan(scenario, preset, algorithm, out, svg, **kw):
    """Run one algorithm on one scenario and write the run record."""
    sc = _load(scenario, preset, kw["seed"] or 0)
    record = run_algorithm(algorithm, sc, _config(**kw))
    path = _out_path(out)
    record.save(path)
    reached = sum(record.reached())
    click.echo(f"{algorithm}: {reached}/{sc.n_robots} robots reached their goals")
    for p in record.terminal:
        if p is not None:
            click.echo(f"  robot {p.robot_id}: length {p.cost[0]:.3f}")
    click.echo(f"run record written to {path}")
    if svg:
        svg_path = _out_path(svg)
        svg_path.write_text(render_svg(sc, record.terminal))
        click.echo(f"svg written to {svg_path}")


@main.command()
@click.option("--scenario", type=click.Path(exists=True), default=None)
@click.option("--preset", type=click.Choice(["intersection-6", "random-8"]), default=None)
@click.option("--algorithm", type=click.Choice(list(ALGORITHMS)), default="inash", show_default=True)
@click.option("--trials", default=20, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--reference-k", default=20_000, show_default=True,
              help="dense-graph size for the reference optimum")
@click.option("--out-dir", default="bench", show_default=True)
@planner_options
def bench(scenario, preset, algorithm, trials, workers, reference_k, out_dir, **kw):
    """Multi-trial experiment: ratio/success tables as CSV + JSON."""
    sc = _load(scenario, preset, kw["seed"] or 0)
    table, records = run_experiment(
        sc, algorithm, trials, _config(**kw), workers=workers, reference_k=reference_k
    )
    out = _out_path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{algorithm}_table.csv").write_text(table.to_csv())
    with open(out / f"{algorithm}_records.json", "w") as fh:
        json.dump([r.to_json() for r in records], fh)
    click.echo(table.to_csv())
    click.echo(f"written to {out}/")


@main.command()
@click.option("--scenario", type=click.Path(exists=True), default=None)
@click.option("--preset", type=click.Choice(["intersection-6", "random-8"]), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--grow", default=60, show_default=True, help="graph growth iterations")
@click.option("--paths-per-robot", default=5, show_default=True)
@click.option("--out", default="oracle.json", show_default=True)
def oracle(scenario, preset, seed, grow, paths_per_robot, out):
    """Brute-force Nash / social-optimum sets on a small discrete game."""
    sc = _load(scenario, preset, seed)
    game = discrete_game_from_scenario(
        sc, PlannerConfig(seed=seed), grow_iterations=grow, paths_per_robot=paths_per_robot
    )
    res = brute_force_equilibria(game)
    payload = {
        "strategy_counts": game.sizes,
        "profiles": res.n_profiles,
        "feasible": res.n_feasible,
        "nash": [list(p) for p in res.nash],
        "social": [list(p) for p in res.social],
        "pos": res.pos,
        "poa": res.poa,
    }
    path = _out_path(out)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
    click.echo(
        f"{res.n_feasible}/{res.n_profiles} profiles feasible, "
        f"{len(res.nash)} Nash, {len(res.social)} social optima, "
        f"POS={res.pos:.6f} POA={res.poa:.6f}"
    )
    click.echo(f"written to {path}")


@main.command()
@click.option("--scenario", type=click.Path(exists=True), required=True)
@click.option("--record", type=click.Path(exists=True), default=None,
              help="run record whose terminal paths to draw")
@click.option("--out", default="scene.svg", show_default=True)
def render(scenario, record, out):
    """Render a scenario (and optionally a run's terminal paths) to SVG."""
    sc = load_scenario(scenario)
    paths = None
    if record:
        paths = RunRecord.load(record).terminal
    path = _out_path(out)
    path.write_text(render_svg(sc, paths))
    click.echo(f"svg written to {path}")


@main.command()
@click.option("--preset", type=click.Choice(["intersection-6", "random-8"]), default=None)
@click.option("--robots", default=8, show_default=True)
@click.option("--obstacles", default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="scenario.json", show_default=True)
def gen(preset, robots, obstacles, seed, out):
    """Generate a scenario file (built-in preset or seeded random)."""
    if preset is not None:
        sc = builtin_scenario(preset, seed)
    else:
        sc = generate_random_scenario(
            RandomScenarioParams(n_robots=robots, n_obstacles=obstacles), seed
        )
    path = _out_path(out)
    save_scenario(sc, path)
    click.echo(f"scenario written to {path}")


if __name__ == "__main__":
    main()
