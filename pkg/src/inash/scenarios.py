"""Scenario construction: seeded random environments with a reachability
probe per robot, and the built-in six-robot intersection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import (
    Region,
    RobotSpec,
    Scenario,
    ScenarioError,
    Workspace,
    goal_reached,
    validate_scenario,
)
from .rrg import RadiusSchedule, RandomGraph, estimate_gamma, extend, sample


class GenerationError(RuntimeError):
    """Random scenario generation exhausted its retry budget."""


@dataclass(frozen=True)
class RandomScenarioParams:
    n_robots: int = 8
    bounds: tuple = (0.0, 0.0, 20.0, 20.0)
    n_obstacles: int = 5
    rect_fraction: float = 0.5
    obstacle_size: tuple = (1.0, 4.0)     # rect side / circle diameter range
    robot_radius: float = 0.5
    goal_radius: float = 1.0
    min_start_goal_dist: float = 10.0
    start_separation: float = 0.6         # extra gap between start discs
    goal_separation: float = 1.0          # extra gap between goal centers
    clearance: float = 0.3                # obstacle clearance around starts/goals
    max_attempts: int = 60
    probe_iterations: int = 2500


def connectivity_probe(
    w: Workspace,
    robot: RobotSpec,
    seed: int,
    max_iterations: int = 2500,
    goal_by_center: bool = True,
) -> bool:
    """Grow a single-robot graph until a goal vertex appears; False when the
    budget runs out (start and goal presumed disconnected or very tight)."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, robot.id, 0x9B0B])
    b = w.bounds
    eta = 0.075 * max(b[2] - b[0], b[3] - b[1])
    sched = RadiusSchedule(gamma=estimate_gamma(w, robot, seed, 20_000), eta=eta)
    g = RandomGraph(robot.x_init, goal_reached(robot, robot.x_init, goal_by_center))
    for k in range(1, max_iterations + 1):
        if g.has_goal_vertex:
            return True
        extend(g, w, robot, sample(w, robot, rng), sched, k, goal_by_center)
    return g.has_goal_vertex


def generate_random_scenario(
    params: RandomScenarioParams = RandomScenarioParams(), seed: int = 0
) -> Scenario:
    """Seeded random environment: spread-out starts and goals first, then
    rejection-sampled obstacles that keep them clear, validated by a
    per-robot reachability probe. Deterministic per seed."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 0xC0DE])
    for attempt in range(params.max_attempts):
        ok, scenario = _try_generate(params, rng, seed)
        if not ok:
            continue
        w = scenario.workspace
        if all(
            connectivity_probe(w, robot, seed + 1000 * attempt, params.probe_iterations)
            for robot in scenario.robots
        ):
            validate_scenario(scenario)
            return scenario
    raise GenerationError(
        f"could not generate a valid scenario in {params.max_attempts} attempts "
        f"(params likely overcrowded: {params})"
    )


def _try_generate(params: RandomScenarioParams, rng, seed: int):
    x0, y0, x1, y1 = params.bounds
    r = params.robot_radius

    starts = []
    for _ in range(params.n_robots):
        placed = False
        for _ in range(400):
            p = rng.uniform((x0 + r, y0 + r), (x1 - r, y1 - r))
            if all(
                np.hypot(*(p - q)) >= 2 * r + params.start_separation for q in starts
            ):
                starts.append(p)
                placed = True
                break
        if not placed:
            return False, None

    goals = []
    for i in range(params.n_robots):
        placed = False
        for _ in range(400):
            c = rng.uniform(
                (x0 + params.goal_radius, y0 + params.goal_radius),
                (x1 - params.goal_radius, y1 - params.goal_radius),
            )
            if np.hypot(*(c - starts[i])) < params.min_start_goal_dist:
                continue
            if any(
                np.hypot(*(c - g)) < 2 * r + params.goal_separation for g in goals
            ):
                continue
            goals.append(c)
            placed = True
            break
        if not placed:
            return False, None

    keep_clear = [(p, r + params.clearance) for p in starts]
    keep_clear += [(c, r + params.clearance) for c in goals]

    obstacles = []
    lo, hi = params.obstacle_size
    for _ in range(params.n_obstacles):
        placed = False
        for _ in range(400):
            if rng.uniform() < params.rect_fraction:
                wdt = rng.uniform(lo, hi)
                hgt = rng.uniform(lo, hi)
                cx = rng.uniform(x0, x1 - wdt)
                cy = rng.uniform(y0, y1 - hgt)
                ob = Region.rect(cx, cy, cx + wdt, cy + hgt)
            else:
                rad = rng.uniform(lo / 2, hi / 2)
                c = rng.uniform((x0, y0), (x1, y1))
                ob = Region.circle(c[0], c[1], rad)
            if all(_region_clear_of(ob, p, margin) for p, margin in keep_clear):
                obstacles.append(ob)
                placed = True
                break
        if not placed:
            return False, None

    robots = tuple(
        RobotSpec(
            id=i + 1,
            radius=r,
            x_init=starts[i],
            goal=Region.circle(goals[i][0], goals[i][1], params.goal_radius),
        )
        for i in range(params.n_robots)
    )
    scenario = Scenario(
        workspace=Workspace(np.array(params.bounds, dtype=np.float64), obstacles),
        robots=robots,
        seed=int(seed),
    )
    try:
        validate_scenario(scenario)
    except ScenarioError:
        return False, None
    return True, scenario


def _region_clear_of(region: Region, p, margin: float) -> bool:
    if region.kind == "circle":
        cx, cy, rad = region.params
        return math.hypot(p[0] - cx, p[1] - cy) - rad >= margin
    x0, y0, x1, y1 = region.params
    dx = max(x0 - p[0], 0.0, p[0] - x1)
    dy = max(y0 - p[1], 0.0, p[1] - y1)
    return math.hypot(dx, dy) >= margin


def intersection_scenario() -> Scenario:
    """Four-way crossing: two width-4 corridors between four corner blocks;
    six robots with mutually conflicting straight lines through the center
    (all fifteen pairs of straight unit-speed runs collide near (10, 10))."""
    blocks = (
        Region.rect(0.0, 0.0, 8.0, 8.0),
        Region.rect(0.0, 12.0, 8.0, 20.0),
        Region.rect(12.0, 0.0, 20.0, 8.0),
        Region.rect(12.0, 12.0, 20.0, 20.0),
    )
    robots = (
        RobotSpec(1, 0.5, (2.0, 10.0), Region.circle(18.0, 10.0, 1.0)),
        RobotSpec(2, 0.5, (18.0, 10.0), Region.circle(2.0, 10.0, 1.0)),
        RobotSpec(3, 0.5, (10.0, 2.0), Region.circle(10.0, 18.0, 1.0)),
        RobotSpec(4, 0.5, (10.0, 18.0), Region.circle(10.0, 2.0, 1.0)),
        RobotSpec(5, 0.5, (3.0, 10.9), Region.circle(17.0, 9.1, 1.0)),
        RobotSpec(6, 0.5, (17.0, 10.9), Region.circle(3.0, 9.1, 1.0)),
    )
    scenario = Scenario(
        workspace=Workspace.from_corners((0.0, 0.0), (20.0, 20.0), blocks),
        robots=robots,
        seed=0,
    )
    validate_scenario(scenario)
    return scenario


def builtin_scenario(name: str, seed: int = 0) -> Scenario:
    if name == "intersection-6":
        return intersection_scenario()
    if name == "random-8":
        return generate_random_scenario(RandomScenarioParams(), seed)
    raise ScenarioError(f"unknown built-in scenario {name!r}")
