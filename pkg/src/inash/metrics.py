"""Multi-trial experiment runner: per-robot path-length ratios against a
single-robot reference optimum, goal-reach counts, and counter aggregates,
with CSV/JSON output. Trials use seeds base + trial index and can run in
parallel processes."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .baselines import anytime_prioritized_plan, ioptimal_control, prioritized_plan
from .environment import Scenario
from .game import PlannerConfig, RunRecord, run_inash
from .rrg import RadiusSchedule, RandomGraph, estimate_gamma, extend, sample, shortest_goal_path
from .environment import goal_reached

ALGORITHMS = ("inash", "prioritized", "anytime-prioritized", "ioptimal")


def run_algorithm(algorithm: str, scenario: Scenario, cfg: PlannerConfig) -> RunRecord:
    if algorithm == "inash":
        return run_inash(scenario, cfg)
    if algorithm == "prioritized":
        return prioritized_plan(scenario, cfg)
    if algorithm == "anytime-prioritized":
        return anytime_prioritized_plan(scenario, cfg)
    if algorithm == "ioptimal":
        return ioptimal_control(scenario, cfg)
    raise ValueError(f"unknown algorithm {algorithm!r}; pick one of {ALGORITHMS}")


def reference_optimum(
    scenario: Scenario,
    robot_id: int,
    k_ref: int = 20_000,
    cfg: PlannerConfig = PlannerConfig(),
    seed: Optional[int] = None,
) -> Optional[float]:
    """Single-robot shortest obstacle-avoiding path length on a dense graph
    (all other robots ignored); None when the goal stays unreachable.

    Used as the denominator of the length-ratio tables: a per-robot lower
    bound up to the graph's own small suboptimality.
    """
    robot = scenario.robots[robot_id - 1]
    w = scenario.workspace
    seed = seed if seed is not None else scenario.seed
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, robot_id, 0x12EF])
    b = w.bounds
    eta = cfg.eta if cfg.eta is not None else 0.075 * max(b[2] - b[0], b[3] - b[1])
    gamma = cfg.gamma if cfg.gamma is not None else estimate_gamma(w, robot, seed)
    sched = RadiusSchedule(gamma=gamma, eta=eta)
    g = RandomGraph(robot.x_init, goal_reached(robot, robot.x_init, cfg.goal_by_center))
    for k in range(1, k_ref + 1):
        extend(g, w, robot, sample(w, robot, rng), sched, k, cfg.goal_by_center)
    sp = shortest_goal_path(g)
    if sp is None:
        return None
    return sp[1]


@dataclass
class MetricsTable:
    algorithm: str
    trials: int
    robot_ids: list
    reference: list            # per robot: reference length or None
    mean_ratio: list           # per robot: mean(final length / reference) over successes
    reached: list              # per robot: number of trials with a terminal path
    mean_theta: float          # mean collision checks per iteration
    mean_vartheta: float
    mean_paths: float          # mean clamped candidate count per robot-iteration

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["algorithm", "robot", "reached", "trials", "mean_ratio", "reference_length"]
        )
        for i, rid in enumerate(self.robot_ids):
            ratio = "" if self.mean_ratio[i] is None else f"{self.mean_ratio[i]:.6f}"
            ref = "" if self.reference[i] is None else f"{self.reference[i]:.6f}"
            w.writerow([self.algorithm, rid, self.reached[i], self.trials, ratio, ref])
        w.writerow([])
        w.writerow(["mean_theta_per_iter", f"{self.mean_theta:.3f}"])
        w.writerow(["mean_vartheta_per_iter", f"{self.mean_vartheta:.3f}"])
        w.writerow(["mean_path_count_per_robot_iter", f"{self.mean_paths:.3f}"])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "trials": self.trials,
            "robots": self.robot_ids,
            "reference": self.reference,
            "mean_ratio": self.mean_ratio,
            "reached": self.reached,
            "mean_theta": self.mean_theta,
            "mean_vartheta": self.mean_vartheta,
            "mean_paths": self.mean_paths,
        }


def _one_trial(args):
    algorithm, scenario, cfg, seed = args
    return run_algorithm(algorithm, scenario, replace(cfg, seed=seed))


def run_experiment(
    scenario: Scenario,
    algorithm: str,
    trials: int,
    cfg: PlannerConfig = PlannerConfig(),
    base_seed: Optional[int] = None,
    workers: int = 1,
    reference_k: int = 20_000,
    references: Optional[list] = None,
):
    """Run seeded trials and aggregate the table. Returns
    (MetricsTable, list[RunRecord])."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = base_seed if base_seed is not None else (
        cfg.seed if cfg.seed is not None else scenario.seed
    )
    if references is None:
        references = [
            reference_optimum(scenario, r.id, reference_k, cfg) for r in scenario.robots
        ]
    jobs = [(algorithm, scenario, cfg, base + t) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_one_trial, jobs))
    else:
        records = [_one_trial(j) for j in jobs]
    return aggregate(records, references), records


def aggregate(records: list, references: list) -> MetricsTable:
    """Pure reduction of run records to the metrics table (recomputable
    offline from the record JSON)."""
    first = records[0]
    n = len(first.terminal)
    reached = [0] * n
    ratios: list = [[] for _ in range(n)]
    thetas = []
    varthetas = []
    pcounts = []
    for rec in records:
        for i, p in enumerate(rec.terminal):
            if p is None:
                continue
            reached[i] += 1
            if references[i]:
                ratios[i].append(float(p.cost[0]) / references[i])
        for it in rec.iterations:
            thetas.append(it.theta)
            varthetas.append(it.vartheta)
            pcounts.extend(it.path_counts)
    mean_ratio = [
        (float(np.mean(r)) if r else None) for r in ratios
    ]
    return MetricsTable(
        algorithm=first.algorithm,
        trials=len(records),
        robot_ids=[r.id for r in first.scenario.robots],
        reference=[(float(x) if x else None) for x in references],
        mean_ratio=mean_ratio,
        reached=reached,
        mean_theta=float(np.mean(thetas)) if thetas else math.nan,
        mean_vartheta=float(np.mean(varthetas)) if varthetas else math.nan,
        mean_paths=float(np.mean(pcounts)) if pcounts else math.nan,
    )
