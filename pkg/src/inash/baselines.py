"""Comparison algorithms and exactness oracles.

* prioritized: grow all graphs, then robots pick min-cost conflict-free
  paths in id order (lower ids never yield).
* anytime prioritized: interleaves growth with priority-ordered repair;
  only robot 1's cost trace is guaranteed nonincreasing.
* centralized product search ("ioptimal"): per iteration, exhaustively
  scans the product of per-robot candidate path sets for the cheapest
  jointly conflict-free tuple (exponential in the robot count).
* brute-force equilibrium oracle over small discrete games: enumerates all
  profiles, computes the Nash and social-optimum sets and the price of
  stability/anarchy for scalar costs.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .environment import Scenario, ScenarioError, Workspace
from .game import (
    Counters,
    IterationRecord,
    PlannerConfig,
    RunRecord,
    TimedPath,
    collision_free_path,
    init_state,
    path_satisfies_task,
    plt,
    timed_path_from_ids,
    top_cost,
)
from .kernels import K
from .rrg import RandomGraph, extend, sample, shortest_goal_path


def _grow_once(state, k: int) -> None:
    cfg = state.cfg
    w = state.scenario.workspace
    for i, robot in enumerate(state.robots):
        x_rand = sample(w, robot, state.rng)
        extend(
            state.graphs[i], w, robot, x_rand, state.scheds[i], k,
            cfg.goal_by_center, cfg.strict_nearest_only_edges,
        )


def _refresh_active(state) -> None:
    active = set(state.profile.active)
    for robot in state.robots:
        if robot.id not in active and state.graphs[robot.id - 1].has_goal_vertex:
            state.profile.active.append(robot.id)
            active.add(robot.id)


def _enumerate_candidates(g: RandomGraph, cap: int):
    off, tgt, wlen = g.csr()
    _, cnt = g.goal_dp()
    return K.enumerate_goal_paths(g.n_vertices, off, tgt, wlen, g.goal_flags, cnt, cap)


def min_cost_feasible(
    g: RandomGraph,
    others: Sequence[TimedPath],
    robot,
    w: Workspace,
    cfg: PlannerConfig,
    counters: Optional[Counters] = None,
) -> Optional[TimedPath]:
    """Cheapest conflict-free goal path on the graph, or None.

    Unconstrained robots get the exact DAG shortest path; constrained ones
    scan the capped candidate set in ascending cost order.
    """
    if counters is None:
        counters = Counters()
    if not g.has_goal_vertex:
        return None
    counters.path_counts[robot.id] = g.path_count(cfg.path_cap)[0]
    if not others:
        ids, _ = shortest_goal_path(g)
        return timed_path_from_ids(g, ids, robot, cfg)
    flat, offs, costs, n_paths = _enumerate_candidates(g, cfg.path_cap)
    counters.cap_hit[robot.id] = g.path_count(cfg.path_cap)[1]
    for idx in np.argsort(costs, kind="stable"):
        cand = timed_path_from_ids(g, flat[offs[idx] : offs[idx + 1]], robot, cfg)
        if collision_free_path(cand, others, cfg.margin, cfg.vanish_at_goal, counters):
            return cand
    return None


def prioritized_plan(scenario: Scenario, cfg: PlannerConfig = PlannerConfig()) -> RunRecord:
    """Grow every robot's graph for cfg.iterations samples, then select
    paths in ascending id order against the already-chosen ones."""
    state = init_state(scenario, cfg)
    for k in range(1, cfg.iterations + 1):
        _grow_once(state, k)
    _refresh_active(state)
    w = scenario.workspace
    counters = Counters()
    chosen: list = [None] * scenario.n_robots
    for robot in scenario.robots:  # ascending id
        g = state.graphs[robot.id - 1]
        others = [p for p in chosen if p is not None]
        path = min_cost_feasible(g, others, robot, w, state.cfg, counters)
        if path is not None and not path_satisfies_task(path, robot, w, state.cfg.goal_by_center):
            raise RuntimeError(f"robot {robot.id} selected a non-satisfying path")
        chosen[robot.id - 1] = path
    rec = IterationRecord(
        k=cfg.iterations,
        active=tuple(sorted(state.profile.active)),
        costs=tuple(tuple(p.cost.tolist()) if p is not None else None for p in chosen),
        theta=counters.theta,
        vartheta=0,
        path_counts=tuple(counters.path_counts.get(r.id, 0) for r in scenario.robots),
        cap_hit=tuple(bool(counters.cap_hit.get(r.id, False)) for r in scenario.robots),
    )
    return RunRecord(
        algorithm="prioritized",
        scenario=scenario,
        config=state.cfg,
        iterations=[rec],
        terminal=chosen,
    )


def anytime_prioritized_plan(
    scenario: Scenario, cfg: PlannerConfig = PlannerConfig()
) -> RunRecord:
    """Interleaved growth and priority repair: whenever a robot's path
    improves or its current path conflicts with higher-priority updates,
    every lower-priority robot re-picks against ids below it."""
    state = init_state(scenario, cfg)
    w = scenario.workspace
    chosen: list = [None] * scenario.n_robots
    records = []
    for k in range(1, cfg.iterations + 1):
        _grow_once(state, k)
        _refresh_active(state)
        counters = Counters()
        for rid in sorted(state.profile.active):
            robot = scenario.robots[rid - 1]
            g = state.graphs[rid - 1]
            lowers = [p for j, p in enumerate(chosen) if j < rid - 1 and p is not None]
            best = min_cost_feasible(g, lowers, robot, w, state.cfg, counters)
            cur = chosen[rid - 1]
            if cur is not None and collision_free_path(
                cur, lowers, cfg.margin, cfg.vanish_at_goal, counters
            ):
                if best is not None and best.cost[0] < cur.cost[0]:
                    chosen[rid - 1] = best
            else:
                chosen[rid - 1] = best
        records.append(
            IterationRecord(
                k=k,
                active=tuple(sorted(state.profile.active)),
                costs=tuple(
                    tuple(p.cost.tolist()) if p is not None else None for p in chosen
                ),
                theta=counters.theta,
                vartheta=0,
                path_counts=tuple(
                    counters.path_counts.get(r.id, 0) for r in scenario.robots
                ),
                cap_hit=tuple(
                    bool(counters.cap_hit.get(r.id, False)) for r in scenario.robots
                ),
            )
        )
    return RunRecord(
        algorithm="anytime-prioritized",
        scenario=scenario,
        config=state.cfg,
        iterations=records,
        terminal=chosen,
    )


# ---------------------------------------------------------------------------
# centralized product search


def _pack_candidate_set(g: RandomGraph, robot, cfg: PlannerConfig, cap: int):
    """Candidate paths of one robot as packed arrays for the pair kernels."""
    flat, offs, costs, n_paths = _enumerate_candidates(g, cap)
    xs = np.asarray(g.xs[flat], dtype=np.float64)
    ys = np.asarray(g.ys[flat], dtype=np.float64)
    ts = np.empty(flat.shape[0], np.float64)
    for i in range(n_paths):
        s, e = offs[i], offs[i + 1]
        seg = np.hypot(np.diff(xs[s:e]), np.diff(ys[s:e]))
        ts[s:e] = np.concatenate([[0.0], np.cumsum(seg)]) / cfg.speed
    return {
        "flat": flat,
        "offs": offs,
        "costs": costs,
        "n": n_paths,
        "xs": xs,
        "ys": ys,
        "ts": ts,
        "robot": robot,
        "graph": g,
    }


def _pair_conflicts(set_a: dict, set_b: dict, cfg: PlannerConfig) -> np.ndarray:
    return K.collision_matrix(
        set_a["xs"], set_a["ys"], set_a["ts"], set_a["offs"], set_a["robot"].radius,
        set_b["xs"], set_b["ys"], set_b["ts"], set_b["offs"], set_b["robot"].radius,
        float(cfg.margin), cfg.vanish_at_goal,
    )


def optimal_tuple(
    graphs: Sequence[RandomGraph],
    robots: Sequence,
    w: Workspace,
    cfg: PlannerConfig = PlannerConfig(),
    cap: Optional[int] = None,
    method: str = "exhaustive",
):
    """Cheapest jointly conflict-free tuple over the product of candidate
    path sets.

    'exhaustive' checks one tuple at a time (the returned check count equals
    the product of the set sizes); 'bestfirst' (two robots) walks pairs in
    ascending total cost and stops at the first conflict-free one, which is
    the same minimizer. Returns (paths or None, total_cost, checks, sizes).
    """
    cap = cap if cap is not None else min(cfg.path_cap, cfg.ioptimal_cap)
    sets = [
        _pack_candidate_set(g, r, cfg, cap) for g, r in zip(graphs, robots)
    ]
    sizes = [s["n"] for s in sets]
    if any(n == 0 for n in sizes):
        return None, math.inf, 0, sizes
    n = len(sets)
    if method == "bestfirst":
        if n != 2:
            raise ValueError("bestfirst method supports exactly two robots")
        return _best_first_pair(sets, cfg, sizes)
    if cfg.cost_dim != 1:
        return _product_scan_vector(sets, cfg, sizes)
    pair_off = np.zeros((n, n), np.int64)
    blocks = []
    pos = 0
    for i in range(n):
        for j in range(i + 1, n):
            m = _pair_conflicts(sets[i], sets[j], cfg)
            pair_off[i, j] = pos
            pos += m.size
            blocks.append(m.ravel())
    pair_flat = (
        np.concatenate(blocks) if blocks else np.empty(0, np.bool_)
    )
    costs_flat = np.concatenate([s["costs"] for s in sets])
    cost_off = np.zeros(n, np.int64)
    np.cumsum(sizes[:-1], out=cost_off[1:])
    out_idx = np.empty(n, np.int64)
    found, best, checks = K.product_scan(
        np.asarray(sizes, np.int64), costs_flat, cost_off, pair_flat, pair_off, out_idx
    )
    if not found:
        return None, math.inf, int(checks), sizes
    paths = _tuple_paths(sets, out_idx, cfg)
    return paths, float(best), int(checks), sizes


def _tuple_paths(sets, idx, cfg: PlannerConfig):
    paths = []
    for s, a in zip(sets, idx):
        ids = s["flat"][s["offs"][a] : s["offs"][a + 1]]
        paths.append(timed_path_from_ids(s["graph"], ids, s["robot"], cfg))
    return paths


def _product_scan_vector(sets, cfg: PlannerConfig, sizes):
    # vector costs: keep the first tuple not improved on by a later one
    n = len(sets)
    mats = {}
    for i in range(n):
        for j in range(i + 1, n):
            mats[(i, j)] = _pair_conflicts(sets[i], sets[j], cfg)
    vec = [
        np.stack(
            [
                timed_path_from_ids(
                    s["graph"], s["flat"][s["offs"][a] : s["offs"][a + 1]], s["robot"], cfg
                ).cost
                for a in range(s["n"])
            ]
        )
        for s in sets
    ]
    best_idx = None
    best_sum = None
    checks = 0
    for prof in itertools.product(*(range(m) for m in sizes)):
        checks += 1
        if any(mats[(i, j)][prof[i], prof[j]] for i in range(n) for j in range(i + 1, n)):
            continue
        tot = sum(vec[i][prof[i]] for i in range(n))
        if best_idx is None or plt(tot, best_sum):
            best_idx = prof
            best_sum = tot
    if best_idx is None:
        return None, math.inf, checks, sizes
    return _tuple_paths(sets, best_idx, cfg), float(np.sum(best_sum)), checks, sizes


def _best_first_pair(sets, cfg: PlannerConfig, sizes):
    a, b = sets
    oa = np.argsort(a["costs"], kind="stable")
    ob = np.argsort(b["costs"], kind="stable")
    thr = a["robot"].radius + b["robot"].radius + cfg.margin
    thr2 = thr * thr
    checks = 0

    def conflict(ia: int, ib: int) -> bool:
        sa, ea = a["offs"][ia], a["offs"][ia + 1]
        sb, eb = b["offs"][ib], b["offs"][ib + 1]
        ta = a["ts"][ea - 1]
        tb = b["ts"][eb - 1]
        t_end = min(ta, tb) if cfg.vanish_at_goal else max(ta, tb)
        d2 = K.pair_min_dist_sq(
            a["xs"][sa:ea], a["ys"][sa:ea], a["ts"][sa:ea],
            b["xs"][sb:eb], b["ys"][sb:eb], b["ts"][sb:eb],
            t_end, thr2,
        )
        return bool(d2 < thr2)

    heap = [(float(a["costs"][oa[0]] + b["costs"][ob[0]]), 0, 0)]
    seen = {(0, 0)}
    while heap:
        tot, i, j = heapq.heappop(heap)
        checks += 1
        if not conflict(int(oa[i]), int(ob[j])):
            idx = np.array([oa[i], ob[j]], np.int64)
            return _tuple_paths(sets, idx, cfg), float(tot), checks, sizes
        if i + 1 < sizes[0] and (i + 1, j) not in seen:
            seen.add((i + 1, j))
            heapq.heappush(heap, (float(a["costs"][oa[i + 1]] + b["costs"][ob[j]]), i + 1, j))
        if j + 1 < sizes[1] and (i, j + 1) not in seen:
            seen.add((i, j + 1))
            heapq.heappush(heap, (float(a["costs"][oa[i]] + b["costs"][ob[j + 1]]), i, j + 1))
    return None, math.inf, checks, sizes


def ioptimal_control(scenario: Scenario, cfg: PlannerConfig = PlannerConfig()) -> RunRecord:
    """Centralized benchmark: per iteration, pick the cheapest jointly
    conflict-free tuple over the active robots' candidate sets.

    The product scan is exponential in the robot count; refuses N > 4.
    """
    if scenario.n_robots > 4:
        raise ScenarioError("the centralized product search is limited to 4 robots")
    state = init_state(scenario, cfg)
    w = scenario.workspace
    records = []
    terminal: list = [None] * scenario.n_robots
    for k in range(1, cfg.iterations + 1):
        _grow_once(state, k)
        _refresh_active(state)
        active = sorted(state.profile.active)
        theta = 0
        counts = {rid: 0 for rid in active}
        profile: list = [None] * scenario.n_robots
        if active:
            graphs = [state.graphs[rid - 1] for rid in active]
            robots = [scenario.robots[rid - 1] for rid in active]
            paths, _, theta, sizes = optimal_tuple(graphs, robots, w, state.cfg)
            counts = dict(zip(active, sizes))
            if paths is not None:
                for p in paths:
                    profile[p.robot_id - 1] = p
                terminal = profile
        records.append(
            IterationRecord(
                k=k,
                active=tuple(active),
                costs=tuple(
                    tuple(p.cost.tolist()) if p is not None else None for p in profile
                ),
                theta=int(theta),
                vartheta=0,
                path_counts=tuple(counts.get(r.id, 0) for r in scenario.robots),
                cap_hit=tuple(False for _ in scenario.robots),
            )
        )
    for p in terminal:
        if p is not None and not path_satisfies_task(
            p, scenario.robots[p.robot_id - 1], w, state.cfg.goal_by_center
        ):
            raise RuntimeError(f"robot {p.robot_id} selected a non-satisfying path")
    return RunRecord(
        algorithm="ioptimal",
        scenario=scenario,
        config=state.cfg,
        iterations=records,
        terminal=terminal,
    )


# ---------------------------------------------------------------------------
# brute-force oracle over discrete games


@dataclass
class DiscreteGame:
    """Finite strategy game: per-robot candidate paths with precomputed
    costs and a symmetric pairwise conflict table."""

    costs: list                      # per robot: (S_i, p) array
    conflicts: dict                  # (i, j) with i < j -> bool (S_i, S_j)
    paths: Optional[list] = None     # per robot: list of TimedPath

    @property
    def sizes(self):
        return [c.shape[0] for c in self.costs]


@dataclass
class OracleResult:
    nash: list                  # strategy index tuples
    social: list
    pos: float
    poa: float
    n_profiles: int
    n_feasible: int

    @property
    def feasible_nonempty(self) -> bool:
        return self.n_feasible > 0


def brute_force_equilibria(game: DiscreteGame, max_profiles: int = 1_000_000) -> OracleResult:
    """Exhaustive profile enumeration.

    Social optima minimize the additive cost over conflict-free profiles
    (Pareto set for vector costs); Nash profiles admit no unilateral
    conflict-free strictly improving switch. POS/POA apply to scalar costs.
    """
    sizes = game.sizes
    n = len(sizes)
    total = 1
    for s in sizes:
        total *= s
    if total > max_profiles:
        raise ValueError(f"profile count {total} exceeds limit {max_profiles}")
    if any(s == 0 for s in sizes):
        return OracleResult([], [], math.nan, math.nan, 0, 0)

    def pair_ok(i, si, j, sj) -> bool:
        if i > j:
            i, j, si, sj = j, i, sj, si
        return not game.conflicts[(i, j)][si, sj]

    def feasible(prof) -> bool:
        return all(
            pair_ok(i, prof[i], j, prof[j]) for i in range(n) for j in range(i + 1, n)
        )

    feas = [prof for prof in itertools.product(*(range(s) for s in sizes)) if feasible(prof)]
    if not feas:
        return OracleResult([], [], math.nan, math.nan, total, 0)

    p = game.costs[0].shape[1]
    totals = {prof: sum(game.costs[i][prof[i]] for i in range(n)) for prof in feas}

    nash = []
    for prof in feas:
        is_ne = True
        for i in range(n):
            if not is_ne:
                break
            for si in range(sizes[i]):
                if si == prof[i]:
                    continue
                if not plt(game.costs[i][si], game.costs[i][prof[i]]):
                    continue
                if all(pair_ok(i, si, j, prof[j]) for j in range(n) if j != i):
                    is_ne = False
                    break
        if is_ne:
            nash.append(prof)

    if p == 1:
        vals = {prof: float(totals[prof][0]) for prof in feas}
        so_val = min(vals.values())
        social = [prof for prof in feas if vals[prof] == so_val]
        ne_vals = [vals[prof] for prof in nash]
        pos = min(ne_vals) / so_val if ne_vals else math.nan
        poa = max(ne_vals) / so_val if ne_vals else math.nan
    else:
        social = [
            prof
            for prof in feas
            if not any(plt(totals[other], totals[prof]) for other in feas)
        ]
        pos = math.nan
        poa = math.nan
    return OracleResult(nash, social, pos, poa, total, len(feas))


def discrete_game_from_scenario(
    scenario: Scenario,
    cfg: PlannerConfig = PlannerConfig(),
    grow_iterations: int = 60,
    paths_per_robot: int = 5,
    enumeration_cap: int = 512,
) -> DiscreteGame:
    """Finite game built from real geometry: grow each robot's graph, keep
    its cheapest few goal paths, and tabulate pairwise conflicts."""
    cfg = replace(cfg, iterations=grow_iterations)
    state = init_state(scenario, cfg)
    for k in range(1, grow_iterations + 1):
        _grow_once(state, k)
    per_robot_paths = []
    for robot in scenario.robots:
        g = state.graphs[robot.id - 1]
        if not g.has_goal_vertex:
            per_robot_paths.append([])
            continue
        flat, offs, costs, n_paths = _enumerate_candidates(g, enumeration_cap)
        order = np.argsort(costs, kind="stable")[:paths_per_robot]
        per_robot_paths.append(
            [
                timed_path_from_ids(g, flat[offs[i] : offs[i + 1]], robot, state.cfg)
                for i in order
            ]
        )
    costs = [
        np.stack([p.cost for p in paths]) if paths else np.empty((0, cfg.cost_dim))
        for paths in per_robot_paths
    ]
    conflicts = {}
    for i in range(scenario.n_robots):
        for j in range(i + 1, scenario.n_robots):
            mat = np.zeros((len(per_robot_paths[i]), len(per_robot_paths[j])), np.bool_)
            for a, pa in enumerate(per_robot_paths[i]):
                for b, pb in enumerate(per_robot_paths[j]):
                    mat[a, b] = not collision_free_path(
                        pa, [pb], cfg.margin, cfg.vanish_at_goal
                    )
            conflicts[(i, j)] = mat
    return DiscreteGame(costs=costs, conflicts=conflicts, paths=per_robot_paths)
