"""Open-loop trajectory game: timed paths and vector costs, space-time
conflict checking between disc robots, feasibility filtering, the
sequential better-response round, the full anytime run loop, and the
post-hoc equilibrium audit on the final graphs.

Time model: all robots start at t = 0 and move at constant speed along
their polylines; after a path ends the robot stays parked at its final
vertex (configurable to vanish instead). Two robots conflict when their
center distance drops below r_i + r_j + margin at any instant of the
common window.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict, replace
from typing import Optional, Sequence

import numpy as np

from . import tasks
from .environment import (
    RobotSpec,
    Scenario,
    Workspace,
    goal_reached,
    scenario_from_dict,
    scenario_to_dict,
)
from .kernels import K
from .rrg import (
    RadiusSchedule,
    RandomGraph,
    estimate_gamma,
    extend,
    goal_paths,
    sample,
)


class InvariantViolation(RuntimeError):
    """An always-on run invariant failed (bug or misconfiguration)."""


# ---------------------------------------------------------------------------
# costs


def pleq(a, b) -> bool:
    """Componentwise partial order a <= b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"cost dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b))


def plt(a, b) -> bool:
    """Strict companion of pleq: a <= b componentwise and a != b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"cost dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a != b))


def top_cost(p: int = 1) -> np.ndarray:
    """The 'no path yet' cost: every component infinite."""
    return np.full(p, np.inf)


@dataclass(frozen=True)
class PlannerConfig:
    iterations: int = 300
    seed: Optional[int] = None          # None: use the scenario seed
    margin: float = 0.0
    path_cap: int = 10_000
    best_response: bool = False
    goal_by_center: bool = True
    speed: float = 1.0
    eta: Optional[float] = None         # None: 0.075 * max bounds extent
    gamma: Optional[float] = None       # None: Monte-Carlo free-area estimate
    cost_mode: str = "length"           # "length" | "length-time"
    strict_nearest_only_edges: bool = False
    inactive_as_static: bool = False
    vanish_at_goal: bool = False
    validate_each_iteration: bool = True
    ioptimal_cap: int = 200
    gamma_samples: int = 100_000

    @property
    def cost_dim(self) -> int:
        return 2 if self.cost_mode == "length-time" else 1


@dataclass(frozen=True)
class TimedPath:
    """Constant-speed piecewise-linear trajectory of a disc robot."""

    robot_id: int
    radius: float
    vertices: np.ndarray            # (L, 2)
    times: np.ndarray               # (L,), times[0] == 0, strictly increasing
    cost: np.ndarray                # cost vector
    vertex_ids: Optional[tuple] = None

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2))
        t = np.ascontiguousarray(np.asarray(self.times, dtype=np.float64).reshape(-1))
        if v.shape[0] != t.shape[0] or v.shape[0] < 1:
            raise ValueError("vertices and times must align and be nonempty")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must start at 0 and strictly increase")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=np.float64).reshape(-1))

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def length(self) -> float:
        return float(np.hypot(*np.diff(self.vertices, axis=0).T).sum())

    def position_at(self, t) -> np.ndarray:
        x = np.interp(t, self.times, self.vertices[:, 0])
        y = np.interp(t, self.times, self.vertices[:, 1])
        return np.stack([x, y], axis=-1)

    def to_json(self) -> dict:
        return {
            "robot": self.robot_id,
            "radius": self.radius,
            "vertices": self.vertices.tolist(),
            "times": self.times.tolist(),
            "cost": self.cost.tolist(),
        }

    @staticmethod
    def from_json(obj: dict) -> "TimedPath":
        return TimedPath(
            robot_id=int(obj["robot"]),
            radius=float(obj["radius"]),
            vertices=np.asarray(obj["vertices"], dtype=np.float64),
            times=np.asarray(obj["times"], dtype=np.float64),
            cost=np.asarray(obj["cost"], dtype=np.float64),
        )


def path_cost(vertices: np.ndarray, speed: float = 1.0, mode: str = "length") -> np.ndarray:
    """Cost vector of a polyline: total length, plus traversal time in
    'length-time' mode."""
    v = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
    length = float(np.hypot(*np.diff(v, axis=0).T).sum()) if v.shape[0] > 1 else 0.0
    if mode == "length":
        return np.array([length])
    if mode == "length-time":
        return np.array([length, length / speed])
    raise ValueError(f"unknown cost mode {mode!r}")


def timed_path_from_ids(
    g: RandomGraph, ids: Sequence[int], robot: RobotSpec, cfg: PlannerConfig
) -> TimedPath:
    ids = tuple(int(i) for i in ids)
    verts = np.stack([g.xs[list(ids)], g.ys[list(ids)]], axis=1)
    if len(ids) > 1:
        seg = np.hypot(*np.diff(verts, axis=0).T)
        times = np.concatenate([[0.0], np.cumsum(seg)]) / cfg.speed
    else:
        times = np.array([0.0])
    return TimedPath(
        robot_id=robot.id,
        radius=robot.radius,
        vertices=verts,
        times=times,
        cost=path_cost(verts, cfg.speed, cfg.cost_mode),
        vertex_ids=ids,
    )


def static_path(robot: RobotSpec, p: int = 1) -> TimedPath:
    return TimedPath(
        robot_id=robot.id,
        radius=robot.radius,
        vertices=np.array([[robot.x_init[0], robot.x_init[1]], ]),
        times=np.array([0.0]),
        cost=np.zeros(p),
    )


# ---------------------------------------------------------------------------
# conflict checks


def _pack_paths(paths: Sequence[TimedPath]):
    if not paths:
        return (
            np.empty(0, np.float64),
            np.empty(0, np.float64),
            np.empty(0, np.float64),
            np.zeros(1, np.int64),
            np.empty(0, np.float64),
        )
    xs = np.concatenate([p.vertices[:, 0] for p in paths])
    ys = np.concatenate([p.vertices[:, 1] for p in paths])
    ts = np.concatenate([p.times for p in paths])
    off = np.zeros(len(paths) + 1, np.int64)
    np.cumsum([p.times.shape[0] for p in paths], out=off[1:])
    rad = np.array([p.radius for p in paths], dtype=np.float64)
    return (
        np.ascontiguousarray(xs),
        np.ascontiguousarray(ys),
        np.ascontiguousarray(ts),
        off,
        rad,
    )


@dataclass
class Counters:
    """Per-iteration instrumentation: collision-check calls, broadcast
    count, and clamped per-robot candidate-set sizes."""

    theta: int = 0
    vartheta: int = 0
    path_counts: dict = field(default_factory=dict)
    cap_hit: dict = field(default_factory=dict)


def collision_free_path(
    path: TimedPath,
    others: Sequence[TimedPath],
    margin: float = 0.0,
    vanish: bool = False,
    counters: Optional[Counters] = None,
) -> bool:
    """True iff the path keeps clearance r_i + r_j + margin from every other
    path at all times of the common window (exact per-segment-pair quadratic
    minimization). Counts as one collision check."""
    if counters is not None:
        counters.theta += 1
    if not others:
        return True
    oxs, oys, ots, ooff, orad = _pack_paths(others)
    return not bool(
        K.path_collides_any(
            np.ascontiguousarray(path.vertices[:, 0]),
            np.ascontiguousarray(path.vertices[:, 1]),
            path.times,
            path.radius,
            oxs, oys, ots, ooff, orad,
            float(margin),
            vanish,
        )
    )


def path_satisfies_task(
    path: TimedPath, robot: RobotSpec, w: Workspace, goal_by_center: bool = True
) -> bool:
    """Full automaton check of the path's word."""
    word = tasks.word_of_path(path, robot, w, goal_by_center)
    return tasks.accepts(tasks.reach_avoid_automaton(robot.id), word)


def feasible_paths(
    candidates: Sequence[TimedPath],
    others: Sequence[TimedPath],
    robot: RobotSpec,
    w: Workspace,
    cfg: PlannerConfig = PlannerConfig(),
    counters: Optional[Counters] = None,
) -> list:
    """Order-preserving filter: conflict-free against ``others`` and
    task-satisfying (automaton run on the exact word)."""
    out = []
    for p in candidates:
        if not collision_free_path(p, others, cfg.margin, cfg.vanish_at_goal, counters):
            continue
        if not path_satisfies_task(p, robot, w, cfg.goal_by_center):
            continue
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# better response


def better_response(
    g: RandomGraph,
    current: Optional[TimedPath],
    others: Sequence[TimedPath],
    robot: RobotSpec,
    w: Workspace,
    cfg: PlannerConfig = PlannerConfig(),
    counters: Optional[Counters] = None,
) -> Optional[TimedPath]:
    """First strictly improving feasible path in canonical order, or
    ``current`` when none improves.

    Candidates are scanned in depth-first enumeration order (ascending-cost
    order in best-response mode); the scan stops at the first feasible
    candidate whose cost strictly improves on the current one, so the result
    matches filtering the whole capped candidate set and breaking on the
    first improvement.
    """
    if counters is None:
        counters = Counters()
    if not g.has_goal_vertex:
        return current
    p_count, cap_flag = g.path_count(cfg.path_cap)
    counters.path_counts[robot.id] = p_count
    cur_cost = current.cost if current is not None else top_cost(cfg.cost_dim)

    if cfg.cost_dim == 1 and not cfg.best_response:
        off, tgt, wlen = g.csr()
        lb, cnt = g.goal_dp()
        oxs, oys, ots, ooff, orad = _pack_paths(others)
        out_path = np.empty(g.n_vertices, np.int64)
        found, plen, _, theta, _, capped = K.better_response_scan(
            off, tgt, wlen, g.goal_flags, lb, cnt, g.xs, g.ys, float(cfg.speed),
            float(cur_cost[0]), float(cfg.path_cap),
            oxs, oys, ots, ooff, orad,
            float(robot.radius), float(cfg.margin), cfg.vanish_at_goal,
            out_path,
        )
        counters.theta += int(theta)
        counters.cap_hit[robot.id] = bool(capped) or cap_flag
        if found:
            return timed_path_from_ids(g, out_path[:plen], robot, cfg)
        return current

    # generic scan: enumerate the capped candidate set, order it, and take
    # the first feasible strict improvement
    off, tgt, wlen = g.csr()
    _, cnt = g.goal_dp()
    flat, offs, costs, n_paths = K.enumerate_goal_paths(
        g.n_vertices, off, tgt, wlen, g.goal_flags, cnt, cfg.path_cap
    )
    counters.cap_hit[robot.id] = cap_flag
    order = np.argsort(costs, kind="stable") if cfg.best_response else np.arange(n_paths)
    for idx in order:
        cand = timed_path_from_ids(g, flat[offs[idx] : offs[idx + 1]], robot, cfg)
        if not plt(cand.cost, cur_cost):
            if cfg.best_response and cand.cost[0] > cur_cost[0]:
                break  # sorted by scalar cost: nothing later can improve
            continue
        if collision_free_path(cand, others, cfg.margin, cfg.vanish_at_goal, counters):
            return cand
    return current


# ---------------------------------------------------------------------------
# run loop


@dataclass
class Profile:
    """Per-robot planned paths at the end of an iteration."""

    paths: list
    active: list
    k: int


@dataclass
class IterationRecord:
    k: int
    active: tuple
    costs: tuple        # per robot: tuple of floats, or None when pathless
    theta: int
    vartheta: int
    path_counts: tuple
    cap_hit: tuple

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "active": list(self.active),
            "costs": [list(c) if c is not None else None for c in self.costs],
            "theta": self.theta,
            "vartheta": self.vartheta,
            "path_counts": list(self.path_counts),
            "cap_hit": [bool(b) for b in self.cap_hit],
        }


@dataclass
class RunRecord:
    algorithm: str
    scenario: Scenario
    config: PlannerConfig
    iterations: list
    terminal: list                      # per robot: TimedPath | None

    def reached(self) -> list:
        return [p is not None for p in self.terminal]

    def total_cost(self) -> float:
        return float(sum(p.cost[0] for p in self.terminal if p is not None))

    def cost_trace(self, robot_id: int) -> list:
        return [rec.costs[robot_id - 1] for rec in self.iterations]

    def to_json(self) -> dict:
        cfg = asdict(self.config)
        return {
            "algorithm": self.algorithm,
            "config": cfg,
            "scenario": scenario_to_dict(self.scenario),
            "iterations": [rec.to_json() for rec in self.iterations],
            "terminal": [p.to_json() if p is not None else None for p in self.terminal],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def from_json(obj: dict) -> "RunRecord":
        return RunRecord(
            algorithm=obj["algorithm"],
            scenario=scenario_from_dict(obj["scenario"]),
            config=PlannerConfig(**obj["config"]),
            iterations=[
                IterationRecord(
                    k=rec["k"],
                    active=tuple(rec["active"]),
                    costs=tuple(
                        tuple(c) if c is not None else None for c in rec["costs"]
                    ),
                    theta=rec["theta"],
                    vartheta=rec["vartheta"],
                    path_counts=tuple(rec["path_counts"]),
                    cap_hit=tuple(rec["cap_hit"]),
                )
                for rec in obj["iterations"]
            ],
            terminal=[
                TimedPath.from_json(p) if p is not None else None for p in obj["terminal"]
            ],
        )

    @staticmethod
    def load(path) -> "RunRecord":
        with open(path) as fh:
            return RunRecord.from_json(json.load(fh))


def resolve_config(scenario: Scenario, cfg: PlannerConfig) -> PlannerConfig:
    """Fill seed/eta defaults from the scenario and bounds."""
    seed = cfg.seed if cfg.seed is not None else scenario.seed
    if cfg.eta is None:
        b = scenario.workspace.bounds
        eta = 0.075 * max(b[2] - b[0], b[3] - b[1])
    else:
        eta = cfg.eta
    return replace(cfg, seed=int(seed), eta=float(eta))


@dataclass
class GameState:
    scenario: Scenario
    cfg: PlannerConfig
    rng: np.random.Generator
    graphs: list
    scheds: list
    profile: Profile
    records: list = field(default_factory=list)

    @property
    def robots(self):
        return self.scenario.robots


def init_state(scenario: Scenario, cfg: PlannerConfig = PlannerConfig()) -> GameState:
    cfg = resolve_config(scenario, cfg)
    w = scenario.workspace
    graphs = []
    scheds = []
    for r in scenario.robots:
        graphs.append(
            RandomGraph(r.x_init, root_in_goal=goal_reached(r, r.x_init, cfg.goal_by_center))
        )
        gamma = cfg.gamma if cfg.gamma is not None else estimate_gamma(
            w, r, cfg.seed, cfg.gamma_samples
        )
        scheds.append(RadiusSchedule(gamma=gamma, eta=cfg.eta))
    profile = Profile(paths=[None] * scenario.n_robots, active=[], k=0)
    return GameState(
        scenario=scenario,
        cfg=cfg,
        rng=np.random.default_rng(cfg.seed),
        graphs=graphs,
        scheds=scheds,
        profile=profile,
    )


def _others_for(state: GameState, rid: int) -> list:
    paths = [
        state.profile.paths[j - 1]
        for j in state.profile.active
        if j != rid and state.profile.paths[j - 1] is not None
    ]
    if state.cfg.inactive_as_static:
        active = set(state.profile.active)
        paths += [
            static_path(r, state.cfg.cost_dim)
            for r in state.robots
            if r.id not in active and r.id != rid
        ]
    return paths


def inash_iteration(state: GameState) -> IterationRecord:
    """One iteration: grow every graph by one sample, refresh the active
    set, then run the sequential better-response round in ascending id
    order (each robot responds to smaller ids' updated paths and larger
    ids' previous paths)."""
    cfg = state.cfg
    w = state.scenario.workspace
    state.profile.k += 1
    k = state.profile.k
    for i, robot in enumerate(state.robots):
        x_rand = sample(w, robot, state.rng)
        extend(
            state.graphs[i], w, robot, x_rand, state.scheds[i], k,
            cfg.goal_by_center, cfg.strict_nearest_only_edges,
        )
    active_set = set(state.profile.active)
    for robot in state.robots:
        if robot.id not in active_set and state.graphs[robot.id - 1].has_goal_vertex:
            state.profile.active.append(robot.id)
            active_set.add(robot.id)

    counters = Counters()
    prev_paths = list(state.profile.paths)
    active_sorted = sorted(state.profile.active)
    counters.vartheta += len(active_sorted)  # pre-round broadcasts
    changed = []
    for rid in active_sorted:
        robot = state.robots[rid - 1]
        others = _others_for(state, rid)
        new = better_response(
            state.graphs[rid - 1], state.profile.paths[rid - 1], others, robot, w,
            cfg, counters,
        )
        if new is not state.profile.paths[rid - 1]:
            changed.append(rid)
        state.profile.paths[rid - 1] = new
        counters.vartheta += 1  # broadcast of the updated path

    if counters.vartheta != 2 * len(active_sorted):
        raise InvariantViolation("broadcast count must equal 2 * |active|")
    if cfg.validate_each_iteration:
        _validate_iteration(state, prev_paths, changed)

    rec = IterationRecord(
        k=k,
        active=tuple(active_sorted),
        costs=tuple(
            tuple(p.cost.tolist()) if p is not None else None for p in state.profile.paths
        ),
        theta=counters.theta,
        vartheta=counters.vartheta,
        path_counts=tuple(
            counters.path_counts.get(r.id, 0) for r in state.robots
        ),
        cap_hit=tuple(
            bool(counters.cap_hit.get(r.id, False)) for r in state.robots
        ),
    )
    state.records.append(rec)
    return rec


def _validate_iteration(state: GameState, prev_paths, changed) -> None:
    cfg = state.cfg
    w = state.scenario.workspace
    paths = state.profile.paths
    # per-component cost monotonicity
    for rid in state.profile.active:
        new, old = paths[rid - 1], prev_paths[rid - 1]
        if old is not None:
            if new is None:
                raise InvariantViolation(f"robot {rid} lost its path")
            if not np.all(new.cost <= old.cost):
                raise InvariantViolation(
                    f"robot {rid} cost increased: {old.cost} -> {new.cost}"
                )
    # end-of-iteration pairwise feasibility
    present = [p for p in paths if p is not None]
    for a in range(len(present)):
        for b in range(a + 1, len(present)):
            if not collision_free_path(
                present[a], [present[b]], cfg.margin, cfg.vanish_at_goal
            ):
                raise InvariantViolation(
                    f"robots {present[a].robot_id} and {present[b].robot_id} conflict"
                )
    # every newly adopted path satisfies its task (full automaton run)
    for rid in changed:
        p = paths[rid - 1]
        if p is not None and not path_satisfies_task(
            p, state.robots[rid - 1], w, cfg.goal_by_center
        ):
            raise InvariantViolation(f"robot {rid} adopted a non-satisfying path")


def run_inash_with_state(
    scenario: Scenario, cfg: PlannerConfig = PlannerConfig()
) -> tuple:
    """Run the full anytime loop; also returns the final state (graphs) for
    post-hoc auditing."""
    if cfg.iterations < 1:
        raise ValueError("iterations must be >= 1")
    state = init_state(scenario, cfg)
    for _ in range(cfg.iterations):
        inash_iteration(state)
    record = RunRecord(
        algorithm="inash",
        scenario=scenario,
        config=state.cfg,
        iterations=state.records,
        terminal=list(state.profile.paths),
    )
    return record, state


def run_inash(scenario: Scenario, cfg: PlannerConfig = PlannerConfig()) -> RunRecord:
    return run_inash_with_state(scenario, cfg)[0]


# ---------------------------------------------------------------------------
# equilibrium audit


@dataclass
class AuditResult:
    ok: dict                 # robot id -> True when no improving deviation exists
    deviations: dict         # robot id -> improving TimedPath (when found)
    cap_exceeded: dict       # robot id -> candidate enumeration was clamped

    @property
    def passed(self) -> bool:
        return all(self.ok.values())


def nash_audit(
    profile_paths: Sequence[Optional[TimedPath]],
    graphs: Sequence[RandomGraph],
    robots: Sequence[RobotSpec],
    w: Workspace,
    cfg: PlannerConfig = PlannerConfig(),
    cap: Optional[int] = None,
) -> AuditResult:
    """Exhaustively rescan each robot's final graph for a feasible path that
    strictly improves on its final cost while all other robots stay fixed.
    Passing means the profile is an equilibrium over the final graphs
    (conservative when the enumeration cap was hit)."""
    cap = cap if cap is not None else cfg.path_cap
    ok = {}
    deviations = {}
    cap_exceeded = {}
    for robot, g in zip(robots, graphs):
        rid = robot.id
        current = profile_paths[rid - 1]
        if current is None and not g.has_goal_vertex:
            ok[rid] = True
            cap_exceeded[rid] = False
            continue
        others = [
            p for j, p in enumerate(profile_paths) if j != rid - 1 and p is not None
        ]
        cur_cost = current.cost if current is not None else top_cost(cfg.cost_dim)
        off, tgt, wlen = g.csr()
        _, cnt = g.goal_dp()
        flat, offs, costs, n_paths = K.enumerate_goal_paths(
            g.n_vertices, off, tgt, wlen, g.goal_flags, cnt, cap
        )
        cap_exceeded[rid] = bool(cnt[0] > n_paths)
        found = None
        for idx in range(n_paths):
            cand = timed_path_from_ids(g, flat[offs[idx] : offs[idx + 1]], robot, cfg)
            if not plt(cand.cost, cur_cost):
                continue
            if not collision_free_path(cand, others, cfg.margin, cfg.vanish_at_goal):
                continue
            if not path_satisfies_task(cand, robot, w, cfg.goal_by_center):
                continue
            found = cand
            break
        ok[rid] = found is None
        if found is not None:
            deviations[rid] = found
    return AuditResult(ok=ok, deviations=deviations, cap_exceeded=cap_exceeded)
