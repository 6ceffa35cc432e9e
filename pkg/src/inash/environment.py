"""2-D workspace: bounds, rectangular/circular obstacles, robot specs,
goal regions, and the exact free-space predicates used everywhere else.

All shapes are immutable after construction; obstacle interiors are open
(grazing contact is free), goal regions are open sets.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .kernels import K


class ScenarioError(ValueError):
    """Raised for malformed or inconsistent scenario data."""


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=np.float64).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ScenarioError(f"non-finite coordinates: {p!r}")
    return a


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle or circle; used for obstacles and goals."""

    kind: str              # "rect" | "circle"
    params: tuple          # rect: (x0, y0, x1, y1); circle: (cx, cy, r)

    @staticmethod
    def rect(x0: float, y0: float, x1: float, y1: float) -> "Region":
        if not (x0 <= x1 and y0 <= y1):
            raise ScenarioError(f"rect min corner must be <= max corner: {(x0, y0, x1, y1)}")
        return Region("rect", (float(x0), float(y0), float(x1), float(y1)))

    @staticmethod
    def circle(cx: float, cy: float, r: float) -> "Region":
        if not r > 0:
            raise ScenarioError(f"circle radius must be > 0, got {r}")
        return Region("circle", (float(cx), float(cy), float(r)))

    def contains_open(self, p) -> bool:
        x, y = _as_point(p)
        if self.kind == "rect":
            x0, y0, x1, y1 = self.params
            return x0 < x < x1 and y0 < y < y1
        cx, cy, r = self.params
        return math.hypot(x - cx, y - cy) < r

    def shrunk(self, delta: float) -> "Region | None":
        """Region of centers whose delta-disc lies inside; None if empty."""
        if delta <= 0:
            return self
        if self.kind == "rect":
            x0, y0, x1, y1 = self.params
            if x1 - x0 <= 2 * delta or y1 - y0 <= 2 * delta:
                return None
            return Region.rect(x0 + delta, y0 + delta, x1 - delta, y1 - delta)
        cx, cy, r = self.params
        if r <= delta:
            return None
        return Region.circle(cx, cy, r - delta)

    def center(self) -> np.ndarray:
        if self.kind == "rect":
            x0, y0, x1, y1 = self.params
            return np.array([(x0 + x1) / 2, (y0 + y1) / 2])
        return np.array(self.params[:2])

    def bbox(self) -> tuple[float, float, float, float]:
        if self.kind == "rect":
            return self.params
        cx, cy, r = self.params
        return (cx - r, cy - r, cx + r, cy + r)

    def to_json(self):
        if self.kind == "rect":
            x0, y0, x1, y1 = self.params
            return {"rect": [[x0, y0], [x1, y1]]}
        cx, cy, r = self.params
        return {"circle": {"c": [cx, cy], "r": r}}

    @staticmethod
    def from_json(obj) -> "Region":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise ScenarioError(f"region must be a one-key object, got {obj!r}")
        if "rect" in obj:
            (x0, y0), (x1, y1) = obj["rect"]
            return Region.rect(x0, y0, x1, y1)
        if "circle" in obj:
            spec = obj["circle"]
            extra = set(spec) - {"c", "r"}
            if extra:
                raise ScenarioError(f"unknown circle fields: {sorted(extra)}")
            return Region.circle(spec["c"][0], spec["c"][1], spec["r"])
        raise ScenarioError(f"unknown region kind: {sorted(obj)}")


@dataclass(frozen=True)
class RobotSpec:
    """Disc robot: game index, radius, start point, goal region."""

    id: int
    radius: float
    x_init: np.ndarray
    goal: Region

    def __post_init__(self):
        object.__setattr__(self, "x_init", _as_point(self.x_init))
        if self.id < 1:
            raise ScenarioError(f"robot ids start at 1, got {self.id}")
        if not self.radius > 0:
            raise ScenarioError(f"robot radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Workspace:
    bounds: np.ndarray                  # (xmin, ymin, xmax, ymax)
    obstacles: tuple[Region, ...]
    rect_arr: np.ndarray = field(init=False, repr=False)
    circle_arr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=np.float64).reshape(4)
        if not (b[0] < b[2] and b[1] < b[3]):
            raise ScenarioError(f"degenerate bounds {b}")
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        rects = [o.params for o in self.obstacles if o.kind == "rect"]
        circles = [o.params for o in self.obstacles if o.kind == "circle"]
        object.__setattr__(
            self, "rect_arr", np.array(rects, dtype=np.float64).reshape(-1, 4)
        )
        object.__setattr__(
            self, "circle_arr", np.array(circles, dtype=np.float64).reshape(-1, 3)
        )

    @staticmethod
    def from_corners(lo, hi, obstacles: Iterable[Region] = ()) -> "Workspace":
        lo = _as_point(lo)
        hi = _as_point(hi)
        return Workspace(np.array([lo[0], lo[1], hi[0], hi[1]]), tuple(obstacles))

    def area(self) -> float:
        b = self.bounds
        return float((b[2] - b[0]) * (b[3] - b[1]))


def point_free(w: Workspace, p, inflation: float) -> bool:
    """True iff the disc of radius ``inflation`` at p is inside the bounds
    and intersects no obstacle interior."""
    x, y = _as_point(p)
    return bool(K.point_free(x, y, float(inflation), w.bounds, w.rect_arr, w.circle_arr))


def points_free(w: Workspace, pts: np.ndarray, inflation: float) -> np.ndarray:
    """Vectorized point_free over an (n, 2) array."""
    pts = np.asarray(pts, dtype=np.float64)
    xs = np.ascontiguousarray(pts[:, 0])
    ys = np.ascontiguousarray(pts[:, 1])
    return K.free_mask(xs, ys, float(inflation), w.bounds, w.rect_arr, w.circle_arr)


def segment_free(w: Workspace, a, b, inflation: float) -> bool:
    """True iff every point of segment [a, b], inflated, is free (exact
    segment-shape clearance, no sampling)."""
    ax, ay = _as_point(a)
    bx, by = _as_point(b)
    return bool(
        K.segment_free(ax, ay, bx, by, float(inflation), w.bounds, w.rect_arr, w.circle_arr)
    )


def in_goal(r: RobotSpec, p) -> bool:
    """Open-interior membership of p in the robot's goal region."""
    return r.goal.contains_open(p)


def effective_goal(r: RobotSpec, goal_by_center: bool = True) -> Region | None:
    """Goal region in center coordinates: the region itself when the goal
    counts as reached by the center, else shrunk by the robot radius."""
    if goal_by_center:
        return r.goal
    return r.goal.shrunk(r.radius)


def goal_reached(r: RobotSpec, p, goal_by_center: bool = True) -> bool:
    g = effective_goal(r, goal_by_center)
    return g is not None and g.contains_open(p)


# ---------------------------------------------------------------------------
# scenario file format


@dataclass(frozen=True)
class Scenario:
    workspace: Workspace
    robots: tuple[RobotSpec, ...]
    seed: int

    @property
    def n_robots(self) -> int:
        return len(self.robots)


def _region_overlaps_bounds(region: Region, bounds: np.ndarray) -> bool:
    x0, y0, x1, y1 = region.bbox()
    if x1 < bounds[0] or x0 > bounds[2] or y1 < bounds[1] or y0 > bounds[3]:
        return False
    if region.kind == "circle":
        cx, cy, r = region.params
        qx = min(max(cx, bounds[0]), bounds[2])
        qy = min(max(cy, bounds[1]), bounds[3])
        return math.hypot(cx - qx, cy - qy) <= r
    return True


def validate_scenario(s: Scenario) -> None:
    """Structural checks: obstacle/bounds overlap, id numbering, free starts,
    goals with free interior."""
    w = s.workspace
    for o in w.obstacles:
        if not _region_overlaps_bounds(o, w.bounds):
            raise ScenarioError(f"obstacle {o.to_json()} does not intersect the bounds")
    ids = sorted(r.id for r in s.robots)
    if ids != list(range(1, len(ids) + 1)):
        raise ScenarioError(f"robot ids must be 1..N without gaps, got {ids}")
    for r in s.robots:
        if not point_free(w, r.x_init, r.radius):
            raise ScenarioError(f"robot {r.id} start {r.x_init.tolist()} is not free")
        if not _region_overlaps_bounds(r.goal, w.bounds):
            raise ScenarioError(f"robot {r.id} goal lies outside the bounds")
        if not _goal_has_free_point(w, r):
            raise ScenarioError(f"robot {r.id} goal region has no free interior point")


def _goal_has_free_point(w: Workspace, r: RobotSpec, n_probe: int = 512) -> bool:
    if r.goal.contains_open(r.goal.center()) and point_free(w, r.goal.center(), r.radius):
        return True
    rng = np.random.default_rng(12345)
    x0, y0, x1, y1 = r.goal.bbox()
    pts = rng.uniform((x0, y0), (x1, y1), size=(n_probe, 2))
    inside = np.array([r.goal.contains_open(p) for p in pts])
    if not inside.any():
        return False
    free = points_free(w, pts[inside], r.radius)
    return bool(free.any())


_TOP_FIELDS = {"bounds", "obstacles", "robots", "seed"}
_ROBOT_FIELDS = {"id", "radius", "init", "goal"}


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    extra = set(data) - _TOP_FIELDS
    if extra:
        raise ScenarioError(f"unknown scenario fields: {sorted(extra)}")
    missing = _TOP_FIELDS - set(data)
    if missing:
        raise ScenarioError(f"missing scenario fields: {sorted(missing)}")
    (x0, y0), (x1, y1) = data["bounds"]
    obstacles = tuple(Region.from_json(o) for o in data["obstacles"])
    robots = []
    for rd in data["robots"]:
        extra = set(rd) - _ROBOT_FIELDS
        if extra:
            raise ScenarioError(f"unknown robot fields: {sorted(extra)}")
        missing = _ROBOT_FIELDS - set(rd)
        if missing:
            raise ScenarioError(f"missing robot fields: {sorted(missing)}")
        robots.append(
            RobotSpec(
                id=int(rd["id"]),
                radius=float(rd["radius"]),
                x_init=rd["init"],
                goal=Region.from_json(rd["goal"]),
            )
        )
    robots.sort(key=lambda r: r.id)
    scenario = Scenario(
        workspace=Workspace.from_corners((x0, y0), (x1, y1), obstacles),
        robots=tuple(robots),
        seed=int(data["seed"]),
    )
    validate_scenario(scenario)
    return scenario


def scenario_to_dict(s: Scenario) -> dict:
    b = s.workspace.bounds
    return {
        "bounds": [[b[0], b[1]], [b[2], b[3]]],
        "obstacles": [o.to_json() for o in s.workspace.obstacles],
        "robots": [
            {
                "id": r.id,
                "radius": r.radius,
                "init": [r.x_init[0], r.x_init[1]],
                "goal": r.goal.to_json(),
            }
            for r in s.robots
        ],
        "seed": s.seed,
    }


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2)
        fh.write("\n")
