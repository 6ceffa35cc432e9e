"""Per-robot random geometric graphs: uniform sampling, bounded steering,
nearest/near queries, monotone graph extension with a shrinking connection
radius, and root-to-goal path enumeration.

Graphs are rooted DAGs: every edge points from an earlier-inserted vertex to
a later one, and growth is append-only, so any path found at iteration k
still exists at every later iteration. New vertices receive incoming edges
only; there is no rewiring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import RobotSpec, Workspace, goal_reached, points_free, segment_free
from .kernels import K

_EPS_LEN = 1e-12


class SampleError(RuntimeError):
    """Free-space sampling exceeded its rejection budget."""


@dataclass(frozen=True)
class RadiusSchedule:
    """Connection radius min(gamma * (log k / k)^(1/n), eta)."""

    gamma: float
    eta: float
    n: int = 2

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")


def connection_radius(sched: RadiusSchedule, k: int) -> float:
    if k < 1:
        raise ValueError(f"iteration must be >= 1, got {k}")
    if k == 1:
        return 0.0
    return min(sched.gamma * (math.log(k) / k) ** (1.0 / sched.n), sched.eta)


class RandomGraph:
    """Append-only rooted DAG of sampled states (vertex 0 is the root)."""

    def __init__(self, root, root_in_goal: bool = False):
        cap = 64
        self._xs = np.empty(cap, np.float64)
        self._ys = np.empty(cap, np.float64)
        self._goal = np.zeros(cap, np.bool_)
        self.n_vertices = 0
        ecap = 64
        self._ef = np.empty(ecap, np.int64)
        self._et = np.empty(ecap, np.int64)
        self._el = np.empty(ecap, np.float64)
        self.n_edges = 0
        self.n_goal_vertices = 0
        self._csr_key = -1
        self._csr = None
        self._dp_key = -1
        self._dp = None
        root = np.asarray(root, dtype=np.float64).reshape(2)
        self.add_vertex(root[0], root[1], root_in_goal)

    # -- storage -----------------------------------------------------------
    def _grow_vertices(self):
        cap = self._xs.shape[0] * 2
        for name in ("_xs", "_ys", "_goal"):
            old = getattr(self, name)
            new = np.empty(cap, old.dtype)
            if name == "_goal":
                new[:] = False
            new[: self.n_vertices] = old[: self.n_vertices]
            setattr(self, name, new)

    def _grow_edges(self):
        cap = self._ef.shape[0] * 2
        for name in ("_ef", "_et", "_el"):
            old = getattr(self, name)
            new = np.empty(cap, old.dtype)
            new[: self.n_edges] = old[: self.n_edges]
            setattr(self, name, new)

    def add_vertex(self, x: float, y: float, in_goal: bool) -> int:
        if self.n_vertices == self._xs.shape[0]:
            self._grow_vertices()
        i = self.n_vertices
        self._xs[i] = x
        self._ys[i] = y
        self._goal[i] = in_goal
        if in_goal:
            self.n_goal_vertices += 1
        self.n_vertices += 1
        return i

    def add_edge(self, u: int, v: int, length: float) -> None:
        if not u < v:
            raise ValueError(f"edges must point forward in insertion order: {u} -> {v}")
        if self.n_edges == self._ef.shape[0]:
            self._grow_edges()
        j = self.n_edges
        self._ef[j] = u
        self._et[j] = v
        self._el[j] = length
        self.n_edges += 1

    # -- views -------------------------------------------------------------
    @property
    def xs(self) -> np.ndarray:
        return self._xs[: self.n_vertices]

    @property
    def ys(self) -> np.ndarray:
        return self._ys[: self.n_vertices]

    @property
    def goal_flags(self) -> np.ndarray:
        return self._goal[: self.n_vertices]

    @property
    def has_goal_vertex(self) -> bool:
        return self.n_goal_vertices > 0

    def vertex(self, i: int) -> np.ndarray:
        return np.array([self._xs[i], self._ys[i]])

    def edges(self):
        return (
            self._ef[: self.n_edges].copy(),
            self._et[: self.n_edges].copy(),
            self._el[: self.n_edges].copy(),
        )

    # -- derived structures --------------------------------------------------
    def csr(self):
        """Out-adjacency (offsets, targets, lengths), children in ascending
        target order."""
        key = (self.n_vertices, self.n_edges)
        if self._csr_key != key:
            m = self.n_edges
            ef = self._ef[:m]
            order = np.argsort(ef, kind="stable")  # targets ascend within a source
            tgt = np.ascontiguousarray(self._et[:m][order])
            wlen = np.ascontiguousarray(self._el[:m][order])
            counts = np.bincount(ef, minlength=self.n_vertices)
            off = np.zeros(self.n_vertices + 1, np.int64)
            np.cumsum(counts, out=off[1:])
            self._csr = (off, tgt, wlen)
            self._csr_key = key
        return self._csr

    def goal_dp(self):
        """(lower bound to goal, goal-truncated path count) per vertex."""
        key = (self.n_vertices, self.n_edges)
        if self._dp_key != key:
            off, tgt, wlen = self.csr()
            lb = np.empty(self.n_vertices, np.float64)
            cnt = np.empty(self.n_vertices, np.float64)
            K.dag_goal_dp(self.n_vertices, off, tgt, wlen, self.goal_flags, lb, cnt)
            self._dp = (lb, cnt)
            self._dp_key = key
        return self._dp

    def path_count(self, cap: int) -> tuple[int, bool]:
        """Number of root-to-goal paths clamped at ``cap``; flag True when
        the true count exceeds the cap."""
        _, cnt = self.goal_dp()
        total = cnt[0]
        return int(min(total, cap)), bool(total > cap)

    def to_json(self) -> dict:
        ef, et, el = self.edges()
        return {
            "vertices": np.stack([self.xs, self.ys], axis=1).tolist(),
            "goal_flags": self.goal_flags.astype(int).tolist(),
            "edges": [[int(u), int(v), float(w)] for u, v, w in zip(ef, et, el)],
        }


# ---------------------------------------------------------------------------
# primitives


def sample(w: Workspace, r: RobotSpec, rng: np.random.Generator, max_rejections: int = 100_000):
    """Uniform sample from the robot's free space by rejection over the
    bounds; deterministic given the generator state."""
    b = w.bounds
    batch = 64
    drawn = 0
    while drawn < max_rejections:
        pts = rng.uniform((b[0], b[1]), (b[2], b[3]), size=(batch, 2))
        mask = points_free(w, pts, r.radius)
        drawn += batch
        hits = np.nonzero(mask)[0]
        if hits.size:
            return pts[hits[0]].copy()
    raise SampleError(
        f"no free sample for robot {r.id} after {drawn} rejections; free space may be (near) empty"
    )


def steer(x, y, eta: float) -> np.ndarray:
    """Point of the segment [x, y] closest to y within distance eta of x."""
    if not eta > 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = float(np.hypot(*(y - x)))
    if d <= eta:
        return y.copy()
    return x + (eta / d) * (y - x)


def nearest(g: RandomGraph, x) -> int:
    """Index of the closest vertex; ties go to the smallest insertion index."""
    x = np.asarray(x, dtype=np.float64)
    return int(K.nearest_vertex(g._xs, g._ys, g.n_vertices, x[0], x[1]))


def near_vertices(g: RandomGraph, x, radius: float) -> np.ndarray:
    """All vertex indices within the closed ball of ``radius`` around x."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    x = np.asarray(x, dtype=np.float64)
    return K.near_indices(g._xs, g._ys, g.n_vertices, x[0], x[1], float(radius))


def extend(
    g: RandomGraph,
    w: Workspace,
    r: RobotSpec,
    x_rand,
    sched: RadiusSchedule,
    k: int,
    goal_by_center: bool = True,
    strict_nearest_only_edges: bool = False,
) -> bool:
    """One growth step towards ``x_rand``.

    Steers from the nearest vertex; if that segment is free the new vertex is
    added with an incoming edge from every near vertex (nearest included)
    whose connecting segment is free. No edges leave the new vertex. Returns
    True when the graph changed.

    ``strict_nearest_only_edges`` restricts to the single nearest-vertex edge
    (degenerating the graph to a tree).
    """
    x_rand = np.asarray(x_rand, dtype=np.float64)
    vn = nearest(g, x_rand)
    pn = g.vertex(vn)
    x_new = steer(pn, x_rand, sched.eta)
    d_near = float(np.hypot(*(x_new - pn)))
    if d_near <= _EPS_LEN:
        return False
    if not segment_free(w, pn, x_new, r.radius):
        return False
    radius = connection_radius(sched, k)
    if strict_nearest_only_edges:
        cand = np.array([vn], dtype=np.int64)
    else:
        cand = near_vertices(g, x_new, radius)
        if vn not in cand:
            cand = np.concatenate([cand, [vn]])
        cand = np.unique(cand)  # ascending insertion index
    new_id = g.add_vertex(x_new[0], x_new[1], goal_reached(r, x_new, goal_by_center))
    x0s = np.ascontiguousarray(g._xs[cand])
    y0s = np.ascontiguousarray(g._ys[cand])
    free = K.segments_free_mask(
        x0s, y0s, x_new[0], x_new[1], r.radius, w.bounds, w.rect_arr, w.circle_arr
    )
    for j, u in enumerate(cand):
        if not free[j]:
            continue
        length = float(np.hypot(x0s[j] - x_new[0], y0s[j] - x_new[1]))
        if length <= _EPS_LEN:
            continue
        g.add_edge(int(u), new_id, length)
    return True


def goal_paths(g: RandomGraph, cap: int = 10_000):
    """Root-to-goal paths truncated at the first goal vertex, in canonical
    depth-first order (children by ascending insertion index).

    Returns (paths, truncated): a list of vertex-id tuples and a flag that is
    True when the enumeration stopped at ``cap``.
    """
    if not g.has_goal_vertex:
        return [], False
    off, tgt, wlen = g.csr()
    _, cnt = g.goal_dp()
    flat, offs, _, n_paths = K.enumerate_goal_paths(
        g.n_vertices, off, tgt, wlen, g.goal_flags, cnt, cap
    )
    paths = [tuple(flat[offs[i] : offs[i + 1]]) for i in range(n_paths)]
    truncated = cnt[0] > n_paths
    return paths, bool(truncated)


def shortest_goal_path(g: RandomGraph):
    """Min-length root-to-goal path (truncation-respecting) or None."""
    if not g.has_goal_vertex:
        return None
    off, tgt, wlen = g.csr()
    dist = np.empty(g.n_vertices, np.float64)
    pred = np.empty(g.n_vertices, np.int64)
    K.dag_root_dp(g.n_vertices, off, tgt, wlen, g.goal_flags, dist, pred)
    goal_ids = np.nonzero(g.goal_flags)[0]
    reach = goal_ids[np.isfinite(dist[goal_ids])]
    if reach.size == 0:
        return None
    best = reach[np.argmin(dist[reach])]
    ids = [int(best)]
    while pred[ids[-1]] >= 0:
        ids.append(int(pred[ids[-1]]))
    ids.reverse()
    return tuple(ids), float(dist[best])


def estimate_gamma(
    w: Workspace, r: RobotSpec, seed: int, n_samples: int = 100_000
) -> float:
    """Connection-radius coefficient from a Monte-Carlo estimate of the
    robot's free-space area: 2 * ((1 + 1/n) * area / pi)^(1/n) with n = 2."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, r.id, 0x67A77A])
    b = w.bounds
    pts = rng.uniform((b[0], b[1]), (b[2], b[3]), size=(n_samples, 2))
    frac = float(np.count_nonzero(points_free(w, pts, r.radius))) / n_samples
    area = max(frac * w.area(), 1e-9)
    return 2.0 * math.sqrt(1.5 * area / math.pi)
