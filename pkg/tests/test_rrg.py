import math

import numpy as np
import pytest
from scipy import stats

from inash.environment import Region, RobotSpec, Workspace
from inash.rrg import (
    RadiusSchedule,
    RandomGraph,
    SampleError,
    connection_radius,
    estimate_gamma,
    extend,
    goal_paths,
    near_vertices,
    nearest,
    sample,
    shortest_goal_path,
    steer,
)


class TestSteer:
    def test_within_radius_returns_target(self):
        assert np.allclose(steer((0, 0), (0.5, 0), 1.0), (0.5, 0))

    def test_clipped_to_radius(self):
        assert np.allclose(steer((0, 0), (3, 4), 1.0), (0.6, 0.8))

    def test_identity(self):
        assert np.allclose(steer((2, 2), (2, 2), 1.0), (2, 2))

    def test_contraction_and_collinearity(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            x, y = rng.uniform(-5, 5, (2, 2))
            eta = rng.uniform(0.01, 3)
            z = steer(x, y, eta)
            assert np.hypot(*(z - x)) <= eta + 1e-12
            cross = (y[0] - x[0]) * (z[1] - x[1]) - (y[1] - x[1]) * (z[0] - x[0])
            assert abs(cross) <= 1e-12 * max(1.0, np.hypot(*(y - x)))


class TestConnectionRadius:
    def test_k1_is_zero(self):
        assert connection_radius(RadiusSchedule(2, 1), 1) == 0.0

    def test_formula_value(self):
        # 2 * (ln 100 / 100)^(1/2) = 0.4292...
        r = connection_radius(RadiusSchedule(gamma=2, eta=1, n=2), 100)
        assert abs(r - 0.4292) < 1e-4

    def test_eta_clamp(self):
        assert connection_radius(RadiusSchedule(gamma=2, eta=0.1), 3) == 0.1

    def test_nonincreasing_from_k3_and_vanishing(self):
        sched = RadiusSchedule(gamma=2, eta=10)
        vals = [connection_radius(sched, k) for k in range(3, 3000)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert connection_radius(sched, 10**9) < 1e-3


def chain_graph(points, goal_flags):
    g = RandomGraph(points[0], goal_flags[0])
    for i in range(1, len(points)):
        g.add_vertex(points[i][0], points[i][1], goal_flags[i])
        g.add_edge(i - 1, i, float(np.hypot(*(np.array(points[i]) - points[i - 1]))))
    return g


class TestQueries:
    def test_nearest_single_vertex(self):
        g = RandomGraph((0, 0))
        assert nearest(g, (5, 5)) == 0

    def test_nearest_picks_closest(self):
        g = chain_graph([(0.0, 0.0), (2.0, 0.0)], [False, False])
        assert nearest(g, (0.5, 0)) == 0

    def test_nearest_tie_breaks_low_index(self):
        g = chain_graph([(0.0, 0.0), (2.0, 0.0)], [False, False])
        assert nearest(g, (1.0, 0)) == 0

    def test_near_radius_zero_on_vertex(self):
        g = chain_graph([(0.0, 0.0), (2.0, 0.0)], [False, False])
        assert list(near_vertices(g, (0, 0), 0.0)) == [0]

    def test_near_large_radius_is_everything(self):
        g = chain_graph([(0.0, 0.0), (2.0, 0.0)], [False, False])
        assert list(near_vertices(g, (1, 1), 100.0)) == [0, 1]

    def test_near_closed_ball(self):
        g = chain_graph([(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)], [False] * 3)
        assert list(near_vertices(g, (0, 0), 1.0)) == [0, 1]

    def test_near_superset_of_nearest(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 10, (40, 2))
        g = RandomGraph(pts[0])
        for p in pts[1:]:
            g.add_vertex(p[0], p[1], False)
        for _ in range(100):
            x = rng.uniform(0, 10, 2)
            v = nearest(g, x)
            d = np.hypot(*(pts[v] - x))
            assert v in set(near_vertices(g, x, d + 1e-12))


class TestExtend:
    def robot(self, goal=Region.circle(50, 50, 1)):
        return RobotSpec(1, 0.25, (0, 0), goal)

    def test_first_extension_by_hand(self):
        # steer from the root towards (5,0) with eta=1: new vertex (1,0)
        w = Workspace.from_corners((-2, -2), (8, 8))
        g = RandomGraph((0, 0))
        sched = RadiusSchedule(gamma=1, eta=1)
        assert extend(g, w, self.robot(Region.circle(7, 7, 0.5)), (5, 0), sched, 1)
        assert g.n_vertices == 2
        assert np.allclose(g.vertex(1), (1, 0))
        ef, et, el = g.edges()
        assert list(ef) == [0] and list(et) == [1]
        assert abs(el[0] - 1.0) < 1e-12

    def test_blocked_extension_leaves_graph_unchanged(self):
        w = Workspace.from_corners((-2, -2), (8, 8), [Region.rect(0.4, -1, 0.6, 1)])
        g = RandomGraph((0, 0))
        sched = RadiusSchedule(gamma=1, eta=1)
        assert not extend(g, w, self.robot(Region.circle(7, 7, 0.5)), (5, 0), sched, 1)
        assert g.n_vertices == 1 and g.n_edges == 0

    def test_dense_cluster_gets_three_incoming_edges(self):
        # three vertices inside the connection radius of the new sample
        w = Workspace.from_corners((-2, -2), (8, 8))
        g = RandomGraph((0, 0))
        g.add_vertex(0.4, 0.0, False)
        g.add_vertex(0.0, 0.4, False)
        g.add_vertex(5.0, 5.0, False)
        sched = RadiusSchedule(gamma=1, eta=0.5)  # radius(2) clamps to 0.5
        assert extend(g, w, self.robot(Region.circle(7, 7, 0.5)), (0.2, 0.2), sched, 2)
        ef, et, _ = g.edges()
        new_id = g.n_vertices - 1
        assert list(et) == [new_id] * 3
        assert sorted(ef) == [0, 1, 2]

    def test_radius_zero_still_connects_nearest(self):
        w = Workspace.from_corners((-2, -2), (8, 8))
        g = RandomGraph((0, 0))
        g.add_vertex(0.3, 0.0, False)
        sched = RadiusSchedule(gamma=1, eta=1)
        assert extend(g, w, self.robot(Region.circle(7, 7, 0.5)), (0.3, 0.4), sched, 1)
        ef, et, _ = g.edges()
        assert g.n_edges == 1 and ef[0] == 1  # nearest vertex only

    def test_strict_nearest_only_mode_builds_tree(self):
        w = Workspace.from_corners((-2, -2), (8, 8))
        rng = np.random.default_rng(3)
        robot = self.robot(Region.circle(7, 7, 0.5))
        g = RandomGraph((0, 0))
        sched = RadiusSchedule(gamma=5, eta=1)
        for k in range(1, 80):
            extend(g, w, robot, rng.uniform(-1, 7, 2), sched, k,
                   strict_nearest_only_edges=True)
        assert g.n_edges == g.n_vertices - 1  # a tree

    def test_monotone_growth_and_acyclicity(self):
        w = Workspace.from_corners((0, 0), (10, 10), [Region.rect(3, 3, 6, 6)])
        robot = RobotSpec(1, 0.3, (1, 1), Region.circle(9, 9, 1))
        rng = np.random.default_rng(11)
        g = RandomGraph((1, 1))
        sched = RadiusSchedule(gamma=8, eta=1)
        prev_v, prev_e = 1, 0
        snapshots = []
        for k in range(1, 150):
            snapshots.append((g.edges(), g.n_vertices))
            extend(g, w, robot, sample(w, robot, rng), sched, k)
            assert g.n_vertices >= prev_v and g.n_edges >= prev_e
            prev_v, prev_e = g.n_vertices, g.n_edges
        ef, et, _ = g.edges()
        assert np.all(ef < et)  # edges follow insertion order: acyclic
        old_ef, old_et, old_el = snapshots[80][0]
        assert np.array_equal(old_ef, ef[: len(old_ef)])
        assert np.array_equal(old_et, et[: len(old_et)])


class TestGoalPaths:
    def diamond(self):
        g = RandomGraph((0, 0))
        g.add_vertex(1, 1, False)     # 1
        g.add_vertex(1, -1, False)    # 2
        g.add_vertex(2, 0, True)      # 3 (goal)
        s2 = math.sqrt(2)
        g.add_edge(0, 1, s2)
        g.add_edge(0, 2, s2)
        g.add_edge(1, 3, s2)
        g.add_edge(2, 3, s2)
        return g

    def test_chain(self):
        g = chain_graph([(0, 0), (1, 0), (2, 0)], [False, False, True])
        paths, truncated = goal_paths(g)
        assert paths == [(0, 1, 2)] and not truncated

    def test_no_goal_vertices(self):
        g = chain_graph([(0, 0), (1, 0)], [False, False])
        assert goal_paths(g) == ([], False)

    def test_diamond_dfs_order(self):
        paths, truncated = goal_paths(self.diamond())
        assert paths == [(0, 1, 3), (0, 2, 3)] and not truncated

    def test_truncated_at_first_goal_vertex(self):
        g = chain_graph([(0, 0), (1, 0), (2, 0)], [False, True, True])
        paths, _ = goal_paths(g)
        assert paths == [(0, 1)]

    def test_cap_reports_truncation(self):
        paths, truncated = goal_paths(self.diamond(), cap=1)
        assert paths == [(0, 1, 3)] and truncated

    def test_matches_python_dfs_on_random_graph(self):
        w = Workspace.from_corners((0, 0), (10, 10))
        robot = RobotSpec(1, 0.3, (1, 5), Region.circle(8, 5, 1.5))
        rng = np.random.default_rng(9)
        g = RandomGraph((1, 5))
        sched = RadiusSchedule(gamma=10, eta=1.2)
        for k in range(1, 220):
            extend(g, w, robot, sample(w, robot, rng), sched, k)
        off, tgt, _ = g.csr()
        expected = []

        def dfs(v, path):
            if g.goal_flags[v]:
                expected.append(tuple(path))
                return
            for e in range(off[v], off[v + 1]):
                dfs(tgt[e], path + [tgt[e]])

        dfs(0, [0])
        paths, truncated = goal_paths(g, cap=10**6)
        assert paths == expected and not truncated
        assert len(paths) == g.path_count(10**6)[0]
        # structural property: start at root, end at goal, no interior goal
        for p in paths:
            assert p[0] == 0 and g.goal_flags[p[-1]]
            assert not any(g.goal_flags[v] for v in p[:-1])


class TestShortestGoalPath:
    def test_picks_cheaper_branch(self):
        g = RandomGraph((0, 0))
        g.add_vertex(0, 3, False)   # 1: long way
        g.add_vertex(1, 0, False)   # 2: short way
        g.add_vertex(2, 0, True)    # 3
        g.add_edge(0, 1, 3.0)
        g.add_edge(0, 2, 1.0)
        g.add_edge(1, 3, 4.0)
        g.add_edge(2, 3, 1.0)
        ids, length = shortest_goal_path(g)
        assert ids == (0, 2, 3) and abs(length - 2.0) < 1e-12

    def test_does_not_pass_through_goal_vertices(self):
        # cheap route runs through an earlier goal vertex: must be truncated
        g = RandomGraph((0, 0))
        g.add_vertex(1, 0, True)    # 1: goal, on the cheap route
        g.add_vertex(0, 2, False)   # 2
        g.add_vertex(2, 0, True)    # 3: second goal
        g.add_edge(0, 1, 1.0)
        g.add_edge(0, 2, 2.0)
        g.add_edge(1, 3, 1.0)
        g.add_edge(2, 3, 2.9)
        ids, length = shortest_goal_path(g)
        assert ids == (0, 1) and abs(length - 1.0) < 1e-12


class TestSample:
    def test_deterministic(self, empty_box):
        robot = RobotSpec(1, 0.5, (5, 5), Region.circle(9, 9, 1))
        a = sample(empty_box, robot, np.random.default_rng(42))
        b = sample(empty_box, robot, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_sample_lands_in_open_cell(self):
        # everything blocked except one corner cell
        w = Workspace.from_corners((0, 0), (10, 10), [Region.rect(0, 0, 10, 8), Region.rect(2, 8, 10, 10)])
        robot = RobotSpec(1, 0.2, (1, 9), Region.circle(1, 9, 0.5))
        p = sample(w, robot, np.random.default_rng(0))
        assert 0.2 <= p[0] <= 2 - 0.2 and 8 + 0.2 <= p[1] <= 10 - 0.2

    def test_rejection_cap_raises(self):
        w = Workspace.from_corners((0, 0), (10, 10), [Region.rect(0, 0, 10, 9.999)])
        robot = RobotSpec(1, 0.5, (5, 9.9995), Region.circle(5, 9.9995, 0.1))
        with pytest.raises(SampleError):
            sample(w, robot, np.random.default_rng(0), max_rejections=2000)

    def test_uniformity_mean_and_chi_square(self):
        w = Workspace.from_corners((0, 0), (1, 1))
        robot = RobotSpec(1, 1e-9, (0.5, 0.5), Region.circle(0.5, 0.5, 0.1))
        rng = np.random.default_rng(123)
        pts = np.array([sample(w, robot, rng) for _ in range(4000)])
        # batched rejection sampling consumes draws uniformly over the box
        assert abs(pts[:, 0].mean() - 0.5) < 0.01
        assert abs(pts[:, 1].mean() - 0.5) < 0.01
        counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=4, range=[[0, 1], [0, 1]])
        _, p_value = stats.chisquare(counts.ravel())
        assert p_value > 1e-3


def test_estimate_gamma_open_box():
    # free area for a 0.5-radius disc in a 10x10 box is 9x9
    w = Workspace.from_corners((0, 0), (10, 10))
    robot = RobotSpec(1, 0.5, (5, 5), Region.circle(9, 9, 1))
    expected = 2.0 * math.sqrt(1.5 * 81.0 / math.pi)
    assert abs(estimate_gamma(w, robot, 0) - expected) < 0.02 * expected
