import json

import numpy as np
import pytest

from inash.environment import (
    Region,
    RobotSpec,
    Scenario,
    ScenarioError,
    Workspace,
    in_goal,
    point_free,
    points_free,
    scenario_from_dict,
    scenario_to_dict,
    segment_free,
)


def box(obstacles=(), lo=(0, 0), hi=(10, 10)):
    return Workspace.from_corners(lo, hi, obstacles)


class TestPointFree:
    def test_empty_workspace(self):
        assert point_free(box(), (5, 5), 0.5)

    def test_point_inside_rect_obstacle(self):
        w = box([Region.rect(4, 4, 6, 6)])
        assert not point_free(w, (5, 5), 0.0)

    def test_circle_clearance_by_hand(self):
        # disc radius 0.5 at (1.4, 0): center distance 1.4 < 1 + 0.5
        w = box([Region.circle(0, 0, 1)], lo=(-10, -10), hi=(10, 10))
        assert not point_free(w, (1.4, 0), 0.5)
        assert point_free(w, (1.6, 0), 0.5)  # 1.6 > 1.5: grazing is free

    def test_obstacle_interior_is_open(self):
        w = box([Region.rect(4, 4, 6, 6)])
        assert point_free(w, (4, 5), 0.0)       # on the boundary
        assert not point_free(w, (4, 5), 1e-9)  # any inflation digs in

    def test_disc_must_fit_in_bounds(self):
        w = box()
        assert point_free(w, (0.5, 5), 0.5)
        assert not point_free(w, (0.4, 5), 0.5)

    def test_monotone_in_inflation(self):
        rng = np.random.default_rng(0)
        w = box([Region.rect(2, 2, 4, 7), Region.circle(7, 7, 1.5)])
        for _ in range(300):
            p = rng.uniform(0, 10, 2)
            d1, d2 = sorted(rng.uniform(0, 1.5, 2))
            if point_free(w, p, d2):
                assert point_free(w, p, d1)


class TestSegmentFree:
    def test_no_obstacles(self):
        assert segment_free(box(lo=(-1, -1), hi=(11, 1)), (0, 0), (10, 0), 0.0)

    def test_crossing_rectangle(self):
        w = box([Region.rect(4, -1, 6, 1)], lo=(-1, -2), hi=(11, 2))
        assert not segment_free(w, (0, 0), (10, 0), 0.0)

    def test_circle_clearance(self):
        # clearance 2 from (5, 2): 2 > 1 + 0.5
        w = box([Region.circle(5, 2, 1)], lo=(-1, -2), hi=(11, 4))
        assert segment_free(w, (0, 0), (10, 0), 0.5)
        assert not segment_free(w, (0, 0), (10, 0), 1.1)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        w = box([Region.rect(3, 3, 6, 6), Region.circle(7, 2, 1)])
        for _ in range(300):
            a, b = rng.uniform(0, 10, (2, 2))
            infl = rng.uniform(0, 1)
            assert segment_free(w, a, b, infl) == segment_free(w, b, a, infl)

    def test_grazing_rectangle_edge_is_free(self):
        w = box([Region.rect(4, -1, 6, 0)], lo=(-1, -2), hi=(11, 2))
        # the segment runs exactly along the obstacle's top edge
        assert segment_free(w, (0, 0), (10, 0), 0.0)

    def test_free_segment_implies_free_sampled_points(self):
        rng = np.random.default_rng(2)
        w = box([Region.rect(2, 2, 5, 5), Region.circle(7, 7, 1.2)])
        checked = 0
        for _ in range(60):
            a, b = rng.uniform(0, 10, (2, 2))
            infl = rng.uniform(0, 0.8)
            if not segment_free(w, a, b, infl):
                continue
            n = max(2, int(np.hypot(*(b - a)) / 1e-3))
            ts = np.linspace(0, 1, n)[:, None]
            pts = a + ts * (b - a)
            assert points_free(w, pts, infl).all()
            checked += 1
        assert checked > 5


class TestInGoal:
    def test_circle_center(self):
        r = RobotSpec(1, 0.5, (0, 0), Region.circle(9, 9, 1))
        assert in_goal(r, (9, 9))

    def test_boundary_excluded(self):
        r = RobotSpec(1, 0.5, (0, 0), Region.circle(9, 9, 1))
        assert not in_goal(r, (9, 8))

    def test_rect_goal(self):
        r = RobotSpec(1, 0.5, (0, 0), Region.rect(8, 8, 10, 10))
        assert in_goal(r, (8.5, 9.9))
        assert not in_goal(r, (8, 9))


class TestScenarioIO:
    def scenario_dict(self):
        return {
            "bounds": [[0.0, 0.0], [10.0, 10.0]],
            "obstacles": [
                {"rect": [[4.0, 4.0], [6.0, 6.0]]},
                {"circle": {"c": [8.0, 2.0], "r": 1.0}},
            ],
            "robots": [
                {"id": 1, "radius": 0.5, "init": [1.0, 1.0],
                 "goal": {"circle": {"c": [9.0, 9.0], "r": 1.0}}},
                {"id": 2, "radius": 0.5, "init": [1.0, 9.0],
                 "goal": {"rect": [[8.0, 0.0], [10.0, 2.0]]}},
            ],
            "seed": 42,
        }

    def test_round_trip(self):
        d = self.scenario_dict()
        s = scenario_from_dict(d)
        assert scenario_to_dict(s) == d
        # byte-for-byte stable serialization
        assert json.dumps(scenario_to_dict(s)) == json.dumps(
            scenario_to_dict(scenario_from_dict(scenario_to_dict(s)))
        )

    def test_unknown_top_level_field_rejected(self):
        d = self.scenario_dict()
        d["extra"] = 1
        with pytest.raises(ScenarioError, match="unknown scenario fields"):
            scenario_from_dict(d)

    def test_unknown_robot_field_rejected(self):
        d = self.scenario_dict()
        d["robots"][0]["speed"] = 2.0
        with pytest.raises(ScenarioError, match="unknown robot fields"):
            scenario_from_dict(d)

    def test_unknown_region_kind_rejected(self):
        d = self.scenario_dict()
        d["obstacles"][0] = {"polygon": [[0, 0], [1, 0], [0, 1]]}
        with pytest.raises(ScenarioError, match="unknown region kind"):
            scenario_from_dict(d)

    def test_missing_field_rejected(self):
        d = self.scenario_dict()
        del d["seed"]
        with pytest.raises(ScenarioError, match="missing scenario fields"):
            scenario_from_dict(d)

    def test_ids_must_be_contiguous(self):
        d = self.scenario_dict()
        d["robots"][1]["id"] = 5
        with pytest.raises(ScenarioError, match="ids must be 1..N"):
            scenario_from_dict(d)

    def test_blocked_start_rejected(self):
        d = self.scenario_dict()
        d["robots"][0]["init"] = [5.0, 5.0]  # inside the rect obstacle
        with pytest.raises(ScenarioError, match="is not free"):
            scenario_from_dict(d)

    def test_goal_without_free_interior_rejected(self):
        d = self.scenario_dict()
        d["robots"][0]["goal"] = {"circle": {"c": [5.0, 5.0], "r": 0.4}}
        with pytest.raises(ScenarioError, match="no free interior"):
            scenario_from_dict(d)

    def test_obstacle_outside_bounds_rejected(self):
        d = self.scenario_dict()
        d["obstacles"].append({"circle": {"c": [30.0, 30.0], "r": 1.0}})
        with pytest.raises(ScenarioError, match="does not intersect"):
            scenario_from_dict(d)

    def test_invalid_regions(self):
        with pytest.raises(ScenarioError):
            Region.rect(5, 5, 4, 6)
        with pytest.raises(ScenarioError):
            Region.circle(0, 0, 0.0)
