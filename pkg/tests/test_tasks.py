import numpy as np
import pytest

from inash.environment import Region, RobotSpec, Workspace
from inash.game import PlannerConfig, TimedPath, path_cost, timed_path_from_ids
from inash.rrg import RadiusSchedule, RandomGraph, extend, goal_paths, sample
from inash.tasks import (
    FREE_PROP,
    Word,
    accepts,
    goal_prop,
    label,
    reach_avoid_automaton,
    satisfies_reach_avoid,
    word_of_path,
)


def tp(robot_id, radius, pts, speed=1.0):
    pts = np.asarray(pts, dtype=float)
    seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.array([])
    times = np.concatenate([[0.0], np.cumsum(seg)]) / speed
    return TimedPath(robot_id, radius, pts, times, path_cost(pts, speed))


def sampled_word(path, robot, w, dt=1e-3):
    """Independent oracle: dense label sampling along the trajectory."""
    ts = np.arange(0.0, path.times[-1] + dt, dt)
    labs = [label(robot, w, path.position_at(t)) for t in ts]
    out = [labs[0]]
    for lab in labs[1:]:
        if lab != out[-1]:
            out.append(lab)
    return tuple(out)


class TestLabel:
    def setup_method(self):
        self.w = Workspace.from_corners((-5, -5), (15, 15), [Region.rect(0, 6, 2, 8)])
        self.robot = RobotSpec(1, 0.1, (0, 0), Region.circle(5, 0, 1))

    def test_free_non_goal(self):
        assert label(self.robot, self.w, (0, 0)) == {FREE_PROP}

    def test_free_goal_interior(self):
        assert label(self.robot, self.w, (5, 0)) == {FREE_PROP, goal_prop(1)}

    def test_inside_obstacle(self):
        assert label(self.robot, self.w, (1, 7)) == frozenset()


class TestWordOfPath:
    def setup_method(self):
        self.w = Workspace.from_corners((-5, -5), (15, 15))
        self.robot = RobotSpec(1, 0.1, (0, 0), Region.circle(5, 0, 1))

    def test_free_path_outside_goal(self):
        word = word_of_path(tp(1, 0.1, [(0, 3), (10, 3)]), self.robot, self.w)
        assert word.labels == ({FREE_PROP},)
        assert word.change_times == ()

    def test_enter_and_stay(self):
        word = word_of_path(tp(1, 0.1, [(0, 0), (5, 0)]), self.robot, self.w)
        assert word.labels == ({FREE_PROP}, {FREE_PROP, goal_prop(1)})
        # enters the open disc at distance 4 (unit speed)
        assert len(word.change_times) == 1
        assert abs(word.change_times[0] - 4.0) < 1e-9

    def test_pass_through_circular_goal(self):
        # crossing times from |x - 5| = 1 along y = 0: t = 4 and t = 6
        word = word_of_path(tp(1, 0.1, [(0, 0), (10, 0)]), self.robot, self.w)
        assert word.labels == (
            {FREE_PROP},
            {FREE_PROP, goal_prop(1)},
            {FREE_PROP},
        )
        assert np.allclose(word.change_times, (4.0, 6.0), atol=1e-9)
        assert sampled_word(tp(1, 0.1, [(0, 0), (10, 0)]), self.robot, self.w) == word.labels

    def test_tangent_grazing_changes_nothing(self):
        # line y = 1 touches the goal circle boundary only: open set not entered
        word = word_of_path(tp(1, 0.1, [(0, 1), (10, 1)]), self.robot, self.w)
        assert word.labels == ({FREE_PROP},)

    def test_obstacle_crossing_drops_free_prop(self):
        w = Workspace.from_corners((-5, -5), (15, 15), [Region.rect(4, -1, 6, 1)])
        robot = RobotSpec(1, 0.1, (0, 0), Region.circle(0, 12, 1))  # goal far away
        path = tp(1, 0.1, [(0, 0), (10, 0)])
        word = word_of_path(path, robot, w)
        assert word.labels == ({FREE_PROP}, frozenset(), {FREE_PROP})
        # inflated rectangle entered at x = 4 - 0.1
        assert abs(word.change_times[0] - 3.9) < 1e-9
        assert sampled_word(path, robot, w) == word.labels

    def test_change_times_strictly_increase_on_random_paths(self):
        w = Workspace.from_corners((-5, -5), (15, 15),
                                   [Region.rect(2, 2, 6, 4), Region.circle(9, 6, 1.5)])
        rng = np.random.default_rng(8)
        for _ in range(50):
            pts = rng.uniform(-4, 14, (5, 2))
            if np.any(np.hypot(*np.diff(pts, axis=0).T) < 1e-6):
                continue
            word = word_of_path(tp(1, 0.2, pts), self.robot, w)
            assert all(a < b for a, b in zip(word.change_times, word.change_times[1:]))
            assert all(a != b for a, b in zip(word.labels, word.labels[1:]))
            assert sampled_word(tp(1, 0.2, pts), self.robot, w) == word.labels


class TestAutomaton:
    def test_reach_then_stay_accepts(self):
        a = reach_avoid_automaton(1)
        word = Word((frozenset({FREE_PROP}), frozenset({FREE_PROP, goal_prop(1)})), (4.0,))
        assert accepts(a, word)

    def test_never_reaching_rejects(self):
        a = reach_avoid_automaton(1)
        assert not accepts(a, Word((frozenset({FREE_PROP}),), ()))

    def test_free_violated_after_goal_rejects(self):
        a = reach_avoid_automaton(1)
        word = Word((frozenset({FREE_PROP}), frozenset({goal_prop(1)})), (1.0,))
        assert not accepts(a, word)

    def test_goal_reached_at_start(self):
        a = reach_avoid_automaton(1)
        word = Word((frozenset({FREE_PROP, goal_prop(1)}),), ())
        assert accepts(a, word)

    def test_agrees_with_closed_form_on_random_words(self):
        rng = np.random.default_rng(77)
        a = reach_avoid_automaton(1)
        alphabet = [
            frozenset(),
            frozenset({FREE_PROP}),
            frozenset({goal_prop(1)}),
            frozenset({FREE_PROP, goal_prop(1)}),
        ]
        for _ in range(10_000):
            n = int(rng.integers(1, 7))
            labels = [alphabet[rng.integers(0, 4)]]
            while len(labels) < n:
                nxt = alphabet[rng.integers(0, 4)]
                if nxt != labels[-1]:
                    labels.append(nxt)
            word = Word(tuple(labels), tuple(range(1, len(labels))))
            assert accepts(a, word) == satisfies_reach_avoid(word, 1)


def test_graph_paths_always_satisfy_task():
    """Cross-module consistency: segment-free edges + goal-truncated
    enumeration imply every enumerated path's word is accepted."""
    w = Workspace.from_corners((0, 0), (10, 10),
                               [Region.rect(3, 0, 4, 6), Region.circle(7, 7, 1)])
    robot = RobotSpec(1, 0.3, (1, 1), Region.circle(9, 3, 1))
    rng = np.random.default_rng(21)
    g = RandomGraph((1, 1))
    sched = RadiusSchedule(gamma=8, eta=1.0)
    cfg = PlannerConfig()
    for k in range(1, 250):
        extend(g, w, robot, sample(w, robot, rng), sched, k)
    paths, _ = goal_paths(g, cap=200)
    assert paths, "fixture should produce goal paths"
    auto = reach_avoid_automaton(robot.id)
    for ids in paths:
        path = timed_path_from_ids(g, ids, robot, cfg)
        assert accepts(auto, word_of_path(path, robot, w))


def test_word_validation():
    with pytest.raises(ValueError):
        Word((frozenset(), frozenset()), (1.0,))  # equal consecutive labels
    with pytest.raises(ValueError):
        Word((frozenset(), frozenset({FREE_PROP})), ())  # missing change time
