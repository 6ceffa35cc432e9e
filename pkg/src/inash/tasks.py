"""Reach-avoid task checking over finite words.

A trajectory's word is the sequence of atomic-proposition label sets seen
along it, one entry per maximal constant-label interval. The reach-avoid
property (stay in free space, eventually enter the goal) is decided by a
two-state automaton over these words; the automaton interface is generic so
other finite-word automata can be plugged in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .environment import RobotSpec, Workspace, effective_goal, point_free

FREE_PROP = "pF"


def goal_prop(robot_id: int) -> str:
    return f"pG{robot_id}"


def label(
    r: RobotSpec, w: Workspace, p, goal_by_center: bool = True
) -> frozenset:
    """Atomic propositions holding at point p for this robot."""
    props = set()
    if point_free(w, p, r.radius):
        props.add(FREE_PROP)
    g = effective_goal(r, goal_by_center)
    if g is not None and g.contains_open(p):
        props.add(goal_prop(r.id))
    return frozenset(props)


@dataclass(frozen=True)
class Word:
    """Maximal-run word: labels[i] holds on the i-th interval, which starts
    at change_times[i-1] (the first interval starts at t = 0)."""

    labels: tuple
    change_times: tuple

    def __post_init__(self):
        if len(self.change_times) != len(self.labels) - 1:
            raise ValueError("need exactly one change time per label change")
        for a, b in zip(self.labels, self.labels[1:]):
            if a == b:
                raise ValueError("consecutive labels must differ")
        for a, b in zip(self.change_times, self.change_times[1:]):
            if not a < b:
                raise ValueError("change times must be strictly increasing")

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class FiniteAutomaton:
    """Deterministic finite-word automaton with predicate transitions.

    Unmatched letters fall into an implicit rejecting sink. A word is
    accepted when the run over its label sequence ends in an accepting
    state.
    """

    states: tuple
    initial: str
    accepting: frozenset
    transitions: tuple  # of (state, predicate(label_set) -> bool, next_state)

    def step(self, state: str, letter: frozenset):
        for src, pred, dst in self.transitions:
            if src == state and pred(letter):
                return dst
        return None

    def run(self, word: Word):
        state = self.initial
        for letter in word.labels:
            state = self.step(state, letter)
            if state is None:
                return None
        return state

    def accepts(self, word: Word) -> bool:
        return self.run(word) in self.accepting


def reach_avoid_automaton(robot_id: int) -> FiniteAutomaton:
    """Two-state acceptor: loop in q0 while free and outside the goal, move
    to accepting q1 on free-and-in-goal, stay in q1 while free."""
    g = goal_prop(robot_id)

    def free_not_goal(s, _g=g):
        return FREE_PROP in s and _g not in s

    def free_and_goal(s, _g=g):
        return FREE_PROP in s and _g in s

    def free(s):
        return FREE_PROP in s

    return FiniteAutomaton(
        states=("q0", "q1"),
        initial="q0",
        accepting=frozenset({"q1"}),
        transitions=(
            ("q0", free_not_goal, "q0"),
            ("q0", free_and_goal, "q1"),
            ("q1", free, "q1"),
        ),
    )


def accepts(automaton: FiniteAutomaton, word: Word) -> bool:
    return automaton.accepts(word)


def satisfies_reach_avoid(word: Word, robot_id: int) -> bool:
    """Closed-form equivalent of the automaton run: free everywhere and in
    the goal somewhere. Kept as an independent cross-check."""
    g = goal_prop(robot_id)
    return all(FREE_PROP in s for s in word.labels) and any(
        g in s for s in word.labels
    )


# ---------------------------------------------------------------------------
# exact label-change instants along a piecewise-linear trajectory


def _circle_crossings(p0, d, cx, cy, radius, out):
    # |p0 + s d - c|^2 = radius^2
    ex = p0[0] - cx
    ey = p0[1] - cy
    a = d[0] * d[0] + d[1] * d[1]
    if a <= 0.0:
        return
    b = 2.0 * (ex * d[0] + ey * d[1])
    c = ex * ex + ey * ey - radius * radius
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return
    root = math.sqrt(disc)
    out.append((-b - root) / (2.0 * a))
    out.append((-b + root) / (2.0 * a))


def _line_crossing(p0c, dc, value, out):
    if dc != 0.0:
        out.append((value - p0c) / dc)


def _segment_crossings(p0, p1, w: Workspace, infl: float, goal, goal_infl: float):
    """Candidate parameter values in (0, 1) where any label may change."""
    d = p1 - p0
    ss: list[float] = []
    b = w.bounds
    _line_crossing(p0[0], d[0], b[0] + infl, ss)
    _line_crossing(p0[0], d[0], b[2] - infl, ss)
    _line_crossing(p0[1], d[1], b[1] + infl, ss)
    _line_crossing(p0[1], d[1], b[3] - infl, ss)
    for rect in w.rect_arr:
        x0, y0, x1, y1 = rect
        for xv in (x0 - infl, x0, x1, x1 + infl):
            _line_crossing(p0[0], d[0], xv, ss)
        for yv in (y0 - infl, y0, y1, y1 + infl):
            _line_crossing(p0[1], d[1], yv, ss)
        if infl > 0.0:
            for cx in (x0, x1):
                for cy in (y0, y1):
                    _circle_crossings(p0, d, cx, cy, infl, ss)
    for circ in w.circle_arr:
        _circle_crossings(p0, d, circ[0], circ[1], circ[2] + infl, ss)
    if goal is not None:
        if goal.kind == "circle":
            cx, cy, r = goal.params
            _circle_crossings(p0, d, cx, cy, r + goal_infl, ss)
        else:
            x0, y0, x1, y1 = goal.params
            _line_crossing(p0[0], d[0], x0, ss)
            _line_crossing(p0[0], d[0], x1, ss)
            _line_crossing(p0[1], d[1], y0, ss)
            _line_crossing(p0[1], d[1], y1, ss)
    return [s for s in ss if 0.0 < s < 1.0]


def word_of_path(path, r: RobotSpec, w: Workspace, goal_by_center: bool = True) -> Word:
    """Word of a timed piecewise-linear trajectory (parked at its end).

    Change instants come from exact boundary intersections (linear for
    rectangle sides, quadratic for circles); each maximal interval is
    labeled at its midpoint.
    """
    verts = np.asarray(path.vertices, dtype=np.float64)
    times = np.asarray(path.times, dtype=np.float64)
    goal = effective_goal(r, goal_by_center)
    cut_times = [0.0]
    for j in range(len(verts) - 1):
        t0, t1 = times[j], times[j + 1]
        for s in _segment_crossings(verts[j], verts[j + 1], w, r.radius, goal, 0.0):
            cut_times.append(t0 + s * (t1 - t0))
    cut_times.append(float(times[-1]))
    cuts = np.unique(np.asarray(cut_times))
    cuts = cuts[(cuts >= 0.0) & (cuts <= times[-1])]

    def _position(t: float) -> np.ndarray:
        x = np.interp(t, times, verts[:, 0])
        y = np.interp(t, times, verts[:, 1])
        return np.array([x, y])

    labels = []
    changes = []
    for i in range(len(cuts) - 1):
        if cuts[i + 1] - cuts[i] <= 1e-15:
            continue
        lab = label(r, w, _position(0.5 * (cuts[i] + cuts[i + 1])), goal_by_center)
        if not labels:
            labels.append(lab)
        elif lab != labels[-1]:
            labels.append(lab)
            changes.append(float(cuts[i]))
    end_lab = label(r, w, verts[-1], goal_by_center)
    if not labels:
        labels.append(end_lab)
    elif end_lab != labels[-1]:
        labels.append(end_lab)
        changes.append(float(times[-1]))
    return Word(labels=tuple(labels), change_times=tuple(changes))
