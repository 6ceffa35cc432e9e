"""Multi-robot motion planning by sequential better response on per-robot
random graphs, with prioritized and centralized baselines and a brute-force
equilibrium oracle."""

from .backend import ACTIVE as kernel_backend
from .environment import (
    Region,
    RobotSpec,
    Scenario,
    ScenarioError,
    Workspace,
    in_goal,
    load_scenario,
    point_free,
    save_scenario,
    segment_free,
)
from .game import (
    PlannerConfig,
    Profile,
    RunRecord,
    TimedPath,
    better_response,
    collision_free_path,
    feasible_paths,
    nash_audit,
    path_cost,
    pleq,
    plt,
    run_inash,
    run_inash_with_state,
    top_cost,
)
from .rrg import (
    RadiusSchedule,
    RandomGraph,
    connection_radius,
    extend,
    goal_paths,
    near_vertices,
    nearest,
    sample,
    steer,
)
from .tasks import Word, accepts, label, reach_avoid_automaton, word_of_path
from .baselines import (
    DiscreteGame,
    anytime_prioritized_plan,
    brute_force_equilibria,
    discrete_game_from_scenario,
    ioptimal_control,
    optimal_tuple,
    prioritized_plan,
)
from .scenarios import (
    RandomScenarioParams,
    builtin_scenario,
    generate_random_scenario,
    intersection_scenario,
)
from .metrics import MetricsTable, reference_optimum, run_experiment
from .render import render_svg

__version__ = "0.1.0"
