"""Attack-resilient distributed action selection for multi-robot coverage."""

from .commgraph import CommGraph, clique_partition, diameter, random_connected_graph
from .environment import (
    CoverageObjective,
    GmmField,
    MotionAction,
    NoisyObjective,
    RobotPose,
    build_actions,
    coverage_objective,
    generate_field,
    noisy_objective,
    random_poses,
    read_field_grid,
    write_field_grid,
)
from .harness import TrialConfig, load_config, run_experiment, run_trial
from .objective import (
    CallableSetFunction,
    SetFunction,
    check_monotone,
    check_submodular,
    curvature,
    marginal_gain,
)
from .oracles import (
    AttackResult,
    CentralizedPlan,
    InstanceTooLargeError,
    brute_force_optimal,
    centralized_greedy,
    centralized_random,
    centralized_resilient,
    greedy_attack,
    semi_distributed_resilient,
    verify_bound,
    worst_case_attack,
)
from .protocol import DistributedRun, ProtocolError, RankedEntry, ScoredAction, run_distributed

__version__ = "0.1.0"

__all__ = [
    "AttackResult",
    "CallableSetFunction",
    "CentralizedPlan",
    "CommGraph",
    "CoverageObjective",
    "DistributedRun",
    "GmmField",
    "InstanceTooLargeError",
    "MotionAction",
    "NoisyObjective",
    "ProtocolError",
    "RankedEntry",
    "RobotPose",
    "ScoredAction",
    "SetFunction",
    "TrialConfig",
    "brute_force_optimal",
    "build_actions",
    "centralized_greedy",
    "centralized_random",
    "centralized_resilient",
    "check_monotone",
    "check_submodular",
    "clique_partition",
    "coverage_objective",
    "curvature",
    "diameter",
    "generate_field",
    "greedy_attack",
    "load_config",
    "marginal_gain",
    "noisy_objective",
    "random_connected_graph",
    "random_poses",
    "read_field_grid",
    "run_distributed",
    "run_experiment",
    "run_trial",
    "semi_distributed_resilient",
    "verify_bound",
    "worst_case_attack",
    "write_field_grid",
]
