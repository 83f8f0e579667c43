"""Entanglement-rate allocation and flow-level simulation for quantum networks."""

from .allocation import (
    Allocation,
    Assignment,
    Policy,
    PolicyConfig,
    Rejection,
    RejectReason,
    Violation,
    allocate,
    verify_allocation,
)
from .fidelity import (
    PERFECT_OPS,
    DomainError,
    Ops,
    Reach,
    RepeaterLimit,
    SwapChainParams,
    fidelity_generic,
    fidelity_perfect,
    max_intermediate_repeaters,
    path_fidelity,
    werner_weight,
)
from .harness import ExperimentConfig, RunMetrics, jain_index, run_experiment
from .oracle import Objective, brute_force_optimal
from .routing import Path, feasible_paths, k_shortest_paths
from .topology import (
    Link,
    Network,
    Node,
    NodeKind,
    ValidationError,
    build_grid,
    generate_random,
    load_network,
    save_network,
    validate,
)
from .traffic import App, AppClass, PairDemand, Pattern, expand_app, generate_workload

__version__ = "0.1.0"
