"""Budget-controlled hybrid optimization: a three-layer metaheuristic
(MCMC burn-in, greedy refinement, adaptive simulated annealing with
reheating and a poor-region blacklist), classical baselines, a benchmark
harness, and an HTTP service."""

__version__ = "0.1.0"

from .baselines import BaselineConfig, run_baseline
from .core import YoConfig, metropolis_accept, run, sa_accept
from .objectives import (
    BudgetLedger,
    Objective,
    Phase,
    TspInstance,
    composite,
    generate_tsp,
    rastrigin,
    rosenbrock,
    sphere,
    tour_length,
    tsp_objective,
)
from .record import RunRecord
from .space import (
    Candidate,
    ContinuousBox,
    PermutationSpace,
    ProposalParams,
    canonical_tour,
    greedy_refine,
    mcmc_propose,
    random_candidate,
)

__all__ = [
    "BaselineConfig",
    "BudgetLedger",
    "Candidate",
    "ContinuousBox",
    "Objective",
    "PermutationSpace",
    "Phase",
    "ProposalParams",
    "RunRecord",
    "TspInstance",
    "YoConfig",
    "canonical_tour",
    "composite",
    "generate_tsp",
    "greedy_refine",
    "mcmc_propose",
    "metropolis_accept",
    "random_candidate",
    "rastrigin",
    "rosenbrock",
    "run",
    "run_baseline",
    "sa_accept",
    "sphere",
    "tour_length",
    "tsp_objective",
    "__version__",
]
