"""Reference optimizers: classical SA, a generational GA, 2-opt restart
(coordinate-descent restart on boxes), uniform random search, and an
accelerated particle swarm. All run through the same objective/ledger
contracts as the hybrid optimizer and emit the same RunRecord."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import metropolis_accept
from .errors import ConfigError, UnsupportedSpaceError
from .objectives import BudgetLedger, Objective, Phase
from .record import MonitoredObjective, RunMonitor, RunRecord
from .space import (
    Candidate,
    ContinuousBox,
    PermutationSpace,
    ProposalParams,
    greedy_refine,
    mcmc_propose,
    random_candidate,
)

ALGORITHMS = ("sa", "ga", "two_opt", "random", "apso")


@dataclass(frozen=True)
class BaselineConfig:
    algorithm: str
    budget: int
    seed: int = 0
    # SA
    t0: float | None = None
    beta: float | None = None  # None: 0.95 for budgets <= 1000, else 0.9995
    # GA
    population_size: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    tournament_size: int = 3
    # APSO
    swarm_size: int = 20
    attraction_beta: float = 0.5
    noise_alpha: float = 0.3
    noise_decay: float = 0.97
    # shared move parameters
    proposal: ProposalParams = field(default_factory=ProposalParams)
    refine_scale: float = 0.1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown baseline algorithm {self.algorithm!r}")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.t0 is not None and not self.t0 > 0:
            raise ConfigError("t0 must be > 0")
        if self.beta is not None and not 0.0 < self.beta <= 1.0:
            raise ConfigError("beta must be in (0, 1]")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.population_size < 2 or self.swarm_size < 2:
            raise ConfigError("population/swarm sizes must be >= 2")
        if self.tournament_size < 1:
            raise ConfigError("tournament_size must be >= 1")
        if not 0.0 < self.attraction_beta <= 1.0:
            raise ConfigError("attraction_beta must be in (0, 1]")
        if self.noise_alpha < 0:
            raise ConfigError("noise_alpha must be >= 0")
        if not 0.0 < self.noise_decay <= 1.0:
            raise ConfigError("noise_decay must be in (0, 1]")


def _setup(f: Objective, cfg: BaselineConfig):
    ledger = BudgetLedger(cfg.budget, 0.0)
    monitor = RunMonitor(track_values=False)
    mf = MonitoredObjective(f, monitor)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0,)))
    return ledger, monitor, mf, ledger.view(Phase.HYBRID), rng


def _finish(cfg: BaselineConfig, monitor: RunMonitor, ledger: BudgetLedger, start: float, extra: dict | None = None) -> RunRecord:
    echo = {
        "algorithm": cfg.algorithm,
        "budget": cfg.budget,
        "seed": cfg.seed,
    }
    if extra:
        echo.update(extra)
    best = monitor.best_position
    return RunRecord(
        best_position=[] if best is None else np.asarray(best).tolist(),
        best_value=monitor.best_value,
        trace=monitor.trace,
        evaluations_used=ledger.used,
        wall_time=time.perf_counter() - start,
        config_echo=echo,
        chain_events=[[]],
        chain_summary=[],
    )


# ---------------------------------------------------------------------------
# simulated annealing

def run_sa(f: Objective, cfg: BaselineConfig) -> RunRecord:
    """Single chain, symmetric proposals, Boltzmann acceptance, geometric
    cooling, no reheating, no refinement, no blacklist.

    When t0 is not given it is estimated from a small probe set of uniform
    samples (all charged); the chain starts from the best probe.
    """
    start = time.perf_counter()
    ledger, monitor, mf, budget, rng = _setup(f, cfg)
    beta = cfg.beta if cfg.beta is not None else (0.95 if cfg.budget <= 1000 else 0.9995)

    n_probes = 1 if cfg.t0 is not None else min(8, max(2, cfg.budget // 100))
    probes: list[Candidate] = []
    for _ in range(n_probes):
        if not budget.charge():
            break
        x = random_candidate(f.space, rng)
        probes.append(Candidate(x.position, mf.evaluate(x.position)))
    if not probes:
        return _finish(cfg, monitor, ledger, start, {"t0": cfg.t0, "beta": beta})
    current = min(probes, key=lambda c: c.value)
    values = [c.value for c in probes]
    t = cfg.t0 if cfg.t0 is not None else max(max(values) - min(values), 1.0)
    t0 = t

    while budget.charge():
        x = mcmc_propose(current, f.space, cfg.proposal, rng)
        v = mf.evaluate(x.position)
        if metropolis_accept(v, current.value, t, rng):
            current = Candidate(x.position, v)
        t = max(t * beta, 5e-324)

    return _finish(cfg, monitor, ledger, start, {"t0": t0, "beta": beta})


# ---------------------------------------------------------------------------
# genetic algorithm

def order_crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """OX: keep a slice from one parent, fill the rest in the other's order."""
    n = p1.size
    a, b = np.sort(rng.choice(n, size=2, replace=False))

    def make_child(keep: np.ndarray, other: np.ndarray) -> np.ndarray:
        child = np.full(n, -1, dtype=keep.dtype)
        child[a : b + 1] = keep[a : b + 1]
        used = set(int(c) for c in keep[a : b + 1])
        fill = [int(c) for c in other if int(c) not in used]
        slots = [i for i in range(n) if not (a <= i <= b)]
        for i, city in zip(slots, fill):
            child[i] = city
        return child

    return make_child(p1, p2), make_child(p2, p1)


def uniform_crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    mask = rng.random(p1.size) < 0.5
    return np.where(mask, p1, p2), np.where(mask, p2, p1)


def _mutate(pos: np.ndarray, space, cfg: BaselineConfig, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """Returns (position, mutated?)."""
    if isinstance(space, ContinuousBox):
        mask = rng.random(space.dim) < cfg.mutation_rate
        if not mask.any():
            return pos, False
        noise = rng.normal(0.0, cfg.proposal.step_scale * space.span)
        out = np.where(mask, np.clip(pos + noise, space.lower, space.upper), pos)
        return out, True
    if rng.random() >= cfg.mutation_rate:
        return pos, False
    i, j = np.sort(rng.choice(space.n_items, size=2, replace=False))
    out = pos.copy()
    out[i : j + 1] = out[i : j + 1][::-1]
    return out, True


def run_ga(f: Objective, cfg: BaselineConfig) -> RunRecord:
    """Generational GA: tournament selection, OX/uniform crossover, reversal/
    Gaussian mutation, elitism of one. Runs generations until the budget is
    exhausted; a generation that consumes no evaluations ends the run."""
    start = time.perf_counter()
    if cfg.population_size > cfg.budget:
        raise ConfigError("population_size cannot exceed the budget")
    ledger, monitor, mf, budget, rng = _setup(f, cfg)
    space = f.space

    population: list[Candidate] = []
    for _ in range(cfg.population_size):
        if not budget.charge():
            break
        x = random_candidate(space, rng)
        population.append(Candidate(x.position, mf.evaluate(x.position)))

    def tournament() -> Candidate:
        k = min(cfg.tournament_size, len(population))
        picks = rng.choice(len(population), size=k, replace=False)
        return min((population[i] for i in picks), key=lambda c: c.value)

    exhausted = not population
    while not exhausted and ledger.used < cfg.budget:
        elite = min(population, key=lambda c: c.value)
        children: list[Candidate] = [elite.copy()]
        evals_this_generation = 0
        while len(children) < cfg.population_size and not exhausted:
            pa, pb = tournament(), tournament()
            if rng.random() < cfg.crossover_rate:
                if isinstance(space, PermutationSpace):
                    c1, c2 = order_crossover(pa.position, pb.position, rng)
                else:
                    c1, c2 = uniform_crossover(pa.position, pb.position, rng)
                offspring = [(c1, pa, True), (c2, pb, True)]
            else:
                offspring = [(pa.position.copy(), pa, False), (pb.position.copy(), pb, False)]
            for pos, parent, crossed in offspring:
                if len(children) >= cfg.population_size:
                    break
                pos, mutated = _mutate(pos, space, cfg, rng)
                if not (crossed or mutated):
                    # untouched copy keeps its parent's cached value
                    children.append(Candidate(pos, parent.value))
                    continue
                if not budget.charge():
                    exhausted = True
                    break
                children.append(Candidate(pos, mf.evaluate(pos)))
                evals_this_generation += 1
        population = children
        if evals_this_generation == 0:
            break  # nothing new can ever be evaluated

    return _finish(
        cfg, monitor, ledger, start,
        {
            "population_size": cfg.population_size,
            "crossover_rate": cfg.crossover_rate,
            "mutation_rate": cfg.mutation_rate,
            "tournament_size": cfg.tournament_size,
        },
    )


# ---------------------------------------------------------------------------
# restart local search and random search

def run_two_opt_restart(f: Objective, cfg: BaselineConfig) -> RunRecord:
    """Random start, deterministic descent to a local optimum (2-opt on tours,
    coordinate descent on boxes), restart until the budget runs out."""
    start = time.perf_counter()
    ledger, monitor, mf, budget, rng = _setup(f, cfg)
    while ledger.used < cfg.budget:
        x = random_candidate(f.space, rng)
        refined = greedy_refine(x, mf, budget, max_probes=None, refine_scale=cfg.refine_scale)
        if refined.value is None:
            break
    return _finish(cfg, monitor, ledger, start, {"refine_scale": cfg.refine_scale})


def run_random_search(f: Objective, cfg: BaselineConfig) -> RunRecord:
    start = time.perf_counter()
    ledger, monitor, mf, budget, rng = _setup(f, cfg)
    while budget.charge():
        x = random_candidate(f.space, rng)
        mf.evaluate(x.position)
    return _finish(cfg, monitor, ledger, start)


# ---------------------------------------------------------------------------
# accelerated particle swarm

def run_apso(f: Objective, cfg: BaselineConfig) -> RunRecord:
    """Velocity-free swarm update toward the per-generation global best:

        x <- (1 - b) x + b g + alpha * range * eps,   eps ~ N(0, I)

    alpha decays geometrically each generation. Continuous spaces only."""
    start = time.perf_counter()
    if not isinstance(f.space, ContinuousBox):
        raise UnsupportedSpaceError("apso supports continuous spaces only")
    ledger, monitor, mf, budget, rng = _setup(f, cfg)
    space = f.space

    swarm: list[Candidate] = []
    for _ in range(cfg.swarm_size):
        if not budget.charge():
            break
        x = random_candidate(space, rng)
        swarm.append(Candidate(x.position, mf.evaluate(x.position)))
    if not swarm:
        return _finish(cfg, monitor, ledger, start)

    alpha = cfg.noise_alpha
    b = cfg.attraction_beta
    while ledger.used < cfg.budget:
        g = min(swarm, key=lambda c: c.value).position.copy()
        progressed = False
        for particle in swarm:
            noise = alpha * space.span * rng.normal(size=space.dim)
            pos = np.clip((1.0 - b) * particle.position + b * g + noise, space.lower, space.upper)
            if not budget.charge():
                progressed = True
                break
            particle.position = pos
            particle.value = mf.evaluate(pos)
            progressed = True
        alpha *= cfg.noise_decay
        if not progressed:
            break

    return _finish(
        cfg, monitor, ledger, start,
        {
            "swarm_size": cfg.swarm_size,
            "attraction_beta": cfg.attraction_beta,
            "noise_alpha": cfg.noise_alpha,
            "noise_decay": cfg.noise_decay,
        },
    )


_RUNNERS = {
    "sa": run_sa,
    "ga": run_ga,
    "two_opt": run_two_opt_restart,
    "random": run_random_search,
    "apso": run_apso,
}


def run_baseline(f: Objective, cfg: BaselineConfig) -> RunRecord:
    return _RUNNERS[cfg.algorithm](f, cfg)
