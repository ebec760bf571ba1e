"""The three-layer hybrid optimizer.

Phase 1 runs independent Metropolis chains at a fixed temperature for global
exploration (burn-in), spending floor(alpha * B) evaluations. The chain bests
are then ranked and the top-k seed Phase 2, where every iteration proposes a
move, optionally rejects it against the blacklist without spending budget,
refines it greedily, and applies simulated-annealing acceptance with geometric
cooling and reheating after sustained rejection. The best candidate across all
chains wins.

Budget mechanics: each phase pool is split into per-chain slices
(floor(pool / chains), remainder to the last chain) and a chain's
initialization evaluation comes out of its own burn-in slice, so sequential
and parallel execution make identical per-chain decisions. The per-evaluation
best-so-far trace, the dynamic poor-region threshold, and the blacklist are
the only cross-chain state.

Every component is independently switchable (disable_mcmc, disable_greedy,
disable_sa, blacklist_enabled, chains=1) to support ablation studies:

* disable_mcmc: burn-in becomes independent uniform sampling and Phase-2
  proposals are fresh uniform draws (no Markov structure);
* disable_greedy: the raw proposal is evaluated once, never refined;
* disable_sa: acceptance is strictly-improving only and cooling/reheating
  are off.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blacklist import Blacklist, make_blacklist
from .errors import ConfigError, ContractViolation
from .objectives import BudgetLedger, CappedBudget, Objective, Phase
from .record import Event, MonitoredObjective, RunMonitor, RunRecord
from .space import (
    Candidate,
    ContinuousBox,
    ProposalParams,
    greedy_refine,
    mcmc_propose,
    random_candidate,
)

# smallest positive double; cooling never drives the temperature to exactly 0
_T_FLOOR = 5e-324


@dataclass(frozen=True)
class YoConfig:
    """Hybrid optimizer configuration. t0=None and refine_max_probes=None
    auto-resolve at run time (initial value spread; 2D or n(n-1) probes)."""

    budget: int
    burn_in_fraction: float = 0.3
    chains: int = 4
    top_k: int = 2
    t0: float | None = None
    beta: float = 0.95
    gamma: float = 3.0
    theta_reheat: int = 20
    blacklist_enabled: bool = True
    blacklist_radius: float = 0.02
    blacklist_quantile: float = 0.9
    blacklist_capacity: int = 256
    blacklist_warmup: int = 20
    disable_mcmc: bool = False
    disable_greedy: bool = False
    disable_sa: bool = False
    seed: int = 0
    proposal: ProposalParams = field(default_factory=ProposalParams)
    refine_max_probes: int | None = None
    refine_scale: float = 0.1

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if not 0.0 < self.burn_in_fraction < 1.0:
            raise ConfigError("burn_in_fraction must be in (0, 1)")
        if self.chains < 1:
            raise ConfigError("chains must be >= 1")
        if self.budget < self.chains:
            raise ConfigError("budget must cover at least one evaluation per chain")
        if not 1 <= self.top_k <= self.chains:
            raise ConfigError("top_k must be in 1..chains")
        if self.t0 is not None and not self.t0 > 0:
            raise ConfigError("t0 must be > 0")
        if not 0.0 < self.beta < 1.0:
            raise ConfigError("beta must be in (0, 1)")
        if not self.gamma > 1.0:
            raise ConfigError("gamma must be > 1")
        if self.theta_reheat < 1:
            raise ConfigError("theta_reheat must be >= 1")
        if not self.blacklist_radius > 0:
            raise ConfigError("blacklist_radius must be > 0")
        if not 0.0 < self.blacklist_quantile < 1.0:
            raise ConfigError("blacklist_quantile must be in (0, 1)")
        if self.refine_max_probes is not None and self.refine_max_probes < 0:
            raise ConfigError("refine_max_probes must be >= 0")

    def resolve_refine_probes(self, space) -> int:
        if self.refine_max_probes is not None:
            return self.refine_max_probes
        if isinstance(space, ContinuousBox):
            return 2 * space.dim
        n = space.n_items
        return n * (n - 1)


@dataclass
class ChainState:
    """One chain: current point, best-so-far, annealing state, own RNG."""

    index: int
    rng: np.random.Generator
    current: Candidate | None = None
    best: Candidate | None = None
    temperature: float = 1.0
    stagnant: int = 0
    iteration: int = 0
    events: list[Event] = field(default_factory=list)
    burn_budget: CappedBudget | None = None
    hybrid_budget: CappedBudget | None = None
    iteration_cap: int = 1 << 30

    def observe_eval(self, position: np.ndarray, value: float) -> None:
        # best tracks every evaluation this chain performs, accepted or not
        if self.best is None or value < self.best.value:
            self.best = Candidate(np.array(position, copy=True), float(value))


def metropolis_accept(f_new: float, f_cur: float, t: float, rng: np.random.Generator) -> bool:
    """Accept downhill always, uphill with probability exp(-(f_new-f_cur)/t)."""
    if not t > 0:
        raise ContractViolation("temperature must be > 0")
    if f_new <= f_cur:
        return True
    return rng.random() < math.exp(-(f_new - f_cur) / t)


def sa_accept(
    f_new: float,
    f_cur: float,
    t: float,
    rng: np.random.Generator,
    greedy_only: bool = False,
) -> bool:
    """Annealing acceptance; greedy_only switches to strict improvement
    (the disable_sa ablation)."""
    if greedy_only:
        return f_new < f_cur
    return metropolis_accept(f_new, f_cur, t, rng)


def burn_in(chain: ChainState, f, cfg: YoConfig, t0: float) -> ChainState:
    """Phase 1 for one chain, spending the chain's burn-in slice.

    With disable_mcmc the phase degenerates to independent uniform sampling.
    The chain's best is updated on every evaluation via the objective hook.
    """
    if chain.current is None:
        return chain
    space = f.space
    while chain.burn_budget.remaining > 0:
        if cfg.disable_mcmc:
            x = random_candidate(space, chain.rng)
            if not chain.burn_budget.charge():
                break
            v = f.evaluate(x.position)
            if v < chain.current.value:
                chain.current = Candidate(x.position, v)
        else:
            x = mcmc_propose(chain.current, space, cfg.proposal, chain.rng)
            if not chain.burn_budget.charge():
                break
            v = f.evaluate(x.position)
            if metropolis_accept(v, chain.current.value, t0, chain.rng):
                chain.current = Candidate(x.position, v)
    return chain


def select_best(chains: list[ChainState], top_k: int, t0: float) -> list[ChainState]:
    """Rank chains by best value (ties by index) and seed Phase 2.

    The top_k chains restart from their own bests; the rest restart from
    copies of the top_k bests assigned round-robin in index order. All chains
    get temperature t0 and a cleared stagnation counter.
    """
    if not 1 <= top_k <= len(chains):
        raise ConfigError("top_k must be in 1..chains")
    ranked = sorted(
        chains,
        key=lambda ch: (ch.best.value if ch.best is not None else math.inf, ch.index),
    )
    selected = ranked[:top_k]
    selected_idx = {ch.index for ch in selected}
    others = [ch for ch in chains if ch.index not in selected_idx]
    for k, ch in enumerate(others):
        source = selected[k % top_k]
        if source.best is not None:
            ch.best = source.best.copy()
    for ch in chains:
        if ch.best is not None:
            ch.current = ch.best.copy()
        ch.temperature = t0
        ch.stagnant = 0
    return chains


def _cool(chain: ChainState, cfg: YoConfig) -> None:
    chain.temperature = max(chain.temperature * cfg.beta, _T_FLOOR)


def hybrid_step(
    chain: ChainState,
    f,
    cfg: YoConfig,
    bl: Blacklist | None = None,
    monitor: RunMonitor | None = None,
) -> bool:
    """One Phase-2 iteration for one chain; False means the chain is done.

    Order of operations: propose, blacklist membership check (skip charges
    nothing but still cools), greedy refinement, annealing acceptance, cooling,
    reheat on sustained rejection, poor-region insertion keyed on the refined
    point.
    """
    if chain.current is None or chain.hybrid_budget.remaining <= 0:
        return False
    if chain.iteration >= chain.iteration_cap:
        # safety net: blacklisted skips spend no budget, so a pathological
        # region set could otherwise loop forever
        return False
    it = chain.iteration
    chain.iteration += 1
    space = f.space

    if cfg.disable_mcmc:
        proposal = random_candidate(space, chain.rng)
    else:
        proposal = mcmc_propose(chain.current, space, cfg.proposal, chain.rng)

    if bl is not None and bl.contains(proposal):
        chain.events.append(Event("blacklist_skip", it))
        if not cfg.disable_sa:
            _cool(chain, cfg)
        return True

    if cfg.disable_greedy:
        if not chain.hybrid_budget.charge():
            return False
        refined = Candidate(proposal.position, f.evaluate(proposal.position))
    else:
        refined = greedy_refine(
            proposal,
            f,
            chain.hybrid_budget,
            max_probes=cfg.resolve_refine_probes(space),
            refine_scale=cfg.refine_scale,
        )
        if refined.value is None:
            return False

    if sa_accept(
        refined.value, chain.current.value, chain.temperature, chain.rng,
        greedy_only=cfg.disable_sa,
    ):
        chain.current = refined
        chain.stagnant = 0
        chain.events.append(Event("accept", it))
    else:
        chain.stagnant += 1
        chain.events.append(Event("reject", it))

    if not cfg.disable_sa:
        _cool(chain, cfg)
        if chain.stagnant > cfg.theta_reheat:
            old_t = chain.temperature
            chain.temperature *= cfg.gamma
            chain.stagnant = 0
            chain.events.append(Event("reheat", it, old_t=old_t, new_t=chain.temperature))

    if bl is not None and monitor is not None and monitor.is_poor(refined.value):
        bl.add_region(refined, cfg.blacklist_radius)
        chain.events.append(Event("blacklist_add", it))
    return True


def _split(total: int, parts: int) -> list[int]:
    base = total // parts
    caps = [base] * parts
    caps[-1] += total - base * parts
    return caps


def _chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chain_index,)))


def _config_echo(cfg: YoConfig, t0: float, refine_probes: int) -> dict:
    return {
        "algorithm": "yo",
        "budget": cfg.budget,
        "burn_in_fraction": cfg.burn_in_fraction,
        "chains": cfg.chains,
        "top_k": cfg.top_k,
        "t0": t0,
        "beta": cfg.beta,
        "gamma": cfg.gamma,
        "theta_reheat": cfg.theta_reheat,
        "blacklist_enabled": cfg.blacklist_enabled,
        "blacklist_radius": cfg.blacklist_radius,
        "blacklist_quantile": cfg.blacklist_quantile,
        "blacklist_capacity": cfg.blacklist_capacity,
        "blacklist_warmup": cfg.blacklist_warmup,
        "disable_mcmc": cfg.disable_mcmc,
        "disable_greedy": cfg.disable_greedy,
        "disable_sa": cfg.disable_sa,
        "seed": cfg.seed,
        "step_scale": cfg.proposal.step_scale,
        "move_mix": list(cfg.proposal.move_mix),
        "refine_max_probes": refine_probes,
        "refine_scale": cfg.refine_scale,
    }


def run(f: Objective, cfg: YoConfig, parallel: bool = False) -> RunRecord:
    """Full optimization run; deterministic for a fixed config in sequential
    mode, value-identical in parallel mode (per-chain RNG streams are derived
    from (seed, chain_index); only blacklist staleness can differ)."""
    start = time.perf_counter()
    ledger = BudgetLedger(cfg.budget, cfg.burn_in_fraction)
    monitor = RunMonitor(
        track_values=cfg.blacklist_enabled,
        quantile=cfg.blacklist_quantile,
        warmup=cfg.blacklist_warmup,
    )
    bl = make_blacklist(f.space, cfg.blacklist_capacity) if cfg.blacklist_enabled else None
    refine_probes = cfg.resolve_refine_probes(f.space)

    burn_caps = _split(ledger.burn_in_allocation, cfg.chains)
    hybrid_caps = _split(ledger.hybrid_allocation, cfg.chains)
    chains: list[ChainState] = []
    monitored: list[MonitoredObjective] = []
    for c in range(cfg.chains):
        ch = ChainState(index=c, rng=_chain_rng(cfg.seed, c))
        ch.burn_budget = CappedBudget(ledger, Phase.BURN_IN, burn_caps[c])
        ch.hybrid_budget = CappedBudget(ledger, Phase.HYBRID, hybrid_caps[c])
        ch.iteration_cap = 10 * (hybrid_caps[c] + 1) + 100
        chains.append(ch)
        monitored.append(MonitoredObjective(f, monitor, on_eval=ch.observe_eval))

    # initialization is sequential in every mode: it is cheap (one evaluation
    # per chain) and the auto temperature needs all initial values
    init_values = []
    for ch in chains:
        x = random_candidate(f.space, ch.rng)
        # a chain whose burn-in slice is empty still gets its starting point,
        # paid from the hybrid pool
        if ch.burn_budget.charge() or ch.hybrid_budget.charge():
            v = monitored[ch.index].evaluate(x.position)
            ch.current = Candidate(x.position, v)
            init_values.append(v)
    if cfg.t0 is not None:
        t0 = cfg.t0
    else:
        spread = (max(init_values) - min(init_values)) if init_values else 0.0
        t0 = max(spread, 1.0)
    for ch in chains:
        ch.temperature = t0

    if parallel and cfg.chains > 1:
        with ThreadPoolExecutor(max_workers=cfg.chains) as pool:
            list(pool.map(lambda ch: burn_in(ch, monitored[ch.index], cfg, t0), chains))
    else:
        for ch in chains:
            burn_in(ch, monitored[ch.index], cfg, t0)

    select_best(chains, cfg.top_k, t0)

    if parallel and cfg.chains > 1:
        def drive(ch: ChainState) -> None:
            while hybrid_step(ch, monitored[ch.index], cfg, bl, monitor):
                pass

        with ThreadPoolExecutor(max_workers=cfg.chains) as pool:
            list(pool.map(drive, chains))
    else:
        active = list(chains)
        while active:
            for ch in list(active):
                if not hybrid_step(ch, monitored[ch.index], cfg, bl, monitor):
                    active.remove(ch)

    best_pos = monitor.best_position
    return RunRecord(
        best_position=[] if best_pos is None else np.asarray(best_pos).tolist(),
        best_value=monitor.best_value,
        trace=monitor.trace,
        evaluations_used=ledger.used,
        wall_time=time.perf_counter() - start,
        config_echo=_config_echo(cfg, t0, refine_probes),
        chain_events=[ch.events for ch in chains],
        chain_summary=[
            {
                "chain": ch.index,
                "best_value": None if ch.best is None else ch.best.value,
                "final_temperature": ch.temperature,
                "iterations": ch.iteration,
            }
            for ch in chains
        ],
    )
