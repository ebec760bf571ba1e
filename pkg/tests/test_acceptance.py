"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The heavier experiment fixtures are module-scoped and shared.
"""
import dataclasses
import itertools
import math

import numpy as np
import pytest

from yopt.baselines import BaselineConfig, run_baseline
from yopt.core import YoConfig, metropolis_accept, run, sa_accept
from yopt.harness import (
    ExperimentSpec,
    run_ablation,
    run_continuous_comparison,
    run_one,
    run_tsp_suite,
)
from yopt.objectives import BudgetLedger, Phase, generate_tsp, tour_length, tsp_objective
from yopt.problems import make_problem
from yopt.stats import (
    cohens_d,
    cv_difference_lower_bound,
    mann_whitney_u,
    one_sided_p,
    summarize,
    welch_t_test,
)

from conftest import CountingObjective


def report(number, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {number:>2} {name}: {status}  {detail}")
    assert passed, f"criterion {number} ({name}) failed: {detail}"


def counted(problem):
    wrapped = CountingObjective(problem.objective)
    return dataclasses.replace(problem, objective=wrapped), wrapped


# ---------------------------------------------------------------------------
# shared experiment fixtures

@pytest.fixture(scope="module")
def ablation_result():
    spec = ExperimentSpec(
        name="ablation", problem="composite5d", budget=150, seeds=tuple(range(30)), parallel=4
    )
    return run_ablation(spec)


@pytest.fixture(scope="module")
def tsp50_result():
    spec = ExperimentSpec(
        name="tsp50",
        problem="tsp",
        budget=20000,
        seeds=(42, 101, 202),
        tsp_n=50,
        parallel=4,
        algorithms=("yo", "two_opt", "sa", "ga"),
    )
    return run_tsp_suite(spec)


@pytest.fixture(scope="module")
def continuous_result():
    spec = ExperimentSpec(
        name="continuous", problem="rosenbrock5d", budget=150, seeds=tuple(range(30)), parallel=4
    )
    return run_continuous_comparison(spec)


# ---------------------------------------------------------------------------

def test_c01_budget_conservation():
    """Counting wrapper equals the ledger count; never exceeds budget."""
    failures = []
    for algorithm in ("yo", "sa", "ga", "two_opt", "random", "apso"):
        problem, counter = counted(make_problem("rosenbrock5d"))
        record = run_one(problem, algorithm, 150, seed=1)
        if not (counter.count == record.evaluations_used <= 150):
            failures.append((algorithm, "rosenbrock5d", counter.count, record.evaluations_used))
    for algorithm in ("yo", "sa", "ga", "two_opt", "random"):
        problem, counter = counted(make_problem("tsp", tsp_n=30, seed=7))
        record = run_one(problem, algorithm, 20000, seed=7)
        if not (counter.count == record.evaluations_used <= 20000):
            failures.append((algorithm, "tsp30", counter.count, record.evaluations_used))
    report(1, "budget-conservation", not failures, f"failures={failures or 'none'}")


def test_c02_determinism():
    """Identical config gives byte-identical run-record JSON (timing excluded:
    wall-clock is measurement metadata, see decisions ledger)."""
    failures = []
    cases = [("rosenbrock5d", None, ("yo", "sa", "ga", "two_opt", "random", "apso")),
             ("tsp", 15, ("yo", "sa", "ga", "two_opt", "random"))]
    for problem_name, n, algorithms in cases:
        for algorithm in algorithms:
            problem = make_problem(problem_name, tsp_n=n, seed=11)
            a = run_one(problem, algorithm, 500, seed=11).to_json(timing=False)
            b = run_one(problem, algorithm, 500, seed=11).to_json(timing=False)
            if a != b:
                failures.append((problem_name, algorithm))
    report(2, "determinism", not failures, f"failures={failures or 'none'}")


def test_c03_acceptance_law():
    """Empirical acceptance frequencies match exp(-delta/T) within 3 binomial
    sigma on a 4x4 grid, 1e5 trials per cell."""
    deltas = (0.25, 0.5, 1.0, 2.0)
    temps = (0.5, 1.0, 2.0, 4.0)
    n = 100_000
    worst = 0.0
    failures = []
    rng = np.random.default_rng(20240817)
    for i, (delta, temp) in enumerate(itertools.product(deltas, temps)):
        accept = sa_accept if i % 2 else metropolis_accept
        hits = sum(accept(1.0 + delta, 1.0, temp, rng) for _ in range(n))
        p = math.exp(-delta / temp)
        sigma = math.sqrt(p * (1 - p) / n)
        deviation = abs(hits / n - p) / sigma
        worst = max(worst, deviation)
        if deviation > 3.0:
            failures.append((delta, temp, deviation))
    report(3, "acceptance-law", not failures, f"worst deviation {worst:.2f} sigma")


def test_c04_temperature_ledger():
    """Replaying each chain's event log reproduces its live temperature to
    1e-9 relative error."""
    problem = make_problem("rosenbrock5d")
    worst = 0.0
    for seed in range(5):
        cfg = YoConfig(
            budget=300,
            chains=3,
            seed=seed,
            beta=0.85 + 0.03 * seed,
            gamma=1.5 + 0.5 * seed,
            theta_reheat=3 + seed,
        )
        record = run(problem.objective, cfg)
        t0 = record.config_echo["t0"]
        for idx, events in enumerate(record.chain_events):
            t = t0
            for e in events:
                if e.type in ("accept", "reject", "blacklist_skip"):
                    t = max(t * cfg.beta, 5e-324)
                elif e.type == "reheat":
                    t *= cfg.gamma
            live = record.chain_summary[idx]["final_temperature"]
            rel = abs(t - live) / max(abs(t), abs(live), 1e-300)
            worst = max(worst, rel)
    report(4, "temperature-ledger", worst <= 1e-9, f"worst relative error {worst:.2e}")


def brute_force_optimum(inst):
    best = math.inf
    for perm in itertools.permutations(range(1, inst.n)):
        if perm[0] > perm[-1]:
            continue  # skip reflections
        best = min(best, tour_length(inst, np.array((0,) + perm)))
    return best


def test_c05_small_tsp_oracle():
    """2-opt restart and the hybrid optimizer both hit the exhaustive optimum
    on >= 19/20 random instances with n in 5..8 at budget 1e4."""
    rng = np.random.default_rng(2024)
    two_opt_hits = yo_hits = 0
    for k in range(20):
        n = int(rng.integers(5, 9))
        inst = generate_tsp(n, int(rng.integers(0, 10**6)))
        optimum = brute_force_optimum(inst)
        f = tsp_objective(inst)
        r1 = run_baseline(f, BaselineConfig(algorithm="two_opt", budget=10_000, seed=k))
        r2 = run(f, YoConfig(budget=10_000, seed=k))
        two_opt_hits += abs(r1.best_value - optimum) < 1e-9
        yo_hits += abs(r2.best_value - optimum) < 1e-9
    report(
        5, "small-tsp-oracle",
        two_opt_hits >= 19 and yo_hits >= 19,
        f"two_opt {two_opt_hits}/20, yo {yo_hits}/20",
    )


def test_c06_tsp_directional_echo(tsp50_result):
    """N=50, budget 20000, seeds 42/101/202: hybrid within 5% of 2-opt
    restart, below SA and GA."""
    means = {row.variant: row.mean for row in tsp50_result.table}
    band = abs(means["yo"] - means["two_opt"]) / means["two_opt"]
    ok = band <= 0.05 and means["yo"] < means["sa"] and means["yo"] < means["ga"]
    report(
        6, "tsp-echo", ok,
        f"yo={means['yo']:.1f} two_opt={means['two_opt']:.1f} (band {band*100:.1f}%) "
        f"sa={means['sa']:.1f} ga={means['ga']:.1f}",
    )


def test_c07_ablation_echoes(ablation_result):
    """Composite 5D, budget 150, 30 runs: full configuration beats the
    no-exploration and no-refinement variants (one-sided Welch p < 0.1); the
    single chain is less stable (CV bootstrap at 90%); disabling the blacklist
    changes nothing significant."""
    values = {v.name: v.final_values() for v in ablation_result.variants}
    a0 = values["A0_full"]
    p_a1 = one_sided_p(welch_t_test(values["A1_no_mcmc"], a0), "greater")
    p_a2 = one_sided_p(welch_t_test(values["A2_no_greedy"], a0), "greater")
    cv_lb = cv_difference_lower_bound(values["A5_single_chain"], a0, confidence=0.9, seed=0)
    a4 = values["A4_no_blacklist"]
    p_a4 = 1.0 if a4 == a0 else welch_t_test(a4, a0).p_value
    ok = p_a1 < 0.1 and p_a2 < 0.1 and cv_lb > 0 and p_a4 > 0.05
    report(
        7, "ablation-echoes", ok,
        f"p(A1>A0)={p_a1:.4f} p(A2>A0)={p_a2:.4f} cv_lb={cv_lb:+.3f} p(A4 vs A0)={p_a4:.2f}",
    )


def test_c08_rosenbrock_echo(continuous_result):
    """Budget 150, 30 seeds: hybrid beats random search (one-sided
    Mann-Whitney p < 0.05) and its best-of-30 is below 500."""
    values = {v.name: v.final_values() for v in continuous_result.variants}
    yo, rnd = values["yo"], values["random"]
    _, p = mann_whitney_u(yo, rnd, alternative="less")
    best = min(yo)
    ok = p < 0.05 and best < 500.0
    report(
        8, "rosenbrock-echo", ok,
        f"MW p={p:.2e}, best-of-30={best:.1f}, medians yo={np.median(yo):.0f} "
        f"random={np.median(rnd):.0f}",
    )


def test_c09_stats_oracle():
    """Frozen-reference agreement at 1e-8 plus the exact synthetic effect
    size."""
    import json
    from pathlib import Path

    fixtures = json.loads(
        (Path(__file__).parent / "data" / "stats_reference.json").read_text()
    )
    worst = 0.0
    for case in fixtures["cases"]:
        result = welch_t_test(case["a"], case["b"])
        for mine, ref in (
            (result.p_value, case["welch"]["p"]),
            (result.dof, case["welch"]["dof"]),
            (result.t_stat, case["welch"]["t"]),
            (cohens_d(case["a"], case["b"]), case["cohens_d"]),
            (summarize(case["a"]).std, case["summary_a"]["std"]),
            (summarize(case["b"]).median, case["summary_b"]["median"]),
        ):
            err = abs(mine - ref) / max(abs(ref), 1e-12)
            worst = max(worst, err)
    b = [0.0, math.sqrt(2.0)]
    a = [v + 1.0 for v in b]
    d_err = abs(cohens_d(a, b) - 1.0)
    report(
        9, "stats-oracle",
        worst <= 1e-8 and d_err <= 1e-9,
        f"worst fixture error {worst:.2e}, synthetic d error {d_err:.2e}",
    )


def test_c10_blacklist_correctness():
    """Membership costs zero evaluations; FIFO eviction and canonical-orbit
    membership hold over 1e3 randomized cases."""
    from yopt.blacklist import make_blacklist
    from yopt.space import Candidate, ContinuousBox, PermutationSpace, canonical_tour

    rng = np.random.default_rng(5)
    ledger = BudgetLedger(10**6, 0.0)

    # membership never charges
    space = ContinuousBox(np.zeros(4), np.ones(4))
    bl = make_blacklist(space)
    bl.add_region(np.full(4, 0.5), 0.1)
    for _ in range(1000):
        bl.contains(rng.uniform(0, 1, 4))
    no_charges = ledger.used == 0

    # FIFO eviction over randomized capacities
    fifo_ok = True
    for _ in range(200):
        cap = int(rng.integers(1, 8))
        bl = make_blacklist(space, max_regions=cap)
        points = [rng.uniform(0.05, 0.95, 4) for _ in range(cap + 3)]
        for p in points:
            bl.add_region(p, 1e-6)
        alive = points[-cap:]
        dead = points[:-cap]
        fifo_ok &= all(bl.contains(p) for p in alive)
        fifo_ok &= not any(bl.contains(p) for p in dead)

    # canonical-orbit membership over randomized tours
    orbit_ok = True
    pspace = PermutationSpace(9)
    for _ in range(800):
        bl = make_blacklist(pspace, max_regions=16)
        tour = rng.permutation(9)
        bl.add_region(Candidate(tour))
        k = int(rng.integers(9))
        rotated = np.roll(tour, k)
        probe = rotated[::-1] if rng.random() < 0.5 else rotated
        orbit_ok &= bl.contains(probe)
        orbit_ok &= canonical_tour(probe).tolist() == canonical_tour(tour).tolist()

    ok = no_charges and fifo_ok and orbit_ok
    report(
        10, "blacklist-correctness", ok,
        f"no_charges={no_charges} fifo={fifo_ok} orbit={orbit_ok}",
    )
