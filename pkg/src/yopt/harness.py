"""Experiment definitions, execution, tables, and result persistence.

Three studies are reproduced at configurable scale:

* ablation on the composite 5D function (six variants, identical seeds);
* the TSP suite (hybrid optimizer + four baselines, one shared instance per
  seed);
* the continuous comparison on Rosenbrock 5D (hybrid, APSO, random search,
  plus externally supplied result rows), with pairwise tests against the
  best-ranked method.

Every table number is recomputed from the raw run records; persistence writes
the records themselves next to the summaries so nothing exists without raw
provenance on disk.
"""
from __future__ import annotations

import csv
import dataclasses
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .baselines import ALGORITHMS, BaselineConfig, run_baseline
from .core import YoConfig, run as run_yo
from .errors import ConfigError, DegenerateInputError, IngestionError
from .objectives import TspInstance, save_tsp_csv
from .problems import Problem, make_problem
from .record import RunRecord, canonical_json, trace_csv_from_dict
from .space import ProposalParams
from .stats import summarize, welch_t_test

ABLATION_VARIANTS: dict[str, dict] = {
    "A0_full": {},
    "A1_no_mcmc": {"disable_mcmc": True},
    "A2_no_greedy": {"disable_greedy": True},
    "A3_no_sa": {"disable_sa": True},
    "A4_no_blacklist": {"blacklist_enabled": False},
    "A5_single_chain": {"chains": 1, "top_k": 1},
}

TSP_ALGORITHMS = ("yo", "two_opt", "sa", "ga", "random")
CONTINUOUS_ALGORITHMS = ("yo", "apso", "random")

# Tour budgets are dominated by refinement probes, so the TSP study runs the
# hybrid optimizer with fewer, hotter chains and gentler (insertion-heavy)
# kicks than the continuous default; explicit user overrides win.
TSP_YO_DEFAULTS: dict = {
    "chains": 2,
    "top_k": 2,
    "burn_in_fraction": 0.03,
    "t0": 30.0,
    "move_mix": (0.2, 0.2, 0.6),
}

# At a 150-evaluation budget each chain must complete its descent for the
# multi-chain portfolio to pay off, so the ablation baseline runs two chains
# with a deeper per-iteration probe cap.
ABLATION_YO_DEFAULTS: dict = {
    "chains": 2,
    "top_k": 2,
    "refine_max_probes": 20,
}

# Blend dominated by the oscillatory term: dense equal-barrier local minima
# over a shallow bowl, the landscape the ablation study is built around.
ABLATION_WEIGHTS = (1.0, 0.01, 0.1, 1.0)

_PROPOSAL_KEYS = ("step_scale", "move_mix")


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a problem, optimizer variants, seeds, and a budget.

    seeds is the source of truth for the number of runs per variant; every
    variant runs the identical seed list.
    """

    name: str
    problem: str
    budget: int
    seeds: tuple[int, ...]
    tsp_n: int | None = None
    delay: float = 0.0
    parallel: int = 1
    algorithms: tuple[str, ...] | None = None
    yo_overrides: dict = field(default_factory=dict)
    variant_overrides: dict[str, dict] = field(default_factory=dict)
    composite_weights: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("experiment needs at least one seed")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")


@dataclass
class RunEntry:
    seed: int
    final_best: float
    record: RunRecord | None  # None for externally supplied results

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "final_best": self.final_best,
            "record": None if self.record is None else self.record.to_dict(),
        }


@dataclass
class VariantResult:
    name: str
    algorithm: str
    runs: list[RunEntry]

    def final_values(self) -> list[float]:
        return [r.final_best for r in self.runs]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "algorithm": self.algorithm,
            "runs": [r.to_dict() for r in self.runs],
        }


@dataclass
class TableRow:
    variant: str
    n: int
    mean: float
    std: float
    cv: float | None
    min: float
    median: float
    runtime_mean: float | None
    p_value_vs_baseline: float | None
    cohens_d_vs_baseline: float | None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ExperimentResult:
    name: str
    problem: str
    budget: int
    reference: str
    variants: list[VariantResult]
    table: list[TableRow]
    tsp_n: int | None = None
    instances: dict[int, list] | None = None  # seed -> [[x, y], ...]

    def variant(self, name: str) -> VariantResult:
        for v in self.variants:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "problem": self.problem,
            "budget": self.budget,
            "tsp_n": self.tsp_n,
            "reference": self.reference,
            "variants": [v.to_dict() for v in self.variants],
            "table": [row.to_dict() for row in self.table],
            "instances": None
            if self.instances is None
            else {str(seed): coords for seed, coords in self.instances.items()},
        }


# ---------------------------------------------------------------------------
# optimizer construction

def _split_proposal(overrides: dict) -> tuple[dict, dict]:
    rest = dict(overrides)
    proposal = {k: rest.pop(k) for k in _PROPOSAL_KEYS if k in rest}
    if "move_mix" in proposal:
        proposal["move_mix"] = tuple(proposal["move_mix"])
    return proposal, rest


def yo_config(budget: int, seed: int, overrides: dict | None = None) -> YoConfig:
    proposal_kwargs, rest = _split_proposal(overrides or {})
    known = {f.name for f in dataclasses.fields(YoConfig)}
    unknown = set(rest) - known
    if unknown:
        raise ConfigError(f"unknown yo config overrides: {sorted(unknown)}")
    proposal = ProposalParams(**proposal_kwargs) if proposal_kwargs else ProposalParams()
    return YoConfig(budget=budget, seed=seed, proposal=proposal, **rest)


def baseline_config(algorithm: str, budget: int, seed: int, overrides: dict | None = None) -> BaselineConfig:
    proposal_kwargs, rest = _split_proposal(overrides or {})
    known = {f.name for f in dataclasses.fields(BaselineConfig)}
    unknown = set(rest) - known
    if unknown:
        raise ConfigError(f"unknown {algorithm} config overrides: {sorted(unknown)}")
    proposal = ProposalParams(**proposal_kwargs) if proposal_kwargs else ProposalParams()
    return BaselineConfig(algorithm=algorithm, budget=budget, seed=seed, proposal=proposal, **rest)


def run_one(
    problem: Problem,
    algorithm: str,
    budget: int,
    seed: int,
    overrides: dict | None = None,
    parallel_chains: bool = False,
) -> RunRecord:
    """One optimizer run on one problem."""
    if algorithm == "yo":
        return run_yo(problem.objective, yo_config(budget, seed, overrides), parallel=parallel_chains)
    if algorithm in ALGORITHMS:
        return run_baseline(problem.objective, baseline_config(algorithm, budget, seed, overrides))
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def _run_jobs(jobs: list[tuple[tuple, callable]], parallel: int) -> dict:
    if parallel <= 1:
        return {key: fn() for key, fn in jobs}
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        futures = [(key, pool.submit(fn)) for key, fn in jobs]
        return {key: fut.result() for key, fut in futures}


# ---------------------------------------------------------------------------
# tables

def build_table(variants: list[VariantResult], reference: str) -> list[TableRow]:
    ref_values = None
    for v in variants:
        if v.name == reference:
            ref_values = v.final_values()
    rows = []
    for v in variants:
        values = v.final_values()
        s = summarize(values)
        runtimes = [r.record.wall_time for r in v.runs if r.record is not None]
        p_value = d = None
        if v.name != reference and ref_values is not None and len(values) >= 2 and len(ref_values) >= 2:
            try:
                test = welch_t_test(ref_values, values)
                p_value, d = test.p_value, test.cohens_d
            except DegenerateInputError:
                pass
        rows.append(
            TableRow(
                variant=v.name,
                n=s.n,
                mean=s.mean,
                std=s.std,
                cv=s.cv,
                min=s.min,
                median=s.median,
                runtime_mean=(sum(runtimes) / len(runtimes)) if runtimes else None,
                p_value_vs_baseline=p_value,
                cohens_d_vs_baseline=d,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# the three studies

def run_ablation(spec: ExperimentSpec) -> ExperimentResult:
    """Six component-ablation variants with identical budgets and seeds."""
    if spec.problem != "composite5d":
        raise ConfigError("ablation runs on the composite5d problem")
    weights = spec.composite_weights or ABLATION_WEIGHTS
    problem = make_problem("composite5d", delay=spec.delay, weights=weights)
    jobs = []
    for variant_name, toggles in ABLATION_VARIANTS.items():
        # the variant's component toggles define the experiment and must
        # survive any shared optimizer overrides
        overrides = {
            **ABLATION_YO_DEFAULTS,
            **spec.yo_overrides,
            **spec.variant_overrides.get(variant_name, {}),
            **toggles,
        }
        for seed in spec.seeds:
            jobs.append(
                (
                    (variant_name, seed),
                    (lambda o=overrides, s=seed: run_one(problem, "yo", spec.budget, s, o)),
                )
            )
    records = _run_jobs(jobs, spec.parallel)
    variants = [
        VariantResult(
            name=variant_name,
            algorithm="yo",
            runs=[
                RunEntry(seed, records[(variant_name, seed)].best_value, records[(variant_name, seed)])
                for seed in spec.seeds
            ],
        )
        for variant_name in ABLATION_VARIANTS
    ]
    return ExperimentResult(
        name=spec.name,
        problem=spec.problem,
        budget=spec.budget,
        reference="A0_full",
        variants=variants,
        table=build_table(variants, "A0_full"),
    )


def run_tsp_suite(spec: ExperimentSpec) -> ExperimentResult:
    """Hybrid optimizer plus the four classical baselines on shared instances.

    For each seed, the same (n, seed) instance is handed to every algorithm;
    the seed also seeds the optimizer.
    """
    if spec.problem != "tsp" or spec.tsp_n is None:
        raise ConfigError("tsp suite needs problem='tsp' and tsp_n")
    algorithms = spec.algorithms or TSP_ALGORITHMS
    problems = {seed: make_problem("tsp", tsp_n=spec.tsp_n, seed=seed, delay=spec.delay) for seed in spec.seeds}
    jobs = []
    for algorithm in algorithms:
        if algorithm == "yo":
            overrides = {**TSP_YO_DEFAULTS, **spec.yo_overrides}
        else:
            overrides = spec.variant_overrides.get(algorithm, {})
        for seed in spec.seeds:
            jobs.append(
                (
                    (algorithm, seed),
                    (
                        lambda a=algorithm, s=seed, o=overrides: run_one(
                            problems[s], a, spec.budget, s, o
                        )
                    ),
                )
            )
    records = _run_jobs(jobs, spec.parallel)
    variants = [
        VariantResult(
            name=algorithm,
            algorithm=algorithm,
            runs=[
                RunEntry(seed, records[(algorithm, seed)].best_value, records[(algorithm, seed)])
                for seed in spec.seeds
            ],
        )
        for algorithm in algorithms
    ]
    reference = "yo" if "yo" in algorithms else algorithms[0]
    return ExperimentResult(
        name=spec.name,
        problem=spec.problem,
        budget=spec.budget,
        reference=reference,
        variants=variants,
        table=build_table(variants, reference),
        tsp_n=spec.tsp_n,
        instances={seed: problems[seed].tsp_instance.coords.tolist() for seed in spec.seeds},
    )


def run_continuous_comparison(
    spec: ExperimentSpec,
    external: dict[str, list[tuple[int, float]]] | None = None,
) -> ExperimentResult:
    """Rosenbrock 5D comparison; external result rows join the ranking and
    the pairwise tests against the best-ranked method."""
    if spec.problem != "rosenbrock5d":
        raise ConfigError("continuous comparison runs on rosenbrock5d")
    algorithms = spec.algorithms or CONTINUOUS_ALGORITHMS
    problem = make_problem("rosenbrock5d", delay=spec.delay)
    jobs = []
    for algorithm in algorithms:
        overrides = spec.yo_overrides if algorithm == "yo" else spec.variant_overrides.get(algorithm, {})
        for seed in spec.seeds:
            jobs.append(
                (
                    (algorithm, seed),
                    (lambda a=algorithm, s=seed, o=overrides: run_one(problem, a, spec.budget, s, o)),
                )
            )
    records = _run_jobs(jobs, spec.parallel)
    variants = [
        VariantResult(
            name=algorithm,
            algorithm=algorithm,
            runs=[
                RunEntry(seed, records[(algorithm, seed)].best_value, records[(algorithm, seed)])
                for seed in spec.seeds
            ],
        )
        for algorithm in algorithms
    ]
    for name, rows in (external or {}).items():
        variants.append(
            VariantResult(
                name=name,
                algorithm="external",
                runs=[RunEntry(seed, value, None) for seed, value in rows],
            )
        )
    # rank against the best mean, as the comparison tables do
    reference = min(variants, key=lambda v: summarize(v.final_values()).mean).name
    return ExperimentResult(
        name=spec.name,
        problem=spec.problem,
        budget=spec.budget,
        reference=reference,
        variants=variants,
        table=build_table(variants, reference),
    )


# ---------------------------------------------------------------------------
# external results ingestion

def ingest_external_csv(path: str | Path) -> dict[str, list[tuple[int, float]]]:
    """Read externally computed results (header: algorithm,seed,final_best)."""
    out: dict[str, list[tuple[int, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["algorithm", "seed", "final_best"]:
            raise IngestionError(f"{path}: expected header 'algorithm,seed,final_best'")
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise IngestionError(f"{path}: row {i}: expected 3 fields, got {len(row)}")
            name, seed_s, value_s = row
            if not name:
                raise IngestionError(f"{path}: row {i}: empty algorithm name")
            try:
                seed = int(seed_s)
                value = float(value_s)
            except ValueError as exc:
                raise IngestionError(f"{path}: row {i}: {exc}") from None
            out.setdefault(name, []).append((seed, value))
    return out


# ---------------------------------------------------------------------------
# persistence (operates on result dicts so the CLI can persist service payloads)

_TABLE_COLUMNS = (
    "variant",
    "n",
    "mean",
    "std",
    "cv",
    "min",
    "median",
    "runtime_mean",
    "p_value_vs_baseline",
    "cohens_d_vs_baseline",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def summary_csv(result: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_TABLE_COLUMNS)
    for row in result["table"]:
        writer.writerow([_fmt(row[c]) for c in _TABLE_COLUMNS])
    return buf.getvalue()


def raw_values_csv(result: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["variant", "seed", "final_best"])
    for variant in result["variants"]:
        for entry in variant["runs"]:
            writer.writerow([variant["name"], entry["seed"], _fmt(float(entry["final_best"]))])
    return buf.getvalue()


def detail_csv(result: dict) -> str:
    """Per-seed detail rows (final value and wall time per variant)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seed", "variant", "final_best", "wall_time_s"])
    for variant in result["variants"]:
        for entry in variant["runs"]:
            record = entry["record"]
            wall = None if record is None else record.get("wall_time_ms", 0.0) / 1000.0
            writer.writerow(
                [entry["seed"], variant["name"], _fmt(float(entry["final_best"])), _fmt(wall)]
            )
    return buf.getvalue()


def write_experiment_outputs(result: dict, out_dir: str | Path) -> Path:
    """Persist one experiment payload under out_dir/<experiment-name>/."""
    base = Path(out_dir) / result["name"]
    base.mkdir(parents=True, exist_ok=True)
    for variant in result["variants"]:
        vdir = base / variant["name"]
        vdir.mkdir(parents=True, exist_ok=True)
        for entry in variant["runs"]:
            record = entry["record"]
            if record is None:
                continue
            seed = entry["seed"]
            (vdir / f"seed{seed}.json").write_text(canonical_json(record, indent=2) + "\n")
            (vdir / f"seed{seed}_trace.csv").write_text(trace_csv_from_dict(record))
            if result["problem"] == "tsp":
                tour_lines = ["city"] + [str(int(c)) for c in record["best_position"]]
                (vdir / f"seed{seed}_tour.csv").write_text("\n".join(tour_lines) + "\n")
    (base / "summary.csv").write_text(summary_csv(result))
    (base / "raw_values.csv").write_text(raw_values_csv(result))
    if result["problem"] == "tsp":
        (base / "detail.csv").write_text(detail_csv(result))
    if result.get("instances"):
        for seed, coords in result["instances"].items():
            save_tsp_csv(TspInstance(coords), base / f"instance_seed{seed}.csv")
    return base


def write_single_output(record: dict, problem: str, algorithm: str, seed: int, out_dir: str | Path) -> Path:
    base = Path(out_dir) / "single" / algorithm
    base.mkdir(parents=True, exist_ok=True)
    (base / f"seed{seed}.json").write_text(canonical_json(record, indent=2) + "\n")
    (base / f"seed{seed}_trace.csv").write_text(trace_csv_from_dict(record))
    if problem == "tsp":
        tour_lines = ["city"] + [str(int(c)) for c in record["best_position"]]
        (base / f"seed{seed}_tour.csv").write_text("\n".join(tour_lines) + "\n")
    return base
