"""HTTP service wrapping the optimizer and the experiment harness.

Endpoints are synchronous compute: the caller gets the full result payload
(run records, tables, instances) and persists it wherever it likes; the
service itself never touches the filesystem. The CLI is the standard client.
"""
from __future__ import annotations

from typing import Any, Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import YoptError
from .harness import (
    ExperimentSpec,
    run_ablation,
    run_continuous_comparison,
    run_one,
    run_tsp_suite,
)
from .objectives import generate_tsp
from .problems import make_problem

ProblemName = Literal["composite5d", "rosenbrock5d", "tsp"]
AlgorithmName = Literal["yo", "sa", "ga", "two_opt", "random", "apso"]


class RunRequest(BaseModel):
    problem: ProblemName
    algorithm: AlgorithmName = "yo"
    seed: int = 0
    budget: int = Field(150, ge=1)
    tsp_n: int | None = Field(None, ge=3)
    delay: float = Field(0.0, ge=0.0)
    overrides: dict[str, Any] = Field(default_factory=dict)
    parallel_chains: bool = False


class AblationRequest(BaseModel):
    budget: int = Field(150, ge=1)
    seeds: list[int] | None = None
    runs: int = Field(30, ge=1)
    base_seed: int = 0
    delay: float = Field(0.0, ge=0.0)
    parallel: int = Field(1, ge=1)
    weights: tuple[float, float, float, float] | None = None
    overrides: dict[str, Any] = Field(default_factory=dict)
    variant_overrides: dict[str, dict[str, Any]] = Field(default_factory=dict)

    def seed_list(self) -> tuple[int, ...]:
        if self.seeds:
            return tuple(self.seeds)
        return tuple(range(self.base_seed, self.base_seed + self.runs))


class TspSuiteRequest(BaseModel):
    n: int = Field(50, ge=3)
    seeds: list[int] = Field(default_factory=lambda: [42, 101, 202])
    budget: int = Field(2000, ge=1)
    delay: float = Field(0.0, ge=0.0)
    parallel: int = Field(1, ge=1)
    algorithms: list[AlgorithmName] | None = None
    overrides: dict[str, Any] = Field(default_factory=dict)
    variant_overrides: dict[str, dict[str, Any]] = Field(default_factory=dict)


class ExternalRow(BaseModel):
    algorithm: str
    seed: int
    final_best: float


class ContinuousRequest(BaseModel):
    budget: int = Field(150, ge=1)
    seeds: list[int] | None = None
    runs: int = Field(30, ge=1)
    base_seed: int = 0
    delay: float = Field(0.0, ge=0.0)
    parallel: int = Field(1, ge=1)
    algorithms: list[AlgorithmName] | None = None
    overrides: dict[str, Any] = Field(default_factory=dict)
    variant_overrides: dict[str, dict[str, Any]] = Field(default_factory=dict)
    external: list[ExternalRow] = Field(default_factory=list)

    def seed_list(self) -> tuple[int, ...]:
        if self.seeds:
            return tuple(self.seeds)
        return tuple(range(self.base_seed, self.base_seed + self.runs))


app = FastAPI(title="yopt", version=__version__)


@app.exception_handler(YoptError)
async def _domain_error(request: Request, exc: YoptError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/run")
def run_endpoint(req: RunRequest) -> dict:
    problem = make_problem(req.problem, tsp_n=req.tsp_n, seed=req.seed, delay=req.delay)
    record = run_one(
        problem,
        req.algorithm,
        req.budget,
        req.seed,
        req.overrides,
        parallel_chains=req.parallel_chains,
    )
    return {
        "problem": req.problem,
        "algorithm": req.algorithm,
        "seed": req.seed,
        "record": record.to_dict(),
    }


@app.post("/experiments/ablation")
def ablation_endpoint(req: AblationRequest) -> dict:
    spec = ExperimentSpec(
        name="ablation",
        problem="composite5d",
        budget=req.budget,
        seeds=req.seed_list(),
        delay=req.delay,
        parallel=req.parallel,
        yo_overrides=req.overrides,
        variant_overrides=req.variant_overrides,
        composite_weights=req.weights,
    )
    return run_ablation(spec).to_dict()


@app.post("/experiments/tsp")
def tsp_endpoint(req: TspSuiteRequest) -> dict:
    spec = ExperimentSpec(
        name=f"tsp{req.n}",
        problem="tsp",
        budget=req.budget,
        seeds=tuple(req.seeds),
        tsp_n=req.n,
        delay=req.delay,
        parallel=req.parallel,
        algorithms=None if req.algorithms is None else tuple(req.algorithms),
        yo_overrides=req.overrides,
        variant_overrides=req.variant_overrides,
    )
    return run_tsp_suite(spec).to_dict()


@app.post("/experiments/continuous")
def continuous_endpoint(req: ContinuousRequest) -> dict:
    spec = ExperimentSpec(
        name="continuous",
        problem="rosenbrock5d",
        budget=req.budget,
        seeds=req.seed_list(),
        delay=req.delay,
        parallel=req.parallel,
        algorithms=None if req.algorithms is None else tuple(req.algorithms),
        yo_overrides=req.overrides,
        variant_overrides=req.variant_overrides,
    )
    external: dict[str, list[tuple[int, float]]] = {}
    for row in req.external:
        external.setdefault(row.algorithm, []).append((row.seed, row.final_best))
    return run_continuous_comparison(spec, external=external or None).to_dict()


@app.get("/tsp/instance")
def tsp_instance(n: int, seed: int) -> dict:
    inst = generate_tsp(n, seed)
    return {"n": inst.n, "seed": seed, "coords": inst.coords.tolist()}
