"""Benchmark problem registry for the experiment harness."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .objectives import (
    Objective,
    TspInstance,
    composite,
    generate_tsp,
    rosenbrock,
    tsp_objective,
)
from .space import ContinuousBox

PROBLEM_NAMES = ("composite5d", "rosenbrock5d", "tsp")


@dataclass(frozen=True)
class Problem:
    name: str
    objective: Objective
    tsp_instance: TspInstance | None = None


def make_problem(
    name: str,
    tsp_n: int | None = None,
    seed: int = 0,
    delay: float = 0.0,
    weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0),
) -> Problem:
    """Build a benchmark problem.

    composite5d: the weighted multimodal blend on [-5.12, 5.12]^5.
    rosenbrock5d: the banana valley on [-5, 10]^5.
    tsp: Euclidean instance with tsp_n cities generated from `seed` (the same
    seed an optimizer run uses, so all algorithms share the instance).
    """
    if name == "composite5d":
        box = ContinuousBox(np.full(5, -5.12), np.full(5, 5.12))
        fn = lambda x: composite(x, weights)  # noqa: E731
        return Problem(name, Objective(fn, box, delay=delay, name=name))
    if name == "rosenbrock5d":
        box = ContinuousBox(np.full(5, -5.0), np.full(5, 10.0))
        return Problem(name, Objective(rosenbrock, box, delay=delay, name=name))
    if name == "tsp":
        if tsp_n is None:
            raise ConfigError("tsp problem needs tsp_n")
        inst = generate_tsp(tsp_n, seed)
        return Problem(name, tsp_objective(inst, delay=delay), tsp_instance=inst)
    raise ConfigError(f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}")
