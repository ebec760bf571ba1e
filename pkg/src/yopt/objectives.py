"""Benchmark objectives, the Euclidean TSP generator, and the evaluation-budget ledger.

All optimization in this package is minimization, and every true objective
evaluation must be preceded by a granted ledger charge. The ledger is the one
shared mutable object between concurrent chains, so charging is atomic.
"""
from __future__ import annotations

import csv
import enum
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ContractViolation
from .space import ContinuousBox, PermutationSpace, SearchSpace


# ---------------------------------------------------------------------------
# benchmark functions

def rastrigin(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ContractViolation("rosenbrock needs dimension >= 2")
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def sphere(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def composite(x: np.ndarray, weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)) -> float:
    """Weighted multimodal blend: rastrigin + rosenbrock + sphere + trig/exp term.

    The last term is sum(sin(x_i)) + exp(||x||_2 / D).
    """
    x = np.asarray(x, dtype=float)
    w1, w2, w3, w4 = weights
    trig = float(np.sum(np.sin(x)) + np.exp(np.linalg.norm(x) / x.size))
    return w1 * rastrigin(x) + w2 * rosenbrock(x) + w3 * sphere(x) + w4 * trig


def composite_expensive(
    x: np.ndarray,
    weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0),
    delay: float = 0.0,
) -> float:
    """composite() plus an artificial per-call sleep simulating an expensive
    black box."""
    value = composite(x, weights)
    if delay > 0:
        time.sleep(delay)
    return value


# ---------------------------------------------------------------------------
# objective wrapper

@dataclass
class Objective:
    """A deterministic scalar function over a search space.

    delay > 0 sleeps after each evaluation to simulate an expensive black box;
    keep it 0 in tests.
    """

    fn: Callable[[np.ndarray], float]
    space: SearchSpace
    delay: float = 0.0
    name: str = ""

    def evaluate(self, position: np.ndarray) -> float:
        value = float(self.fn(position))
        if self.delay > 0:
            time.sleep(self.delay)
        return value


# ---------------------------------------------------------------------------
# TSP instances

@dataclass(frozen=True)
class TspInstance:
    coords: np.ndarray  # (n, 2)
    seed: int | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if coords.ndim != 2 or coords.shape[1] != 2 or coords.shape[0] < 3:
            raise ContractViolation("TSP instance needs an (n>=3, 2) coordinate matrix")
        if not np.all(np.isfinite(coords)):
            raise ContractViolation("TSP coordinates must be finite")

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def generate_tsp(n: int, seed: int) -> TspInstance:
    """n cities uniform on [0, 100]^2; identical (n, seed) -> identical instance."""
    if n < 3:
        raise ContractViolation("TSP instance needs n >= 3")
    rng = np.random.default_rng(seed)
    return TspInstance(rng.uniform(0.0, 100.0, size=(n, 2)), seed=seed)


def tour_length(inst: TspInstance, p: np.ndarray) -> float:
    p = np.asarray(p)
    n = inst.n
    if p.shape != (n,) or not np.array_equal(np.sort(p), np.arange(n)):
        raise ContractViolation("tour is not a permutation of 0..n-1")
    pts = inst.coords[p]
    return float(np.sum(np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1)))


def tsp_objective(inst: TspInstance, delay: float = 0.0) -> Objective:
    return Objective(
        fn=lambda p: tour_length(inst, p),
        space=PermutationSpace(inst.n),
        delay=delay,
        name=f"tsp{inst.n}",
    )


def save_tsp_csv(inst: TspInstance, path: str | Path) -> None:
    """Write the instance as `x,y` rows; row index = city id."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y"])
        writer.writerows(inst.coords.tolist())


def load_tsp_csv(path: str | Path) -> TspInstance:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["x", "y"]:
            raise ContractViolation(f"expected header 'x,y' in {path}")
        coords = [[float(row[0]), float(row[1])] for row in reader if row]
    return TspInstance(np.asarray(coords))


# ---------------------------------------------------------------------------
# evaluation budget

class Phase(enum.Enum):
    BURN_IN = "burn_in"
    HYBRID = "hybrid"


class BudgetLedger:
    """Hard cap on objective evaluations, split into burn-in and hybrid pools.

    burn_in_allocation = floor(burn_in_fraction * total); the hybrid pool gets
    the rest. burn_in_fraction may be 0.0 for single-pool optimizers (the
    baselines); the hybrid optimizer's config keeps it in (0, 1). charge() is
    atomic: no two grants can observe the same headroom.
    """

    def __init__(self, total: int, burn_in_fraction: float = 0.0):
        if total < 1:
            raise ContractViolation("budget must be >= 1")
        if not 0.0 <= burn_in_fraction < 1.0:
            raise ContractViolation("burn_in_fraction must be in [0, 1)")
        self.total = int(total)
        self.burn_in_fraction = float(burn_in_fraction)
        self.burn_in_allocation = int(np.floor(burn_in_fraction * total))
        self.hybrid_allocation = self.total - self.burn_in_allocation
        self.used_burn_in = 0
        self.used_hybrid = 0
        self._lock = threading.Lock()

    @property
    def used(self) -> int:
        return self.used_burn_in + self.used_hybrid

    def allocation(self, phase: Phase) -> int:
        return self.burn_in_allocation if phase is Phase.BURN_IN else self.hybrid_allocation

    def remaining(self, phase: Phase) -> int:
        if phase is Phase.BURN_IN:
            return self.burn_in_allocation - self.used_burn_in
        return self.hybrid_allocation - self.used_hybrid

    def charge(self, phase: Phase) -> bool:
        """Grant one evaluation from the phase pool, or report exhaustion."""
        with self._lock:
            if self.used >= self.total or self.remaining(phase) <= 0:
                return False
            if phase is Phase.BURN_IN:
                self.used_burn_in += 1
            else:
                self.used_hybrid += 1
            return True

    def view(self, phase: Phase) -> "PhaseBudget":
        return PhaseBudget(self, phase)


@dataclass
class PhaseBudget:
    """A ledger bound to one phase; satisfies the EvalBudget protocol."""

    ledger: BudgetLedger
    phase: Phase

    def charge(self) -> bool:
        return self.ledger.charge(self.phase)


class CappedBudget:
    """Per-chain slice of a phase pool: grants at most cap charges."""

    def __init__(self, ledger: BudgetLedger, phase: Phase, cap: int):
        self.ledger = ledger
        self.phase = phase
        self.cap = int(cap)
        self.used = 0

    @property
    def remaining(self) -> int:
        return self.cap - self.used

    def charge(self) -> bool:
        if self.used >= self.cap:
            return False
        if self.ledger.charge(self.phase):
            self.used += 1
            return True
        return False
