"""Search spaces, candidates, and the move operators built on them.

Two space kinds are supported: a bounded continuous hyperbox and the space of
city permutations (tours). The proposal kernel is symmetric in both kinds, so
a Metropolis rule applied on top of it reduces to the plain objective ratio:

* continuous: per-dimension Gaussian perturbation, std = step_scale * range,
  clamped to the bounds;
* permutation: one move drawn from a {segment-reversal, swap, insertion}
  mixture.

Greedy refinement is deterministic local descent: coordinate-wise probing with
a fixed step on boxes, first-improvement 2-opt on tours. Every probe costs one
objective evaluation and must be granted by the caller's budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Protocol

import numpy as np

from .errors import ContractViolation

if TYPE_CHECKING:
    from .objectives import Objective


class EvalBudget(Protocol):
    """Anything that can grant one objective evaluation at a time."""

    def charge(self) -> bool: ...


@dataclass(frozen=True)
class ContinuousBox:
    """Axis-aligned box [lower, upper] in R^D."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ContractViolation("bounds must be 1-d vectors of equal length >= 1")
        if not np.all(lo < hi):
            raise ContractViolation("lower bound must be strictly below upper bound")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True)
class PermutationSpace:
    """Tours over n_items cities, encoded as permutations of 0..n_items-1."""

    n_items: int

    def __post_init__(self):
        if self.n_items < 3:
            raise ContractViolation("permutation space needs n_items >= 3")


SearchSpace = ContinuousBox | PermutationSpace


@dataclass
class Candidate:
    """A point in a search space with an optionally cached objective value."""

    position: np.ndarray
    value: float | None = None

    def copy(self) -> "Candidate":
        return Candidate(self.position.copy(), self.value)


@dataclass(frozen=True)
class ProposalParams:
    """Proposal kernel knobs.

    step_scale: Gaussian std as a fraction of the per-dimension range
    (continuous spaces only).
    move_mix: probabilities of (segment-reversal, swap, insertion) for
    permutation moves; must sum to 1.
    """

    step_scale: float = 0.1
    move_mix: tuple[float, float, float] = (0.7, 0.2, 0.1)

    def __post_init__(self):
        if not self.step_scale >= 0:  # 0 = degenerate identity proposal
            raise ContractViolation("step_scale must be >= 0")
        mix = self.move_mix
        if len(mix) != 3 or any(p < 0 for p in mix):
            raise ContractViolation("move_mix needs 3 non-negative entries")
        if abs(sum(mix) - 1.0) > 1e-12:
            raise ContractViolation("move_mix must sum to 1")


def validate_candidate(x: Candidate, space: SearchSpace) -> None:
    """Raise ContractViolation unless x is a valid point of space."""
    pos = np.asarray(x.position)
    if isinstance(space, ContinuousBox):
        if pos.shape != space.lower.shape:
            raise ContractViolation(
                f"candidate has dimension {pos.shape}, space expects {space.lower.shape}"
            )
        if not (np.all(pos >= space.lower) and np.all(pos <= space.upper)):
            raise ContractViolation("candidate outside box bounds")
    else:
        n = space.n_items
        if pos.shape != (n,) or not np.array_equal(np.sort(pos), np.arange(n)):
            raise ContractViolation("candidate is not a permutation of 0..n-1")


def random_candidate(space: SearchSpace, rng: np.random.Generator) -> Candidate:
    """Uniform random valid candidate (value unset)."""
    if isinstance(space, ContinuousBox):
        return Candidate(rng.uniform(space.lower, space.upper))
    return Candidate(rng.permutation(space.n_items))


def mcmc_propose(
    x: Candidate,
    space: SearchSpace,
    params: ProposalParams,
    rng: np.random.Generator,
) -> Candidate:
    """One symmetric proposal from x. The result's value is unset."""
    validate_candidate(x, space)
    if isinstance(space, ContinuousBox):
        if params.step_scale == 0:  # degenerate zero-step: identity
            return Candidate(x.position.copy())
        step = rng.normal(0.0, params.step_scale * space.span)
        pos = np.clip(x.position + step, space.lower, space.upper)
        return Candidate(pos)

    n = space.n_items
    p = x.position.copy()
    u = rng.random()
    w_rev, w_swap, _ = params.move_mix
    i, j = np.sort(rng.choice(n, size=2, replace=False))
    if u < w_rev:
        p[i : j + 1] = p[i : j + 1][::-1]
    elif u < w_rev + w_swap:
        p[i], p[j] = p[j], p[i]
    else:
        if rng.random() < 0.5:  # direction of the insertion
            i, j = j, i
        city = p[i]
        p = np.delete(p, i)
        p = np.insert(p, j, city)
    return Candidate(p)


def greedy_refine(
    x: Candidate,
    f: "Objective",
    budget: EvalBudget,
    max_probes: int | None = None,
    refine_scale: float = 0.1,
) -> Candidate:
    """Deterministic local descent from x, charging every evaluation.

    Continuous spaces: coordinate descent with fixed step delta =
    refine_scale * range per dimension (walk a dimension while it strictly
    improves, +delta first, then -delta). Permutation spaces:
    first-improvement 2-opt, scanning segment reversals in lexicographic
    (i, j) order, applying each strictly improving reversal as found and
    finishing the sweep; sweeps repeat until one passes clean.

    Stops after a full sweep without improvement, after max_probes probe
    evaluations (the initial evaluation of x is not a probe), or when the
    budget stops granting. Returns the best candidate found, value set;
    value is None only if not even the initial evaluation was granted.
    """
    space = f.space
    validate_candidate(x, space)
    cur = np.asarray(x.position).copy()
    if x.value is None:
        if not budget.charge():
            return Candidate(cur, None)
        cur_val = f.evaluate(cur)
    else:
        cur_val = x.value

    limit = math.inf if max_probes is None else max_probes
    probes = 0
    exhausted = False

    def probe(pos: np.ndarray) -> float | None:
        nonlocal probes, exhausted
        if probes >= limit or not budget.charge():
            exhausted = True
            return None
        probes += 1
        return f.evaluate(pos)

    if isinstance(space, ContinuousBox):
        delta = refine_scale * space.span
        improved_any = True
        while improved_any and not exhausted:
            improved_any = False
            for d in range(space.dim):
                stepped = False
                for sign in (1.0, -1.0):
                    if sign < 0 and stepped:
                        break  # the +delta walk already moved this dimension
                    while True:
                        nxt = cur.copy()
                        nxt[d] = min(
                            max(nxt[d] + sign * delta[d], space.lower[d]),
                            space.upper[d],
                        )
                        if nxt[d] == cur[d]:  # clamped onto the current point
                            break
                        v = probe(nxt)
                        if v is None:
                            return Candidate(cur, cur_val)
                        if v < cur_val:
                            cur, cur_val = nxt, v
                            stepped = True
                            improved_any = True
                        else:
                            break
    else:
        n = space.n_items
        improved = True
        while improved and not exhausted:
            improved = False
            for i in range(n - 1):
                for j in range(i + 1, n):
                    if i == 0 and j == n - 1:
                        continue  # reversing the whole tour changes nothing
                    nxt = cur.copy()
                    nxt[i : j + 1] = nxt[i : j + 1][::-1]
                    v = probe(nxt)
                    if v is None:
                        return Candidate(cur, cur_val)
                    if v < cur_val:
                        cur, cur_val = nxt, v
                        improved = True

    return Candidate(cur, cur_val)


def canonical_tour(p: np.ndarray) -> np.ndarray:
    """Representative of p's rotation/reflection orbit.

    Rotate city 0 to the front, then keep whichever direction puts the
    smaller city second.
    """
    p = np.asarray(p)
    start = int(np.flatnonzero(p == 0)[0])
    fwd = np.roll(p, -start)
    rev = np.roll(fwd[::-1], 1)
    return fwd if fwd[1] < rev[1] else rev
