"""Spatial memory of poor regions.

Membership queries never evaluate the objective. Continuous regions are
hyperballs in coordinates normalized per-dimension to [0, 1] by the box
bounds; permutation regions are exact canonical-tour hashes, which can never
reject a tour that was not itself recorded. Capacity is bounded with FIFO
eviction. Writers are serialized; readers may see a slightly stale region set,
which only costs extra evaluations.
"""
from __future__ import annotations

import threading
from collections import deque

import numpy as np

from .errors import ContractViolation
from .space import Candidate, ContinuousBox, PermutationSpace, SearchSpace, canonical_tour

DEFAULT_CAPACITY = 256


def _position(x) -> np.ndarray:
    return np.asarray(x.position if isinstance(x, Candidate) else x)


class ContinuousBlacklist:
    def __init__(self, space: ContinuousBox, max_regions: int = DEFAULT_CAPACITY):
        if max_regions < 1:
            raise ContractViolation("max_regions must be >= 1")
        self.space = space
        self.max_regions = max_regions
        self._regions: deque[tuple[np.ndarray, float]] = deque()
        self.hits = 0
        self.additions = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._regions)

    def _normalize(self, pos: np.ndarray) -> np.ndarray:
        if pos.shape != self.space.lower.shape:
            raise ContractViolation("candidate dimension does not match blacklist space")
        return (pos - self.space.lower) / self.space.span

    def contains(self, x) -> bool:
        z = self._normalize(_position(x).astype(float))
        with self._lock:
            for center, radius in self._regions:
                if np.linalg.norm(z - center) <= radius:
                    self.hits += 1
                    return True
        return False

    def add_region(self, x, radius: float) -> None:
        if not radius > 0:
            raise ContractViolation("region radius must be > 0")
        z = self._normalize(_position(x).astype(float))
        with self._lock:
            if len(self._regions) >= self.max_regions:
                self._regions.popleft()
            self._regions.append((z, float(radius)))
            self.additions += 1


class TourBlacklist:
    def __init__(self, space: PermutationSpace, max_regions: int = DEFAULT_CAPACITY):
        if max_regions < 1:
            raise ContractViolation("max_regions must be >= 1")
        self.space = space
        self.max_regions = max_regions
        self._hashes: set[tuple] = set()
        self._order: deque[tuple] = deque()
        self.hits = 0
        self.additions = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._hashes)

    def _key(self, x) -> tuple:
        pos = _position(x)
        if pos.shape != (self.space.n_items,):
            raise ContractViolation("tour length does not match blacklist space")
        return tuple(int(c) for c in canonical_tour(pos))

    def contains(self, x) -> bool:
        key = self._key(x)
        with self._lock:
            if key in self._hashes:
                self.hits += 1
                return True
        return False

    def add_region(self, x, radius: float = 0.0) -> None:
        # radius is meaningless for exact tour hashes
        key = self._key(x)
        with self._lock:
            if key in self._hashes:
                return
            if len(self._hashes) >= self.max_regions:
                self._hashes.discard(self._order.popleft())
            self._hashes.add(key)
            self._order.append(key)
            self.additions += 1


Blacklist = ContinuousBlacklist | TourBlacklist


def make_blacklist(space: SearchSpace, max_regions: int = DEFAULT_CAPACITY) -> Blacklist:
    if isinstance(space, ContinuousBox):
        return ContinuousBlacklist(space, max_regions)
    return TourBlacklist(space, max_regions)
