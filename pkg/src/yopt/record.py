"""Run records: trace, events, JSON/CSV serialization, and the run monitor.

The canonical JSON document has stable field names (best_value, best_position,
trace, events, config_echo, evaluations_used, chain_summary, wall_time_ms).
Wall time is measurement metadata: `to_json(timing=False)` omits it so that
two runs of the same config compare byte-identically.
"""
from __future__ import annotations

import bisect
import json
import threading
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Event:
    """One chain event during the hybrid phase."""

    type: str  # accept | reject | reheat | blacklist_add | blacklist_skip
    iteration: int
    old_t: float | None = None
    new_t: float | None = None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"type": self.type, "iteration": self.iteration}
        if self.old_t is not None:
            d["old_t"] = self.old_t
            d["new_t"] = self.new_t
        return d

    @staticmethod
    def from_dict(d: dict) -> "Event":
        return Event(d["type"], d["iteration"], d.get("old_t"), d.get("new_t"))


def canonical_json(obj, indent: int | None = None) -> str:
    return json.dumps(obj, sort_keys=True, indent=indent)


@dataclass
class RunRecord:
    """One optimizer run: final best, per-evaluation best-so-far curve, events."""

    best_position: list
    best_value: float
    trace: list[tuple[int, float]]
    evaluations_used: int
    wall_time: float  # seconds
    config_echo: dict
    chain_events: list[list[Event]] = field(default_factory=list)
    chain_summary: list[dict] = field(default_factory=list)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "best_value": self.best_value,
            "best_position": self.best_position,
            "trace": [[int(i), float(v)] for i, v in self.trace],
            "evaluations_used": self.evaluations_used,
            "config_echo": self.config_echo,
            "events": [[e.to_dict() for e in chain] for chain in self.chain_events],
            "chain_summary": self.chain_summary,
        }
        if timing:
            d["wall_time_ms"] = self.wall_time * 1000.0
        return d

    def to_json(self, timing: bool = True, indent: int | None = None) -> str:
        return canonical_json(self.to_dict(timing=timing), indent=indent)

    def trace_csv(self) -> str:
        lines = ["eval,best"]
        lines += [f"{i},{v!r}" for i, v in self.trace]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_dict(d: dict) -> "RunRecord":
        return RunRecord(
            best_position=d["best_position"],
            best_value=d["best_value"],
            trace=[(int(i), float(v)) for i, v in d["trace"]],
            evaluations_used=d["evaluations_used"],
            wall_time=d.get("wall_time_ms", 0.0) / 1000.0,
            config_echo=d["config_echo"],
            chain_events=[[Event.from_dict(e) for e in chain] for chain in d.get("events", [])],
            chain_summary=d.get("chain_summary", []),
        )


def trace_csv_from_dict(d: dict) -> str:
    lines = ["eval,best"]
    lines += [f"{int(i)},{float(v)!r}" for i, v in d["trace"]]
    return "\n".join(lines) + "\n"


class RunMonitor:
    """Thread-safe per-run bookkeeping shared by all chains.

    Records the merged best-so-far trace (one entry per evaluation), the
    global best candidate, and, when track_values is on, the sorted multiset
    of observed values used for the dynamic poor-region threshold.
    """

    def __init__(self, track_values: bool = False, quantile: float = 0.9, warmup: int = 20):
        self._lock = threading.Lock()
        self.eval_count = 0
        self.best_value = float("inf")
        self.best_position: np.ndarray | None = None
        self.trace: list[tuple[int, float]] = []
        self.track_values = track_values
        self.quantile = quantile
        self.warmup = warmup
        self._sorted_values: list[float] = []

    def observe(self, position: np.ndarray, value: float) -> None:
        with self._lock:
            self.eval_count += 1
            if value < self.best_value:
                self.best_value = value
                self.best_position = np.array(position, copy=True)
            self.trace.append((self.eval_count, self.best_value))
            if self.track_values:
                bisect.insort(self._sorted_values, value)

    def poor_threshold(self) -> float | None:
        """Empirical quantile of all observed values; None before warmup."""
        with self._lock:
            vals = self._sorted_values
            n = len(vals)
            if not self.track_values or n < self.warmup:
                return None
            h = (n - 1) * self.quantile
            lo = int(np.floor(h))
            hi = min(lo + 1, n - 1)
            return vals[lo] + (h - lo) * (vals[hi] - vals[lo])

    def is_poor(self, value: float) -> bool:
        threshold = self.poor_threshold()
        return threshold is not None and value > threshold


class MonitoredObjective:
    """Objective wrapper notifying the run monitor (and optionally a chain)."""

    def __init__(self, objective, monitor: RunMonitor, on_eval=None):
        self._objective = objective
        self._monitor = monitor
        self._on_eval = on_eval

    @property
    def space(self):
        return self._objective.space

    def evaluate(self, position: np.ndarray) -> float:
        value = self._objective.evaluate(position)
        self._monitor.observe(position, value)
        if self._on_eval is not None:
            self._on_eval(position, value)
        return value
