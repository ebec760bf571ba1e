import threading

import numpy as np
import pytest


class CountingObjective:
    """Objective wrapper counting true evaluations; the budget oracle."""

    def __init__(self, inner):
        self.inner = inner
        self.count = 0
        self._lock = threading.Lock()

    @property
    def space(self):
        return self.inner.space

    def evaluate(self, position):
        with self._lock:
            self.count += 1
        return self.inner.evaluate(position)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def counting():
    return CountingObjective
