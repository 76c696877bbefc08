"""Class-structured games, the coalition cost table and allocation results."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from ..errors import IncompleteTable, InvalidCounts
from ..parallel import ordered_map

CountsCost = Callable[[tuple], float]


@dataclass(frozen=True)
class ClassStructure:
    """K classes of identical agents, stored largest class first.

    Construction reorders the classes by size (stable for ties). ``order[j]``
    is the caller's index of the j-th stored class, and :meth:`to_caller` maps
    per-class arrays back to the caller's order.
    """

    class_demands: np.ndarray
    class_sizes: tuple
    labels: tuple | None = None
    order: tuple = field(init=False)

    def __post_init__(self):
        demands = np.atleast_2d(np.asarray(self.class_demands, dtype=float))
        sizes = [int(s) for s in self.class_sizes]
        if len(sizes) < 1 or demands.shape[0] != len(sizes):
            raise InvalidCounts("need one demand series per class and K >= 1")
        if any(s < 1 for s in sizes):
            raise InvalidCounts("every class needs at least one agent")
        labels = tuple(self.labels) if self.labels is not None else tuple(range(len(sizes)))
        if len(labels) != len(sizes):
            raise InvalidCounts("one label per class")
        order = tuple(sorted(range(len(sizes)), key=lambda k: -sizes[k]))
        sorted_demands = demands[list(order)].copy()
        sorted_demands.setflags(write=False)
        object.__setattr__(self, "class_demands", sorted_demands)
        object.__setattr__(self, "class_sizes", tuple(sizes[k] for k in order))
        object.__setattr__(self, "labels", tuple(labels[k] for k in order))
        object.__setattr__(self, "order", order)

    @property
    def K(self) -> int:
        return len(self.class_sizes)

    @property
    def N(self) -> int:
        return sum(self.class_sizes)

    def to_caller(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        out = np.empty_like(values)
        out[list(self.order)] = values
        return out

    def caller_sizes(self) -> np.ndarray:
        return self.to_caller(np.array(self.class_sizes, dtype=float)).astype(int)

    def caller_labels(self) -> list:
        out = [None] * self.K
        for j, k in enumerate(self.order):
            out[k] = self.labels[j]
        return out

    def community_demand(self) -> np.ndarray:
        total = np.zeros(self.class_demands.shape[1])
        for n, d in zip(self.class_sizes, self.class_demands):
            total += n * d
        return total


@dataclass
class CoalitionCostTable:
    costs: np.ndarray  # shape (N_1+1, ..., N_K+1)
    eval_count: int

    @property
    def grand_total(self) -> float:
        return float(self.costs[tuple(s - 1 for s in self.costs.shape)])

    def lookup(self, counts) -> float:
        return float(self.costs[tuple(int(c) for c in counts)])


@dataclass
class AllocationResult:
    """Per-class (or per-agent) cost in GBP per agent, in the caller's order."""

    method: str
    per_class_cost: np.ndarray
    class_sizes: np.ndarray
    community_total: float
    labels: list = field(default_factory=list)
    seed: int | None = None
    samples_per_agent: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def allocated_total(self) -> float:
        return float(np.dot(self.class_sizes, self.per_class_cost))

    def efficiency_gap(self) -> float:
        """Relative mismatch between allocated and community cost."""
        scale = max(abs(self.community_total), 1e-300)
        return abs(self.allocated_total() - self.community_total) / scale


class CountingCost:
    """Wrap a cost function and count its invocations (thread-safe)."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, *args):
        with self._lock:
            self.calls += 1
        return self.fn(*args)


def build_cost_table(classes: ClassStructure, cost_fn: CountsCost, workers: int | None = None) -> CoalitionCostTable:
    """Evaluate ``cost_fn`` on every class-count vector (in parallel)."""
    shape = tuple(n + 1 for n in classes.class_sizes)
    grid = list(itertools.product(*(range(s) for s in shape)))
    values = ordered_map(lambda counts: float(cost_fn(counts)), grid, workers)
    costs = np.array(values, dtype=float).reshape(shape)
    costs.setflags(write=False)
    return CoalitionCostTable(costs, eval_count=len(grid))


def _log_binom(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def multivariate_hypergeometric_pmf(n_vec: Sequence[int], N_vec: Sequence[int], N: int, n: int) -> float:
    """Probability of drawing ``n_vec[k]`` from each class of sizes ``N_vec``."""
    n_vec = np.asarray(n_vec)
    N_vec = np.asarray(N_vec)
    if n_vec.shape != N_vec.shape:
        raise InvalidCounts("count and size vectors differ in length")
    if int(N_vec.sum()) != N or int(n_vec.sum()) != n:
        raise InvalidCounts("sizes must sum to N and counts to n")
    if np.any(n_vec < 0) or np.any(n_vec > N_vec):
        raise InvalidCounts("each count must lie in [0, class size]")
    logp = float(np.sum(_log_binom(N_vec.astype(float), n_vec.astype(float)))) - float(_log_binom(float(N), float(n)))
    return min(1.0, float(np.exp(logp)))


def check_table(table: CoalitionCostTable, classes: ClassStructure) -> None:
    expected = tuple(n + 1 for n in classes.class_sizes)
    if table.costs.shape != expected:
        raise IncompleteTable(f"table shape {table.costs.shape}, expected {expected}")
    if not np.all(np.isfinite(table.costs)):
        raise IncompleteTable("table has non-finite entries")
