"""Deterministic Shapley approximations: last marginal contribution and
stratified expected values (SEV).

Both accept either a :class:`ClassStructure` (one computation per class) or a
plain agent count / demand matrix (one computation per agent). Raw scores are
rescaled so the allocation sums to the grand-coalition cost.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import DegenerateNormalizer, InvalidCounts
from ..parallel import ordered_map
from ..timeseries import DemandMatrix
from .game import AllocationResult, ClassStructure, CountingCost

DemandCost = Callable[[np.ndarray, int], float]


def normalize_to_total(raw, sizes, total: float) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    denom = float(np.dot(sizes, raw))
    if denom == 0.0:
        if total == 0.0:
            return np.zeros_like(raw)
        raise DegenerateNormalizer("raw contributions sum to zero but the community cost does not")
    return total * raw / denom


def marginal_contribution_alloc(game, cost_fn) -> AllocationResult:
    """``MC_i = c(N) - c(N \\ {i})``, rescaled to sum to ``c(N)``.

    ``game`` is a ClassStructure (``cost_fn`` takes a count vector in the
    structure's stored order) or an agent count (``cost_fn`` takes a tuple of
    agent indices).
    """
    counter = CountingCost(cost_fn)
    if isinstance(game, ClassStructure):
        classes = game
        if classes.N < 2:
            raise InvalidCounts("marginal contribution needs at least two agents")
        full = tuple(classes.class_sizes)
        grand = float(counter(full))
        raw = np.empty(classes.K)
        for k in range(classes.K):
            less = list(full)
            less[k] -= 1
            raw[k] = grand - float(counter(tuple(less)))
        sizes = np.array(classes.class_sizes, dtype=float)
        per = classes.to_caller(normalize_to_total(raw, sizes, grand))
        caller_sizes, labels = classes.caller_sizes(), classes.caller_labels()
    else:
        n = int(game)
        if n < 2:
            raise InvalidCounts("marginal contribution needs at least two agents")
        everyone = tuple(range(n))
        grand = float(counter(everyone))
        raw = np.array([grand - float(counter(everyone[:i] + everyone[i + 1:])) for i in range(n)])
        per = normalize_to_total(raw, np.ones(n), grand)
        caller_sizes, labels = np.ones(n, dtype=int), list(range(n))
    return AllocationResult(
        method="marginal_contribution",
        per_class_cost=per,
        class_sizes=caller_sizes,
        community_total=grand,
        labels=labels,
        diagnostics={"cost_evaluations": counter.calls},
    )


def _sev_scores(focal: np.ndarray, others_mean: np.ndarray, n: int, cost: DemandCost, workers) -> float:
    """Mean over strata j of c(j mean agents + focal) - c(j mean agents)."""
    jobs = [(j, True) for j in range(n)] + [(j, False) for j in range(1, n)]

    def run(job):
        j, with_focal = job
        agg = j * others_mean
        if with_focal:
            return float(cost(agg + focal, j + 1))
        return float(cost(agg, j))

    values = ordered_map(run, jobs, workers)
    with_focal = np.array(values[:n])
    without = np.concatenate([[0.0], values[n:]])
    return float(np.sum(with_focal - without)) / n


def sev_alloc(game, cost_fn: DemandCost, community_total: float | None = None,
              workers: int | None = None) -> AllocationResult:
    """Stratified expected values.

    For each agent (or class representative) the rest of the community is
    replaced by fictitious agents carrying the mean demand of the others, and
    the marginal contribution is averaged over coalition sizes 0..N-1.

    ``game`` is a ClassStructure or a DemandMatrix / ``(N, T)`` array;
    ``cost_fn(aggregate_demand, coalition_size)`` returns ``c(S)``.
    """
    counter = CountingCost(cost_fn)
    if isinstance(game, ClassStructure):
        profiles = game.class_demands
        sizes = np.array(game.class_sizes, dtype=float)
        community = game.community_demand()
        n = game.N
    else:
        profiles = game.values if isinstance(game, DemandMatrix) else np.atleast_2d(np.asarray(game, dtype=float))
        sizes = np.ones(profiles.shape[0])
        community = np.zeros(profiles.shape[1])
        for row in profiles:
            community += row
        n = profiles.shape[0]
    if n < 2:
        raise InvalidCounts("SEV needs at least two agents")

    raw = np.array([
        _sev_scores(d, (community - d) / (n - 1), n, counter, workers) for d in profiles
    ])
    sev_calls = counter.calls
    if community_total is None:
        community_total = float(counter(community, n))
    per = normalize_to_total(raw, sizes, community_total)

    if isinstance(game, ClassStructure):
        per = game.to_caller(per)
        caller_sizes, labels = game.caller_sizes(), game.caller_labels()
    else:
        caller_sizes, labels = np.ones(n, dtype=int), list(range(n))
    return AllocationResult(
        method="sev",
        per_class_cost=per,
        class_sizes=caller_sizes,
        community_total=float(community_total),
        labels=labels,
        diagnostics={"cost_evaluations": sev_calls, "total_evaluations": counter.calls},
    )
