"""Exact Shapley values: class-structured (polynomial in N) and brute force."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import TooManyAgents
from ..parallel import ordered_map
from .game import AllocationResult, ClassStructure, CoalitionCostTable, _log_binom, check_table

NAIVE_AGENT_LIMIT = 12


def _class_value(costs: np.ndarray, sizes: tuple, k: int) -> float:
    """Shapley value of one agent of (sorted) class ``k``.

    The other N-1 agents are the class sizes with class k reduced by one. For
    each count vector of those others, the marginal contribution is read off
    the table and weighted by the multivariate hypergeometric probability of
    that vector within its stratum; summing over all strata and dividing by N
    gives the Shapley value.
    """
    others = list(sizes)
    others[k] -= 1
    n_total = sum(sizes)
    base = tuple(slice(0, m + 1) for m in others)
    shifted = list(base)
    shifted[k] = slice(1, others[k] + 2)
    marginal = costs[tuple(shifted)] - costs[base]

    log_w = np.zeros(marginal.shape)
    stratum = np.zeros(marginal.shape, dtype=np.int64)
    for axis, m in enumerate(others):
        counts = np.arange(m + 1)
        shape = [1] * len(others)
        shape[axis] = m + 1
        log_w = log_w + _log_binom(float(m), counts.astype(float)).reshape(shape)
        stratum = stratum + counts.reshape(shape)
    log_w = log_w - _log_binom(float(n_total - 1), stratum.astype(float))
    return float(np.sum(np.exp(log_w) * marginal)) / n_total


def exact_shapley_kclass(table: CoalitionCostTable, classes: ClassStructure) -> AllocationResult:
    check_table(table, classes)
    costs = table.costs
    sizes = classes.class_sizes
    grand = table.grand_total
    phi = np.zeros(classes.K)
    for k in range(1, classes.K):
        phi[k] = _class_value(costs, sizes, k)
    # largest class takes the remainder (efficiency)
    rest = sum(sizes[k] * phi[k] for k in range(1, classes.K))
    phi[0] = (grand - rest) / sizes[0]
    return AllocationResult(
        method="exact_kclass",
        per_class_cost=classes.to_caller(phi),
        class_sizes=classes.caller_sizes(),
        community_total=grand,
        labels=classes.caller_labels(),
        diagnostics={"cost_evaluations": table.eval_count},
    )


def _popcount(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x = x >> 1
    return out


def exact_shapley_naive(n_agents: int, cost_fn: Callable[[tuple], float],
                        max_agents: int = NAIVE_AGENT_LIMIT, workers: int | None = None) -> AllocationResult:
    """Brute-force Shapley values over all 2^N coalitions.

    ``cost_fn`` takes a sorted tuple of agent indices. Each agent's sum is
    taken with ``math.fsum`` so identical agents get bit-identical values.
    """
    if n_agents > max_agents:
        raise TooManyAgents(f"{n_agents} agents exceeds the brute-force limit of {max_agents}")
    if n_agents < 1:
        raise TooManyAgents("need at least one agent")
    n = n_agents
    masks = range(1 << n)
    members = [tuple(i for i in range(n) if m >> i & 1) for m in masks]
    costs = np.array(ordered_map(lambda s: float(cost_fn(s)), members, workers))
    sizes = _popcount(np.arange(1 << n))
    weights = np.array([math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
                        if s < n else 0.0 for s in range(n + 1)])

    grand = float(costs[-1])
    phi = np.zeros(n)
    all_masks = np.arange(1 << n)
    for i in range(n):
        without = all_masks[(all_masks >> i & 1) == 0]
        terms = weights[sizes[without]] * (costs[without | (1 << i)] - costs[without])
        phi[i] = math.fsum(terms.tolist())
    return AllocationResult(
        method="exact_naive",
        per_class_cost=phi,
        class_sizes=np.ones(n, dtype=int),
        community_total=grand,
        labels=list(range(n)),
        diagnostics={"cost_evaluations": 1 << n},
    )
