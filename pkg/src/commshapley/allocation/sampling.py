"""Adaptive stratified sampling estimator of Shapley values.

For each agent, strata (coalition sizes of the other agents) are sampled with
probability mixing a uniform exploration term and a term proportional to each
stratum's estimated standard deviation; the mixing weight follows a double
sigmoid in the sample index. Per-stratum means and variances are tracked with
Welford updates. Strata 0 and N-1 hold a single coalition each, so they are
sampled exactly once.

Every agent draws from its own ``PCG64`` stream spawned from
``SeedSequence(seed)`` at the agent's index, so results do not depend on the
order or parallelism in which agents are processed.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InsufficientSamples, InvalidCounts
from ..parallel import ordered_map
from .approx import normalize_to_total
from .game import AllocationResult, ClassStructure

SIGMA_INIT = 1e4
BETA = 0.075
GAMMA = 0.2


def exploration_weight(m: float, n_samples: int, beta: float = BETA, gamma: float = GAMMA) -> float:
    """Double-sigmoid weight of uniform exploration for sample ``m``."""
    head = 1.0 / (1.0 + math.exp(gamma / beta))
    z = -(m - gamma * n_samples) / (beta * n_samples)
    # logistic without overflow for very negative z
    tail = 1.0 / (1.0 + math.exp(z)) if z < 700 else 0.0
    return 1.0 + head - tail


def stratum_probabilities(eps: float, sigma: np.ndarray) -> np.ndarray:
    """Mix uniform exploration with sigma-proportional exploitation."""
    n = sigma.shape[0]
    total = float(np.sum(sigma))
    exploit = sigma / total if total > 0 else np.full(n, 1.0 / n)
    return eps / n + (1.0 - eps) * exploit


def agent_streams(seed: int, n: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _estimate_one(rng, n_total, n_samples, draw, marginal, beta, gamma):
    """Run the sampler for one focal agent; returns (estimate, diagnostics)."""
    mu = np.zeros(n_total)
    m2 = np.zeros(n_total)
    visits = np.zeros(n_total, dtype=np.int64)
    sigma = np.full(n_total, SIGMA_INIT)
    worst_pi = 0.0

    def update(j, mc):
        visits[j] += 1
        delta = mc - mu[j]
        mu[j] += delta / visits[j]
        m2[j] += delta * (mc - mu[j])
        if visits[j] > 1:
            sigma[j] = math.sqrt(m2[j] / (visits[j] - 1))

    # single-coalition strata first
    edge = [0] if n_total == 1 else [0, n_total - 1]
    for j in edge:
        update(j, marginal(draw(rng, j)))
    inner = n_total - 2
    used = len(edge)
    if inner > 0:
        for m in range(used + 1, n_samples + 1):
            eps = exploration_weight(m, n_samples, beta, gamma)
            pi = stratum_probabilities(eps, sigma[1:-1])
            worst_pi = max(worst_pi, abs(float(np.sum(pi)) - 1.0))
            j = 1 + int(rng.choice(inner, p=pi))
            update(j, marginal(draw(rng, j)))
            used += 1
    estimate = float(np.sum(mu)) / n_total
    return estimate, {"samples": used, "visits": visits, "pi_sum_error": worst_pi}


def adaptive_sampling_alloc(game, cost_fn, n_samples: int = 1000, seed: int = 0,
                            beta: float = BETA, gamma: float = GAMMA,
                            workers: int | None = None) -> AllocationResult:
    """Adaptive sampling estimate, rescaled to sum to ``c(N)``.

    ``game`` is a ClassStructure (``cost_fn`` takes a stored-order count
    vector) or an agent count (``cost_fn`` takes a sorted index tuple).
    """
    if isinstance(game, ClassStructure):
        classes = game
        n_total, n_agents = classes.N, classes.K
        full = tuple(classes.class_sizes)

        def job(k):
            others = list(full)
            others[k] -= 1
            others = np.array(others, dtype=np.int64)
            rng = streams[classes.order[k]]

            def draw(rng, j):
                if j == 0:
                    return np.zeros_like(others)
                if j == n_total - 1:
                    return others.copy()
                return rng.multivariate_hypergeometric(others, j)

            def marginal(counts):
                with_focal = counts.copy()
                with_focal[k] += 1
                return float(cost_fn(tuple(with_focal.tolist()))) - float(cost_fn(tuple(counts.tolist())))

            return _estimate_one(rng, n_total, n_samples, draw, marginal, beta, gamma)

        sizes = np.array(full, dtype=float)
        grand = float(cost_fn(full))
    else:
        classes = None
        n_total = n_agents = int(game)

        def job(i):
            others = np.array([a for a in range(n_total) if a != i], dtype=np.int64)
            rng = streams[i]

            def draw(rng, j):
                if j == n_total - 1:
                    return others
                return np.sort(rng.choice(others, size=j, replace=False))

            def marginal(members):
                without = tuple(members.tolist())
                return float(cost_fn(tuple(sorted(without + (i,))))) - float(cost_fn(without))

            return _estimate_one(rng, n_total, n_samples, draw, marginal, beta, gamma)

        sizes = np.ones(n_total)
        grand = float(cost_fn(tuple(range(n_total))))

    if n_total < 2:
        raise InvalidCounts("sampling needs at least two agents")
    if n_samples < n_total:
        raise InsufficientSamples(f"{n_samples} samples per agent cannot cover {n_total} strata")

    streams = agent_streams(seed, n_agents)
    outcomes = ordered_map(job, range(n_agents), workers)
    raw = np.array([est for est, _ in outcomes])
    per = normalize_to_total(raw, sizes, grand)
    if classes is not None:
        per = classes.to_caller(per)
        caller_sizes, labels = classes.caller_sizes(), classes.caller_labels()
        visits = [outcomes[j][1]["visits"] for j in np.argsort(classes.order)]
        samples = [outcomes[j][1]["samples"] for j in np.argsort(classes.order)]
    else:
        caller_sizes, labels = np.ones(n_total, dtype=int), list(range(n_total))
        visits = [o[1]["visits"] for o in outcomes]
        samples = [o[1]["samples"] for o in outcomes]
    return AllocationResult(
        method="adaptive_sampling",
        per_class_cost=per,
        class_sizes=caller_sizes,
        community_total=grand,
        labels=labels,
        seed=seed,
        samples_per_agent=n_samples,
        diagnostics={
            "mc_evaluations": int(sum(samples)),
            "samples": samples,
            "stratum_visits": visits,
            "pi_sum_error": max(o[1]["pi_sum_error"] for o in outcomes),
        },
    )
