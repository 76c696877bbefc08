"""Pure-Python versions of the compiled kernels in ``_core.pyx``.

Used when the extension is not built, or when ``COMMSHAPLEY_PURE_PYTHON`` is
set. The arithmetic is kept in the same order as the compiled code.
"""

import numpy as np


def dispatch(demand, generation, soc_init, soc_min, soc_max, p_max, eta_c, eta_d, dt):
    demand = np.ascontiguousarray(demand, dtype=float)
    generation = np.ascontiguousarray(generation, dtype=float)
    n = demand.shape[0]
    if generation.shape[0] != n:
        raise ValueError("demand and generation lengths differ")

    p_bat = [0.0] * n
    soc = [0.0] * n
    p_grid = [0.0] * n
    e_b = [0.0] * n
    e_s = [0.0] * n

    s = float(soc_init)
    for t, (d, g) in enumerate(zip(demand.tolist(), generation.tolist())):
        if g > d:
            gap = g - d
            rate = gap if gap < p_max else p_max
            limit = (soc_max - s) / (eta_c * dt)
            if limit <= rate:
                rate = limit
                s = soc_max
            else:
                s = s + eta_c * rate * dt
                if s > soc_max:
                    s = soc_max
            p_bat[t] = -rate
            p_grid[t] = -(gap - rate)
            e_s[t] = (gap - rate) * dt
        elif g < d:
            gap = d - g
            rate = gap if gap < p_max else p_max
            limit = eta_d / dt * (s - soc_min)
            if limit <= rate:
                rate = limit
                s = soc_min
            else:
                s = s - rate / eta_d * dt
                if s < soc_min:
                    s = soc_min
            p_bat[t] = rate
            p_grid[t] = gap - rate
            e_b[t] = (gap - rate) * dt
        soc[t] = s

    return (np.array(p_bat), np.array(soc), np.array(p_grid),
            np.array(e_b), np.array(e_s))


# swings smaller than this (percent SoC) are not counted as reversals
HYSTERESIS = 1e-9


def _reversals(values):
    rev = [values[0]]
    for x in values[1:]:
        if x == rev[-1]:
            continue
        if len(rev) >= 2 and ((rev[-1] > rev[-2]) == (x > rev[-1])):
            rev[-1] = x
        elif abs(x - rev[-1]) >= HYSTERESIS:
            rev.append(x)
    return rev


def rainflow(series):
    values = np.ascontiguousarray(series, dtype=float).tolist()
    if not values:
        return np.empty(0), np.empty(0), np.empty(0)

    first, second, weight = [], [], []
    stack = []
    for x in _reversals(values):
        stack.append(x)
        while len(stack) >= 4:
            s1, s2, s3, s4 = stack[-4:]
            inner = abs(s2 - s3)
            if inner <= abs(s1 - s2) and inner <= abs(s3 - s4):
                first.append(s2)
                second.append(s3)
                weight.append(1.0)
                del stack[-3:-1]
            else:
                break

    i = 0
    while i < len(stack) - 1:
        if i + 2 < len(stack) and stack[i + 2] == stack[i]:
            first.append(stack[i])
            second.append(stack[i + 1])
            weight.append(1.0)
            i += 2
        else:
            first.append(stack[i])
            second.append(stack[i + 1])
            weight.append(0.5)
            i += 1

    return np.array(first, dtype=float), np.array(second, dtype=float), np.array(weight, dtype=float)
