# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: battery dispatch and rainflow counting.

Both functions mirror ``_pycore`` operation for operation so the two backends
agree bit for bit.
"""
import numpy as np

from libc.math cimport fabs

# swings smaller than this (percent SoC) are not counted as reversals
cdef double HYSTERESIS = 1e-9


def dispatch(const double[::1] demand, const double[::1] generation,
             double soc_init, double soc_min, double soc_max, double p_max,
             double eta_c, double eta_d, double dt):
    cdef Py_ssize_t n = demand.shape[0]
    if generation.shape[0] != n:
        raise ValueError("demand and generation lengths differ")

    p_bat_a = np.zeros(n)
    soc_a = np.zeros(n)
    p_grid_a = np.zeros(n)
    e_b_a = np.zeros(n)
    e_s_a = np.zeros(n)
    cdef double[::1] p_bat = p_bat_a
    cdef double[::1] soc = soc_a
    cdef double[::1] p_grid = p_grid_a
    cdef double[::1] e_b = e_b_a
    cdef double[::1] e_s = e_s_a

    cdef Py_ssize_t t
    cdef double s = soc_init
    cdef double d, g, gap, rate, limit

    with nogil:
        for t in range(n):
            d = demand[t]
            g = generation[t]
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

    return p_bat_a, soc_a, p_grid_a, e_b_a, e_s_a


def rainflow(const double[::1] series):
    """Return ``(first, second, weight)`` arrays of counted cycles.

    Full cycles (weight 1) come from the four-point rule and from residue
    half cycles that close on themselves; the rest of the residue is counted
    as half cycles (weight 0.5).
    """
    cdef Py_ssize_t n = series.shape[0]
    rev_a = np.empty(max(n, 1))
    cdef double[::1] rev = rev_a
    cdef Py_ssize_t m = 0
    cdef Py_ssize_t i
    cdef double x

    if n == 0:
        return np.empty(0), np.empty(0), np.empty(0)

    with nogil:
        rev[0] = series[0]
        m = 1
        for i in range(1, n):
            x = series[i]
            if x == rev[m - 1]:
                continue
            if m >= 2 and ((rev[m - 1] > rev[m - 2]) == (x > rev[m - 1])):
                rev[m - 1] = x
            elif fabs(x - rev[m - 1]) >= HYSTERESIS:
                rev[m] = x
                m += 1

    # at most m - 1 cycles of any kind
    first_a = np.empty(max(m, 1))
    second_a = np.empty(max(m, 1))
    weight_a = np.empty(max(m, 1))
    stack_a = np.empty(m)
    cdef double[::1] first = first_a
    cdef double[::1] second = second_a
    cdef double[::1] weight = weight_a
    cdef double[::1] stack = stack_a
    cdef Py_ssize_t sp = 0
    cdef Py_ssize_t nc = 0
    cdef double s1, s2, s3, s4, inner

    with nogil:
        for i in range(m):
            stack[sp] = rev[i]
            sp += 1
            while sp >= 4:
                s1 = stack[sp - 4]
                s2 = stack[sp - 3]
                s3 = stack[sp - 2]
                s4 = stack[sp - 1]
                inner = fabs(s2 - s3)
                if inner <= fabs(s1 - s2) and inner <= fabs(s3 - s4):
                    first[nc] = s2
                    second[nc] = s3
                    weight[nc] = 1.0
                    nc += 1
                    stack[sp - 3] = s4
                    sp -= 2
                else:
                    break

        i = 0
        while i < sp - 1:
            if i + 2 < sp and stack[i + 2] == stack[i]:
                first[nc] = stack[i]
                second[nc] = stack[i + 1]
                weight[nc] = 1.0
                nc += 1
                i += 2
            else:
                first[nc] = stack[i]
                second[nc] = stack[i + 1]
                weight[nc] = 0.5
                nc += 1
                i += 1

    return first_a[:nc].copy(), second_a[:nc].copy(), weight_a[:nc].copy()
