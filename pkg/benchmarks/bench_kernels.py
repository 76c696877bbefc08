"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --steps 17520 --repeats 5 --csv bench.csv

Also checks that both backends return bit-identical arrays on the inputs
they are timed on.
"""

import argparse
import csv
import sys
import timeit

import numpy as np

from commshapley import kernels
from commshapley.profiles import annual_profile, synthetic_generation


def inputs(n_steps: int, seed: int):
    demand = 100 * annual_profile("evening_peak", 3500.0, n_steps)
    generation = 0.6 * synthetic_generation(n_steps, seed).values
    args = (demand, generation, 50.0, 50.0, 500.0, 250.0, 0.95, 0.95, 0.5)
    soc = kernels.python_dispatch(*args)[1]
    return args, np.ascontiguousarray(100.0 * soc / 500.0)


def best_of(fn, repeats: int) -> float:
    loops = 1
    while timeit.timeit(fn, number=loops) < 0.2 and loops < 1000:
        loops *= 2
    return min(timeit.repeat(fn, number=loops, repeat=repeats)) / loops


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=17520)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    args = p.parse_args(argv)

    if kernels.compiled_dispatch is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1

    dispatch_args, soc = inputs(args.steps, args.seed)
    for a, b in zip(kernels.python_dispatch(*dispatch_args), kernels.compiled_dispatch(*dispatch_args)):
        assert np.array_equal(a, b), "dispatch backends disagree"
    for a, b in zip(kernels.python_rainflow(soc), kernels.compiled_rainflow(soc)):
        assert np.array_equal(a, b), "rainflow backends disagree"

    cases = {
        "dispatch": (lambda: kernels.python_dispatch(*dispatch_args),
                     lambda: kernels.compiled_dispatch(*dispatch_args)),
        "rainflow": (lambda: kernels.python_rainflow(soc), lambda: kernels.compiled_rainflow(soc)),
    }
    rows = []
    print(f"{'kernel':<10}{'python ms':>12}{'compiled ms':>14}{'speedup':>10}")
    for name, (py, compiled) in cases.items():
        t_py = best_of(py, args.repeats)
        t_c = best_of(compiled, args.repeats)
        rows.append([name, args.steps, t_py, t_c, t_py / t_c])
        print(f"{name:<10}{t_py * 1e3:>12.3f}{t_c * 1e3:>14.3f}{t_py / t_c:>9.1f}x")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kernel", "steps", "python_s", "compiled_s", "speedup"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
