"""Compare block-ordered solving with whole-system Gauss-Seidel.

For random linear models of growing size, built as a chain of small
feedback loops, prints equation evaluations and wall time per period for
both methods, then the same for the bundled OPEN model.

    python scripts/benchmark_ordering.py --sizes 20 50 100 200 --repeats 5
"""

import argparse
import pathlib
import random
import time

from sfcdag.model import load_model
from sfcdag.solver import SolverError, initial_lag_state, naive_solve_period, solve_period
from sfcdag.synthetic import linear_model

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"


def looped_chain(rng, n, loop=4, coupling=0.6):
    """Variables in loops of ``loop``; each loop also feeds the next one."""
    a = [[0.0] * n for _ in range(n)]
    for start in range(0, n, loop):
        members = list(range(start, min(start + loop, n)))
        for i, j in zip(members, members[1:] + members[:1]):
            if i != j:
                a[j][i] = rng.uniform(0.2, coupling)
        if start:
            a[start][start - 1] = rng.uniform(0.1, 0.3)
    order = list(range(n))
    rng.shuffle(order)
    # shuffle declaration order so the naive sweep is not accidentally causal
    a = [[a[order[i]][order[j]] for j in range(n)] for i in range(n)]
    return linear_model(a, [rng.uniform(-1, 1) for _ in range(n)], [1.0] * n)


def measure(fn, m, lags, exo, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        try:
            sol = fn(m, lags, exo)
        except SolverError as exc:
            return f"failed: {exc}", None
        best = min(best, time.perf_counter() - t0)
    return sol.evaluations, best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200, 400])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = random.Random(args.seed)

    print(f"{'model':>10} {'block evals':>12} {'naive evals':>12} {'block ms':>9} {'naive ms':>9}")
    cases = [(f"chain{n}", looped_chain(rng, n), {}, {"u": 1.0}) for n in args.sizes]
    open_model = load_model(MODELS / "open.sfc")
    cases.append(("OPEN", open_model, initial_lag_state(open_model), open_model.exogenous_at(1)))
    for name, m, lags, exo in cases:
        be, bt = measure(solve_period, m, lags, exo, args.repeats)
        ne, nt = measure(naive_solve_period, m, lags, exo, args.repeats)
        if nt is None:
            # the naive sweep meets variables before anything has assigned them
            print(f"{name:>10} {be:>12} {'-':>12} {bt * 1e3:>9.2f} {'-':>9}   naive {ne}")
            continue
        print(f"{name:>10} {be:>12} {ne:>12} {bt * 1e3:>9.2f} {nt * 1e3:>9.2f}")


if __name__ == "__main__":
    main()
