"""SIM with a permanent rise in government spending.

Runs G = 20 to steady state, then G = 25 for the remaining periods, and
prints output, wealth and the variables the shock reaches within a period.

    python scripts/sim_shock.py --before 50 --after 100
"""

import argparse
import pathlib

from sfcdag.dependency import build_dependency_graph
from sfcdag.graph import descendants
from sfcdag.model import load_model, parse_model, render_model
from sfcdag.solver import SolverOptions, simulate

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--before", type=int, default=50)
    parser.add_argument("--after", type=int, default=100)
    parser.add_argument("--new-g", type=float, default=25.0)
    args = parser.parse_args()

    base = load_model(MODELS / "sim.sfc")
    series = ", ".join(["20"] * args.before + [repr(args.new_g)])
    shocked = parse_model(render_model(base).replace("exo G = 20", f"exo G = [{series}]"))
    r = simulate(shocked, SolverOptions(periods=args.before + args.after))

    g = build_dependency_graph(shocked)
    reached = sorted(g.labels[v] for v in descendants(g, g.index("G")))
    print(f"G reaches within the period: {', '.join(reached)}")
    print(f"{'period':>6} {'G':>6} {'Y':>10} {'H':>10}")
    for period, row in zip(r.periods, r.values):
        if period % 10 == 0 or period in (args.before, args.before + 1):
            print(f"{period:>6} {row['G']:>6.1f} {row['Y']:>10.4f} {row['H']:>10.4f}")
    theta = shocked.param_values["theta"]
    print(f"new steady state Y* = G/theta = {args.new_g / theta:.4f}")


if __name__ == "__main__":
    main()
