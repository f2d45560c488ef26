"""Write DOT, JSON and adjacency CSV for every model in a directory.

    python scripts/render_models.py models/ out/
    dot -Tsvg out/open.dag.dot -o open.svg    # needs Graphviz
"""

import argparse
import pathlib

from sfcdag.dependency import build_dependency_graph, structural_jacobian
from sfcdag.emit import DotStyle, emit_adjacency_csv, emit_dot, emit_json
from sfcdag.graph import condensation
from sfcdag.model import load_model


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("models", type=pathlib.Path)
    parser.add_argument("out", type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for path in sorted(args.models.glob("*.sfc")):
        m = load_model(path)
        g = build_dependency_graph(m)
        d = condensation(g)
        outputs = {
            "graph.dot": emit_dot(g, name=m.name),
            "dag.dot": emit_dot(d, name=m.name),
            "sccs.dot": emit_dot(d, DotStyle(expand_sccs=True), name=m.name),
            "json": emit_json(g, d.partition, d),
            "adjacency.csv": emit_adjacency_csv(structural_jacobian(m)),
        }
        for suffix, text in outputs.items():
            (args.out / f"{path.stem}.{suffix}").write_text(text, encoding="utf-8")
        cyclic = [meta for meta in d.metanodes if meta.nontrivial]
        print(
            f"{m.name}: {g.n} variables, {len(g.edges)} edges, {len(d.metanodes)} metanodes, "
            f"{len(cyclic)} cyclic ({', '.join(str(len(c.members)) for c in cyclic) or '-'} vars)"
        )


if __name__ == "__main__":
    main()
