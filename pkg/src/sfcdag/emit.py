"""DOT, JSON and CSV output.  All output is byte-deterministic.

Floats are written with ``repr``, the shortest decimal that reads back to
the same double, so CSV files round-trip exactly and never depend on locale.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .dependency import SparsityPattern
from .graph import (
    CondensationDag,
    DependencyGraph,
    DirectedGraph,
    SccPartition,
    condense,
    tarjan_scc,
    topological_order,
)
from .solver import SimulationResult

_HEX_RE = re.compile(r"#[0-9a-fA-F]{6}\Z")
_DOT_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DOT_KEYWORDS = {"node", "edge", "graph", "digraph", "subgraph", "strict"}


@dataclass(frozen=True)
class DotStyle:
    expand_sccs: bool = False
    trivial_color: str = "#8fd18f"
    nontrivial_color: str = "#e8605a"
    rankdir: str = "LR"

    def __post_init__(self):
        for color in (self.trivial_color, self.nontrivial_color):
            if not _HEX_RE.match(color):
                raise ValueError(f"not a 6-digit hex color: {color!r}")


def dot_id(text: str) -> str:
    if _DOT_ID_RE.match(text) and text.lower() not in _DOT_KEYWORDS:
        return text
    return _quote(text)


def _node_line(name: str, color: str, indent: str = "  ", **attrs: str) -> str:
    extra = "".join(f", {k}={_quote(v)}" for k, v in attrs.items())
    return f'{indent}{dot_id(name)} [fillcolor="{color}"{extra}];'


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _metanode_id(k: int) -> str:
    return f"SCC_{k}"


def _header(name: str, style: DotStyle) -> list[str]:
    return [
        f"digraph {dot_id(name)} {{",
        f"  rankdir={style.rankdir};",
        '  node [shape=ellipse, style=filled, fontname="Helvetica"];',
    ]


def emit_dot(
    d: Union[CondensationDag, DirectedGraph], style: DotStyle = DotStyle(), name: str = ""
) -> str:
    """DOT text for a condensation (metanodes) or a plain dependency graph.

    Cyclic nodes are filled with ``style.nontrivial_color``, the rest with
    ``style.trivial_color``.
    """
    if isinstance(d, CondensationDag):
        return _emit_condensation(d, style, name or "condensation")
    part = tarjan_scc(d)
    lines = _header(name or "dependencies", style)
    for v in range(d.n):
        cyclic = part.nontrivial[part.component_of[v]]
        color = style.nontrivial_color if cyclic else style.trivial_color
        lines.append(_node_line(d.labels[v], color))
    for s, t in d.sorted_edges():
        lines.append(f"  {dot_id(d.labels[s])} -> {dot_id(d.labels[t])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_condensation(d: CondensationDag, style: DotStyle, name: str) -> str:
    g = d.graph
    lines = _header(name, style)
    if not style.expand_sccs:
        ids = []
        for meta in d.metanodes:
            if meta.nontrivial:
                ident = _metanode_id(meta.index)
                label = f"{ident} ({len(meta.members)} vars)"
                lines.append(
                    _node_line(
                        ident,
                        style.nontrivial_color,
                        label=label,
                        tooltip=", ".join(meta.labels),
                    )
                )
            else:
                ident = meta.labels[0]
                lines.append(_node_line(ident, style.trivial_color))
            ids.append(ident)
        for a, b in d.meta_edges:
            lines.append(f"  {dot_id(ids[a])} -> {dot_id(ids[b])};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    comp_of = d.partition.component_of
    for meta in d.metanodes:
        if not meta.nontrivial:
            lines.append(_node_line(meta.labels[0], style.trivial_color))
            continue
        ident = _metanode_id(meta.index)
        lines.append(f"  subgraph cluster_{ident} {{")
        lines.append(f'    label="{ident} ({len(meta.members)} vars)";')
        lines.append("    style=rounded;")
        for v in meta.members:
            lines.append(_node_line(g.labels[v], style.nontrivial_color, indent="    "))
        for s, t in g.sorted_edges():
            if comp_of[s] == meta.index and comp_of[t] == meta.index:
                lines.append(f"    {dot_id(g.labels[s])} -> {dot_id(g.labels[t])};")
        lines.append("  }")
    for s, t in g.sorted_edges():
        if comp_of[s] != comp_of[t]:
            lines.append(f"  {dot_id(g.labels[s])} -> {dot_id(g.labels[t])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_json(
    g: DirectedGraph,
    p: Optional[SccPartition] = None,
    d: Optional[CondensationDag] = None,
) -> str:
    """One JSON document: nodes, edges, SCCs, meta-edges and block order."""
    p = p if p is not None else tarjan_scc(g)
    d = d if d is not None else condense(g, p)
    roles = getattr(g, "roles", ()) or ("endogenous",) * g.n
    doc = {
        "nodes": [
            {"index": v, "label": g.labels[v], "role": roles[v]} for v in range(g.n)
        ],
        "edges": [{"source": s, "target": t} for s, t in g.sorted_edges()],
        "sccs": [
            {"index": k, "members": list(c), "nontrivial": p.nontrivial[k]}
            for k, c in enumerate(p.components)
        ],
        "condensation": [{"source": a, "target": b} for a, b in d.meta_edges],
        "topological_order": topological_order(d),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_json(text: str) -> DependencyGraph:
    """Rebuild the dependency graph from :func:`emit_json` output."""
    doc = json.loads(text)
    nodes = sorted(doc["nodes"], key=lambda node: node["index"])
    return DependencyGraph(
        len(nodes),
        tuple(node["label"] for node in nodes),
        frozenset((e["source"], e["target"]) for e in doc["edges"]),
        tuple(node["role"] for node in nodes),
    )


def _write_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_adjacency_csv(p: SparsityPattern, labels: Optional[Sequence[str]] = None) -> str:
    """The binary pattern as CSV: row = dependent variable, column = cause."""
    labels = list(labels if labels is not None else p.labels)
    rows = []
    for i, row in enumerate(p.rows):
        cells = ["0"] * p.n
        for j in row:
            cells[j] = "1"
        rows.append([labels[i], *cells])
    return _write_csv(["variable", *labels], rows)


def parse_adjacency_csv(text: str) -> SparsityPattern:
    header, *rows = list(csv.reader(io.StringIO(text)))
    labels = tuple(header[1:])
    parsed = tuple(
        tuple(j for j, cell in enumerate(row[1:]) if cell == "1") for row in rows
    )
    return SparsityPattern(len(labels), parsed, labels)


def emit_simulation_csv(r: SimulationResult) -> str:
    rows = [
        [str(period), *(repr(float(values[x])) for x in r.variables)]
        for period, values in zip(r.periods, r.values)
    ]
    return _write_csv(["period", *r.variables], rows)


def parse_simulation_csv(text: str) -> tuple[tuple[str, ...], list[dict[str, float]]]:
    header, *rows = list(csv.reader(io.StringIO(text)))
    names = tuple(header[1:])
    return names, [dict(zip(names, map(float, row[1:]))) for row in rows]


def format_sccs(g: DirectedGraph, p: SccPartition) -> str:
    lines = []
    for k, comp in enumerate(p.components):
        kind = "nontrivial" if p.nontrivial[k] else "trivial"
        lines.append(f"SCC_{k}\t{kind}\t{', '.join(g.labels[v] for v in comp)}")
    return "\n".join(lines) + ("\n" if lines else "")


def format_order(d: CondensationDag) -> str:
    lines = []
    for position, k in enumerate(topological_order(d), start=1):
        meta = d.metanodes[k]
        mark = "*" if meta.nontrivial else " "
        lines.append(f"{position}\t{mark}SCC_{k}\t{', '.join(meta.labels)}")
    return "\n".join(lines) + ("\n" if lines else "")
