"""Static drawings of compiled circuits as text and Graphviz dot.

Heap wires start as ``|0>``; garbage wires end in ``#`` (text) or a
"discard" node (dot), which is where the partial trace happens.
"""

from __future__ import annotations

import numpy as np

from .fqc import H, MCU, X, FqcMorphism, Permute

_NAMED = {"X": X, "H": H, "Z": np.diag([1, -1]).astype(complex)}


def gate_name(u: np.ndarray) -> str:
    for name, m in _NAMED.items():
        if np.allclose(u, m, atol=1e-12):
            return name
    return "U"


def _labels(m: FqcMorphism, input_names: list[str] | None = None):
    n = m.wires
    names = list(input_names or [])
    left = [names[i] if i < len(names) else f"in{i}" for i in range(m.in_wires)]
    left += ["|0>"] * m.heap_wires
    right = [f"out{i}" for i in range(m.out_wires)] + ["#"] * m.garbage_wires
    return left[:n], right


def render_ascii(m: FqcMorphism, input_names: list[str] | None = None) -> str:
    """One text row per wire; ``*``/``o`` are controls on ``|1>``/``|0>``."""
    n = m.wires
    left, right = _labels(m, input_names)
    lw = max([len(s) for s in left] + [1])
    cols: list[list[str]] = []
    for g in m.circuit.gates:
        col = ["---"] * n
        if isinstance(g, MCU):
            for w, pol in g.controls:
                col[w] = "-*-" if pol else "-o-"
            col[g.target] = f"[{gate_name(g.u)}]"
            ws = g.wires()
            for w in range(min(ws), max(ws)):
                if col[w] == "---":
                    col[w] = "-|-"
        else:
            for i, j in enumerate(g.mapping):
                if i != j:
                    col[i] = f">{j}" + ("-" if j < 10 else "")
        cols.append(col)
    rows = []
    for w in range(n):
        body = "-".join(c[w] for c in cols) if cols else ""
        rows.append(f"{left[w]:>{lw}} --{body}-- {right[w]}")
    return "\n".join(rows) + "\n"


def render_dot(m: FqcMorphism, name: str = "circuit", input_names: list[str] | None = None) -> str:
    left, right = _labels(m, input_names)
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", "  node [fontname=monospace];"]
    current = []
    for w in range(m.wires):
        node = f"w{w}_start"
        shape = "plaintext"
        lines.append(f'  {node} [label="{left[w]}", shape={shape}];')
        current.append(node)
    for k, g in enumerate(m.circuit.gates):
        if isinstance(g, Permute):
            nxt = list(current)
            for i, j in enumerate(g.mapping):
                nxt[j] = current[i]
            current = nxt
            continue
        node = f"g{k}"
        ctl = " ".join(f"{'c' if p else 'n'}{w}" for w, p in g.controls)
        label = f"{gate_name(g.u)}@{g.target}" + (f"\\n{ctl}" if ctl else "")
        lines.append(f'  {node} [label="{label}", shape=box];')
        for w in g.wires():
            lines.append(f'  {current[w]} -> {node} [label="{w}"];')
            current[w] = node
    for w in range(m.wires):
        end = f"w{w}_end"
        if w < m.out_wires:
            lines.append(f'  {end} [label="{right[w]}", shape=plaintext];')
        else:
            lines.append(f'  {end} [label="discard", shape=point];')
        lines.append(f"  {current[w]} -> {end};")
    lines.append("}")
    return "\n".join(lines) + "\n"
