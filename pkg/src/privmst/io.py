"""Plain-text file formats.

Edge list: one ``u v w`` record per line (0-based node ids, weight written
with 17 significant digits so it round-trips exactly).  Lines starting with
``#`` are comments; a ``# nodes: N`` comment pins the node count so isolated
trailing nodes survive a round trip.

Partition: one ``node_id cluster_label`` line per node.
Coordinates: one ``node_id x y`` line per node.
Table: ``# key: value`` metadata lines, a tab-separated header, then rows.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .graph import GraphError, NodePartition, WeightedGraph

_NODES_RE = re.compile(r"#\s*nodes\s*:\s*(\d+)")


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def _records(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                yield lineno, text, None
                continue
            yield lineno, text, text.split()


def write_edge_list(path: str | os.PathLike, g: WeightedGraph) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes: {g.node_count}\n")
        fh.write(f"# mu: {format_float(g.weights.mu)}\n")
        for (u, v), w in zip(g.edges, g.w):
            fh.write(f"{u} {v} {format_float(w)}\n")


def read_edge_list(path: str | os.PathLike, mu: float | None = None) -> WeightedGraph:
    node_count = None
    file_mu = None
    edges = []
    for lineno, text, fields in _records(path):
        if fields is None:
            m = _NODES_RE.match(text)
            if m:
                node_count = int(m.group(1))
            elif text.startswith("# mu:"):
                file_mu = float(text.split(":", 1)[1])
            continue
        if len(fields) != 3:
            raise GraphError(f"{path}:{lineno}: expected 'u v w', got {text!r}")
        try:
            edges.append((int(fields[0]), int(fields[1]), float(fields[2])))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: cannot parse {text!r}") from None
    if not edges and node_count is None:
        raise GraphError(f"{path}: no edges")
    if node_count is None:
        node_count = 1 + max(max(u, v) for u, v, _ in edges)
    mu = mu if mu is not None else (file_mu if file_mu is not None else 0.1)
    return WeightedGraph.from_edges(node_count, edges, mu=mu)


def write_partition(path: str | os.PathLike, p: NodePartition) -> None:
    with open(path, "w") as fh:
        for v, k in enumerate(p.assignment.tolist()):
            fh.write(f"{v} {k}\n")


def read_partition(path: str | os.PathLike) -> NodePartition:
    rows = {}
    for lineno, text, fields in _records(path):
        if fields is None:
            continue
        if len(fields) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'node_id cluster_label'")
        v, k = int(fields[0]), int(fields[1])
        if v in rows:
            raise GraphError(f"{path}:{lineno}: node {v} listed twice")
        rows[v] = k
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise GraphError(f"{path}: node ids must be 0..{n - 1}")
    return NodePartition(np.array([rows[v] for v in range(n)]))


def write_coordinates(path: str | os.PathLike, positions: np.ndarray) -> None:
    with open(path, "w") as fh:
        for v, (x, y) in enumerate(np.asarray(positions)):
            fh.write(f"{v} {format_float(x)} {format_float(y)}\n")


def read_coordinates(path: str | os.PathLike) -> np.ndarray:
    rows = [(int(f[0]), float(f[1]), float(f[2])) for _, _, f in _records(path) if f is not None]
    out = np.zeros((len(rows), 2))
    for v, x, y in rows:
        out[v] = x, y
    return out


TABLE_FORMAT = "privmst.table"
TABLE_VERSION = 1


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_table(path: str | os.PathLike, columns, rows, meta: dict | None = None) -> None:
    """Tab-separated table preceded by a ``#``-prefixed ``key: value`` metadata block."""
    columns = list(columns)
    with open(path, "w") as fh:
        fh.write(f"# format: {TABLE_FORMAT}\n# version: {TABLE_VERSION}\n")
        for k, v in (meta or {}).items():
            fh.write(f"# {k}: {_cell(v)}\n")
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
            fh.write("\t".join(_cell(x) for x in row) + "\n")


def read_table(path: str | os.PathLike) -> tuple[dict, list[str], list[list[str]]]:
    """Return ``(meta, columns, rows)``; cells are left as strings."""
    meta, columns, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
            elif columns is None:
                columns = line.split("\t")
            elif line:
                rows.append(line.split("\t"))
    if meta.get("format") != TABLE_FORMAT:
        raise GraphError(f"{path}: not a {TABLE_FORMAT} file")
    return meta, columns or [], rows
