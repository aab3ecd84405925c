"""
Instance file layer
Line-oriented text format for DSN instances, solution stanzas, gadget
constants and Grid Tiling instances
"""
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from dsn.digraph import Digraph, DsnInstance, Edge, GraphError
from dsn.grid_tiling import GridTilingInstance


class InstanceParseError(GraphError):
    """Malformed instance text; carries the 1-based line number"""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class InstanceDocument:
    """Everything a file in the instance format can carry"""
    instance: DsnInstance
    solution: Optional[FrozenSet[Edge]] = None
    solution_weight: Optional[int] = None
    constants: Dict[str, int] = field(default_factory=dict)


def _strip(line: str) -> str:
    return line.split('#', 1)[0].strip()


def _int(token: str, line_no: int, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise InstanceParseError(line_no, f"{what} must be an integer, got {token!r}")
    if value < 0:
        raise InstanceParseError(line_no, f"{what} must be non-negative, got {value}")
    return value


# ==================== Parsing ====================

def parse_document(text: str) -> InstanceDocument:
    """Parse instance text including optional solution stanza and constants"""
    n: Optional[int] = None
    edges: Dict[Edge, Optional[int]] = {}
    labels: Dict[int, str] = {}
    terminals: List[int] = []
    demands: List[Edge] = []
    solution: Optional[set] = None
    solution_weight: Optional[int] = None
    constants: Dict[str, int] = {}

    def vertex(token: str, line_no: int) -> int:
        if n is None:
            raise InstanceParseError(line_no, "'nodes' must come before any vertex reference")
        v = _int(token, line_no, "vertex id")
        if v >= n:
            raise InstanceParseError(line_no, f"vertex {v} outside [0,{n})")
        return v

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = line.split()
        keyword = parts[0]

        if keyword == 'nodes':
            if len(parts) != 2:
                raise InstanceParseError(line_no, "expected 'nodes <n>'")
            if n is not None:
                raise InstanceParseError(line_no, "duplicate 'nodes' line")
            n = _int(parts[1], line_no, "node count")

        elif keyword == 'edge':
            if len(parts) not in (3, 4):
                raise InstanceParseError(line_no, "expected 'edge <u> <v> [w]'")
            u, v = vertex(parts[1], line_no), vertex(parts[2], line_no)
            if u == v:
                raise InstanceParseError(line_no, f"self-loop at {u}")
            if (u, v) in edges:
                raise InstanceParseError(line_no, f"duplicate edge ({u},{v})")
            edges[(u, v)] = _int(parts[3], line_no, "weight") if len(parts) == 4 else None

        elif keyword == 'terminal':
            if len(parts) != 2:
                raise InstanceParseError(line_no, "expected 'terminal <v>'")
            t = vertex(parts[1], line_no)
            if t in terminals:
                raise InstanceParseError(line_no, f"duplicate terminal {t}")
            terminals.append(t)

        elif keyword == 'demand':
            if len(parts) != 3:
                raise InstanceParseError(line_no, "expected 'demand <u> <v>'")
            u, v = vertex(parts[1], line_no), vertex(parts[2], line_no)
            if u not in terminals or v not in terminals:
                raise InstanceParseError(line_no, f"demand ({u},{v}) uses an undeclared terminal")
            if u == v:
                raise InstanceParseError(line_no, f"demand self-loop at {u}")
            if (u, v) in demands:
                raise InstanceParseError(line_no, f"duplicate demand ({u},{v})")
            demands.append((u, v))

        elif keyword == 'label':
            if len(parts) < 3:
                raise InstanceParseError(line_no, "expected 'label <v> <string>'")
            v = vertex(parts[1], line_no)
            labels[v] = line.split(None, 2)[2]

        elif keyword == 'solution':
            if len(parts) != 3 or parts[1] != 'weight':
                raise InstanceParseError(line_no, "expected 'solution weight <W>'")
            if solution is not None:
                raise InstanceParseError(line_no, "duplicate solution stanza")
            solution = set()
            solution_weight = _int(parts[2], line_no, "solution weight")

        elif keyword == 'use':
            if solution is None:
                raise InstanceParseError(line_no, "'use' outside a solution stanza")
            if len(parts) != 3:
                raise InstanceParseError(line_no, "expected 'use <u> <v>'")
            e = (vertex(parts[1], line_no), vertex(parts[2], line_no))
            if e not in edges:
                raise InstanceParseError(line_no, f"solution edge {e} not in graph")
            solution.add(e)

        elif keyword == 'const':
            if len(parts) != 3:
                raise InstanceParseError(line_no, "expected 'const <NAME> <value>'")
            constants[parts[1]] = _int(parts[2], line_no, "constant")

        else:
            raise InstanceParseError(line_no, f"unknown keyword {keyword!r}")

    if n is None:
        raise InstanceParseError(0, "missing 'nodes' line")

    weighted = any(w is not None for w in edges.values())
    weight = {e: (1 if w is None else w) for e, w in edges.items()} if weighted else None
    graph = Digraph(n, edges.keys(), weight, labels)
    instance = DsnInstance(graph, tuple(terminals), frozenset(demands))
    return InstanceDocument(
        instance=instance,
        solution=frozenset(solution) if solution is not None else None,
        solution_weight=solution_weight,
        constants=constants,
    )


def parse_instance(text: str) -> DsnInstance:
    return parse_document(text).instance


# ==================== Serialization ====================

def _label_text(v: int, tag: str) -> str:
    """A label as written; it must read back unchanged"""
    if '#' in tag or ' '.join(tag.split()) != tag:
        raise GraphError(f"label {tag!r} on vertex {v} cannot be written; "
                         "labels may not contain '#' or irregular whitespace")
    return tag


def serialize_instance(inst: DsnInstance) -> str:
    """Canonical text: nodes, labels, sorted edges, terminals, demands"""
    g = inst.graph
    lines = [f"nodes {g.vertex_count}"]
    for v in sorted(g.labels):
        lines.append(f"label {v} {_label_text(v, g.labels[v])}")
    for u, v in g.sorted_edges():
        if g.weighted:
            lines.append(f"edge {u} {v} {g.edge_weight((u, v))}")
        else:
            lines.append(f"edge {u} {v}")
    for t in inst.terminals:
        lines.append(f"terminal {t}")
    # demands follow terminal order, then target order
    order = {t: i for i, t in enumerate(inst.terminals)}
    for u, v in sorted(inst.demands, key=lambda e: (order[e[0]], order[e[1]])):
        lines.append(f"demand {u} {v}")
    return "\n".join(lines) + "\n"


def serialize_document(doc: InstanceDocument) -> str:
    text = serialize_instance(doc.instance)
    extra = []
    if doc.solution is not None:
        weight = doc.solution_weight
        if weight is None:
            weight = doc.instance.graph.total_weight(doc.solution)
        extra.append(f"solution weight {weight}")
        for u, v in sorted(doc.solution):
            extra.append(f"use {u} {v}")
    for name in sorted(doc.constants):
        extra.append(f"const {name} {doc.constants[name]}")
    if extra:
        text += "\n".join(extra) + "\n"
    return text


def load_document(path) -> InstanceDocument:
    return parse_document(Path(path).read_text(encoding='utf-8'))


def load_instance(path) -> DsnInstance:
    return load_document(path).instance


def save_document(path, doc: InstanceDocument):
    Path(path).write_text(serialize_document(doc), encoding='utf-8')


# ==================== Grid Tiling files ====================

def parse_grid_tiling(text: str) -> GridTilingInstance:
    """
    Parse 'k K', 'n N' and 'set i j x y' lines

    Cell (i,j) is column i, row j; repeated 'set' lines add entries.
    """
    k: Optional[int] = None
    n: Optional[int] = None
    cells: Dict[Tuple[int, int], set] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = line.split()
        if parts[0] in ('k', 'n') and len(parts) == 2:
            value = _int(parts[1], line_no, parts[0])
            if value < 1:
                raise InstanceParseError(line_no, f"{parts[0]} must be positive")
            if parts[0] == 'k':
                k = value
            else:
                n = value
        elif parts[0] == 'set' and len(parts) == 5:
            if k is None or n is None:
                raise InstanceParseError(line_no, "'k' and 'n' must precede 'set' lines")
            i, j, x, y = (_int(p, line_no, "set field") for p in parts[1:])
            if not (1 <= i <= k and 1 <= j <= k):
                raise InstanceParseError(line_no, f"cell ({i},{j}) outside the {k}x{k} grid")
            if not (1 <= x <= n and 1 <= y <= n):
                raise InstanceParseError(line_no, f"entry ({x},{y}) outside [1,{n}]^2")
            cells.setdefault((i, j), set()).add((x, y))
        else:
            raise InstanceParseError(line_no, f"cannot parse {line!r}")
    if k is None or n is None:
        raise InstanceParseError(0, "missing 'k' or 'n'")
    try:
        return GridTilingInstance.from_cells(k, n, cells)
    except GraphError as e:
        raise InstanceParseError(0, str(e))


def serialize_grid_tiling(gt: GridTilingInstance) -> str:
    lines = [f"k {gt.k}", f"n {gt.n}"]
    for j in range(1, gt.k + 1):
        for i in range(1, gt.k + 1):
            for x, y in sorted(gt.cell(i, j)):
                lines.append(f"set {i} {j} {x} {y}")
    return "\n".join(lines) + "\n"


def load_grid_tiling(path) -> GridTilingInstance:
    return parse_grid_tiling(Path(path).read_text(encoding='utf-8'))
