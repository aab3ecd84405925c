"""
Gadget Forge
Weighted grid gadgets encoding Grid Tiling values (connector, down main, up
main), their canonical edge sets and decoders, the diamond reduction and the
weighted-to-unit conversion
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from dsn.digraph import Digraph, DsnInstance, Edge, GraphError
from dsn.grid_tiling import Assignment, GridTilingInstance
from dsn.patterns import FLAWED_IN, FLAWED_OUT, PURE_IN, PURE_OUT

logger = logging.getLogger(__name__)

CONNECTOR = 'connector'
DOWN_MAIN = 'down_main'
UP_MAIN = 'up_main'
GRID = 'grid'
DIAMOND_VARIANTS = (PURE_OUT, FLAWED_OUT, PURE_IN, FLAWED_IN)


# ==================== Constants ====================

def connector_constants(n: int) -> Dict[str, int]:
    big_n = 3 * n
    return {'N': big_n, 'C_star': 4 * big_n ** 2 + (n - 1) * big_n + n - 1}


def main_constants(n: int) -> Dict[str, int]:
    m = 13 * n ** 2
    return {'M': m,
            'M_star': 2 * m ** 5 + m ** 4 + (n - 1) * m ** 3 + m ** 2 + (4 * n + 1) * (n + 1) - 12}


def diamond_constants(k: int, n: int) -> Dict[str, int]:
    constants = {'k': k, 'n': n}
    constants.update(connector_constants(n))
    constants.update(main_constants(n))
    constants['W_star'] = k * k * constants['M_star'] + k * (k + 1) * constants['C_star']
    constants['terminal_count'] = 2 * k * (k + 1) + k + 2
    return constants


# ==================== Building blocks ====================

@dataclass(frozen=True)
class GadgetPart:
    """One gadget copy inside a (possibly larger) graph"""
    kind: str
    n: int
    tag: str
    roles: Dict[str, Tuple[int, ...]]
    coords: Dict[str, int]
    edges: FrozenSet[Edge]

    def vertex(self, name: str) -> int:
        try:
            return self.coords[name]
        except KeyError:
            raise GraphError(f"{self.tag} has no vertex {name}")

    def edge(self, a: str, b: str) -> Edge:
        e = (self.vertex(a), self.vertex(b))
        if e not in self.edges:
            raise GraphError(f"{self.tag} has no edge {a}->{b}")
        return e


@dataclass
class GadgetBundle:
    """
    A generated graph with its named roles, constants and gadget parts

    instance is the DSN instance the bundle is solved as: the connectedness
    encoding for single gadgets, the reduction instance otherwise.
    """
    graph: Digraph
    kind: str
    n: int
    roles: Dict[str, Tuple[int, ...]]
    constants: Dict[str, int]
    parts: Dict[str, GadgetPart] = field(default_factory=dict)
    instance: Optional[DsnInstance] = None
    reversed: bool = False

    @property
    def part(self) -> GadgetPart:
        if len(self.parts) != 1:
            raise GraphError(f"{self.kind} bundle holds {len(self.parts)} gadgets")
        return next(iter(self.parts.values()))


class GraphBuilder:
    """Incrementally allocates labelled vertices and weighted edges"""

    def __init__(self):
        self.labels: List[str] = []
        self.weight: Dict[Edge, int] = {}
        self.order: List[Edge] = []

    def vertex(self, label: str) -> int:
        self.labels.append(label)
        return len(self.labels) - 1

    def edge(self, u: int, v: int, w: int):
        if (u, v) in self.weight:
            raise GraphError(f"duplicate edge ({self.labels[u]},{self.labels[v]})")
        self.weight[(u, v)] = w
        self.order.append((u, v))

    def mark(self) -> int:
        return len(self.order)

    def edges_since(self, mark: int) -> FrozenSet[Edge]:
        return frozenset(self.order[mark:])

    def graph(self) -> Digraph:
        return Digraph(len(self.labels), self.weight.keys(), self.weight, dict(enumerate(self.labels)))


def _attach(b: GraphBuilder, tag: str, coords: Dict[str, int], name: str,
            shared: Optional[Sequence[int]] = None, index: Optional[int] = None) -> int:
    v = shared[index - 1] if shared is not None else b.vertex(f"{tag}:{name}")
    coords[name] = v
    return v


def check_entries(entries: Iterable[Tuple[int, int]], n: int):
    for x, y in entries:
        if not (1 < x < n and 1 < y < n):
            raise GraphError(f"entry ({x},{y}) violates 1 < x,y < {n}")


# ==================== Connector gadget ====================

def connector_into(b: GraphBuilder, tag: str, n: int,
                   left: Optional[Sequence[int]] = None,
                   right: Optional[Sequence[int]] = None) -> GadgetPart:
    if n < 2:
        raise GraphError("connector gadgets need n >= 2")
    big_n = 3 * n
    coords: Dict[str, int] = {}
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            coords[f"x{i},{j}"] = b.vertex(f"{tag}:x{i},{j}")
    ps = [_attach(b, tag, coords, f"p{j}", left, j) for j in range(1, n + 1)]
    qs = [_attach(b, tag, coords, f"q{j}", right, j) for j in range(1, n + 1)]
    p = _attach(b, tag, coords, 'p')
    q = _attach(b, tag, coords, 'q')
    x = lambda i, j: coords[f"x{i},{j}"]

    start = b.mark()
    for j in range(1, n + 1):
        b.edge(ps[j - 1], x(1, j), big_n ** 2)
        b.edge(qs[j - 1], x(n, j), big_n ** 2)
    for i in range(1, n + 1):
        b.edge(x(i, n), p, big_n ** 2)
        b.edge(x(i, 1), q, big_n ** 2)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if j <= n - 1 and i + j >= n + 1:
                b.edge(x(i, j), x(i, j + 1), big_n)
            if j >= 2 and i + j <= n + 1:
                b.edge(x(i, j), x(i, j - 1), big_n)
            if i >= 2 and i + j > n + 1:
                b.edge(x(i, j), x(i - 1, j), 1)
            if i <= n - 1 and i + j < n + 1:
                b.edge(x(i, j), x(i + 1, j), 1)
    roles = {'left': tuple(ps), 'right': tuple(qs), 'p': (p,), 'q': (q,)}
    return GadgetPart(CONNECTOR, n, tag, roles, coords, b.edges_since(start))


def connector_part_canonical(part: GadgetPart, j: int) -> FrozenSet[Edge]:
    """The edge set representing j built from the gadget's own vertices"""
    n = part.n
    if not 1 <= j <= n:
        raise GraphError(f"j must lie in [1,{n}]")
    c = n + 1 - j
    names = [(f"p{j}", f"x1,{j}"), (f"q{j}", f"x{n},{j}"), (f"x{c},{n}", 'p'), (f"x{c},1", 'q')]
    names += [(f"x{i},{j}", f"x{i + 1},{j}") for i in range(1, n - j + 1)]
    names += [(f"x{i},{j}", f"x{i - 1},{j}") for i in range(n + 2 - j, n + 1)]
    names += [(f"x{c},{l}", f"x{c},{l + 1}") for l in range(j, n)]
    names += [(f"x{c},{l}", f"x{c},{l - 1}") for l in range(2, j + 1)]
    return frozenset(part.edge(a, b) for a, b in names)


def build_connector(n: int) -> GadgetBundle:
    b = GraphBuilder()
    part = connector_into(b, 'CG', n)
    graph = b.graph()
    bundle = GadgetBundle(graph, CONNECTOR, n, dict(part.roles), connector_constants(n), {'CG': part})
    bundle.instance = connectedness_instance(bundle)
    return bundle


def connector_canonical(n: int, j: int, bundle: Optional[GadgetBundle] = None) -> FrozenSet[Edge]:
    bundle = bundle or build_connector(n)
    return connector_part_canonical(bundle.part, j)


# ==================== Main gadgets ====================

def main_into(b: GraphBuilder, tag: str, entries: Iterable[Tuple[int, int]], n: int, down: bool,
              top: Optional[Sequence[int]] = None, left: Optional[Sequence[int]] = None,
              right: Optional[Sequence[int]] = None) -> GadgetPart:
    """
    Down (down=True) or up main gadget on a 2n x n^2 grid

    Rows run 1..n^2 bottom to top, grouped in n blocks of n rows.
    """
    entries = sorted(set(entries))
    check_entries(entries, n)
    m = 13 * n ** 2
    rows, cols = n * n, 2 * n
    coords: Dict[str, int] = {}
    for p in range(1, rows + 1):
        for i in range(1, cols + 1):
            coords[f"x{i},{p}"] = b.vertex(f"{tag}:x{i},{p}")
    ts = [_attach(b, tag, coords, f"t{i}", top, i) for i in range(1, n + 1)]
    bs = [_attach(b, tag, coords, f"b{i}") for i in range(1, n + 1)]
    ls = [_attach(b, tag, coords, f"l{j}", left, j) for j in range(1, n + 1)]
    lps = [_attach(b, tag, coords, f"lp{j}") for j in range(1, n + 1)]
    rs = [_attach(b, tag, coords, f"r{j}", right, j) for j in range(1, n + 1)]
    rps = [_attach(b, tag, coords, f"rp{j}") for j in range(1, n + 1)]
    x = lambda i, p: coords[f"x{i},{p}"]

    edges: Dict[Edge, int] = {}
    for i in range(1, n + 1):
        if down:
            edges[(ts[i - 1], x(i, rows))] = m ** 5
            edges[(x(n + i, 1), bs[i - 1])] = m ** 5
        else:
            edges[(bs[i - 1], x(n + i, 1))] = m ** 5
            edges[(x(i, rows), ts[i - 1])] = m ** 5
    for j in range(1, n + 1):
        edges[(lps[j - 1], ls[j - 1])] = m * j
        edges[(rps[j - 1], rs[j - 1])] = m ** 2 - m * j
        block = range((j - 1) * n + 1, j * n + 1)
        for p in block:
            edges[(x(1, p), lps[j - 1])] = p - (j - 1) * n
            edges[(x(cols, p), rps[j - 1])] = n + 1 - (p - (j - 1) * n)
            if down:
                edges[(x(n, p), x(n + 1, p))] = m ** 4
            else:
                edges[(x(n + 1, p), x(n, p))] = m ** 4
        top_row = j * n
        for p in block:
            for i in range(1, cols + 1):
                if down and p >= (j - 1) * n + 2:
                    edges[(x(i, p), x(i, p - 1))] = 4
                if not down and p <= top_row - 1:
                    edges[(x(i, p), x(i, p + 1))] = 4
            if down:
                for q in range(top_row + 1 - p, cols):
                    if q != n:
                        edges[(x(q, p), x(q + 1, p))] = 4
                if p <= top_row - 1:
                    for q in range(2, top_row + 2 - p):
                        edges[(x(q, p), x(q - 1, p))] = 4
            else:
                if p <= top_row - 1:
                    for q in range(2, n + 1):
                        edges[(x(q, p), x(q - 1, p))] = 4
                    for q in range(2, top_row + 2 - p):
                        edges[(x(n + q, p), x(n + q - 1, p))] = 4
                if p >= (j - 1) * n + 2:
                    for q in range(top_row + 1 - p, n):
                        edges[(x(n + q, p), x(n + q + 1, p))] = 4
    for block_index in range(1, n):
        for i in range(1, cols + 1):
            if down:
                edges[(x(i, block_index * n + 1), x(i, block_index * n))] = m ** 3
            else:
                edges[(x(i, block_index * n), x(i, block_index * n + 1))] = m ** 3

    for i, j in entries:
        row = j * n + 1 - i
        y = _attach(b, tag, coords, f"y{i},{j}")
        z = _attach(b, tag, coords, f"z{i},{j}")
        if down:
            del edges[(x(i, row + 1), x(i, row))]
            edges[(x(i, row + 1), y)] = 3
            edges[(y, x(i, row))] = 1
            del edges[(x(n + i, row), x(n + i, row - 1))]
            edges[(x(n + i, row), z)] = 3
            edges[(z, x(n + i, row - 1))] = 1
        else:
            del edges[(x(i, row), x(i, row + 1))]
            edges[(x(i, row), y)] = 3
            edges[(y, x(i, row + 1))] = 1
            del edges[(x(n + i, row - 1), x(n + i, row))]
            edges[(x(n + i, row - 1), z)] = 3
            edges[(z, x(n + i, row))] = 1
        edges[(y, x(i - 1, row))] = 2
        edges[(z, x(n + i + 1, row))] = 2

    start = b.mark()
    for (u, v) in sorted(edges):
        b.edge(u, v, edges[(u, v)])
    roles = {'top': tuple(ts), 'bottom': tuple(bs), 'left': tuple(ls), 'right': tuple(rs),
             'left_inner': tuple(lps), 'right_inner': tuple(rps)}
    return GadgetPart(DOWN_MAIN if down else UP_MAIN, n, tag, roles, coords, b.edges_since(start))


def main_part_canonical(part: GadgetPart, i: int, j: int) -> FrozenSet[Edge]:
    """The edge set representing (i,j); (i,j) must be an entry of the gadget's set"""
    n = part.n
    if f"y{i},{j}" not in part.coords:
        raise GraphError(f"({i},{j}) is not represented by {part.tag}")
    rows, row = n * n, j * n + 1 - i
    y, z = f"y{i},{j}", f"z{i},{j}"
    x = lambda a, p: f"x{a},{p}"
    names = [(x(1, row), f"lp{j}"), (f"lp{j}", f"l{j}"), (x(2 * n, row), f"rp{j}"), (f"rp{j}", f"r{j}")]
    if part.kind == DOWN_MAIN:
        names += [(f"t{i}", x(i, rows)), (x(n + i, 1), f"b{i}")]
        names += [(x(i, p), x(i, p - 1)) for p in range(j * n + 3 - i, rows + 1)]
        names += [(x(i, row + 1), y), (y, x(i, row)), (y, x(i - 1, row))]
        names += [(x(n + i, row), z), (z, x(n + i, row - 1)), (z, x(n + i + 1, row))]
        names += [(x(n + i, p), x(n + i, p - 1)) for p in range(2, row)]
        names += [(x(p, row), x(p - 1, row)) for p in range(2, i)]
        names += [(x(p, row), x(p + 1, row)) for p in range(i, 2 * n) if p != n + i]
    else:
        names += [(f"b{i}", x(n + i, 1)), (x(i, rows), f"t{i}")]
        names += [(x(n + i, p), x(n + i, p + 1)) for p in range(1, row - 1)]
        names += [(x(n + i, row - 1), z), (z, x(n + i, row)), (z, x(n + i + 1, row))]
        names += [(x(c, row), x(c + 1, row)) for c in range(n + i + 1, 2 * n)]
        names += [(x(c, row), x(c - 1, row)) for c in range(i + 1, n + i + 1)]
        names += [(x(i, row), y), (y, x(i, row + 1)), (y, x(i - 1, row))]
        names += [(x(c, row), x(c - 1, row)) for c in range(2, i)]
        names += [(x(i, p), x(i, p + 1)) for p in range(row + 1, rows)]
    return frozenset(part.edge(a, b) for a, b in names)


def _build_main(entries: Iterable[Tuple[int, int]], n: int, down: bool) -> GadgetBundle:
    b = GraphBuilder()
    tag = 'dMG' if down else 'uMG'
    part = main_into(b, tag, entries, n, down)
    bundle = GadgetBundle(b.graph(), part.kind, n, dict(part.roles), main_constants(n), {tag: part})
    bundle.instance = connectedness_instance(bundle)
    return bundle


def build_down_main(entries: Iterable[Tuple[int, int]], n: int) -> GadgetBundle:
    return _build_main(entries, n, True)


def build_up_main(entries: Iterable[Tuple[int, int]], n: int) -> GadgetBundle:
    return _build_main(entries, n, False)


def main_canonical(bundle: GadgetBundle, i: int, j: int) -> FrozenSet[Edge]:
    return main_part_canonical(bundle.part, i, j)


# ==================== Connectedness and decoding ====================

def _reach(edges: Iterable[Edge], sources: Iterable[int]) -> Set[int]:
    succ: Dict[int, List[int]] = {}
    for u, v in edges:
        succ.setdefault(u, []).append(v)
    seen = set(sources)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _as_part(gadget) -> GadgetPart:
    return gadget.part if isinstance(gadget, GadgetBundle) else gadget


def satisfies_connectedness(gadget, edges: Iterable[Edge]) -> bool:
    """Connectedness of a gadget, judged on the edge set restricted to the gadget"""
    part = _as_part(gadget)
    chosen = frozenset(edges) & part.edges
    roles = part.roles
    if part.kind == CONNECTOR:
        from_left, from_right = _reach(chosen, roles['left']), _reach(chosen, roles['right'])
        targets = roles['p'] + roles['q']
        return all(v in from_left and v in from_right for v in targets)
    if part.kind in (DOWN_MAIN, UP_MAIN):
        source, sink = ('top', 'bottom') if part.kind == DOWN_MAIN else ('bottom', 'top')
        seen = _reach(chosen, roles[source])
        return all(any(v in seen for v in roles[group]) for group in (sink, 'left', 'right'))
    raise GraphError(f"no connectedness property for {part.kind}")


def _used(chosen: FrozenSet[Edge], vertices: Sequence[int], outgoing: bool) -> List[int]:
    """1-based indices of role vertices with an incident edge in the set"""
    used = []
    for index, v in enumerate(vertices, start=1):
        if any((e[0] if outgoing else e[1]) == v for e in chosen):
            used.append(index)
    return used


def connector_decode(gadget, edges: Iterable[Edge]) -> Optional[int]:
    part = _as_part(gadget)
    if part.kind != CONNECTOR:
        raise GraphError(f"expected a connector gadget, got {part.kind}")
    chosen = frozenset(edges) & part.edges
    if not satisfies_connectedness(part, chosen):
        return None
    lefts = _used(chosen, part.roles['left'], True)
    rights = _used(chosen, part.roles['right'], True)
    if len(lefts) == 1 and lefts == rights:
        return lefts[0]
    return None


def main_decode(gadget, edges: Iterable[Edge]) -> Optional[Tuple[int, int]]:
    part = _as_part(gadget)
    if part.kind not in (DOWN_MAIN, UP_MAIN):
        raise GraphError(f"expected a main gadget, got {part.kind}")
    chosen = frozenset(edges) & part.edges
    if not satisfies_connectedness(part, chosen):
        return None
    if part.kind == DOWN_MAIN:
        sources = _used(chosen, part.roles['top'], True)
        sinks = _used(chosen, part.roles['bottom'], False)
    else:
        sources = _used(chosen, part.roles['bottom'], True)
        sinks = _used(chosen, part.roles['top'], False)
    lefts = _used(chosen, part.roles['left'], False)
    rights = _used(chosen, part.roles['right'], False)
    if len(sources) == 1 and sources == sinks and len(lefts) == 1 and lefts == rights:
        return sources[0], lefts[0]
    return None


def connectedness_instance(bundle: GadgetBundle) -> DsnInstance:
    """
    Single gadget as a DSN instance

    Group reachability becomes ordinary demands through zero-weight super
    vertices appended after the gadget's own vertices.
    """
    part = bundle.part
    g = bundle.graph
    n0 = g.vertex_count
    weight = {e: g.edge_weight(e) for e in g.edges}
    labels = dict(g.labels)
    roles = part.roles

    if part.kind == CONNECTOR:
        sigma_left, sigma_right = n0, n0 + 1
        labels.update({sigma_left: 'super_left', sigma_right: 'super_right'})
        for v in roles['left']:
            weight[(sigma_left, v)] = 0
        for v in roles['right']:
            weight[(sigma_right, v)] = 0
        p, q = roles['p'][0], roles['q'][0]
        terminals = (sigma_left, sigma_right, p, q)
        demands = {(s, t) for s in (sigma_left, sigma_right) for t in (p, q)}
        count = n0 + 2
    else:
        source, sink = ('top', 'bottom') if part.kind == DOWN_MAIN else ('bottom', 'top')
        sigma, sink_hub, left_hub, right_hub = n0, n0 + 1, n0 + 2, n0 + 3
        labels.update({sigma: 'super_source', sink_hub: f'super_{sink}',
                       left_hub: 'super_left', right_hub: 'super_right'})
        for v in roles[source]:
            weight[(sigma, v)] = 0
        for hub, group in ((sink_hub, sink), (left_hub, 'left'), (right_hub, 'right')):
            for v in roles[group]:
                weight[(v, hub)] = 0
        terminals = (sigma, sink_hub, left_hub, right_hub)
        demands = {(sigma, hub) for hub in (sink_hub, left_hub, right_hub)}
        count = n0 + 4

    graph = Digraph(count, weight.keys(), weight, labels)
    return DsnInstance(graph, terminals, frozenset(demands))


def lift_gadget_edges(bundle: GadgetBundle, edges: Iterable[Edge]) -> FrozenSet[Edge]:
    """Gadget edge set plus every zero-weight fan edge of the encoding"""
    inst = bundle.instance
    fans = inst.graph.edges - bundle.graph.edges
    return frozenset(edges) | fans


def restrict_to_gadget(bundle: GadgetBundle, edges: Iterable[Edge]) -> FrozenSet[Edge]:
    return frozenset(edges) & bundle.graph.edges


# ==================== Diamond reduction ====================

def build_diamond_reduction(gt: GridTilingInstance, variant: str = PURE_OUT) -> Tuple[DsnInstance, GadgetBundle]:
    """
    k^2 main gadgets (up in odd columns, down in even ones) glued by k(k+1)
    connectors; the demand graph is a diamond with roots r1 and r2

    In-variants reverse every edge; flawed variants add one more terminal
    adjacent to both roots.
    """
    if variant not in DIAMOND_VARIANTS:
        raise GraphError(f"unknown diamond variant {variant}")
    gt.check_interior()
    k, n = gt.k, gt.n
    b = GraphBuilder()
    parts: Dict[str, GadgetPart] = {}
    mains: Dict[Tuple[int, int], GadgetPart] = {}

    for i in range(1, k + 1):
        for j in range(1, k + 1):
            down = i % 2 == 0
            tag = f"{'dMG' if down else 'uMG'}{i},{j}"
            above = mains.get((i, j - 1))
            part = main_into(b, tag, gt.cell(i, j), n, down,
                             top=above.roles['bottom'] if above else None)
            mains[(i, j)] = part
            parts[tag] = part

    connectors: Dict[Tuple[int, int], GadgetPart] = {}
    for i in range(1, k + 2):
        for j in range(1, k + 1):
            tag = f"CG{i},{j}"
            left = mains[(i - 1, j)].roles['right'] if i >= 2 else None
            right = mains[(i, j)].roles['left'] if i <= k else None
            part = connector_into(b, tag, n, left, right)
            connectors[(i, j)] = part
            parts[tag] = part

    r1, r2 = b.vertex('r1'), b.vertex('r2')
    column_terminals = [b.vertex(f"t{i}") for i in range(1, k + 1)]
    for i in range(1, k + 1):
        t_i = column_terminals[i - 1]
        if i % 2 == 1:
            for v in mains[(i, 1)].roles['top']:
                b.edge(v, t_i, 0)
            b.edge(r1, t_i, 0)
            for v in mains[(i, k)].roles['bottom']:
                b.edge(r2, v, 0)
        else:
            for v in mains[(i, k)].roles['bottom']:
                b.edge(v, t_i, 0)
            b.edge(r2, t_i, 0)
            for v in mains[(i, 1)].roles['top']:
                b.edge(r1, v, 0)
    last = r1 if k % 2 == 1 else r2
    for j in range(1, k + 1):
        for v in connectors[(1, j)].roles['left']:
            b.edge(r1, v, 0)
        for v in connectors[(k + 1, j)].roles['right']:
            b.edge(last, v, 0)

    leaves = []
    for j in range(1, k + 1):
        for i in range(1, k + 2):
            leaves += [connectors[(i, j)].roles['p'][0], connectors[(i, j)].roles['q'][0]]
    leaves += column_terminals

    flaw = None
    if variant in (FLAWED_OUT, FLAWED_IN):
        flaw = b.vertex('flaw')
    graph = b.graph()
    reversed_ = variant in (PURE_IN, FLAWED_IN)
    if reversed_:
        graph = graph.reverse()
    demands = {(r, leaf) for r in (r1, r2) for leaf in leaves}
    if reversed_:
        demands = {(v, u) for u, v in demands}
    if flaw is not None:
        extra = [(flaw, r1), (flaw, r2)] if variant == FLAWED_OUT else [(r1, flaw), (r2, flaw)]
        weight = {e: graph.edge_weight(e) for e in graph.edges}
        weight.update({e: 0 for e in extra})
        graph = Digraph(graph.vertex_count, weight.keys(), weight, graph.labels)
        demands |= set(extra)

    terminals = [r1, r2] + leaves + ([flaw] if flaw is not None else [])
    instance = DsnInstance(graph, tuple(terminals), frozenset(demands))
    roles = {'r1': (r1,), 'r2': (r2,), 'column_terminals': tuple(column_terminals),
             'terminals': tuple(terminals)}
    if flaw is not None:
        roles['flaw'] = (flaw,)
    bundle = GadgetBundle(graph, variant, n, roles, diamond_constants(k, n), parts, instance, reversed_)
    logger.info("diamond reduction %s: k=%d n=%d, %d vertices, %d edges, %d terminals",
                variant, k, n, graph.vertex_count, len(graph.edges), len(terminals))
    return instance, bundle


def _oriented(bundle: GadgetBundle, edges: Iterable[Edge]) -> FrozenSet[Edge]:
    chosen = frozenset(edges)
    return frozenset((v, u) for u, v in chosen) if bundle.reversed else chosen


def diamond_forward_solution(bundle: GadgetBundle, assignment: Assignment) -> FrozenSet[Edge]:
    """Canonical gadget sets for a Grid Tiling solution plus every zero-weight edge"""
    chosen: Set[Edge] = set()
    for tag, part in bundle.parts.items():
        if part.kind == CONNECTOR:
            i, j = _part_index(tag)
            column = min(i, bundle.constants['k'])
            chosen |= connector_part_canonical(part, assignment[(column, j)][1])
        else:
            i, j = _part_index(tag)
            x, y = assignment[(i, j)]
            chosen |= main_part_canonical(part, x, y)
    oriented = _oriented(bundle, chosen)
    zero = {e for e in bundle.graph.edges if bundle.graph.edge_weight(e) == 0}
    return frozenset(oriented | zero)


def diamond_decode(bundle: GadgetBundle, edges: Iterable[Edge]) -> Optional[Assignment]:
    """Read a Grid Tiling assignment off a reduction solution, or None"""
    chosen = _oriented(bundle, edges)
    assignment: Assignment = {}
    for tag, part in bundle.parts.items():
        if part.kind == CONNECTOR:
            if connector_decode(part, chosen) is None:
                return None
        else:
            pair = main_decode(part, chosen)
            if pair is None:
                return None
            assignment[_part_index(tag)] = pair
    return assignment


def _part_index(tag: str) -> Tuple[int, int]:
    digits = tag.lstrip('abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ')
    i, j = digits.split(',')
    return int(i), int(j)


# ==================== Weights to unit ====================

@dataclass(frozen=True)
class UnitConversion:
    """Unweighted instance replacing every weight-w edge by a path of w*n+1 edges"""
    instance: DsnInstance
    original_vertices: int
    paths: Dict[Edge, Tuple[Edge, ...]]

    def threshold(self, weight: int) -> int:
        return weight * self.original_vertices + self.original_vertices

    def lift(self, edges: Iterable[Edge]) -> FrozenSet[Edge]:
        lifted: Set[Edge] = set()
        for e in edges:
            lifted.update(self.paths[e])
        return frozenset(lifted)

    def project(self, edges: Iterable[Edge]) -> FrozenSet[Edge]:
        """Original edges whose whole path is present"""
        chosen = frozenset(edges)
        return frozenset(e for e, path in self.paths.items() if chosen.issuperset(path))


def weights_to_unit(inst: DsnInstance, max_vertices: int = 200_000) -> UnitConversion:
    g = inst.graph
    n = g.vertex_count
    added = sum(g.edge_weight(e) * n for e in g.edges)
    if n + added > max_vertices:
        raise GraphError(f"unit conversion would create {n + added} vertices (limit {max_vertices})")
    edges: List[Edge] = []
    paths: Dict[Edge, Tuple[Edge, ...]] = {}
    next_id = n
    for (u, v) in g.sorted_edges():
        inner = list(range(next_id, next_id + g.edge_weight((u, v)) * n))
        next_id += len(inner)
        chain = [u] + inner + [v]
        path = tuple(zip(chain, chain[1:]))
        paths[(u, v)] = path
        edges.extend(path)
    graph = Digraph(next_id, edges, None, g.labels)
    return UnitConversion(DsnInstance(graph, inst.terminals, inst.demands), n, paths)
