"""
Grid Tiling Reductions
The grid main gadget MG with its matching demands, and the two reductions
wrapping it into hard matching and biclique demand patterns
"""
import logging
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from dsn.digraph import Digraph, DsnInstance, Edge, GraphError
from dsn.gadgets import GRID, GadgetBundle, GadgetPart, GraphBuilder, check_entries
from dsn.grid_tiling import Assignment, GridTilingInstance
from dsn.patterns import MATCHING, MatchingFlags, generate_hard_pattern

logger = logging.getLogger(__name__)

MG = 'mg'
MATCHING_REDUCTION = 'matching_reduction'
BICLIQUE_REDUCTION = 'biclique_reduction'
BICLIQUE_VARIANTS = ('plain', 'source', 'sink', 'both')

PORT_WEIGHT = 2
GRID_WEIGHT = 2


def mg_constants(k: int, n: int) -> Dict[str, int]:
    delta = 5 * n ** 2
    b_star = 2 * k * (delta * (n + 1) + 2 * (k + 1) + 2 * k * (n - 1))
    return {'k': k, 'n': n, 'Delta': delta, 'B_star': b_star, 'target': b_star - k * k}


# ==================== G(S) grids ====================

def grid_into(b: GraphBuilder, tag: str, entries, n: int) -> GadgetPart:
    """
    n x n grid with rightward and downward edges of weight 2

    Row 1 is the top row. Each entry (c,r) subdivides the edge entering
    x_{c,r} from the left by y_{c,r}, which is also entered from x_{c,r-1}.
    """
    entries = sorted(set(entries))
    check_entries(entries, n)
    coords: Dict[str, int] = {}
    for r in range(1, n + 1):
        for c in range(1, n + 1):
            coords[f"x{c},{r}"] = b.vertex(f"{tag}:x{c},{r}")
    x = lambda c, r: coords[f"x{c},{r}"]

    edges: Dict[Edge, int] = {}
    for r in range(1, n + 1):
        for c in range(1, n + 1):
            if c < n:
                edges[(x(c, r), x(c + 1, r))] = GRID_WEIGHT
            if r < n:
                edges[(x(c, r), x(c, r + 1))] = GRID_WEIGHT
    for c, r in entries:
        y = b.vertex(f"{tag}:y{c},{r}")
        coords[f"y{c},{r}"] = y
        del edges[(x(c - 1, r), x(c, r))]
        edges[(x(c - 1, r), y)] = 1
        edges[(y, x(c, r))] = 1
        edges[(x(c, r - 1), y)] = 1

    start = b.mark()
    for e in sorted(edges):
        b.edge(e[0], e[1], edges[e])
    roles = {'left': tuple(x(1, r) for r in range(1, n + 1)),
             'right': tuple(x(n, r) for r in range(1, n + 1)),
             'top': tuple(x(c, 1) for c in range(1, n + 1)),
             'bottom': tuple(x(c, n) for c in range(1, n + 1))}
    return GadgetPart(GRID, n, tag, roles, coords, b.edges_since(start))


def _row_path(part: GadgetPart, r: int) -> Set[Edge]:
    chosen = set()
    for c in range(1, part.n):
        shortcut = part.coords.get(f"y{c + 1},{r}")
        if shortcut is None:
            chosen.add(part.edge(f"x{c},{r}", f"x{c + 1},{r}"))
        else:
            chosen.add(part.edge(f"x{c},{r}", f"y{c + 1},{r}"))
            chosen.add(part.edge(f"y{c + 1},{r}", f"x{c + 1},{r}"))
    return chosen


def _column_path(part: GadgetPart, c: int, meet: int) -> Set[Edge]:
    """Top-to-bottom path down column c entering row meet through the shortcut"""
    chosen = set()
    for r in range(1, part.n):
        if r + 1 == meet:
            chosen.add(part.edge(f"x{c},{r}", f"y{c},{meet}"))
            chosen.add(part.edge(f"y{c},{meet}", f"x{c},{meet}"))
        else:
            chosen.add(part.edge(f"x{c},{r}", f"x{c},{r + 1}"))
    return chosen


# ==================== Main gadget MG ====================

def _mg_into(b: GraphBuilder, gt: GridTilingInstance,
             names: Optional[Dict[str, str]] = None) -> Tuple[Dict[str, GadgetPart], Dict[str, Tuple[int, ...]]]:
    gt.check_interior()
    names = names or {letter: letter for letter in 'abcd'}
    k, n = gt.k, gt.n
    delta = 5 * n ** 2
    parts: Dict[str, GadgetPart] = {}
    grids: Dict[Tuple[int, int], GadgetPart] = {}
    for j in range(1, k + 1):
        for i in range(1, k + 1):
            part = grid_into(b, f"G{i},{j}", gt.cell(i, j), n)
            grids[(i, j)] = part
            parts[part.tag] = part

    for j in range(1, k + 1):
        for i in range(1, k + 1):
            for index in range(n):
                if i < k:
                    b.edge(grids[(i, j)].roles['right'][index], grids[(i + 1, j)].roles['left'][index], GRID_WEIGHT)
                if j < k:
                    b.edge(grids[(i, j)].roles['bottom'][index], grids[(i, j + 1)].roles['top'][index], GRID_WEIGHT)

    roles: Dict[str, Tuple[int, ...]] = {}
    for letter in 'abcd':
        roles[letter] = tuple(b.vertex(f"{names[letter]}{m}") for m in range(1, k + 1))
    for m in range(1, k + 1):
        row_in, row_out, col_in, col_out = [], [], [], []
        for index in range(1, n + 1):
            port = b.vertex(f"a{m}:port{index}")
            b.edge(roles['a'][m - 1], port, delta * (n + 1 - index))
            b.edge(port, grids[(1, m)].roles['left'][index - 1], PORT_WEIGHT)
            row_in.append(port)
            port = b.vertex(f"b{m}:port{index}")
            b.edge(grids[(k, m)].roles['right'][index - 1], port, PORT_WEIGHT)
            b.edge(port, roles['b'][m - 1], delta * index)
            row_out.append(port)
            port = b.vertex(f"c{m}:port{index}")
            b.edge(roles['c'][m - 1], port, delta * (n + 1 - index))
            b.edge(port, grids[(m, 1)].roles['top'][index - 1], PORT_WEIGHT)
            col_in.append(port)
            port = b.vertex(f"d{m}:port{index}")
            b.edge(grids[(m, k)].roles['bottom'][index - 1], port, PORT_WEIGHT)
            b.edge(port, roles['d'][m - 1], delta * index)
            col_out.append(port)
        roles[f"a{m}_ports"] = tuple(row_in)
        roles[f"b{m}_ports"] = tuple(row_out)
        roles[f"c{m}_ports"] = tuple(col_in)
        roles[f"d{m}_ports"] = tuple(col_out)
    return parts, roles


def _mg_bundle(b: GraphBuilder, gt: GridTilingInstance, kind: str, parts, roles) -> GadgetBundle:
    return GadgetBundle(b.graph(), kind, gt.n, roles, mg_constants(gt.k, gt.n), parts)


def build_mg(gt: GridTilingInstance) -> GadgetBundle:
    """MG with its induced matching a_j -> b_j, c_i -> d_i as the demand"""
    b = GraphBuilder()
    parts, roles = _mg_into(b, gt)
    bundle = _mg_bundle(b, gt, MG, parts, roles)
    terminals = roles['a'] + roles['b'] + roles['c'] + roles['d']
    demands = {(roles['a'][m], roles['b'][m]) for m in range(gt.k)}
    demands |= {(roles['c'][m], roles['d'][m]) for m in range(gt.k)}
    bundle.instance = DsnInstance(bundle.graph, terminals, frozenset(demands))
    return bundle


def mg_canonical(bundle: GadgetBundle, assignment: Assignment) -> FrozenSet[Edge]:
    """
    Row and column paths of a Grid Tiling solution; each gadget shares one
    shortcut edge between its row and column path
    """
    k = bundle.constants['k']
    g = bundle.graph
    chosen: Set[Edge] = set()
    ys = [assignment[(1, j)][1] for j in range(1, k + 1)]
    xs = [assignment[(i, 1)][0] for i in range(1, k + 1)]
    for (i, j), (x, y) in assignment.items():
        if x != xs[i - 1] or y != ys[j - 1]:
            raise GraphError(f"assignment breaks consistency at cell ({i},{j})")
        part = bundle.parts[f"G{i},{j}"]
        if f"y{x},{y}" not in part.coords:
            raise GraphError(f"({x},{y}) is not an entry of cell ({i},{j})")
        chosen |= _row_path(part, y)
        chosen |= _column_path(part, x, y)
    for m in range(1, k + 1):
        y, x = ys[m - 1], xs[m - 1]
        row = [bundle.parts[f"G{i},{m}"].vertex(f"x{c},{y}") for i in range(1, k + 1) for c in (1, bundle.n)]
        column = [bundle.parts[f"G{m},{j}"].vertex(f"x{x},{r}") for j in range(1, k + 1) for r in (1, bundle.n)]
        a_port, b_port = bundle.roles[f"a{m}_ports"][y - 1], bundle.roles[f"b{m}_ports"][y - 1]
        c_port, d_port = bundle.roles[f"c{m}_ports"][x - 1], bundle.roles[f"d{m}_ports"][x - 1]
        path = [(bundle.roles['a'][m - 1], a_port), (a_port, row[0]), (row[-1], b_port),
                (b_port, bundle.roles['b'][m - 1]), (bundle.roles['c'][m - 1], c_port), (c_port, column[0]),
                (column[-1], d_port), (d_port, bundle.roles['d'][m - 1])]
        path += [(row[q], row[q + 1]) for q in range(1, len(row) - 1, 2)]
        path += [(column[q], column[q + 1]) for q in range(1, len(column) - 1, 2)]
        for e in path:
            if e not in g.edges:
                raise GraphError(f"missing frame edge {e}")
        chosen.update(path)
    return frozenset(chosen)


def mg_decode(bundle: GadgetBundle, edges) -> Optional[Dict[str, Tuple[int, ...]]]:
    """Row and column values read off the port edges; None unless each fan uses one port"""
    chosen = frozenset(edges)
    k = bundle.constants['k']
    values: Dict[str, List[int]] = {'rows': [], 'columns': []}
    for m in range(1, k + 1):
        for letter, key, outgoing in (('a', 'rows', True), ('c', 'columns', True)):
            hub = bundle.roles[letter][m - 1]
            used = [index for index, port in enumerate(bundle.roles[f"{letter}{m}_ports"], start=1)
                    if (hub, port) in chosen]
            if len(used) != 1:
                return None
            values[key].append(used[0])
    return {key: tuple(v) for key, v in values.items()}


def forward_solution(bundle: GadgetBundle, assignment: Assignment) -> FrozenSet[Edge]:
    """MG canonical solution plus every zero-weight edge outside MG"""
    zero = {e for e in bundle.graph.edges if bundle.graph.edge_weight(e) == 0}
    return mg_canonical(bundle, assignment) | frozenset(zero)


def restrict_to_mg(bundle: GadgetBundle, edges) -> FrozenSet[Edge]:
    g = bundle.graph
    return frozenset(e for e in edges if g.edge_weight(e) > 0)


# ==================== Hard matching reduction ====================

MATCHING_NAMES = {'a': 'W', 'b': 'X', 'c': 'Y', 'd': 'Z'}


def build_matching_reduction(gt: GridTilingInstance,
                             flags: Optional[MatchingFlags] = None) -> Tuple[DsnInstance, GadgetBundle]:
    """
    MG plus zero-weight index paths on a, b, c and d and the optional
    source, sink and bridge vertices; the demand graph is the k-hard
    matching pattern with the given flags

    Terminals carry the pattern's role names (a -> W, b -> X, c -> Y, d -> Z).
    """
    flags = flags or MatchingFlags()
    k = gt.k
    b = GraphBuilder()
    parts, roles = _mg_into(b, gt, MATCHING_NAMES)
    for letter in 'abcd':
        for m in range(k - 1):
            b.edge(roles[letter][m], roles[letter][m + 1], 0)
    role_vertices: Dict[str, int] = {}
    for letter, role in MATCHING_NAMES.items():
        for m in range(1, k + 1):
            role_vertices[f"{role}{m}"] = roles[letter][m - 1]
    if flags.source_set != 'none':
        s = b.vertex('source')
        b.edge(s, roles['a'][0], 0)
        b.edge(s, roles['c'][0], 0)
        role_vertices['source'] = s
    if flags.sink_set != 'none':
        t = b.vertex('sink')
        b.edge(roles['b'][-1], t, 0)
        b.edge(roles['d'][-1], t, 0)
        role_vertices['sink'] = t
    if flags.has_r_wz:
        r = b.vertex('rWZ')
        b.edge(roles['a'][-1], r, 0)
        b.edge(r, roles['d'][0], 0)
        role_vertices['rWZ'] = r
    elif flags.path_wz == 'joined':
        b.edge(roles['a'][-1], roles['d'][0], 0)
    if flags.has_r_yx:
        r = b.vertex('rYX')
        b.edge(roles['c'][-1], r, 0)
        b.edge(r, roles['b'][0], 0)
        role_vertices['rYX'] = r
    elif flags.path_yx == 'joined':
        b.edge(roles['c'][-1], roles['b'][0], 0)

    bundle = _mg_bundle(b, gt, MATCHING_REDUCTION, parts, roles)
    pattern_graph, pattern = generate_hard_pattern(MATCHING, k, flags)
    terminals = tuple(role_vertices[pattern.vertex_roles[v]] for v in range(pattern_graph.vertex_count))
    instance = DsnInstance.from_demand_graph(bundle.graph, terminals, pattern_graph)
    bundle.instance = instance
    bundle.roles['terminals'] = terminals
    logger.info("matching reduction k=%d n=%d flags=%s: %d vertices, %d edges",
                k, gt.n, flags, bundle.graph.vertex_count, len(bundle.graph.edges))
    return instance, bundle


# ==================== Biclique reduction ====================

def _annulus_paths(k: int) -> List[Tuple[str, int, List[Tuple]]]:
    """
    The 2(2k+1) edge-disjoint source-to-sink paths of the annulus, indices mod 2k+1

    ('straight', i) runs s_i, u(i,1), ..., u(i,2k-1), t_i and ('skew', i)
    runs s_i, u(i-1,1), u(i-2,2), ..., u(i+2,2k-1), t_{i+1}. Vertex u(m,l)
    sits in column m at level l.
    """
    width = 2 * k + 1
    wrap = lambda m: (m - 1) % width + 1
    paths = []
    for i in range(1, width + 1):
        straight = [('s', i)] + [('u', i, level) for level in range(1, 2 * k)] + [('t', i)]
        skew = [('s', i)] + [('u', wrap(i - level), level) for level in range(1, 2 * k)] + [('t', wrap(i + 1))]
        paths.append(('straight', i, straight))
        paths.append(('skew', i, skew))
    return paths


def _mg_cell(k: int, node: Tuple) -> Optional[Tuple[int, int]]:
    """Grid Tiling cell (column, row) whose grid replaces annulus vertex node, if any"""
    if node[0] != 'u':
        return None
    _, m, level = node
    if 2 <= m <= k + 1 and k + 2 - m <= level <= 2 * k + 1 - m:
        return level - k + m - 1, k + 2 - m
    return None


def build_biclique_reduction(gt: GridTilingInstance, variant: str = 'plain') -> Tuple[DsnInstance, GadgetBundle]:
    """
    Annulus of 2(2k+1) edge-disjoint s->t paths with MG in its middle

    The k^2 crossings where straight paths 2..k+1 meet skew paths
    k+2..2k+1 become the grids of MG. Straight path m carries row k+2-m
    (a_r before its first grid, b_r after its last) and skew path k+1+c
    carries column c (c_c and d_c). Every edge outside MG weighs 0; the
    demand is the complete biclique from {s_i} to {t_i}, optionally with
    a common source and/or sink.
    """
    if variant not in BICLIQUE_VARIANTS:
        raise GraphError(f"variant must be one of {BICLIQUE_VARIANTS}")
    k = gt.k
    width = 2 * k + 1
    b = GraphBuilder()
    parts, roles = _mg_into(b, gt)
    s = [b.vertex(f"A{i}") for i in range(1, width + 1)]
    t = [b.vertex(f"B{i}") for i in range(1, width + 1)]
    plain: Dict[Tuple, int] = {('s', i): s[i - 1] for i in range(1, width + 1)}
    plain.update({('t', i): t[i - 1] for i in range(1, width + 1)})
    for m in range(1, width + 1):
        for level in range(1, 2 * k):
            if _mg_cell(k, ('u', m, level)) is None:
                plain[('u', m, level)] = b.vertex(f"u{m},{level}")

    for kind, i, nodes in _annulus_paths(k):
        if kind == 'straight' and 2 <= i <= k + 1:
            entry, leave = roles['a'][k + 1 - i], roles['b'][k + 1 - i]
        elif kind == 'skew' and i >= k + 2:
            entry, leave = roles['c'][i - k - 2], roles['d'][i - k - 2]
        else:
            entry = leave = None
        for x, y in zip(nodes, nodes[1:]):
            x_cell, y_cell = _mg_cell(k, x), _mg_cell(k, y)
            if x_cell is None and y_cell is None:
                b.edge(plain[x], plain[y], 0)
            elif x_cell is None:
                b.edge(plain[x], entry, 0)
            elif y_cell is None:
                b.edge(leave, plain[y], 0)

    terminals: List[int] = s + t
    demands: Set[Edge] = {(si, tj) for si in s for tj in t}
    if variant in ('source', 'both'):
        source = b.vertex('source')
        for si in s:
            b.edge(source, si, 0)
        terminals.append(source)
        demands |= {(source, si) for si in s}
    if variant in ('sink', 'both'):
        sink = b.vertex('sink')
        for tj in t:
            b.edge(tj, sink, 0)
        terminals.append(sink)
        demands |= {(tj, sink) for tj in t}

    bundle = _mg_bundle(b, gt, BICLIQUE_REDUCTION, parts, roles)
    instance = DsnInstance(bundle.graph, tuple(terminals), frozenset(demands))
    bundle.instance = instance
    bundle.roles['terminals'] = tuple(terminals)
    bundle.roles['s'] = tuple(s)
    bundle.roles['t'] = tuple(t)
    logger.info("biclique reduction k=%d n=%d variant=%s: %d vertices, %d edges",
                k, gt.n, variant, bundle.graph.vertex_count, len(bundle.graph.edges))
    return instance, bundle


def auxiliary_paths(k: int) -> Digraph:
    """The bare annulus: sources A1.., sinks B1.., then the u(m,l) vertices"""
    width = 2 * k + 1
    index: Dict[Tuple, int] = {}
    labels: Dict[int, str] = {}
    for side, tag in (('s', 'A'), ('t', 'B')):
        for m in range(1, width + 1):
            index[(side, m)] = len(index)
            labels[index[(side, m)]] = f"{tag}{m}"
    for m in range(1, width + 1):
        for level in range(1, 2 * k):
            index[('u', m, level)] = len(index)
            labels[index[('u', m, level)]] = f"u{m},{level}"
    edges = [(index[x], index[y]) for _, _, nodes in _annulus_paths(k) for x, y in zip(nodes, nodes[1:])]
    return Digraph(len(index), edges, None, labels)
