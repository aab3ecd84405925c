"""
Demand Patterns
Minimal edges, weak/strong independence, (ordered) tough pairs, and the
recognizers/generators for diamonds, stars, cycles and hard patterns
"""
import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms import isomorphism

from dsn.config import get_settings
from dsn.digraph import Digraph, Edge, GraphError

logger = logging.getLogger(__name__)

FOUND = 'found'
NONE = 'none'
BUDGET_EXHAUSTED = 'budget_exhausted'


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ==================== Minimality & independence ====================

def _has_bypass(d: Digraph, u: int, v: int) -> bool:
    """A u->v path of length >= 2 that does not revisit u"""
    starts = [w for w in d.successors(u) if w != v and d.reaches(w, v)]
    seen = 1 << u
    stack = starts
    while stack:
        x = stack.pop()
        if x == v:
            return True
        bit = 1 << x
        if seen & bit:
            continue
        seen |= bit
        stack.extend(d.successors(x))
    return False


def is_minimal_edge(d: Digraph, e: Edge) -> bool:
    """True iff e is an edge with no alternative path of length at least 2"""
    if not d.has_edge(*e):
        raise GraphError(f"edge {e} not in graph")
    return not _has_bypass(d, e[0], e[1])


def minimal_edges(d: Digraph) -> FrozenSet[Edge]:
    return frozenset(e for e in d.edges if not _has_bypass(d, e[0], e[1]))


def _distinct(*edges: Edge) -> bool:
    ends = [x for e in edges for x in e]
    return len(set(ends)) == len(ends)


def weakly_independent(d: Digraph, e1: Edge, e2: Edge) -> bool:
    """Neither head reaches the other edge's tail; shared endpoints are never independent"""
    (u1, v1), (u2, v2) = e1, e2
    if not _distinct(e1, e2):
        return False
    return not d.reaches(v1, u2) and not d.reaches(v2, u1)


def weakly_independent_set(d: Digraph, edges: Sequence[Edge]) -> bool:
    """Set form: pairwise weak and no head reaches its own tail"""
    if not _distinct(*edges):
        return False
    if any(d.reaches(v, u) for u, v in edges):
        return False
    return all(weakly_independent(d, a, b) for a, b in itertools.combinations(edges, 2))


def strongly_independent(d: Digraph, e1: Edge, e2: Edge) -> bool:
    (u1, v1), (u2, v2) = e1, e2
    if not weakly_independent(d, e1, e2):
        return False
    return not (d.reaches(u1, u2) or d.reaches(u2, u1) or d.reaches(v1, v2) or d.reaches(v2, v1))


def _precedes(d: Digraph, e: Edge, f: Edge) -> bool:
    """e must come before f in an ordered side"""
    (w_e, x_e), (w_f, x_f) = e, f
    return d.reaches(w_e, x_f) or d.reaches(w_e, w_f) or d.reaches(x_e, x_f)


# ==================== Tough pairs ====================

@dataclass(frozen=True)
class ToughPair:
    """Two equal-size edge sequences; ordered pairs live in the closure"""
    e1: Tuple[Edge, ...]
    e2: Tuple[Edge, ...]
    ordered_flag: bool = False
    host: Optional[Digraph] = field(default=None, compare=False, repr=False)

    @property
    def t(self) -> int:
        return len(self.e1)

    def vertices(self) -> FrozenSet[int]:
        return frozenset(x for e in self.e1 + self.e2 for x in e)

    def swapped(self) -> 'ToughPair':
        return ToughPair(self.e2, self.e1, self.ordered_flag, self.host)


@dataclass
class PairSearchResult:
    status: str
    pair: Optional[ToughPair] = None
    nodes: int = 0
    exhaustive: bool = True

    @property
    def found(self) -> bool:
        return self.status == FOUND


def certify_tough_pair(d: Digraph, pair: ToughPair) -> bool:
    """Re-verify every condition of a plain tough pair from scratch"""
    e1, e2 = list(pair.e1), list(pair.e2)
    if len(e1) != len(e2) or not e1:
        return False
    if not all(d.has_edge(*e) for e in e1 + e2):
        return False
    if not _distinct(*(e1 + e2)):
        return False
    if not all(is_minimal_edge(d, e) for e in e1 + e2):
        return False
    if not (weakly_independent_set(d, e1) and weakly_independent_set(d, e2)):
        return False
    return all(strongly_independent(d, a, b) for a in e1 for b in e2)


def certify_ordered_tough_pair(d: Digraph, pair: ToughPair) -> bool:
    """Closure edges, independence, and no backward reachability along each side's order"""
    e1, e2 = list(pair.e1), list(pair.e2)
    if len(e1) != len(e2) or not e1:
        return False
    if not all(d.reaches(u, v) for u, v in e1 + e2):
        return False
    if not _distinct(*(e1 + e2)):
        return False
    if not (weakly_independent_set(d, e1) and weakly_independent_set(d, e2)):
        return False
    if not all(strongly_independent(d, a, b) for a in e1 for b in e2):
        return False
    for side in (e1, e2):
        for i, j in itertools.combinations(range(len(side)), 2):
            if _precedes(d, side[j], side[i]):
                return False
    return True


class _BudgetExceeded(Exception):
    pass


class _Counter:
    def __init__(self, limit: Optional[int]):
        self.limit = limit
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise _BudgetExceeded()


def _cliques(allowed: int, t: int, compat: Sequence[int], counter: _Counter,
             accept: Optional[Callable[[List[int]], bool]] = None) -> Iterator[Tuple[int, ...]]:
    """Size-t cliques of the compatibility graph inside allowed, in lexicographic order"""
    chosen: List[int] = []

    def rec(mask: int) -> Iterator[Tuple[int, ...]]:
        if len(chosen) == t:
            yield tuple(chosen)
            return
        while mask:
            low = mask & -mask
            i = low.bit_length() - 1
            mask ^= low
            counter.tick()
            if bin(mask).count('1') + 1 < t - len(chosen):
                return
            chosen.append(i)
            if accept is None or accept(chosen):
                yield from rec(mask & compat[i])
            chosen.pop()

    yield from rec(allowed)


def _pair_search(d: Digraph, t: int, candidates: List[Edge], ordered: bool,
                 max_nodes: Optional[int], exact_vertices: Optional[int]) -> PairSearchResult:
    settings = get_settings()
    if t < 1:
        raise GraphError("t must be positive")
    bound = settings.tough_pair_exact_vertices if exact_vertices is None else exact_vertices
    exhaustive = d.vertex_count < bound
    limit = None if exhaustive else (settings.tough_pair_max_nodes if max_nodes is None else max_nodes)
    counter = _Counter(limit)

    m = len(candidates)
    weak = [0] * m
    strong = [0] * m
    for i, j in itertools.combinations(range(m), 2):
        a, b = candidates[i], candidates[j]
        if weakly_independent(d, a, b):
            weak[i] |= 1 << j
            weak[j] |= 1 << i
            if strongly_independent(d, a, b):
                strong[i] |= 1 << j
                strong[j] |= 1 << i

    accept = None
    if ordered:
        def accept(chosen: List[int]) -> bool:
            return _order_of([candidates[i] for i in chosen], d) is not None

    everything = (1 << m) - 1
    try:
        for side1 in _cliques(everything, t, weak, counter, accept):
            allowed = everything
            for i in side1:
                allowed &= strong[i]
            for side2 in _cliques(allowed, t, weak, counter, accept):
                e1 = [candidates[i] for i in side1]
                e2 = [candidates[i] for i in side2]
                if ordered:
                    e1, e2 = _order_of(e1, d), _order_of(e2, d)
                pair = ToughPair(tuple(e1), tuple(e2), ordered, d)
                return PairSearchResult(FOUND, pair, counter.nodes, exhaustive)
    except _BudgetExceeded:
        logger.info("tough-pair search stopped after %d nodes", counter.nodes)
        return PairSearchResult(BUDGET_EXHAUSTED, None, counter.nodes, False)
    return PairSearchResult(NONE, None, counter.nodes, exhaustive)


def _order_of(edges: List[Edge], d: Digraph) -> Optional[List[Edge]]:
    """Lexicographic topological order of the precedence relation, None if cyclic"""
    g = nx.DiGraph()
    g.add_nodes_from(edges)
    for e, f in itertools.permutations(edges, 2):
        if _precedes(d, e, f):
            g.add_edge(e, f)
    if not nx.is_directed_acyclic_graph(g):
        return None
    return list(nx.lexicographical_topological_sort(g))


def find_tough_pair(d: Digraph, t: int, max_nodes: Optional[int] = None,
                    exact_vertices: Optional[int] = None) -> PairSearchResult:
    """
    Search a t-tough-pair over the minimal edges of d

    Exhaustive below the configured vertex bound, node-budgeted above it.
    A found pair is the lexicographically least by sorted edge ids.
    """
    candidates = sorted(e for e in minimal_edges(d) if not d.reaches(e[1], e[0]))
    return _pair_search(d, t, candidates, False, max_nodes, exact_vertices)


def find_ordered_tough_pair(d: Digraph, t: int, max_nodes: Optional[int] = None,
                            exact_vertices: Optional[int] = None) -> PairSearchResult:
    """Search an ordered t-tough-pair among the closure edges of d"""
    candidates = sorted(e for e in d.closure_edges() if not d.reaches(e[1], e[0]))
    return _pair_search(d, t, candidates, True, max_nodes, exact_vertices)


def largest_tough_pair(d: Digraph, max_t: int, ordered: bool = False) -> Tuple[int, Optional[ToughPair], str]:
    """Largest t <= max_t with a pair found; status of the first failing size"""
    finder = find_ordered_tough_pair if ordered else find_tough_pair
    best: Tuple[int, Optional[ToughPair]] = (0, None)
    for t in range(1, max_t + 1):
        result = finder(d, t)
        if not result.found:
            return best[0], best[1], result.status
        best = (t, result.pair)
    return best[0], best[1], FOUND


# ==================== Diamonds, stars, cycles ====================

PURE_OUT = 'PureOut'
FLAWED_OUT = 'FlawedOut'
PURE_IN = 'PureIn'
FLAWED_IN = 'FlawedIn'


@dataclass(frozen=True)
class DiamondKind:
    kind: str
    t: int
    literal: bool = True


def generate_diamond(kind: str, t: int) -> Digraph:
    """Roots 0 and 1, leaves 2..t+1, flaw vertex t+2 when flawed"""
    if kind not in (PURE_OUT, FLAWED_OUT, PURE_IN, FLAWED_IN):
        raise GraphError(f"unknown diamond kind {kind}")
    if t < 2:
        raise GraphError("diamonds need t >= 2")
    edges = [(r, 2 + i) for r in (0, 1) for i in range(t)]
    labels = {0: 'r1', 1: 'r2'}
    labels.update({2 + i: f"leaf{i + 1}" for i in range(t)})
    n = t + 2
    if kind in (FLAWED_OUT, FLAWED_IN):
        edges += [(n, 0), (n, 1)]
        labels[n] = 'flaw'
        n += 1
    g = Digraph(n, edges, labels=labels)
    return g.reverse() if kind in (PURE_IN, FLAWED_IN) else g


def _match_out_diamond(r: Digraph) -> Optional[Tuple[bool, int]]:
    """(flawed, t) if the reduced graph is an out-diamond"""
    n = r.vertex_count
    sources = [v for v in r.vertices() if r.in_degree(v) == 0]
    leaves = [v for v in r.vertices() if r.out_degree(v) == 0]
    for flawed in (False, True):
        t = n - 2 - int(flawed)
        if t < 2 or len(leaves) != t:
            continue
        if flawed:
            if len(sources) != 1:
                continue
            flaw = sources[0]
            roots = sorted(r.successors(flaw))
            if len(roots) != 2 or any(r.in_degree(x) != 1 for x in roots):
                continue
        else:
            if len(sources) != 2:
                continue
            roots = sources
        if all(sorted(r.successors(x)) == sorted(leaves) for x in roots) \
                and all(r.in_degree(v) == 2 for v in leaves) \
                and len(r.edges) == 2 * t + 2 * int(flawed):
            return flawed, t
    return None


def recognize_diamond(d: Digraph) -> Optional[DiamondKind]:
    """Accepts the literal diamond or anything with the same closure"""
    if not d.is_acyclic():
        return None
    reduced = Digraph(d.vertex_count, nx.transitive_reduction(d.to_networkx()).edges())
    literal = reduced.edges == d.edges
    for graph, pure, flawed_kind in ((reduced, PURE_OUT, FLAWED_OUT),
                                     (reduced.reverse(), PURE_IN, FLAWED_IN)):
        match = _match_out_diamond(graph)
        if match is not None:
            flawed, t = match
            return DiamondKind(flawed_kind if flawed else pure, t, literal)
    return None


@dataclass(frozen=True)
class StarOrCycle:
    kind: str  # OutStar, InStar or CycleEquivalent
    t: int


def recognize_star_or_cycle(d: Digraph) -> Optional[StarOrCycle]:
    n = d.vertex_count
    if n >= 2 and all(bin(row).count('1') == n - 1 for row in d.closure_rows):
        return StarOrCycle('CycleEquivalent', n)
    if n < 2 or len(d.edges) != n - 1:
        return None
    for kind, graph in (('OutStar', d), ('InStar', d.reverse())):
        centers = [v for v in graph.vertices() if graph.out_degree(v) == n - 1]
        if centers and all(graph.in_degree(v) == 1 for v in graph.vertices() if v != centers[0]):
            return StarOrCycle(kind, n - 1)
    return None


def branch_degree(d: Digraph, v: int) -> int:
    return max(d.in_degree(v) + d.out_degree(v) - 2, 0)


def total_branch_degree(d: Digraph) -> int:
    return sum(branch_degree(d, v) for v in d.vertices())


# ==================== Hard patterns ====================

BICLIQUE = 'Biclique'
MATCHING = 'Matching'

PATH_WZ_CHOICES = ('none', 'W', 'Z', 'W+Z', 'joined')
PATH_YX_CHOICES = ('none', 'X', 'Y', 'X+Y', 'joined')
SET_CHOICES = ('none', 'W', 'X', 'Y', 'Z', 'W+Y', 'X+Z', 'X+Y', 'W+Z')


@dataclass(frozen=True)
class BicliqueFlags:
    has_source: bool = False
    has_sink: bool = False


@dataclass(frozen=True)
class MatchingFlags:
    path_wz: str = 'none'
    path_yx: str = 'none'
    source_set: str = 'none'
    sink_set: str = 'none'
    has_r_wz: bool = False
    has_r_yx: bool = False

    def __post_init__(self):
        if self.path_wz not in PATH_WZ_CHOICES:
            raise GraphError(f"path_wz must be one of {PATH_WZ_CHOICES}")
        if self.path_yx not in PATH_YX_CHOICES:
            raise GraphError(f"path_yx must be one of {PATH_YX_CHOICES}")
        if self.source_set not in SET_CHOICES or self.sink_set not in SET_CHOICES:
            raise GraphError(f"source/sink sets must be one of {SET_CHOICES}")

    @property
    def extra_vertices(self) -> int:
        return (int(self.source_set != 'none') + int(self.sink_set != 'none')
                + int(self.has_r_wz) + int(self.has_r_yx))


def all_matching_flags() -> List[MatchingFlags]:
    return [MatchingFlags(a, b, c, e, f, g)
            for a, b, c, e, f, g in itertools.product(PATH_WZ_CHOICES, PATH_YX_CHOICES, SET_CHOICES,
                                                      SET_CHOICES, (False, True), (False, True))]


def all_biclique_flags() -> List[BicliqueFlags]:
    return [BicliqueFlags(s, t) for s in (False, True) for t in (False, True)]


@dataclass
class HardPattern:
    """A recognized pattern; vertex_roles maps vertex id to role name (W1, X1, A1, source, ...)"""
    kind: str
    t: int
    flags: object
    vertex_roles: Dict[int, str] = field(default_factory=dict)
    literal: bool = True

    def role_map(self) -> Dict[str, int]:
        return {role: v for v, role in self.vertex_roles.items()}

    def side(self, letter: str) -> List[int]:
        roles = self.role_map()
        return [roles[f"{letter}{i}"] for i in range(1, self.t + 1)]

    def signature(self) -> Tuple:
        return (self.kind, self.t, self.flags)


def _matching_roles(t: int, flags: MatchingFlags) -> List[str]:
    roles = [f"{letter}{i}" for letter in 'WXYZ' for i in range(1, t + 1)]
    if flags.source_set != 'none':
        roles.append('source')
    if flags.sink_set != 'none':
        roles.append('sink')
    if flags.has_r_wz:
        roles.append('rWZ')
    if flags.has_r_yx:
        roles.append('rYX')
    return roles


def _role_set(spec: str, t: int) -> List[str]:
    return [f"{letter}{i}" for letter in spec.split('+') for i in range(1, t + 1)]


def _path(letter: str, t: int) -> List[Tuple[str, str]]:
    return [(f"{letter}{i}", f"{letter}{i + 1}") for i in range(1, t)]


def _matching_role_edges(t: int, flags: MatchingFlags) -> List[Tuple[str, str]]:
    edges = [(f"W{i}", f"X{i}") for i in range(1, t + 1)]
    edges += [(f"Y{i}", f"Z{i}") for i in range(1, t + 1)]
    if flags.path_wz in ('W', 'W+Z', 'joined'):
        edges += _path('W', t)
    if flags.path_wz in ('Z', 'W+Z', 'joined'):
        edges += _path('Z', t)
    if flags.path_wz == 'joined':
        edges.append((f"W{t}", "Z1"))
    if flags.path_yx in ('Y', 'X+Y', 'joined'):
        edges += _path('Y', t)
    if flags.path_yx in ('X', 'X+Y', 'joined'):
        edges += _path('X', t)
    if flags.path_yx == 'joined':
        edges.append((f"Y{t}", "X1"))
    if flags.source_set != 'none':
        edges += [('source', r) for r in _role_set(flags.source_set, t)]
    if flags.sink_set != 'none':
        edges += [(r, 'sink') for r in _role_set(flags.sink_set, t)]
    if flags.has_r_wz:
        edges += [(f"W{i}", 'rWZ') for i in range(1, t + 1)] + [('rWZ', f"Z{i}") for i in range(1, t + 1)]
    if flags.has_r_yx:
        edges += [(f"Y{i}", 'rYX') for i in range(1, t + 1)] + [('rYX', f"X{i}") for i in range(1, t + 1)]
    return edges


def _biclique_roles(t: int, flags: BicliqueFlags) -> List[str]:
    roles = [f"{letter}{i}" for letter in 'AB' for i in range(1, t + 1)]
    if flags.has_source:
        roles.append('source')
    if flags.has_sink:
        roles.append('sink')
    return roles


def _biclique_role_edges(t: int, flags: BicliqueFlags) -> List[Tuple[str, str]]:
    edges = [(f"A{i}", f"B{j}") for i in range(1, t + 1) for j in range(1, t + 1)]
    if flags.has_source:
        edges += [('source', f"A{i}") for i in range(1, t + 1)]
    if flags.has_sink:
        edges += [(f"B{j}", 'sink') for j in range(1, t + 1)]
    return edges


def _template(kind: str, t: int, flags) -> Tuple[List[str], List[Tuple[str, str]]]:
    if kind == MATCHING:
        if not isinstance(flags, MatchingFlags):
            raise GraphError("matching patterns take MatchingFlags")
        return _matching_roles(t, flags), _matching_role_edges(t, flags)
    if kind == BICLIQUE:
        if not isinstance(flags, BicliqueFlags):
            raise GraphError("biclique patterns take BicliqueFlags")
        return _biclique_roles(t, flags), _biclique_role_edges(t, flags)
    raise GraphError(f"unknown pattern kind {kind}")


def generate_hard_pattern(kind: str, t: int, flags=None) -> Tuple[Digraph, HardPattern]:
    """Literal t-hard pattern; vertices follow role order and carry role labels"""
    if t < 1:
        raise GraphError("t must be positive")
    if flags is None:
        flags = MatchingFlags() if kind == MATCHING else BicliqueFlags()
    roles, role_edges = _template(kind, t, flags)
    index = {role: i for i, role in enumerate(roles)}
    graph = Digraph(len(roles), ((index[a], index[b]) for a, b in role_edges),
                    labels=dict(enumerate(roles)))
    return graph, HardPattern(kind, t, flags, dict(enumerate(roles)), True)


def pattern_matches(d: Digraph, pattern: HardPattern) -> Optional[bool]:
    """
    Check d against the template under pattern.vertex_roles

    Returns True for a literal match, False for closure-only equality,
    None when d is not the pattern.
    """
    roles, role_edges = _template(pattern.kind, pattern.t, pattern.flags)
    role_map = pattern.role_map()
    if set(role_map) != set(roles) or d.vertex_count != len(roles):
        return None
    edges = frozenset((role_map[a], role_map[b]) for a, b in role_edges)
    if edges == d.edges:
        return True
    if Digraph(d.vertex_count, edges).closure_rows == d.closure_rows:
        return False
    return None


def _decode_with_roles(d: Digraph, role_map: Dict[str, int]) -> Optional[HardPattern]:
    letters = {r.rstrip('0123456789') for r in role_map if r[-1].isdigit()}
    extras = set(role_map) - {r for r in role_map if r[-1].isdigit()}
    vertex_roles = {v: r for r, v in role_map.items()}

    if letters == {'A', 'B'}:
        t = sum(1 for r in role_map if r.startswith('A'))
        candidates = [BicliqueFlags('source' in extras, 'sink' in extras)]
        kind = BICLIQUE
    elif letters == {'W', 'X', 'Y', 'Z'}:
        t = sum(1 for r in role_map if r.startswith('W'))
        kind = MATCHING
        candidates = _matching_candidates(d, role_map, t, extras)
    else:
        return None

    for flags in candidates:
        pattern = HardPattern(kind, t, flags, vertex_roles, True)
        result = pattern_matches(d, pattern)
        if result is not None:
            pattern.literal = result
            return pattern
    return None


def _matching_candidates(d: Digraph, role_map: Dict[str, int], t: int, extras) -> List[MatchingFlags]:
    def reach(a: str, b: str) -> bool:
        return d.reaches(role_map[a], role_map[b])

    def has_path(letter: str) -> bool:
        return t >= 2 and all(reach(f"{letter}{i}", f"{letter}{i + 1}") for i in range(1, t))

    def literal_edge(a: str, b: str) -> bool:
        return d.has_edge(role_map[a], role_map[b])

    r_wz, r_yx = 'rWZ' in extras, 'rYX' in extras
    w, z, y, x = has_path('W'), has_path('Z'), has_path('Y'), has_path('X')
    wz = {(True, True): 'W+Z', (True, False): 'W', (False, True): 'Z', (False, False): 'none'}[(w, z)]
    yx = {(True, True): 'X+Y', (True, False): 'Y', (False, True): 'X', (False, False): 'none'}[(y, x)]
    wz_options = [wz]
    if w and z and reach(f"W{t}", 'Z1') and (literal_edge(f"W{t}", 'Z1') or not r_wz):
        wz_options.insert(0, 'joined')
    yx_options = [yx]
    if y and x and reach(f"Y{t}", 'X1') and (literal_edge(f"Y{t}", 'X1') or not r_yx):
        yx_options.insert(0, 'joined')

    def set_options(role: str, outgoing: bool) -> List[str]:
        if role not in extras:
            return ['none']
        v = role_map[role]
        nbrs = set(d.successors(v) if outgoing else d.predecessors(v))
        literal = [s for s in SET_CHOICES[1:] if {role_map[r] for r in _role_set(s, t)} == nbrs]
        return literal + [s for s in SET_CHOICES[1:] if s not in literal]

    return [MatchingFlags(a, b, c, e, r_wz, r_yx)
            for a in wz_options for b in yx_options
            for c in set_options('source', True) for e in set_options('sink', False)]


def _roles_from_labels(d: Digraph) -> Optional[Dict[str, int]]:
    if len(d.labels) != d.vertex_count:
        return None
    role_map = {}
    for v, tag in d.labels.items():
        if tag in role_map:
            return None
        role_map[tag] = v
    valid = {'source', 'sink', 'rWZ', 'rYX'}
    for tag in role_map:
        if tag not in valid and not (tag[0] in 'ABWXYZ' and tag[1:].isdigit()):
            return None
    return role_map


@lru_cache(maxsize=None)
def _catalogue(kind: str, t: int, extras: int) -> Tuple[Tuple[object, Digraph, Tuple, Tuple], ...]:
    """Templates of one size with their literal and closure degree signatures"""
    flag_list = all_matching_flags() if kind == MATCHING else all_biclique_flags()
    entries = []
    for flags in flag_list:
        count = flags.extra_vertices if kind == MATCHING else int(flags.has_source) + int(flags.has_sink)
        if count != extras:
            continue
        graph, _ = generate_hard_pattern(kind, t, flags)
        entries.append((flags, graph, _degree_signature(graph), closure_signature(graph)))
    return tuple(entries)


def _degree_signature(d: Digraph) -> Tuple:
    return tuple(sorted((d.in_degree(v), d.out_degree(v)) for v in d.vertices()))


def closure_signature(d: Digraph, keep: Optional[int] = None) -> Tuple:
    """Sorted (reached-by, reaches) counts, restricted to the vertex bitmask keep when given"""
    if keep is None:
        keep = (1 << d.vertex_count) - 1
    rows, cols = d.closure_rows, d.reached_by_mask
    return tuple(sorted((bin(cols(v) & keep).count('1'), bin(rows[v] & keep).count('1'))
                        for v in iter_bits(keep)))


def _template_sizes(n: int) -> Iterator[Tuple[str, int, int]]:
    for kind, per_t, max_extra in ((BICLIQUE, 2, 2), (MATCHING, 4, 4)):
        for extras in range(max_extra + 1):
            if (n - extras) % per_t or n - extras < per_t:
                continue
            yield kind, (n - extras) // per_t, extras


@lru_cache(maxsize=None)
def template_closure_signatures(vertex_count: int) -> FrozenSet[Tuple]:
    """Closure signatures of every hard-pattern template on vertex_count vertices"""
    return frozenset(entry[3] for kind, t, extras in _template_sizes(vertex_count)
                     for entry in _catalogue(kind, t, extras))


def _recognize_unlabelled(d: Digraph) -> Optional[HardPattern]:
    literal_sig = _degree_signature(d)
    closure_sig = closure_signature(d)
    closure_nx = None
    for kind, t, extras in _template_sizes(d.vertex_count):
        for flags, template, lit_sig, clo_sig in _catalogue(kind, t, extras):
            if lit_sig == literal_sig:
                matcher = isomorphism.DiGraphMatcher(d.to_networkx(), template.to_networkx())
                if matcher.is_isomorphic():
                    roles = {v: template.labels[matcher.mapping[v]] for v in d.vertices()}
                    return HardPattern(kind, t, flags, roles, True)
            if clo_sig == closure_sig:
                if closure_nx is None:
                    closure_nx = nx.DiGraph(list(d.closure_edges()))
                    closure_nx.add_nodes_from(d.vertices())
                target = nx.DiGraph(list(template.closure_edges()))
                target.add_nodes_from(template.vertices())
                matcher = isomorphism.DiGraphMatcher(closure_nx, target)
                if matcher.is_isomorphic():
                    roles = {v: template.labels[matcher.mapping[v]] for v in d.vertices()}
                    return HardPattern(kind, t, flags, roles, False)
    return None


def recognize_hard_pattern(d: Digraph) -> Optional[HardPattern]:
    """
    Recognize a t-hard biclique or matching pattern

    Role labels, when present, fix the assignment and the literal flags are
    decoded exactly. Otherwise templates are matched by degree signature and
    confirmed by isomorphism of the graph or of its closure.
    """
    role_map = _roles_from_labels(d)
    if role_map is not None:
        pattern = _decode_with_roles(d, role_map)
        if pattern is not None:
            return pattern
    return _recognize_unlabelled(d)


def tough_pair_from_pattern(pattern: HardPattern, host: Optional[Digraph] = None) -> ToughPair:
    """Matching patterns give their two matchings; bicliques give two halves of the diagonal"""
    if pattern.kind == MATCHING:
        w, x, y, z = (pattern.side(c) for c in 'WXYZ')
        return ToughPair(tuple(zip(w, x)), tuple(zip(y, z)), False, host)
    a, b = pattern.side('A'), pattern.side('B')
    half = pattern.t // 2
    diagonal = list(zip(a, b))
    return ToughPair(tuple(diagonal[:half]), tuple(diagonal[half:2 * half]), False, host)
