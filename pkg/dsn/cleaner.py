"""
Cleaning Pipeline
Turns a tough pair inside an arbitrary digraph into a hard pattern using only
vertex identifications and closure-preserving edge deletions. Every stage
re-checks what it hands on; anything that cannot be certified comes back as
Insufficient naming the stage that failed.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx
from networkx.algorithms import approximation, bipartite

from dsn.config import get_settings
from dsn.digraph import Digraph, Edge, GraphError, apply_vertex_map, merge_map
from dsn.patterns import (HardPattern, ToughPair, certify_ordered_tough_pair, closure_signature,
                          find_tough_pair, is_minimal_edge, iter_bits, pattern_matches,
                          recognize_hard_pattern, template_closure_signatures)

logger = logging.getLogger(__name__)

ORDERED = 'OrderedToughPair'
BICLIQUE_OUTCOME = 'Biclique'
MATCHING_CLOSURE_BICLIQUE = 'MatchingWithClosureBiclique'
INDUCED_BICLIQUE = 'InducedBicliqueMinimal'
INSUFFICIENT = 'Insufficient'

RULES = ('IR1', 'IR2', 'IR3', 'IR4', 'IR5', 'IR6', 'IR7', 'IR8')

COLORS = tuple((a, b) for a in (1, 2, 3) for b in (1, 2, 3))
_ORDERED_COLORS = ((3, 3), (1, 3), (2, 3), (3, 1), (3, 2))


@dataclass
class Insufficient:
    """A stage could not certify its output"""
    stage: str
    reason: str = ''
    variant: str = INSUFFICIENT


@dataclass
class CleanedPattern:
    """A certified hard pattern together with how it was derived"""
    pattern: HardPattern
    graph: Digraph
    log: Tuple[Tuple[int, int], ...] = ()
    removed: FrozenSet[Edge] = frozenset()


# ==================== Identification state ====================

class IdentificationState:
    """
    Union-find over the vertices of a base digraph

    Representatives are base vertex ids and a merge keeps the survivor's id.
    The quotient digraph is rebuilt lazily and numbers the classes by
    increasing representative. Deleted base edges stay deleted.
    """

    def __init__(self, base: Digraph):
        self.base = base.unweighted().with_labels({})
        self._parent = list(range(base.vertex_count))
        self.log: List[Tuple[int, int]] = []
        self.removed: Set[Edge] = set()
        self._cache: Optional[Tuple[Digraph, Dict[int, int], Tuple[int, ...]]] = None

    def copy(self) -> 'IdentificationState':
        other = IdentificationState.__new__(IdentificationState)
        other.base = self.base
        other._parent = list(self._parent)
        other.log = list(self.log)
        other.removed = set(self.removed)
        other._cache = self._cache
        return other

    def find(self, v: int) -> int:
        root = v
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[v] != root:
            self._parent[v], v = root, self._parent[v]
        return root

    def identify(self, survivor: int, absorbed: int) -> bool:
        s, a = self.find(survivor), self.find(absorbed)
        if s == a:
            return False
        self._parent[a] = s
        self.log.append((s, a))
        self._cache = None
        return True

    def delete_edges(self, edges: Iterable[Edge]):
        """Drop every base edge running between the given classes"""
        pairs = {(self.find(u), self.find(v)) for u, v in edges}
        for x, y in self.base.sorted_edges():
            if (self.find(x), self.find(y)) in pairs:
                self.removed.add((x, y))
        self._cache = None

    def _quotient(self) -> Tuple[Digraph, Dict[int, int], Tuple[int, ...]]:
        if self._cache is None:
            reps = tuple(v for v in self.base.vertices() if self._parent[v] == v)
            index = {r: i for i, r in enumerate(reps)}
            mapping = [index[self.find(v)] for v in self.base.vertices()]
            kept = self.base.subgraph(self.base.edges - self.removed) if self.removed else self.base
            self._cache = (apply_vertex_map(kept, mapping, len(reps)), index, reps)
        return self._cache

    @property
    def graph(self) -> Digraph:
        return self._quotient()[0]

    @property
    def reps(self) -> Tuple[int, ...]:
        return self._quotient()[2]

    def id_of(self, v: int) -> int:
        return self._quotient()[1][self.find(v)]

    def rep_of(self, i: int) -> int:
        return self._quotient()[2][i]

    def ids(self, vertices: Iterable[int]) -> List[int]:
        return [self.id_of(v) for v in vertices]

    def _reps_in(self, mask: int) -> Set[int]:
        reps = self.reps
        return {reps[i] for i in iter_bits(mask)}

    def reaches(self, u: int, v: int) -> bool:
        return self.graph.reaches(self.id_of(u), self.id_of(v))

    def has_edge(self, u: int, v: int) -> bool:
        return self.graph.has_edge(self.id_of(u), self.id_of(v))

    def out_reach(self, v: int) -> Set[int]:
        return self._reps_in(self.graph.reach_mask(self.id_of(v)))

    def in_reach(self, v: int) -> Set[int]:
        return self._reps_in(self.graph.reached_by_mask(self.id_of(v)))

    def successors(self, v: int) -> List[int]:
        reps = self.reps
        return [reps[i] for i in self.graph.successors(self.id_of(v))]

    def labelled(self, roles: Mapping[int, str]) -> Digraph:
        return self.graph.with_labels({self.id_of(v): r for v, r in roles.items()})

    def result(self, pattern: HardPattern, graph: Digraph) -> CleanedPattern:
        return CleanedPattern(pattern, graph, tuple(self.log), frozenset(self.removed))


def replay_identifications(d: Digraph, log: Iterable[Tuple[int, int]],
                           removed: Iterable[Edge] = ()) -> Digraph:
    """Rebuild a pipeline output from its input, its deleted edges and its identification log"""
    state = IdentificationState(d)
    state.removed = set(removed)
    for survivor, absorbed in log:
        state.identify(survivor, absorbed)
    return state.graph


def _contract_cycles(ident: IdentificationState, keep: Iterable[int] = ()) -> int:
    keep = set(keep)
    groups = [sorted(ident.rep_of(i) for i in comp)
              for comp in nx.strongly_connected_components(ident.graph.to_networkx()) if len(comp) > 1]
    merged = 0
    for members in groups:
        survivor = next((v for v in members if v in keep), members[0])
        for v in members:
            if v != survivor and ident.identify(survivor, v):
                merged += 1
    return merged


def _absorb_isolated(ident: IdentificationState) -> int:
    g, reps = ident.graph, ident.reps
    isolated = [reps[v] for v in g.vertices() if not g.successors(v) and not g.predecessors(v)]
    anchors = [r for r in reps if r not in set(isolated)]
    if not anchors:
        return 0
    for v in isolated:
        ident.identify(anchors[0], v)
    return len(isolated)


def reachability_minimal_spanning(d: Digraph, keep: Iterable[Edge] = ()) -> Digraph:
    """
    Spanning subgraph with the same closure in which every edge is minimal

    Edges are tried for removal in sorted order; keep edges are never removed
    and must already be minimal in d.
    """
    keep = frozenset(keep)
    if keep - d.edges:
        raise GraphError(f"keep edges not in graph: {sorted(keep - d.edges)[:5]}")
    g = d.to_networkx()
    for u, v in d.sorted_edges():
        if (u, v) in keep:
            continue
        g.remove_edge(u, v)
        if not nx.has_path(g, u, v):
            g.add_edge(u, v)
    result = d.subgraph(g.edges())
    for e in sorted(keep):
        if not is_minimal_edge(result, e):
            raise GraphError(f"kept edge {e} is not minimal")
    return result


# ==================== Monochromatic cliques ====================

@dataclass
class CliqueSearch:
    members: Tuple[int, ...]
    color: object
    exact: bool


def monochromatic_clique(count: int, color_of: Callable[[int, int], object], color,
                         exact_limit: Optional[int] = None) -> CliqueSearch:
    """
    Largest set of items whose every pair i < j has the given colour

    Exact up to the configured number of items, greedy with one-item
    extensions above it.
    """
    limit = get_settings().clique_exact_limit if exact_limit is None else exact_limit
    if count == 0:
        return CliqueSearch((), color, True)
    g = nx.Graph()
    g.add_nodes_from(range(count))
    g.add_edges_from((i, j) for i, j in itertools.combinations(range(count), 2) if color_of(i, j) == color)
    if count <= limit:
        members, _ = nx.max_weight_clique(g, weight=None)
        return CliqueSearch(tuple(sorted(members)), color, True)
    members = set(approximation.max_clique(g))
    for v in sorted(g.nodes):
        if v not in members and all(g.has_edge(v, u) for u in members):
            members.add(v)
    return CliqueSearch(tuple(sorted(members)), color, False)


# ==================== Bicliques ====================

def is_induced_biclique(d: Digraph, a: Sequence[int], b: Sequence[int], minimal: bool = False) -> bool:
    """Every a->b edge present, both sides independent in the closure, no b reaching an a"""
    if not a or len(a) != len(b) or len(set(a) | set(b)) != 2 * len(a):
        return False
    if not all(d.has_edge(x, y) for x in a for y in b):
        return False
    if any(d.reaches(x, y) for side in (a, b) for x, y in itertools.permutations(side, 2)):
        return False
    if any(d.reaches(y, x) for x in a for y in b):
        return False
    return not minimal or all(is_minimal_edge(d, (x, y)) for x in a for y in b)


def is_matching_closure_biclique(d: Digraph, a: Sequence[int], b: Sequence[int]) -> bool:
    """Edges a_i -> b_i, every a reaching every b, independent sides, no b reaching an a"""
    if not a or len(a) != len(b) or len(set(a) | set(b)) != 2 * len(a):
        return False
    if not all(d.has_edge(x, y) for x, y in zip(a, b)):
        return False
    if not all(d.reaches(x, y) for x in a for y in b):
        return False
    if any(d.reaches(x, y) for side in (a, b) for x, y in itertools.permutations(side, 2)):
        return False
    return not any(d.reaches(y, x) for x in a for y in b)


# ==================== Pre-cleaning ====================

@dataclass
class PrecleanOutcome:
    variant: str
    pair: Optional[ToughPair] = None
    a: Tuple[int, ...] = ()
    b: Tuple[int, ...] = ()
    colors: Tuple = ()
    exact: bool = True
    reason: str = ''


def _relation(d: Digraph, u: int, v: int) -> int:
    if d.has_edge(u, v):
        return 1
    return 2 if d.reaches(u, v) else 3


def pair_color(d: Digraph, e: Edge, f: Edge) -> Tuple[int, int]:
    """Colour of two edges of one side with e before f"""
    return _relation(d, e[0], f[1]), _relation(d, f[0], e[1])


def _color_searches(d: Digraph, side: Sequence[Edge]) -> Dict[Tuple[int, int], CliqueSearch]:
    table = {(i, j): pair_color(d, side[i], side[j])
             for i, j in itertools.combinations(range(len(side)), 2)}
    return {c: monochromatic_clique(len(side), lambda i, j: table[i, j], c) for c in COLORS}


def preclean(d: Digraph, pair: ToughPair, target_t: int) -> PrecleanOutcome:
    """
    Colour both sides of a tough pair and read off an ordered pair or a biclique

    Needs a monochromatic set of 2*target_t edges. Ordered outcomes come from
    colours with a 3; (1,1), (1,2) and (2,1) give bicliques in d and (2,2) a
    matching inside a closure biclique. Every outcome is re-checked.
    """
    need = 2 * target_t
    if pair.t < need:
        return PrecleanOutcome(INSUFFICIENT, reason=f"pair of size {pair.t} is below {need}")
    sides = (list(pair.e1), list(pair.e2))
    searches = [_color_searches(d, side) for side in sides]
    exact = all(s.exact for found in searches for s in found.values())

    best = [max((found[c] for c in _ORDERED_COLORS), key=lambda s: len(s.members)) for found in searches]
    if all(len(s.members) >= need for s in best):
        size = min(len(s.members) for s in best)
        ordered_sides = []
        for side, search in zip(sides, best):
            edges = [side[i] for i in search.members]
            if search.color[0] == 3 and search.color[1] != 3:
                edges.reverse()
            ordered_sides.append(tuple(edges[:size]))
        ordered = ToughPair(ordered_sides[0], ordered_sides[1], True, d)
        if certify_ordered_tough_pair(d, ordered):
            return PrecleanOutcome(ORDERED, pair=ordered, colors=(best[0].color, best[1].color), exact=exact)
        logger.warning("monochromatic ordered selection failed certification")

    for side, found in zip(sides, searches):
        for color in ((1, 1), (1, 2), (2, 1)):
            members = [side[i] for i in found[color].members]
            if len(members) < need:
                continue
            if color == (1, 1):
                a, b = [u for u, _ in members], [v for _, v in members]
            else:
                half = len(members) // 2
                first, second = members[:half], members[half:2 * half]
                if color == (1, 2):
                    a, b = [u for u, _ in first], [v for _, v in second]
                else:
                    a, b = [u for u, _ in second], [v for _, v in first]
            if is_induced_biclique(d, a, b):
                return PrecleanOutcome(BICLIQUE_OUTCOME, a=tuple(a), b=tuple(b), colors=(color,), exact=exact)

    for side, found in zip(sides, searches):
        members = [side[i] for i in found[(2, 2)].members]
        if len(members) >= need:
            a, b = [u for u, _ in members], [v for _, v in members]
            if is_matching_closure_biclique(d, a, b):
                return PrecleanOutcome(MATCHING_CLOSURE_BICLIQUE, a=tuple(a), b=tuple(b),
                                       colors=((2, 2),), exact=exact)

    return PrecleanOutcome(INSUFFICIENT, exact=exact,
                           reason=f"no monochromatic set of {need} edges on either side")


# ==================== Bad vertices ====================

def _union(masks: Iterable[int]) -> int:
    total = 0
    for m in masks:
        total |= m
    return total


def bad_vertices(d: Digraph, pair: ToughPair) -> List[int]:
    """Vertices off the pair reached from both tail sets that reach both head sets"""
    w, x = [e[0] for e in pair.e1], [e[1] for e in pair.e1]
    y, z = [e[0] for e in pair.e2], [e[1] for e in pair.e2]
    mask = (_union(d.reach_mask(v) for v in w) & _union(d.reached_by_mask(v) for v in x)
            & _union(d.reach_mask(v) for v in y) & _union(d.reached_by_mask(v) for v in z))
    used = pair.vertices()
    return [v for v in iter_bits(mask) if v not in used]


def _bucket(d: Digraph, a: Sequence[Edge], b: Sequence[Edge], v: int, s: int) -> Optional[Tuple[int, int]]:
    w_idx = max(i for i, e in enumerate(a) if d.reaches(e[0], v))
    x_idx = min(i for i, e in enumerate(a) if d.reaches(v, e[1]))
    y_idx = max(i for i, e in enumerate(b) if d.reaches(e[0], v))
    z_idx = min(i for i, e in enumerate(b) if d.reaches(v, e[1]))
    if w_idx // s != x_idx // s or y_idx // s != z_idx // s:
        return None
    return w_idx // s, y_idx // s


def eliminate_bad_vertices(d: Digraph, pair: ToughPair) -> Optional[ToughPair]:
    """
    Ordered sub-pair of about the square root of the size with no bad vertex

    Bad vertices are bucketed by the blocks of their extreme neighbours on
    each side. A block pair with an empty bucket is returned when it certifies;
    otherwise a pair is rebuilt from one bad vertex per bucket of the first
    block row and column. Returns None when nothing certifies.
    """
    s = math.isqrt(pair.t)
    if s == 0:
        return None
    a, b = list(pair.e1[:s * s]), list(pair.e2[:s * s])

    def clean_pair(candidate: ToughPair) -> bool:
        return certify_ordered_tough_pair(d, candidate) and not bad_vertices(d, candidate)

    buckets: Dict[Tuple[int, int], List[int]] = {}
    for v in bad_vertices(d, ToughPair(tuple(a), tuple(b), True, d)):
        key = _bucket(d, a, b, v, s)
        if key is not None:
            buckets.setdefault(key, []).append(v)

    for p in range(s):
        for q in range(s):
            if (p, q) in buckets:
                continue
            candidate = ToughPair(tuple(a[p * s:(p + 1) * s]), tuple(b[q * s:(q + 1) * s]), True, d)
            if clean_pair(candidate):
                logger.debug("bad vertices avoided by block pair (%d,%d)", p, q)
                return candidate

    if s < 2 or any((i, 0) not in buckets or (0, i) not in buckets for i in range(1, s)):
        return None
    e1, e2 = [], []
    for i in range(1, s):
        v = buckets[(i, 0)][0]
        e1.append((a[max(k for k, e in enumerate(a) if d.reaches(e[0], v))][0], v))
        u = buckets[(0, i)][0]
        e2.append((b[max(k for k, e in enumerate(b) if d.reaches(e[0], u))][0], u))
    candidate = ToughPair(tuple(e1), tuple(e2), True, d)
    return candidate if clean_pair(candidate) else None


# ==================== Identification rules ====================

@dataclass
class OrderedState:
    """An ordered pair over an identification state; every role vertex is a representative"""
    ident: IdentificationState
    a: List[Edge]
    b: List[Edge]
    source: Optional[int] = None
    sink: Optional[int] = None
    r_wz: Optional[int] = None
    r_yx: Optional[int] = None

    def copy(self) -> 'OrderedState':
        return OrderedState(self.ident.copy(), list(self.a), list(self.b),
                            self.source, self.sink, self.r_wz, self.r_yx)

    def columns(self) -> Tuple[List[int], List[int], List[int], List[int]]:
        return ([e[0] for e in self.a], [e[1] for e in self.a],
                [e[0] for e in self.b], [e[1] for e in self.b])

    def role_vertices(self) -> Set[int]:
        roles = {v for e in self.a + self.b for v in e}
        roles.update(v for v in (self.source, self.sink, self.r_wz, self.r_yx) if v is not None)
        return roles

    def outside(self) -> List[int]:
        roles = self.role_vertices()
        return [v for v in self.ident.reps if v not in roles]

    def pair(self) -> ToughPair:
        """The pair in quotient ids"""
        ident = self.ident
        return ToughPair(tuple((ident.id_of(u), ident.id_of(v)) for u, v in self.a),
                         tuple((ident.id_of(u), ident.id_of(v)) for u, v in self.b), True, ident.graph)


def ordered_state(d: Digraph, pair: ToughPair) -> OrderedState:
    return OrderedState(IdentificationState(d), list(pair.e1), list(pair.e2))


def ordered_invariants_hold(state: OrderedState) -> bool:
    """The pair still certifies and no vertex is bad for it"""
    pair = state.pair()
    return certify_ordered_tough_pair(state.ident.graph, pair) and not bad_vertices(state.ident.graph, pair)


def _last_in(seq: Sequence[int], pool: Set[int]) -> int:
    return next(v for v in reversed(seq) if v in pool)


def _first_in(seq: Sequence[int], pool: Set[int]) -> int:
    return next(v for v in seq if v in pool)


def _rule_target(st: OrderedState, rule: str, v: int) -> Optional[int]:
    w, x, y, z = st.columns()
    sw, sx, sy, sz = set(w), set(x), set(y), set(z)
    roles = sw | sx | sy | sz
    inn, out = st.ident.in_reach(v), st.ident.out_reach(v)
    near = inn | out
    if rule == 'IR1':
        if inn & sw and out & sw:
            return _last_in(w, inn)
    elif rule == 'IR2':
        if inn & sy and out & sy:
            return _last_in(y, inn)
    elif rule == 'IR3':
        if inn & sx and out & sx:
            return x[max(i for i in range(len(x)) if w[i] in inn or x[i] in inn)]
    elif rule == 'IR4':
        if inn & sz and out & sz:
            return z[max(i for i in range(len(z)) if y[i] in inn or z[i] in inn)]
    elif rule == 'IR5':
        if not near & sw and inn & roles and inn & roles <= sy:
            return _last_in(y, inn)
    elif rule == 'IR6':
        if not near & sy and inn & roles and inn & roles <= sw:
            return _last_in(w, inn)
    elif rule == 'IR7':
        if not near & sx and out & roles and out & roles <= sz:
            return _first_in(z, out)
    elif rule == 'IR8':
        if not near & sz and out & roles and out & roles <= sx:
            return _first_in(x, out)
    return None


def _apply_rule(st: OrderedState, rule: str) -> Optional[Tuple[int, int]]:
    for v in st.outside():
        target = _rule_target(st, rule, v)
        if target is not None:
            st.ident.identify(target, v)
            logger.debug("%s identified %d onto %d", rule, v, target)
            return target, v
    return None


@dataclass
class RuleApplication:
    state: OrderedState
    applied: bool
    vertex: Optional[int] = None
    target: Optional[int] = None


def apply_identification_rule(state: OrderedState, rule_id: str) -> RuleApplication:
    """Apply one rule to the smallest vertex whose guard holds; the input state is left untouched"""
    if rule_id not in RULES:
        raise GraphError(f"unknown identification rule {rule_id}")
    new = state.copy()
    hit = _apply_rule(new, rule_id)
    if hit is None:
        return RuleApplication(state, False)
    return RuleApplication(new, True, hit[1], hit[0])


def _apply_rules_exhaustively(st: OrderedState) -> int:
    applied = 0
    progress = True
    while progress:
        progress = False
        for rule in RULES:
            while _apply_rule(st, rule) is not None:
                applied += 1
                progress = True
    return applied


# ==================== Semi-cleaning ====================

@dataclass
class SemiCleanedPair:
    graph: Digraph
    pair: ToughPair
    source: Optional[int] = None
    sink: Optional[int] = None
    log: Tuple[Tuple[int, int], ...] = ()
    state: Optional[OrderedState] = field(default=None, repr=False, compare=False)


def _collapse_terminals(st: OrderedState):
    ident = st.ident
    roles = st.role_vertices()
    outside = st.outside()
    to_source = [v for v in outside if ident.out_reach(v) & roles]
    to_sink = [v for v in outside if v not in set(to_source)]
    if to_source:
        st.source = _gather(ident, None, to_source)
    if to_sink:
        sink = _gather(ident, None, to_sink)
        if ident.in_reach(sink) & roles:
            st.sink = sink
        else:
            # nothing on the pair reaches it: park it where it changes no closure
            ident.identify(st.source if st.source is not None else st.a[0][1], sink)


def _gather(ident: IdentificationState, current: Optional[int], group: Iterable[int]) -> Optional[int]:
    members = sorted(group)
    if current is None:
        if not members:
            return None
        current, members = members[0], members[1:]
    for v in members:
        ident.identify(current, v)
    return current


def semi_cleaned_ok(st: OrderedState) -> bool:
    ident = st.ident
    if st.outside() or not ordered_invariants_hold(st):
        return False
    if st.source is not None and ident.in_reach(st.source):
        return False
    if st.sink is not None and ident.out_reach(st.sink):
        return False
    return not (st.source is not None and st.sink is not None and ident.has_edge(st.sink, st.source))


def _semi_clean(ident: IdentificationState, a: Sequence[Edge], b: Sequence[Edge]) -> Union[OrderedState, Insufficient]:
    st = OrderedState(ident, list(a), list(b))
    pair = st.pair()
    if bad_vertices(ident.graph, pair):
        reduced = eliminate_bad_vertices(ident.graph, pair)
        if reduced is None:
            return Insufficient('eliminate_bad_vertices', f"no clean sub-pair of a {pair.t}-pair")
        st.a = [(ident.rep_of(u), ident.rep_of(v)) for u, v in reduced.e1]
        st.b = [(ident.rep_of(u), ident.rep_of(v)) for u, v in reduced.e2]
        logger.info("bad-vertex elimination kept %d of %d edges per side", len(st.a), pair.t)
    applied = _apply_rules_exhaustively(st)
    logger.debug("identification rules applied %d times", applied)
    _collapse_terminals(st)
    if not semi_cleaned_ok(st):
        return Insufficient('semi_clean', 'leftover vertices have both in- and out-neighbours')
    return st


def semi_clean(d: Digraph, pair: ToughPair) -> Union[SemiCleanedPair, Insufficient]:
    """
    Identify everything off an ordered pair onto the pair, one source and one sink

    Bad vertices are first eliminated by shrinking the pair, then the eight
    identification rules run in order until none applies, and the leftover
    vertices collapse by whether they reach the pair.
    """
    result = _semi_clean(IdentificationState(d), pair.e1, pair.e2)
    if isinstance(result, Insufficient):
        return result
    ident = result.ident
    return SemiCleanedPair(ident.graph, result.pair(),
                           None if result.source is None else ident.id_of(result.source),
                           None if result.sink is None else ident.id_of(result.sink),
                           tuple(ident.log), result)


# ==================== Partitions ====================

@dataclass
class Partition4:
    star: FrozenSet[int] = frozenset()
    circle: FrozenSet[int] = frozenset()
    plus: FrozenSet[int] = frozenset()
    minus: FrozenSet[int] = frozenset()


def _partition(reaches: Callable[[int, int], bool], vertices: Iterable[int], anchors: Iterable[int]) -> Partition4:
    anchors = set(anchors)
    groups: Dict[str, Set[int]] = {'star': set(), 'circle': set(), 'plus': set(), 'minus': set()}
    for v in sorted(set(vertices) - anchors):
        out = any(reaches(v, u) for u in anchors)
        inn = any(reaches(u, v) for u in anchors)
        key = 'star' if out and inn else 'plus' if out else 'minus' if inn else 'circle'
        groups[key].add(v)
    return Partition4(**{k: frozenset(v) for k, v in groups.items()})


def partition_wrt(d: Digraph, vertices: Iterable[int], anchors: Iterable[int]) -> Partition4:
    """Split vertices outside the anchors by whether they reach and are reached from them"""
    return _partition(d.reaches, vertices, anchors)


# ==================== Semi-cleaned to hard ====================

@dataclass
class InducedBiclique:
    """An induced biclique with minimal edges, in graph ids"""
    graph: Digraph
    a: Tuple[int, ...]
    b: Tuple[int, ...]
    log: Tuple[Tuple[int, int], ...] = ()


@dataclass
class _Handoff:
    ident: IdentificationState
    a: List[int]
    b: List[int]

    def public(self) -> InducedBiclique:
        return InducedBiclique(self.ident.graph, tuple(self.ident.ids(self.a)),
                               tuple(self.ident.ids(self.b)), tuple(self.ident.log))


def _side_color(ident: IdentificationState, side: Sequence[Edge]) -> Callable[[int, int], int]:
    table = {}
    for i, j in itertools.combinations(range(len(side)), 2):
        (wi, xi), (wj, xj) = side[i], side[j]
        tails, heads = ident.reaches(wi, wj), ident.reaches(xi, xj)
        if tails and heads:
            table[i, j] = 4
        elif tails:
            table[i, j] = 2
        elif heads:
            table[i, j] = 3
        else:
            table[i, j] = 5 if ident.reaches(wi, xj) else 1
    return lambda i, j: table[i, j]


def _ramsey_side(ident: IdentificationState, side: Sequence[Edge]) -> Tuple[CliqueSearch, CliqueSearch]:
    color = _side_color(ident, side)
    found = {c: monochromatic_clique(len(side), color, c) for c in (1, 2, 3, 4, 5)}
    return max((found[c] for c in (1, 2, 3, 4)), key=lambda s: len(s.members)), found[5]


def _split_biclique(ident: IdentificationState, side: Sequence[Edge], split: CliqueSearch,
                    target_t: int) -> Optional[_Handoff]:
    half = len(split.members) // 2
    if half < target_t:
        return None
    members = [side[i] for i in split.members]
    a = [e[0] for e in members[:half]]
    b = [e[1] for e in members[half:2 * half]]
    if is_induced_biclique(ident.graph, ident.ids(a), ident.ids(b), minimal=True):
        return _Handoff(ident, a, b)
    return None


def _homogeneous(ident: IdentificationState, tails: Sequence[int], heads: Sequence[int],
                 sel_p: List[int], sel_q: List[int]) -> Tuple[List[int], List[int]]:
    """Sub-selections with either no edge or every edge from the tails to the heads"""
    edges = {(p, q) for p in sel_p for q in sel_q if ident.has_edge(tails[p], heads[q])}
    if not edges or len(edges) == len(sel_p) * len(sel_q):
        return sel_p, sel_q
    bip = nx.Graph()
    top = [('p', p) for p in sel_p]
    bip.add_nodes_from(top)
    bip.add_nodes_from(('q', q) for q in sel_q)
    bip.add_edges_from((('p', p), ('q', q)) for p, q in sorted(edges))
    matching = bipartite.hopcroft_karp_matching(bip, top_nodes=top)
    cover = bipartite.to_vertex_cover(bip, matching, top_nodes=top)
    none_p = [p for p in sel_p if ('p', p) not in cover]
    none_q = [q for q in sel_q if ('q', q) not in cover]

    matched = sorted((key[1], value[1]) for key, value in matching.items() if key[0] == 'p')
    full = monochromatic_clique(
        len(matched),
        lambda i, j: (matched[i][0], matched[j][1]) in edges and (matched[j][0], matched[i][1]) in edges,
        True)
    all_p = sorted(matched[i][0] for i in full.members)
    all_q = sorted(matched[i][1] for i in full.members)
    if min(len(all_p), len(all_q)) > min(len(none_p), len(none_q)):
        return all_p, all_q
    return none_p, none_q


def _fold_side(ident: IdentificationState, tails: Sequence[int], heads: Sequence[int], sel: List[int],
               kind: int, tail_parts: Partition4, head_parts: Partition4):
    def lower(j: int) -> int:
        return max((i for i in sel if i <= j), default=sel[0])

    def upper(j: int) -> int:
        return min((i for i in sel if i >= j), default=sel[-1])

    for j in range(len(tails)):
        if j in sel:
            continue
        wj, xj = tails[j], heads[j]
        if kind in (2, 4) and wj in tail_parts.star | tail_parts.minus:
            ident.identify(tails[lower(j)], wj)
        if kind == 3 and wj in tail_parts.minus:
            ident.identify(heads[lower(j)], wj)
        if kind == 2 and xj in head_parts.plus:
            ident.identify(tails[upper(j)], xj)
        if kind in (3, 4) and xj in head_parts.star | head_parts.plus:
            ident.identify(heads[upper(j)], xj)


def _reduce_to_selection(st: OrderedState, sel_a: List[int], sel_b: List[int], type_a: int, type_b: int):
    ident = st.ident
    w, x, y, z = st.columns()
    pw = _partition(ident.reaches, w, [w[i] for i in sel_a])
    px = _partition(ident.reaches, x, [x[i] for i in sel_a])
    py = _partition(ident.reaches, y, [y[i] for i in sel_b])
    pz = _partition(ident.reaches, z, [z[i] for i in sel_b])

    to_source = set(pw.circle | pw.plus | py.circle | py.plus)
    to_sink = set(px.circle | px.minus | pz.circle | pz.minus)
    if type_a == 1:
        to_source |= px.plus
        to_sink |= pw.minus
    if type_b == 1:
        to_source |= pz.plus
        to_sink |= py.minus
    st.source = _gather(ident, st.source, to_source)
    st.sink = _gather(ident, st.sink, to_sink)
    _fold_side(ident, w, x, sel_a, type_a, pw, px)
    _fold_side(ident, y, z, sel_b, type_b, py, pz)
    st.a = [st.a[i] for i in sel_a]
    st.b = [st.b[i] for i in sel_b]


def _edgeless(ident: IdentificationState, vertices: Sequence[int]) -> bool:
    return not any(ident.reaches(u, v) for u, v in itertools.permutations(vertices, 2))


def _rename_cross(st: OrderedState):
    """Replace a complete tail-to-head join between the sides by a single relay vertex"""
    ident = st.ident
    w, x, y, z = st.columns()
    if len(st.a) > 1 and len(st.b) > 1 and all(ident.has_edge(u, v) for u in w for v in z):
        w_flat, z_flat = _edgeless(ident, w), _edgeless(ident, z)
        if w_flat and not z_flat:
            y0, z0 = st.b[0]
            st.source = _gather(ident, st.source, [y0])
            st.r_wz, st.b = z0, st.b[1:]
        elif z_flat and not w_flat:
            w1, x1 = st.a[-1]
            st.sink = _gather(ident, st.sink, [x1])
            st.r_wz, st.a = w1, st.a[:-1]
    w, x, y, z = st.columns()
    if len(st.a) > 1 and len(st.b) > 1 and all(ident.has_edge(u, v) for u in y for v in x):
        y_flat, x_flat = _edgeless(ident, y), _edgeless(ident, x)
        if y_flat and not x_flat:
            w0, x0 = st.a[0]
            st.source = _gather(ident, st.source, [w0])
            st.r_yx, st.a = x0, st.a[1:]
        elif x_flat and not y_flat:
            y1, z1 = st.b[-1]
            st.sink = _gather(ident, st.sink, [z1])
            st.r_yx, st.b = y1, st.b[:-1]


def _equalize(st: OrderedState):
    ident = st.ident
    for name in ('a', 'b'):
        other = 'b' if name == 'a' else 'a'
        while len(getattr(st, name)) > max(len(getattr(st, other)), 1):
            side = getattr(st, name)
            (w0, x0), (w1, x1) = side[-2], side[-1]
            ident.identify(w0, w1)
            ident.identify(x0, x1)
            setattr(st, name, side[:-1])


def _reshape(ident: IdentificationState, side: List[Edge], classes: List[int], mode: str, terminal: int) -> List[Edge]:
    top = max(classes, default=0)
    if top == 0:
        return side
    if mode == 'up':
        keep = [i for i, c in enumerate(classes) if c == top]
        for j, (tail, head) in enumerate(side):
            if j not in keep:
                target = max((i for i in keep if i < j), default=keep[0])
                ident.identify(side[target][0], tail)
                ident.identify(side[target][1], head)
        return [side[i] for i in keep]
    keep = [i for i, c in enumerate(classes) if c == 0]
    if not keep:
        return side
    for j, (tail, head) in enumerate(side):
        if j not in keep:
            ident.identify(terminal, tail)
            ident.identify(terminal, head)
    return [side[i] for i in keep]


def _role_order(st: OrderedState) -> List[int]:
    w, x, y, z = st.columns()
    return w + x + y + z + [v for v in (st.r_wz, st.r_yx) if v is not None]


def _park_if_isolated(st: OrderedState, attr: str):
    v = getattr(st, attr)
    ident = st.ident
    if v is not None and not ident.out_reach(v) and not ident.in_reach(v) and st.a:
        ident.identify(st.a[0][0], v)
        setattr(st, attr, None)


def _move_source(st: OrderedState, move):
    if move is None or st.source is None:
        return
    ident = st.ident
    if move == 'absorb':
        reach = ident.out_reach(st.source)
        for u in _role_order(st):
            if reach <= ident.out_reach(u) | {u}:
                ident.identify(u, st.source)
                st.source = None
                return
        return
    for name, mode in zip(('a', 'b'), move):
        reach = ident.out_reach(st.source)
        side = getattr(st, name)
        classes = [2 if tail in reach else 1 if head in reach else 0 for tail, head in side]
        setattr(st, name, _reshape(ident, side, classes, mode, st.source))
    _park_if_isolated(st, 'source')


def _move_sink(st: OrderedState, move):
    if move is None or st.sink is None:
        return
    ident = st.ident
    if move == 'absorb':
        reached = ident.in_reach(st.sink)
        for u in _role_order(st):
            if reached <= ident.in_reach(u) | {u}:
                ident.identify(u, st.sink)
                st.sink = None
                return
        return
    for name, mode in zip(('a', 'b'), move):
        reached = ident.in_reach(st.sink)
        side = getattr(st, name)
        classes = [2 if head in reached else 1 if tail in reached else 0 for tail, head in side]
        setattr(st, name, _reshape(ident, side, classes, mode, st.sink))
    _park_if_isolated(st, 'sink')


def _moves(present: bool) -> List:
    if not present:
        return [None]
    return ['absorb'] + list(itertools.product(('up', 'drop'), repeat=2))


def _certified(ident: IdentificationState, roles: Dict[int, str]) -> Optional[CleanedPattern]:
    """Label the quotient with the roles and accept it only if it is a hard pattern"""
    named = {}
    for v, role in roles.items():
        rep = ident.find(v)
        if rep in named:
            return None
        named[rep] = role
    if set(named) != set(ident.reps):
        return None
    labelled = ident.labelled(named)
    pattern = recognize_hard_pattern(labelled)
    if pattern is None:
        return None
    labelled = labelled.with_labels(pattern.vertex_roles)
    if pattern_matches(labelled, pattern) is None:
        return None
    return ident.result(pattern, labelled)


def _certify_matching(st: OrderedState) -> Optional[CleanedPattern]:
    if not st.a or len(st.a) != len(st.b):
        return None
    roles: Dict[int, str] = {}
    w, x, y, z = st.columns()
    for letter, column in zip('WXYZ', (w, x, y, z)):
        for i, v in enumerate(column, start=1):
            roles[v] = f"{letter}{i}"
    for v, name in ((st.source, 'source'), (st.sink, 'sink'), (st.r_wz, 'rWZ'), (st.r_yx, 'rYX')):
        if v is not None:
            if v in roles:
                return None
            roles[v] = name
    return _certified(st.ident, roles)


def _finish_almost_hard(st: OrderedState, target_t: int) -> Union[CleanedPattern, Insufficient]:
    """Try every way of settling the source and sink and keep the largest certified pattern"""
    _equalize(st)
    best: Optional[CleanedPattern] = None
    for source_move in _moves(st.source is not None):
        for sink_move in _moves(st.sink is not None):
            trial = st.copy()
            _move_source(trial, source_move)
            _move_sink(trial, sink_move)
            _equalize(trial)
            result = _certify_matching(trial)
            if result is not None and (best is None or result.pattern.t > best.pattern.t):
                best = result
    if best is None:
        return Insufficient('semiclean_to_hard', 'no settlement of source and sink certified')
    if best.pattern.t < target_t:
        return Insufficient('semiclean_to_hard', f"certified pattern has t={best.pattern.t} < {target_t}")
    return best


def _semiclean_to_hard(st: OrderedState, target_t: int) -> Union[CleanedPattern, _Handoff, Insufficient]:
    st = st.copy()
    ident = st.ident
    picks = [_ramsey_side(ident, side) for side in (st.a, st.b)]
    for side, (best, split) in zip((st.a, st.b), picks):
        if len(best.members) < target_t:
            handoff = _split_biclique(ident, side, split, target_t)
            if handoff is not None:
                return handoff
    if min(len(best.members) for best, _ in picks) < target_t:
        return Insufficient('semiclean_to_hard', f"no monochromatic set of {target_t} indices")

    (best_a, _), (best_b, _) = picks
    sel_a, sel_b = list(best_a.members), list(best_b.members)
    w, x, y, z = st.columns()
    sel_a, sel_b = _homogeneous(ident, w, z, sel_a, sel_b)
    sel_b, sel_a = _homogeneous(ident, y, x, sel_b, sel_a)
    if not sel_a or not sel_b:
        return Insufficient('semiclean_to_hard', 'cross selection left a side empty')
    logger.debug("selection types %s/%s with %d and %d indices", best_a.color, best_b.color, len(sel_a), len(sel_b))
    _reduce_to_selection(st, sel_a, sel_b, best_a.color, best_b.color)
    _rename_cross(st)
    return _finish_almost_hard(st, target_t)


def semiclean_to_hard(sc: SemiCleanedPair, target_t: int) -> Union[CleanedPattern, InducedBiclique, Insufficient]:
    """
    Identify a semi-cleaned ordered pair down to a hard matching pattern

    A side whose index pairs are mostly crossing closure edges yields an
    induced biclique instead. Ids in the result refer to the result's graph;
    the log refers to sc.graph.
    """
    st = OrderedState(IdentificationState(sc.graph), list(sc.pair.e1), list(sc.pair.e2), sc.source, sc.sink)
    result = _semiclean_to_hard(st, target_t)
    if isinstance(result, _Handoff):
        return result.public()
    return result


# ==================== Biclique cleaning ====================

@dataclass(frozen=True)
class BicliqueCases:
    """
    Index classes of a biclique against its merged source and sink

    source_classes holds the indices whose a the source reaches, then those
    where it reaches only b, then the rest. sink_classes holds the indices
    whose b reaches the sink, then those where only a does, then the rest.
    The chosen cell is the largest source class met with its largest sink
    class, so it keeps at least a ninth of the indices.
    """
    source_classes: Tuple[Tuple[int, ...], ...]
    sink_classes: Tuple[Tuple[int, ...], ...]
    source_class: int
    sink_class: int

    def cell(self, p: int, q: int) -> Tuple[int, ...]:
        sinks = set(self.sink_classes[q])
        return tuple(i for i in self.source_classes[p] if i in sinks)

    @property
    def kept(self) -> Tuple[int, ...]:
        return self.cell(self.source_class, self.sink_class)

    def cells(self) -> List[Tuple[int, int]]:
        """The chosen cell, then the other non-empty cells by decreasing size"""
        chosen = (self.source_class, self.sink_class)
        others = [(p, q) for p in range(3) for q in range(3) if (p, q) != chosen and self.cell(p, q)]
        others.sort(key=lambda pq: (-len(self.cell(*pq)), pq))
        return [chosen] + others


def _surroundings(ident: IdentificationState, a: Sequence[int],
                  b: Sequence[int]) -> Tuple[IdentificationState, Optional[int], Optional[int]]:
    """Merge the vertices around the biclique into one source and one sink"""
    roles = set(a) | set(b)
    outside = [v for v in ident.reps if v not in roles]
    to_source = [v for v in outside if ident.out_reach(v) and not ident.in_reach(v) & roles]
    chosen = set(to_source)
    to_sink = [v for v in outside if v not in chosen]
    trial = ident.copy()
    return trial, _gather(trial, None, to_source), _gather(trial, None, to_sink)


def _classify(ident: IdentificationState, a: Sequence[int], b: Sequence[int],
              source: Optional[int], sink: Optional[int]) -> BicliqueCases:
    by_source: Tuple[List[int], List[int], List[int]] = ([], [], [])
    by_sink: Tuple[List[int], List[int], List[int]] = ([], [], [])
    for i in range(len(a)):
        if source is not None and ident.reaches(source, a[i]):
            by_source[0].append(i)
        elif source is not None and ident.reaches(source, b[i]):
            by_source[1].append(i)
        else:
            by_source[2].append(i)
        if sink is not None and ident.reaches(b[i], sink):
            by_sink[0].append(i)
        elif sink is not None and ident.reaches(a[i], sink):
            by_sink[1].append(i)
        else:
            by_sink[2].append(i)
    p = max(range(3), key=lambda k: (len(by_source[k]), -k))
    members = set(by_source[p])
    q = max(range(3), key=lambda k: (len(members.intersection(by_sink[k])), -k))
    return BicliqueCases(tuple(map(tuple, by_source)), tuple(map(tuple, by_sink)), p, q)


def biclique_cases(d: Digraph, a: Sequence[int], b: Sequence[int]) -> BicliqueCases:
    """Source and sink classes of an induced biclique with minimal edges"""
    ident = IdentificationState(d)
    if not is_induced_biclique(ident.graph, ident.ids(a), ident.ids(b), minimal=True):
        raise GraphError("expected an induced biclique with minimal edges")
    trial, source, sink = _surroundings(ident, list(a), list(b))
    return _classify(trial, list(a), list(b), source, sink)


def _settle(ident: IdentificationState, a: Sequence[int], b: Sequence[int], keep: Sequence[int],
            source: Optional[int], sink: Optional[int]) -> Optional[CleanedPattern]:
    """
    Merge the spare indices and place the source and sink for one cell

    Spare a vertices join the source and spare b vertices the sink. A source
    that reaches kept b vertices only becomes the first kept a, and a sink
    reached from kept a vertices only becomes the first kept b. An endpoint
    touching no kept vertex joins the other endpoint.
    """
    trial = ident.copy()
    kept = set(keep)
    kept_a, kept_b = [a[i] for i in keep], [b[i] for i in keep]
    source = _gather(trial, source, [a[i] for i in range(len(a)) if i not in kept])
    sink = _gather(trial, sink, [b[i] for i in range(len(b)) if i not in kept])

    source_role = sink_role = None
    if source is not None:
        if any(trial.reaches(source, v) for v in kept_a):
            source_role = 'source'
        elif any(trial.reaches(source, v) for v in kept_b):
            source_role = 'a'
    if sink is not None:
        if any(trial.reaches(v, sink) for v in kept_b):
            sink_role = 'sink'
        elif any(trial.reaches(v, sink) for v in kept_a):
            sink_role = 'b'

    if source_role == 'a':
        trial.identify(kept_a[0], source)
    if sink_role == 'b':
        trial.identify(kept_b[0], sink)
    idle = [v for v, role in ((source, source_role), (sink, sink_role)) if v is not None and role is None]
    if idle:
        if source_role == 'source':
            target = source
        elif sink_role == 'sink':
            target = sink
        else:
            target = kept_b[0]
        _gather(trial, target, idle)

    named = {v: f"A{k}" for k, v in enumerate(kept_a, start=1)}
    named.update({v: f"B{k}" for k, v in enumerate(kept_b, start=1)})
    if source_role == 'source':
        named[source] = 'source'
    if sink_role == 'sink':
        named[sink] = 'sink'
    return _certified(trial, named)


def _clean_min_biclique(ident: IdentificationState, a: Sequence[int], b: Sequence[int]) -> Union[CleanedPattern, Insufficient]:
    if not is_induced_biclique(ident.graph, ident.ids(a), ident.ids(b), minimal=True):
        raise GraphError("expected an induced biclique with minimal edges")
    trial, source, sink = _surroundings(ident, a, b)
    cases = _classify(trial, a, b, source, sink)
    for p, q in cases.cells():
        keep = cases.cell(p, q)
        result = _settle(trial, a, b, keep, source, sink)
        if result is not None:
            logger.info("biclique cleaned to t=%d from %d indices (source class %d, sink class %d)",
                        len(keep), len(a), p + 1, q + 1)
            return result
        logger.debug("cell (%d, %d) with %d indices did not certify", p + 1, q + 1, len(keep))
    return Insufficient('clean_min_biclique', 'no identification certified')


def clean_min_biclique(d: Digraph, a: Sequence[int], b: Sequence[int]) -> Union[CleanedPattern, Insufficient]:
    """
    Identify the surroundings of an induced biclique into a source and a sink

    Outside vertices reaching the biclique without being reached from it form
    the source, all others the sink. The indices are split three ways by how
    the source reaches them and three ways by how they reach the sink; the
    biclique keeps the chosen cell (see BicliqueCases), at least a ninth of
    its indices. Raises GraphError when (a,b) is not an induced biclique with
    minimal edges.
    """
    return _clean_min_biclique(IdentificationState(d), list(a), list(b))


# ==================== Biclique simplification ====================

@dataclass
class SimplifyOutcome:
    variant: str
    graph: Optional[Digraph] = None
    pair: Optional[ToughPair] = None
    a: Tuple[int, ...] = ()
    b: Tuple[int, ...] = ()
    log: Tuple[Tuple[int, int], ...] = ()
    reason: str = ''


def _matching_biclique_holds(ident: IdentificationState, a: Sequence[int], b: Sequence[int]) -> bool:
    g = ident.graph
    ia, ib = ident.ids(a), ident.ids(b)
    if not g.is_acyclic() or not is_matching_closure_biclique(g, ia, ib):
        return False
    return all(is_minimal_edge(g, (x, y)) for x, y in zip(ia, ib))


def _contraction_survivor(e: Edge, roles: Set[int]) -> Optional[Tuple[int, int]]:
    u, v = e
    if u in roles and v in roles:
        return None
    if v in roles:
        return v, u
    if u in roles:
        return u, v
    return min(u, v), max(u, v)


def _redundant(ident: IdentificationState, e: Edge, a: Sequence[int], b: Sequence[int]) -> bool:
    merge = _contraction_survivor(e, set(a) | set(b))
    if merge is None:
        return False
    trial = ident.copy()
    trial.identify(*merge)
    return _matching_biclique_holds(trial, a, b)


def is_contraction_redundant(d: Digraph, e: Edge, a: Sequence[int], b: Sequence[int]) -> bool:
    """Contracting e keeps d acyclic, the a_i -> b_i edges minimal and the closure biclique"""
    if not d.has_edge(*e):
        raise GraphError(f"edge {e} not in graph")
    return _redundant(IdentificationState(d), e, a, b)


def _contract_redundant(ident: IdentificationState, a: Sequence[int], b: Sequence[int]) -> int:
    roles = set(a) | set(b)
    contracted = 0
    while True:
        reps = ident.reps
        for x, y in ident.graph.sorted_edges():
            e = (reps[x], reps[y])
            if _redundant(ident, e, a, b):
                ident.identify(*_contraction_survivor(e, roles))
                contracted += 1
                break
        else:
            return contracted


def _depth_to(g: Digraph, targets: Set[int]) -> Dict[int, Optional[int]]:
    """Longest path length from each vertex to the targets, None if it reaches none"""
    depth: Dict[int, Optional[int]] = {}
    for v in reversed(list(nx.lexicographical_topological_sort(g.to_networkx()))):
        if v in targets:
            depth[v] = 0
            continue
        below = [depth[w] for w in g.successors(v) if depth[w] is not None]
        depth[v] = 1 + max(below) if below else None
    return depth


def _ordered_variants(e1: Sequence[Edge], e2: Sequence[Edge]) -> Iterable[Tuple[Tuple[Edge, ...], Tuple[Edge, ...]]]:
    for first in (tuple(e1), tuple(reversed(e1))):
        for second in (tuple(e2), tuple(reversed(e2))):
            yield first, second


def _long_path_pair(ident: IdentificationState, path: Sequence[int], a: Sequence[int], b: Sequence[int],
                    target_t: int) -> Optional[Tuple[List[Edge], List[Edge]]]:
    g = ident.graph
    ia, ib = ident.ids(a), ident.ids(b)

    def label(k: int) -> Optional[int]:
        tail, head = path[k], path[k + 1]
        for j in range(len(ia)):
            if ((ia[j] == head or g.reaches(ia[j], head))
                    and (tail == ib[j] or g.reaches(tail, ib[j]))):
                return j
        return None

    labels = [label(k) for k in range(len(path) - 1)]
    middle = [k for k in range(1, len(path) - 1) if labels[k - 1] is not None and labels[k] is not None]
    half = len(middle) // 2
    if half < target_t:
        return None
    e1 = [(path[k], ib[labels[k]]) for k in middle[:half]]
    e2 = [(ia[labels[k - 1]], path[k]) for k in middle[half:2 * half]]
    for first, second in _ordered_variants(e1, e2):
        if certify_ordered_tough_pair(g, ToughPair(first, second, True, g)):
            reps = ident.reps
            return ([(reps[u], reps[v]) for u, v in first], [(reps[u], reps[v]) for u, v in second])
    return None


def _matching_or_biclique(ident: IdentificationState, pairs: List[Edge], target_t: int):
    g = ident.graph

    def color(i: int, j: int) -> str:
        (x1, y1), (x2, y2) = pairs[i], pairs[j]
        if not (g.reaches(x1, y2) or g.reaches(x2, y1)):
            return 'apart'
        return 'joined' if g.has_edge(x1, y2) and g.has_edge(x2, y1) else 'mixed'

    apart = monochromatic_clique(len(pairs), color, 'apart')
    half = len(apart.members) // 2
    if half >= target_t:
        chosen = [pairs[i] for i in apart.members]
        for first, second in _ordered_variants(chosen[:half], chosen[half:2 * half]):
            if certify_ordered_tough_pair(g, ToughPair(first, second, True, g)):
                reps = ident.reps
                return ORDERED, ([(reps[u], reps[v]) for u, v in first], [(reps[u], reps[v]) for u, v in second])
    joined = monochromatic_clique(len(pairs), color, 'joined')
    if len(joined.members) >= target_t:
        ta = [pairs[i][0] for i in joined.members]
        tb = [pairs[i][1] for i in joined.members]
        if is_induced_biclique(g, ta, tb, minimal=True):
            reps = ident.reps
            return INDUCED_BICLIQUE, ([reps[v] for v in ta], [reps[v] for v in tb])
    return None


def _simplify(ident: IdentificationState, a: Sequence[int], b: Sequence[int], target_t: int):
    """Returns (variant, payload) in representatives, or Insufficient"""
    a, b = list(a), list(b)
    _contract_cycles(ident, keep=set(a) | set(b))
    if len({ident.find(v) for v in a + b}) != len(a) + len(b) or not _matching_biclique_holds(ident, a, b):
        return Insufficient('simplify_biclique', 'input is not a matching inside a closure biclique')
    contracted = _contract_redundant(ident, a, b)
    logger.debug("contracted %d redundant edges", contracted)

    g = ident.graph
    nxg = g.to_networkx()
    path = nx.dag_longest_path(nxg, topo_order=list(nx.lexicographical_topological_sort(nxg)))
    if len(path) >= 2 * target_t + 2:
        found = _long_path_pair(ident, path, a, b, target_t)
        if found is not None:
            return ORDERED, found

    last = None
    while True:
        g = ident.graph
        ia, ib = ident.ids(a), ident.ids(b)
        depth = _depth_to(g, set(ib))
        longest = max(depth[x] for x in ia)
        if longest == 1:
            if len(a) >= target_t and is_induced_biclique(g, ia, ib, minimal=True):
                return INDUCED_BICLIQUE, (a, b)
            return Insufficient('simplify_biclique', f"biclique of size {len(a)} below {target_t}")
        if last is not None and longest >= last:
            return Insufficient('simplify_biclique', 'longest path did not shrink')
        last = longest

        ib_set = set(ib)
        layer = sorted({y for x in ia if depth[x] == longest for y in g.successors(x)
                        if y not in ib_set and depth[y] == longest - 1})
        layer_set = set(layer)
        bip = nx.Graph()
        top = [('a', x) for x in ia]
        bip.add_nodes_from(top)
        bip.add_nodes_from(('l', y) for y in layer)
        bip.add_edges_from((('a', x), ('l', y)) for x in ia for y in g.successors(x) if y in layer_set)
        matching = bipartite.hopcroft_karp_matching(bip, top_nodes=top)
        pairs = sorted((key[1], value[1]) for key, value in matching.items() if key[0] == 'a')
        if len(pairs) >= 2 * target_t:
            found = _matching_or_biclique(ident, pairs, target_t)
            if found is not None:
                return found

        cover = bipartite.to_vertex_cover(bip, matching, top_nodes=top)
        groups: Dict[Tuple[int, ...], List[int]] = {}
        for i, x in enumerate(ia):
            if ('a', x) not in cover:
                key = tuple(sorted(y for y in g.successors(x) if y in layer_set))
                groups.setdefault(key, []).append(i)
        if not groups:
            return Insufficient('simplify_biclique', 'vertex cover took every tail')
        chosen = max(sorted(groups.items()), key=lambda kv: len(kv[1]))[1]
        if len(chosen) < target_t:
            return Insufficient('simplify_biclique', f"largest layer class has {len(chosen)} tails")
        a, b = [a[i] for i in chosen], [b[i] for i in chosen]


def simplify_biclique(d: Digraph, a: Sequence[int], b: Sequence[int], target_t: int) -> SimplifyOutcome:
    """
    Contract a matching inside a closure biclique until it is induced or yields an ordered pair

    Cycles are contracted first, then every contraction-redundant edge. A long
    enough path gives an ordered pair directly; otherwise the first layer of
    longest paths is split by a maximum matching or narrowed by its vertex
    cover until every path is a single edge.
    """
    ident = IdentificationState(d)
    result = _simplify(ident, a, b, target_t)
    if isinstance(result, Insufficient):
        return SimplifyOutcome(INSUFFICIENT, ident.graph, log=tuple(ident.log), reason=result.reason)
    variant, payload = result
    g = ident.graph
    if variant == ORDERED:
        e1, e2 = payload
        pair = ToughPair(tuple((ident.id_of(u), ident.id_of(v)) for u, v in e1),
                         tuple((ident.id_of(u), ident.id_of(v)) for u, v in e2), True, g)
        return SimplifyOutcome(ORDERED, g, pair=pair, log=tuple(ident.log))
    ta, tb = payload
    return SimplifyOutcome(INDUCED_BICLIQUE, g, a=tuple(ident.ids(ta)), b=tuple(ident.ids(tb)),
                           log=tuple(ident.log))


# ==================== Dispatcher ====================

@dataclass
class CleanReport:
    target_t: int
    status: str = INSUFFICIENT
    stage: str = ''
    reason: str = ''
    pattern: Optional[HardPattern] = None
    graph: Optional[Digraph] = None
    log: Tuple[Tuple[int, int], ...] = ()
    removed: FrozenSet[Edge] = frozenset()
    trace: List[Tuple[str, str]] = field(default_factory=list)
    exact: bool = True

    @property
    def success(self) -> bool:
        return self.status == 'ok'

    def to_dict(self) -> Dict:
        result = {
            'status': self.status,
            'target_t': self.target_t,
            'stage': self.stage,
            'reason': self.reason,
            'exact': self.exact,
            'trace': [{'stage': s, 'detail': d} for s, d in self.trace],
            'identifications': [list(p) for p in self.log],
            'removed_edges': [list(e) for e in sorted(self.removed)],
        }
        if self.pattern is not None:
            result['pattern'] = {
                'kind': self.pattern.kind,
                't': self.pattern.t,
                'flags': vars(self.pattern.flags),
                'literal': self.pattern.literal,
                'roles': {str(v): r for v, r in sorted(self.pattern.vertex_roles.items())},
            }
        if self.graph is not None:
            result['graph'] = {'n': self.graph.vertex_count,
                               'edges': [list(e) for e in self.graph.sorted_edges()]}
        return result


def _fail(report: CleanReport, stage: str, reason: str) -> CleanReport:
    report.status, report.stage, report.reason = INSUFFICIENT, stage, reason
    report.trace.append((stage, f"insufficient: {reason}"))
    logger.info("cleaning stopped at %s: %s", stage, reason)
    return report


def _accept(report: CleanReport, result: CleanedPattern, d: Digraph, stage: str) -> CleanReport:
    if result.pattern.t < report.target_t:
        return _fail(report, stage, f"pattern has t={result.pattern.t} < {report.target_t}")
    replayed = replay_identifications(d, result.log, result.removed)
    if replayed.vertex_count != result.graph.vertex_count or replayed.edges != result.graph.edges:
        return _fail(report, 'replay', 'identification log does not reproduce the output')
    if pattern_matches(result.graph, result.pattern) is None:
        return _fail(report, 'certify', 'output is not the claimed pattern')
    report.status, report.stage = 'ok', stage
    report.pattern, report.graph = result.pattern, result.graph
    report.log, report.removed = result.log, result.removed
    report.trace.append((stage, f"{result.pattern.kind} t={result.pattern.t}"))
    return report


def _recognized(ident: IdentificationState, report: CleanReport, d: Digraph, stage: str) -> bool:
    g = ident.graph
    pattern = recognize_hard_pattern(g)
    if pattern is None or pattern.t < report.target_t:
        return False
    _accept(report, ident.result(pattern, g.with_labels(pattern.vertex_roles)), d, stage)
    return report.success


def merge_keeps_reach(g: Digraph, keep: int, drop: int) -> bool:
    """Identifying drop into keep leaves reachability among every other vertex unchanged"""
    mapping = merge_map(g.vertex_count, keep, drop)
    merged = apply_vertex_map(g, mapping, g.vertex_count - 1)
    rows, merged_rows = g.closure_rows, merged.closure_rows
    for a in g.vertices():
        if a == drop:
            continue
        expected = 0
        for b in iter_bits(rows[a] & ~(1 << drop)):
            expected |= 1 << mapping[b]
        if merged_rows[mapping[a]] != expected & ~(1 << mapping[a]):
            return False
    return True


def _merge_away(ident: IdentificationState, drop: Sequence[int]) -> Optional[IdentificationState]:
    """Identify every vertex of drop into a neighbour, one reach-preserving merge at a time"""
    state = ident.copy()
    pending = list(drop)
    while pending:
        g = state.graph
        for x in pending:
            xi = state.id_of(x)
            nbrs = sorted(set(g.successors(xi)) | set(g.predecessors(xi)),
                          key=lambda y: (state.rep_of(y) in pending, y))
            target = next((y for y in nbrs if merge_keeps_reach(g, y, xi)), None)
            if target is not None:
                state.identify(state.rep_of(target), x)
                pending.remove(x)
                break
        else:
            return None
    return state


def _strip_noise(ident: IdentificationState, report: CleanReport, d: Digraph, depth: int) -> bool:
    """
    Look for at most depth vertices whose removal leaves the closure of a pattern

    A candidate set must leave a closure signature some template has, and
    must merge away without changing reachability among the rest; the result
    then goes through recognition and the usual certification.
    """
    g = ident.graph
    n = g.vertex_count
    movable = [x for x in g.vertices()
               if any(merge_keeps_reach(g, y, x) for y in set(g.successors(x)) | set(g.predecessors(x)))]
    full = (1 << n) - 1
    attempts = 0
    for size in range(1, min(depth, n - 1) + 1):
        wanted = template_closure_signatures(n - size)
        if not wanted:
            continue
        for drop in itertools.combinations(movable, size):
            keep = full
            for x in drop:
                keep &= ~(1 << x)
            if closure_signature(g, keep) not in wanted:
                continue
            attempts += 1
            state = _merge_away(ident, [ident.rep_of(x) for x in drop])
            if state is not None and _recognized(state, report, d, 'noise'):
                return True
    report.trace.append(('noise', f"{len(movable)} movable vertices, {attempts} candidate sets"))
    return False


def _ordered_pipeline(ident: IdentificationState, a: Sequence[Edge], b: Sequence[Edge], target_t: int,
                      report: CleanReport) -> Union[CleanedPattern, Insufficient]:
    st = _semi_clean(ident, a, b)
    if isinstance(st, Insufficient):
        return st
    report.trace.append(('semi_clean', f"t={len(st.a)} source={st.source is not None} sink={st.sink is not None}"))
    result = _semiclean_to_hard(st, target_t)
    if isinstance(result, _Handoff):
        report.trace.append(('semiclean_to_hard', f"induced biclique of size {len(result.a)}"))
        return _clean_min_biclique(result.ident, result.a, result.b)
    return result


def clean(d: Digraph, target_t: int) -> CleanReport:
    """
    Identify d down to a hard pattern with t >= target_t

    Cycles and isolated vertices go first, and a graph that already is a
    pattern is returned as such, as is one that becomes a pattern after a few
    reach-preserving merges of noise vertices. Otherwise a tough pair
    of at least 2*target_t edges per side is cleaned through pre-cleaning and
    the ordered or biclique branch. The report carries the identification log
    and the deleted edges; replaying them on d reproduces the output graph.
    """
    if target_t < 1:
        raise GraphError("target t must be positive")
    settings = get_settings()
    report = CleanReport(target_t)
    ident = IdentificationState(d)

    report.trace.append(('scc', f"{_contract_cycles(ident)} identifications"))
    report.trace.append(('isolated', f"{_absorb_isolated(ident)} identifications"))
    if _recognized(ident, report, d, 'recognize'):
        return report
    if ident.graph.vertex_count <= settings.clean_noise_max_vertices and \
            _strip_noise(ident, report, d, settings.clean_noise_depth):
        return report

    g = ident.graph
    need = 2 * target_t
    found = find_tough_pair(g, need)
    if not found.found:
        return _fail(report, 'find_tough_pair', f"no {need}-tough-pair ({found.status})")
    pair, exhaustive = found.pair, found.exhaustive
    for size in range(need + 1, max(need, min(target_t ** 2, settings.clean_max_pair)) + 1):
        bigger = find_tough_pair(g, size)
        if not bigger.found:
            break
        pair, exhaustive = bigger.pair, exhaustive and bigger.exhaustive
    report.exact = exhaustive
    report.trace.append(('find_tough_pair', f"t={pair.t}"))

    reps = ident.reps
    spanning = reachability_minimal_spanning(g, pair.e1 + pair.e2)
    dropped = sorted(g.edges - spanning.edges)
    ident.delete_edges((reps[u], reps[v]) for u, v in dropped)
    report.trace.append(('spanning', f"{len(dropped)} edges removed"))

    g = ident.graph
    outcome = preclean(g, pair, target_t)
    report.exact = report.exact and outcome.exact
    report.trace.append(('preclean', outcome.variant))

    if outcome.variant == ORDERED:
        e1 = [(reps[u], reps[v]) for u, v in outcome.pair.e1]
        e2 = [(reps[u], reps[v]) for u, v in outcome.pair.e2]
        result = _ordered_pipeline(ident, e1, e2, target_t, report)
    elif outcome.variant == BICLIQUE_OUTCOME:
        result = _clean_min_biclique(ident, [reps[v] for v in outcome.a], [reps[v] for v in outcome.b])
    elif outcome.variant == MATCHING_CLOSURE_BICLIQUE:
        simplified = _simplify(ident, [reps[v] for v in outcome.a], [reps[v] for v in outcome.b], target_t)
        if isinstance(simplified, Insufficient):
            result = simplified
        else:
            variant, payload = simplified
            report.trace.append(('simplify_biclique', variant))
            if variant == ORDERED:
                result = _ordered_pipeline(ident, payload[0], payload[1], target_t, report)
            else:
                result = _clean_min_biclique(ident, payload[0], payload[1])
    else:
        return _fail(report, 'preclean', outcome.reason)

    if isinstance(result, Insufficient):
        return _fail(report, result.stage, result.reason)
    return _accept(report, result, d, 'clean')
