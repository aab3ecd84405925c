"""
Digraph Core
Dense-id digraphs with optional integer weights and role labels, reachability
bitsets, transitive closure, vertex identification and SCC contraction
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class GraphError(ValueError):
    """Raised on invalid graphs, instances or graph operations"""


class Digraph:
    """
    Simple directed graph on vertices 0..n-1

    Values are immutable after construction. An unweighted graph has
    weight None and every edge counts 1 wherever a weight is needed.
    """

    def __init__(self, vertex_count: int, edges: Iterable[Edge] = (),
                 weight: Optional[Mapping[Edge, int]] = None,
                 labels: Optional[Mapping[int, str]] = None):
        if vertex_count < 0:
            raise GraphError(f"negative vertex count {vertex_count}")
        edge_set = frozenset((int(u), int(v)) for u, v in edges)
        for u, v in edge_set:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphError(f"edge ({u},{v}) outside [0,{vertex_count})")
            if u == v:
                raise GraphError(f"self-loop at {u}")

        weights = None
        if weight is not None and edge_set:
            weights = {}
            for e in edge_set:
                w = int(weight.get(e, 1))
                if w < 0:
                    raise GraphError(f"negative weight {w} on edge {e}")
                weights[e] = w

        tags = {}
        for v, tag in (labels or {}).items():
            if not 0 <= v < vertex_count:
                raise GraphError(f"label on unknown vertex {v}")
            if tag:
                tags[int(v)] = str(tag)

        self._n = vertex_count
        self._edges = edge_set
        self._weight = weights
        self._labels = tags

    # ==================== Accessors ====================

    @property
    def vertex_count(self) -> int:
        return self._n

    @property
    def edges(self) -> FrozenSet[Edge]:
        return self._edges

    @property
    def weight(self) -> Optional[Dict[Edge, int]]:
        return self._weight

    @property
    def labels(self) -> Dict[int, str]:
        return self._labels

    @property
    def weighted(self) -> bool:
        return self._weight is not None

    def vertices(self) -> range:
        return range(self._n)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edges

    def edge_weight(self, e: Edge) -> int:
        if self._weight is None:
            return 1
        return self._weight[e]

    def total_weight(self, edges: Iterable[Edge]) -> int:
        return sum(self.edge_weight(e) for e in edges)

    def label(self, v: int) -> Optional[str]:
        return self._labels.get(v)

    def vertex_by_label(self, tag: str) -> Optional[int]:
        for v, t in self._labels.items():
            if t == tag:
                return v
        return None

    @cached_property
    def _adjacency(self) -> Tuple[Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]]:
        succ = [[] for _ in range(self._n)]
        pred = [[] for _ in range(self._n)]
        for u, v in sorted(self._edges):
            succ[u].append(v)
            pred[v].append(u)
        return tuple(tuple(s) for s in succ), tuple(tuple(p) for p in pred)

    def successors(self, v: int) -> Tuple[int, ...]:
        return self._adjacency[0][v]

    def predecessors(self, v: int) -> Tuple[int, ...]:
        return self._adjacency[1][v]

    def out_degree(self, v: int) -> int:
        return len(self._adjacency[0][v])

    def in_degree(self, v: int) -> int:
        return len(self._adjacency[1][v])

    # ==================== Reachability ====================

    @cached_property
    def closure_rows(self) -> Tuple[int, ...]:
        """Row u is the bitset of vertices v != u reachable from u"""
        succ = self._adjacency[0]
        rows = []
        for s in range(self._n):
            seen = 0
            stack = list(succ[s])
            while stack:
                v = stack.pop()
                bit = 1 << v
                if seen & bit:
                    continue
                seen |= bit
                stack.extend(succ[v])
            rows.append(seen & ~(1 << s))
        return tuple(rows)

    @cached_property
    def _cyclic_mask(self) -> int:
        mask = 0
        rows = self.closure_rows
        for v in range(self._n):
            if any(w == v or rows[w] >> v & 1 for w in self.successors(v)):
                mask |= 1 << v
        return mask

    def reaches(self, u: int, v: int) -> bool:
        """True iff u != v and there is a u->v path"""
        return u != v and bool(self.closure_rows[u] >> v & 1)

    def reach_mask(self, u: int) -> int:
        return self.closure_rows[u]

    def reached_by_mask(self, v: int) -> int:
        return self._reverse_rows[v]

    @cached_property
    def _reverse_rows(self) -> Tuple[int, ...]:
        cols = [0] * self._n
        for u, row in enumerate(self.closure_rows):
            v = 0
            while row:
                if row & 1:
                    cols[v] |= 1 << u
                row >>= 1
                v += 1
        return tuple(cols)

    def on_cycle(self, v: int) -> bool:
        return bool(self._cyclic_mask >> v & 1)

    def is_acyclic(self) -> bool:
        return self._cyclic_mask == 0

    def closure_edges(self) -> FrozenSet[Edge]:
        result = set()
        for u, row in enumerate(self.closure_rows):
            v = 0
            while row:
                if row & 1:
                    result.add((u, v))
                row >>= 1
                v += 1
        return frozenset(result)

    # ==================== Derived graphs ====================

    def reverse(self) -> 'Digraph':
        weight = None
        if self._weight is not None:
            weight = {(v, u): w for (u, v), w in self._weight.items()}
        return Digraph(self._n, ((v, u) for u, v in self._edges), weight, self._labels)

    def subgraph(self, edges: Iterable[Edge]) -> 'Digraph':
        """Spanning subgraph on the given edges (all must exist)"""
        chosen = frozenset(edges)
        missing = chosen - self._edges
        if missing:
            raise GraphError(f"edges not in graph: {sorted(missing)[:5]}")
        return Digraph(self._n, chosen, self._weight, self._labels)

    def with_labels(self, labels: Mapping[int, str]) -> 'Digraph':
        return Digraph(self._n, self._edges, self._weight, labels)

    def with_weights(self, weight: Optional[Mapping[Edge, int]]) -> 'Digraph':
        return Digraph(self._n, self._edges, weight, self._labels)

    def unweighted(self) -> 'Digraph':
        return Digraph(self._n, self._edges, None, self._labels)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self._n))
        for u, v in sorted(self._edges):
            g.add_edge(u, v, weight=self.edge_weight((u, v)))
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return (self._n == other._n and self._edges == other._edges
                and self._weight == other._weight and self._labels == other._labels)

    def __hash__(self):
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        kind = 'weighted' if self.weighted else 'unweighted'
        return f"Digraph(n={self._n}, m={len(self._edges)}, {kind})"


# ==================== Closure ====================

def transitive_closure(d: Digraph) -> Digraph:
    """D* on the same vertices: (u,v) present iff u != v and u reaches v"""
    return Digraph(d.vertex_count, d.closure_edges(), labels=d.labels)


def transitively_equivalent(d1: Digraph, d2: Digraph) -> bool:
    if d1.vertex_count != d2.vertex_count:
        raise GraphError(f"vertex sets differ: {d1.vertex_count} vs {d2.vertex_count}")
    return d1.closure_rows == d2.closure_rows


def satisfies(vertex_count: int, edges: Iterable[Edge], demands: Iterable[Edge]) -> bool:
    """Every demand (u,v) has a u->v path inside edges"""
    succ: Dict[int, List[int]] = {}
    for u, v in edges:
        succ.setdefault(u, []).append(v)
    by_source: Dict[int, List[int]] = {}
    for u, v in demands:
        by_source.setdefault(u, []).append(v)
    for source, targets in by_source.items():
        seen = {source}
        stack = [source]
        while stack:
            x = stack.pop()
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if any(t not in seen for t in targets):
            return False
    return True


# ==================== Identification ====================

def merge_map(vertex_count: int, u: int, v: int) -> List[int]:
    """Old id -> new id when u and v are identified (smaller id survives)"""
    if u == v:
        raise GraphError(f"cannot identify vertex {u} with itself")
    survivor, absorbed = min(u, v), max(u, v)
    mapping = []
    for x in range(vertex_count):
        if x == absorbed:
            mapping.append(survivor)
        elif x > absorbed:
            mapping.append(x - 1)
        else:
            mapping.append(x)
    return mapping


def apply_vertex_map(d: Digraph, mapping: Sequence[int], vertex_count: int) -> Digraph:
    """Image of d under a surjective vertex map; loops dropped, parallels keep min weight"""
    edges = set()
    weight = {} if d.weighted else None
    for (x, y) in d.sorted_edges():
        a, b = mapping[x], mapping[y]
        if a == b:
            continue
        edges.add((a, b))
        if weight is not None:
            w = d.edge_weight((x, y))
            weight[(a, b)] = min(w, weight.get((a, b), w))
    labels: Dict[int, str] = {}
    for x in sorted(d.labels):
        target = mapping[x]
        # the first (smallest) preimage carrying a label keeps it
        labels.setdefault(target, d.labels[x])
    return Digraph(vertex_count, edges, weight, labels)


def identify(d: Digraph, u: int, v: int) -> Digraph:
    """Merge u and v; the smaller id survives and higher ids shift down by one"""
    for x in (u, v):
        if not 0 <= x < d.vertex_count:
            raise GraphError(f"vertex {x} outside [0,{d.vertex_count})")
    mapping = merge_map(d.vertex_count, u, v)
    return apply_vertex_map(d, mapping, d.vertex_count - 1)


def contract_edge(d: Digraph, e: Edge) -> Digraph:
    if not d.has_edge(*e):
        raise GraphError(f"edge {e} not in graph")
    return identify(d, e[0], e[1])


# ==================== Instances ====================

@dataclass(frozen=True)
class DsnInstance:
    """Host graph, ordered terminals and demand pairs (host vertex ids)"""
    graph: Digraph
    terminals: Tuple[int, ...]
    demands: FrozenSet[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        terminals = tuple(int(t) for t in self.terminals)
        demands = frozenset((int(u), int(v)) for u, v in self.demands)
        object.__setattr__(self, 'terminals', terminals)
        object.__setattr__(self, 'demands', demands)
        if len(set(terminals)) != len(terminals):
            raise GraphError("terminals must be distinct")
        for t in terminals:
            if not 0 <= t < self.graph.vertex_count:
                raise GraphError(f"terminal {t} outside graph")
        tset = set(terminals)
        for u, v in demands:
            if u == v:
                raise GraphError(f"demand self-loop at {u}")
            if u not in tset or v not in tset:
                raise GraphError(f"demand ({u},{v}) between non-terminals")

    @classmethod
    def from_demand_graph(cls, graph: Digraph, terminals: Sequence[int],
                          demand_graph: Digraph) -> 'DsnInstance':
        """Demands given on terminal indices 0..k-1"""
        terminals = tuple(terminals)
        if demand_graph.vertex_count != len(terminals):
            raise GraphError("demand graph must have one vertex per terminal")
        demands = frozenset((terminals[i], terminals[j]) for i, j in demand_graph.edges)
        return cls(graph, terminals, demands)

    @property
    def k(self) -> int:
        return len(self.terminals)

    def sorted_demands(self) -> List[Edge]:
        return sorted(self.demands)

    def demand_graph(self) -> Digraph:
        """The demand digraph on terminal indices, labelled from the host"""
        index = {t: i for i, t in enumerate(self.terminals)}
        labels = {index[t]: self.graph.labels[t] for t in self.terminals if t in self.graph.labels}
        return Digraph(len(self.terminals), ((index[u], index[v]) for u, v in self.demands),
                       labels=labels)

    def with_graph(self, graph: Digraph) -> 'DsnInstance':
        return DsnInstance(graph, self.terminals, self.demands)


# ==================== SCC contraction ====================

@dataclass(frozen=True)
class SccContraction:
    """Solution subgraph before and after contracting its strong components"""
    original: Digraph
    contracted: Digraph
    component_of: Dict[int, int]
    portals: Dict[int, FrozenSet[int]]
    members: Tuple[Tuple[int, ...], ...]

    def crossing_edge_counts(self) -> Dict[Edge, int]:
        """Number of original solution edges between each ordered component pair"""
        counts: Dict[Edge, int] = {}
        for u, v in self.original.edges:
            cu, cv = self.component_of[u], self.component_of[v]
            if cu != cv:
                counts[(cu, cv)] = counts.get((cu, cv), 0) + 1
        return counts


def scc_contract(inst: DsnInstance, solution: Iterable[Edge]) -> Tuple[SccContraction, DsnInstance]:
    """
    Contract every strongly connected component of a feasible solution

    Returns:
        (contraction record, contracted instance). The contraction's
        `contracted` graph is the acyclic image of the solution.
    """
    chosen = frozenset(solution)
    missing = chosen - inst.graph.edges
    if missing:
        raise GraphError(f"solution uses edges outside the graph: {sorted(missing)[:5]}")
    if not satisfies(inst.graph.vertex_count, chosen, inst.demands):
        raise GraphError("solution is infeasible")

    sol_graph = inst.graph.subgraph(chosen)
    comps = sorted((tuple(sorted(c)) for c in nx.strongly_connected_components(sol_graph.to_networkx())),
                   key=lambda c: c[0])
    component_of = {v: i for i, c in enumerate(comps) for v in c}
    mapping = [component_of[v] for v in range(inst.graph.vertex_count)]

    host = apply_vertex_map(inst.graph.with_labels({}), mapping, len(comps))
    contracted = apply_vertex_map(sol_graph.with_labels({}), mapping, len(comps))

    portals: Dict[int, set] = {i: set() for i in range(len(comps))}
    for u, v in chosen:
        cu, cv = component_of[u], component_of[v]
        if cu != cv:
            portals[cu].add(u)
            portals[cv].add(v)

    terminals: List[int] = []
    for t in inst.terminals:
        if component_of[t] not in terminals:
            terminals.append(component_of[t])
    demands = {(component_of[u], component_of[v]) for u, v in inst.demands
               if component_of[u] != component_of[v]}

    logger.debug("contracted %d vertices into %d components", inst.graph.vertex_count, len(comps))
    record = SccContraction(
        original=sol_graph,
        contracted=contracted,
        component_of=component_of,
        portals={i: frozenset(p) for i, p in portals.items()},
        members=tuple(comps),
    )
    return record, DsnInstance(host, tuple(terminals), frozenset(demands))
