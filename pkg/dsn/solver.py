"""
DSN Solver
Exact minimum-weight Directed Steiner Network search at desk scale (subset
oracle, path-branching branch and bound, Dreyfus-Wagner star DP) plus
solution analytics: feasibility, edge-minimality, essential edges,
treewidth upper bounds and the c-bounded probe
"""
import heapq
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from dsn.config import get_settings
from dsn.digraph import Digraph, DsnInstance, Edge, GraphError, satisfies, scc_contract
from dsn.patterns import total_branch_degree

logger = logging.getLogger(__name__)

ORACLE = 'Oracle'
BRANCH_BOUND = 'BranchBound'
STAR_DP = 'StarDP'
SOLVER_MODES = (ORACLE, BRANCH_BOUND, STAR_DP)

YES = 'yes'
NO = 'no'
UNKNOWN = 'unknown'


class OracleCapError(GraphError):
    """Instance has more edges than the subset oracle accepts"""


class InfeasibleInstanceError(GraphError):
    """Some demand has no path even in the whole host graph"""


# ==================== Types ====================

@dataclass
class SolverBudget:
    """Search limits; exceeding either one stops the search with the incumbent"""
    max_nodes: int = 100_000_000
    max_seconds: float = 600.0
    mode: str = BRANCH_BOUND

    def __post_init__(self):
        if self.max_nodes <= 0 or self.max_seconds <= 0:
            raise GraphError("budget limits must be positive")
        if self.mode not in SOLVER_MODES:
            raise GraphError(f"unknown solver mode {self.mode!r}; expected one of {SOLVER_MODES}")

    @classmethod
    def from_settings(cls, mode: str = BRANCH_BOUND) -> 'SolverBudget':
        settings = get_settings()
        return cls(settings.max_nodes, settings.max_seconds, mode)


@dataclass
class SearchStats:
    nodes: int = 0
    pruned: int = 0
    incumbent_updates: int = 0
    elapsed: float = 0.0
    root_bound: int = 0
    budget_exhausted: bool = False

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class Solution:
    """A feasible edge set; `optimal` is only set when optimality was proven"""
    edges: FrozenSet[Edge]
    weight: int
    optimal: bool
    minimal: bool
    search_stats: SearchStats = field(default_factory=SearchStats, compare=False)
    weighted: bool = True

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def to_dict(self) -> Dict:
        return {
            'edges': [list(e) for e in self.sorted_edges()],
            'weight': self.weight,
            'optimal': self.optimal,
            'minimal': self.minimal,
            'mode': 'weighted' if self.weighted else 'unweighted',
            'search_stats': self.search_stats.to_dict(),
        }


@dataclass(frozen=True)
class ThresholdResult:
    """Answer to "is there a solution of weight at most bound" """
    status: str
    bound: int
    solution: Optional[Solution] = None


# ==================== Feasibility ====================

def is_feasible(inst: DsnInstance, edges: Iterable[Edge]) -> bool:
    chosen = frozenset(edges)
    missing = chosen - inst.graph.edges
    if missing:
        raise GraphError(f"edges not in graph: {sorted(missing)[:5]}")
    return satisfies(inst.graph.vertex_count, chosen, inst.demands)


def _require_feasible_host(inst: DsnInstance):
    if not satisfies(inst.graph.vertex_count, inst.graph.edges, inst.demands):
        raise InfeasibleInstanceError("instance is infeasible: some demand has no path in the graph")


def edge_minimalize(inst: DsnInstance, edges: Iterable[Edge]) -> FrozenSet[Edge]:
    """
    Drop removable edges, heaviest first (ties by larger edge id)

    A single pass suffices: removing edges only makes the remaining ones
    more necessary.
    """
    current = set(edges)
    if not is_feasible(inst, current):
        raise GraphError("cannot minimalize an infeasible edge set")
    g = inst.graph
    n = g.vertex_count
    for e in sorted(current, key=lambda e: (g.edge_weight(e), e), reverse=True):
        current.discard(e)
        if not satisfies(n, current, inst.demands):
            current.add(e)
    return frozenset(current)


def is_edge_minimal(inst: DsnInstance, edges: Iterable[Edge]) -> bool:
    chosen = frozenset(edges)
    if not is_feasible(inst, chosen):
        return False
    n = inst.graph.vertex_count
    return all(not satisfies(n, chosen - {e}, inst.demands) for e in chosen)


def essential_edges(inst: DsnInstance, edges: Iterable[Edge], demand: Edge) -> FrozenSet[Edge]:
    """Edges of the set whose removal disconnects the given demand"""
    chosen = frozenset(edges)
    missing = chosen - inst.graph.edges
    if missing:
        raise GraphError(f"edges not in graph: {sorted(missing)[:5]}")
    n = inst.graph.vertex_count
    if not satisfies(n, chosen, [demand]):
        raise GraphError(f"demand {demand} is not satisfied by the edge set")
    return frozenset(e for e in chosen if not satisfies(n, chosen - {e}, [demand]))


# ==================== Subset oracle ====================

def oracle_min(inst: DsnInstance, cap: Optional[int] = None) -> Solution:
    """
    Exact optimum by include/exclude enumeration of the sorted edge list

    Returns the lexicographically least optimal edge set (as a sorted tuple).
    """
    cap = get_settings().oracle_edge_cap if cap is None else cap
    g = inst.graph
    edges = g.sorted_edges()
    if len(edges) > cap:
        raise OracleCapError(f"oracle accepts at most {cap} edges, instance has {len(edges)}")
    _require_feasible_host(inst)
    started = time.monotonic()
    stats = SearchStats()
    n = g.vertex_count
    demands = inst.demands
    weights = [g.edge_weight(e) for e in edges]
    best: List = [None, None]

    def rec(i: int, chosen: List[Edge], weight: int):
        stats.nodes += 1
        if best[0] is not None and (weight > best[0] or (weight == best[0] and tuple(chosen) > best[1])):
            stats.pruned += 1
            return
        if satisfies(n, chosen, demands):
            best[0], best[1] = weight, tuple(chosen)
            stats.incumbent_updates += 1
            return
        if i == len(edges):
            return
        if not satisfies(n, chosen + edges[i:], demands):
            stats.pruned += 1
            return
        # including edges[i] first visits lexicographically smaller sets first
        chosen.append(edges[i])
        rec(i + 1, chosen, weight + weights[i])
        chosen.pop()
        rec(i + 1, chosen, weight)

    rec(0, [], 0)
    stats.elapsed = time.monotonic() - started
    chosen = frozenset(best[1])
    logger.debug("oracle optimum %s after %d nodes", best[0], stats.nodes)
    return Solution(chosen, best[0], optimal=True, minimal=is_edge_minimal(inst, chosen),
                    search_stats=stats, weighted=g.weighted)


# ==================== Shortest paths ====================

def _dijkstra(n: int, adjacency: Sequence[Sequence[Tuple[int, int]]],
              sources: Iterable[int]) -> Tuple[List[Optional[int]], List[Optional[int]]]:
    """Multi-source Dijkstra; adjacency[u] lists (v, cost). Returns (dist, parent)"""
    dist: List[Optional[int]] = [None] * n
    parent: List[Optional[int]] = [None] * n
    heap = []
    for s in sources:
        dist[s] = 0
        heap.append((0, s))
    heapq.heapify(heap)
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, cost in adjacency[u]:
            nd = d + cost
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def _weighted_adjacency(g: Digraph, reverse: bool = False) -> List[List[Tuple[int, int]]]:
    adjacency: List[List[Tuple[int, int]]] = [[] for _ in g.vertices()]
    for u, v in g.sorted_edges():
        if reverse:
            adjacency[v].append((u, g.edge_weight((u, v))))
        else:
            adjacency[u].append((v, g.edge_weight((u, v))))
    return adjacency


def shortest_path_union(inst: DsnInstance) -> FrozenSet[Edge]:
    """Union of one shortest path per demand"""
    g = inst.graph
    adjacency = _weighted_adjacency(g)
    chosen: Set[Edge] = set()
    by_source: Dict[int, List[int]] = {}
    for u, v in inst.sorted_demands():
        by_source.setdefault(u, []).append(v)
    for s, targets in sorted(by_source.items()):
        dist, parent = _dijkstra(g.vertex_count, adjacency, [s])
        for t in targets:
            if dist[t] is None:
                raise InfeasibleInstanceError(f"no path for demand ({s},{t})")
            x = t
            while x != s:
                chosen.add((parent[x], x))
                x = parent[x]
    return frozenset(chosen)


# ==================== Star DP ====================

def star_dp_min(graph: Digraph, root: int, terminals: Iterable[int], direction: str = 'out') -> Solution:
    """
    Minimum-weight arborescence from root to every terminal (Dreyfus-Wagner)

    direction='in' solves the reversed problem: every terminal reaches root.
    """
    if direction not in ('out', 'in'):
        raise GraphError(f"direction must be 'out' or 'in', got {direction!r}")
    if not 0 <= root < graph.vertex_count:
        raise GraphError(f"root {root} outside graph")
    if direction == 'in':
        solution = star_dp_min(graph.reverse(), root, terminals, 'out')
        return replace(solution, edges=frozenset((v, u) for u, v in solution.edges))

    targets = sorted(set(terminals) - {root})
    cap = get_settings().star_dp_max_terminals
    if len(targets) > cap:
        raise GraphError(f"star DP accepts at most {cap} terminals, got {len(targets)}")
    started = time.monotonic()
    stats = SearchStats()
    if not targets:
        return Solution(frozenset(), 0, True, True, stats, graph.weighted)

    n = graph.vertex_count
    into = _weighted_adjacency(graph, reverse=True)
    full = (1 << len(targets)) - 1
    cost: List[Optional[List[Optional[int]]]] = [None] * (full + 1)
    back: List[Optional[List[Optional[Tuple]]]] = [None] * (full + 1)

    for mask in range(1, full + 1):
        c: List[Optional[int]] = [None] * n
        b: List[Optional[Tuple]] = [None] * n
        if mask & (mask - 1) == 0:
            leaf = targets[mask.bit_length() - 1]
            c[leaf] = 0
            b[leaf] = ('leaf',)
        else:
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    ca, cb = cost[sub], cost[mask ^ sub]
                    for v in range(n):
                        if ca[v] is not None and cb[v] is not None:
                            value = ca[v] + cb[v]
                            if c[v] is None or value < c[v]:
                                c[v] = value
                                b[v] = ('split', sub)
                sub = (sub - 1) & mask
        # settle along reversed edges: c[v] <= w(v,u) + c[u]
        heap = [(c[v], v) for v in range(n) if c[v] is not None]
        heapq.heapify(heap)
        done = [False] * n
        while heap:
            d, u = heapq.heappop(heap)
            if done[u] or d != c[u]:
                continue
            done[u] = True
            stats.nodes += 1
            for v, w in into[u]:
                nd = d + w
                if c[v] is None or nd < c[v]:
                    c[v] = nd
                    b[v] = ('edge', u)
                    heapq.heappush(heap, (nd, v))
        cost[mask] = c
        back[mask] = b

    total = cost[full][root]
    if total is None:
        raise InfeasibleInstanceError(f"root {root} does not reach every terminal")

    edges: Set[Edge] = set()
    stack = [(full, root)]
    while stack:
        mask, v = stack.pop()
        step = back[mask][v]
        if step[0] == 'edge':
            edges.add((v, step[1]))
            stack.append((mask, step[1]))
        elif step[0] == 'split':
            stack.append((step[1], v))
            stack.append((mask ^ step[1], v))

    inst = DsnInstance(graph, tuple([root] + targets), frozenset((root, t) for t in targets))
    chosen = edge_minimalize(inst, edges)
    weight = graph.total_weight(chosen)
    if weight != total:
        raise GraphError(f"star DP reconstruction weighs {weight}, table says {total}")
    stats.elapsed = time.monotonic() - started
    return Solution(chosen, weight, True, True, stats, graph.weighted)


def _star_groups(inst: DsnInstance) -> List[Tuple[int, List[int], str]]:
    """Demands grouped as out-stars per source and in-stars per target"""
    out_groups: Dict[int, List[int]] = {}
    in_groups: Dict[int, List[int]] = {}
    for u, v in inst.sorted_demands():
        out_groups.setdefault(u, []).append(v)
        in_groups.setdefault(v, []).append(u)
    groups = [(s, ts, 'out') for s, ts in sorted(out_groups.items())]
    groups += [(t, ss, 'in') for t, ss in sorted(in_groups.items())]
    return groups


# ==================== Branch and bound ====================

class _BudgetExhausted(Exception):
    pass


class _PathBranchAndBound:
    """
    Depth-first branch and bound over demand paths

    A search node is a set of chosen edges. The unsatisfied demand with the
    largest single-path bound is routed along every simple path that leaves
    the vertices it already reaches and ends at the first vertex that already
    reaches its target. Completions strictly lighter than best_weight are
    recorded.
    """

    def __init__(self, inst: DsnInstance, budget: SolverBudget, best_weight: int,
                 best_edges: Optional[FrozenSet[Edge]], stats: SearchStats, started: float):
        g = inst.graph
        self.n = g.vertex_count
        self.weight = {e: g.edge_weight(e) for e in g.edges}
        self.out_adj: List[List[int]] = [[] for _ in range(self.n)]
        self.in_adj: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in g.sorted_edges():
            self.out_adj[u].append(v)
            self.in_adj[v].append(u)
        self.demands = inst.sorted_demands()

        # usable[e]: demands whose paths may run through e
        self.usable: Dict[Edge, int] = {e: 0 for e in g.edges}
        for idx, (s, t) in enumerate(self.demands):
            from_s = g.reach_mask(s) | (1 << s)
            to_t = g.reached_by_mask(t) | (1 << t)
            for (x, y) in g.edges:
                if from_s >> x & 1 and to_t >> y & 1:
                    self.usable[(x, y)] |= 1 << idx

        self.chosen: Set[Edge] = set()
        self.chosen_out: List[List[int]] = [[] for _ in range(self.n)]
        self.chosen_in: List[List[int]] = [[] for _ in range(self.n)]
        self.chosen_weight = 0
        self.best_weight = best_weight
        self.best_edges = best_edges
        self.budget = budget
        self.stats = stats
        self.deadline = started + budget.max_seconds

    # ---------- bookkeeping ----------

    def _tick(self):
        self.stats.nodes += 1
        if self.stats.nodes > self.budget.max_nodes:
            raise _BudgetExhausted()
        if self.stats.nodes & 1023 == 0 and time.monotonic() > self.deadline:
            raise _BudgetExhausted()

    def _add(self, edges: List[Edge]):
        for u, v in edges:
            self.chosen.add((u, v))
            self.chosen_out[u].append(v)
            self.chosen_in[v].append(u)
            self.chosen_weight += self.weight[(u, v)]

    def _remove(self, edges: List[Edge]):
        for u, v in reversed(edges):
            self.chosen.discard((u, v))
            self.chosen_out[u].pop()
            self.chosen_in[v].pop()
            self.chosen_weight -= self.weight[(u, v)]

    def _closure(self, start: int, adjacency: List[List[int]]) -> Set[int]:
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def unsatisfied(self) -> List[Tuple[int, Set[int]]]:
        reach_of: Dict[int, Set[int]] = {}
        pending = []
        for idx, (s, t) in enumerate(self.demands):
            if s not in reach_of:
                reach_of[s] = self._closure(s, self.chosen_out)
            if t not in reach_of[s]:
                pending.append((idx, reach_of[s]))
        return pending

    # ---------- bounds ----------

    def _distance(self, starts: Iterable[int], target: int, bit: int,
                  scale: int = 1, shares: int = 0) -> Optional[int]:
        """Cheapest completion for one demand; chosen edges are free"""
        dist: Dict[int, int] = {}
        heap = [(0, s) for s in starts]
        heapq.heapify(heap)
        while heap:
            d, x = heapq.heappop(heap)
            if x in dist:
                continue
            dist[x] = d
            if x == target:
                return d
            for y in self.out_adj[x]:
                if y in dist:
                    continue
                e = (x, y)
                mask = self.usable[e]
                if not mask & bit:
                    continue
                if e in self.chosen:
                    cost = 0
                elif shares:
                    cost = self.weight[e] * scale // bin(mask & shares).count('1')
                else:
                    cost = self.weight[e]
                heapq.heappush(heap, (d + cost, y))
        return None

    def bound(self, pending: List[Tuple[int, Set[int]]]) -> Optional[Tuple[int, int]]:
        """
        (lower bound on the remaining weight, demand to branch on)

        Two admissible bounds: the costliest single demand, and the sum over
        demands where every unchosen edge's weight is split evenly among the
        pending demands that could use it.
        """
        scale = math.lcm(*range(1, len(pending) + 1))
        shares = 0
        for idx, _ in pending:
            shares |= 1 << idx
        single, fractional, pick = -1, 0, None
        for idx, reach in pending:
            s, t = self.demands[idx]
            plain = self._distance(reach, t, 1 << idx)
            if plain is None:
                return None
            if len(pending) > 1:
                fractional += self._distance(reach, t, 1 << idx, scale, shares)
            if plain > single:
                single, pick = plain, idx
        return max(single, -(-fractional // scale)), pick

    # ---------- branching ----------

    def _paths(self, idx: int, reach: Set[int]) -> Iterator[List[Edge]]:
        s, t = self.demands[idx]
        bit = 1 << idx
        target = self._closure(t, self.chosen_in)

        # h[x]: cheapest way from x into target
        h: Dict[int, int] = {}
        heap = [(0, x) for x in target]
        heapq.heapify(heap)
        while heap:
            d, y = heapq.heappop(heap)
            if y in h:
                continue
            h[y] = d
            for x in self.in_adj[y]:
                e = (x, y)
                if x in h or not self.usable[e] & bit:
                    continue
                heapq.heappush(heap, (d + (0 if e in self.chosen else self.weight[e]), x))

        path: List[Edge] = []
        on_path: Set[int] = set()

        def extend(x: int, cost: int) -> Iterator[List[Edge]]:
            self._tick()
            if x in target:
                yield list(path)
                return
            options = []
            for y in self.out_adj[x]:
                e = (x, y)
                if y in reach or y in on_path or y not in h or not self.usable[e] & bit:
                    continue
                step = 0 if e in self.chosen else self.weight[e]
                options.append((step + h[y], y, step))
            options.sort()
            for _, y, step in options:
                if self.chosen_weight + cost + step + h[y] >= self.best_weight:
                    self.stats.pruned += 1
                    continue
                path.append((x, y))
                on_path.add(y)
                yield from extend(y, cost + step)
                path.pop()
                on_path.discard(y)

        for x in sorted((x for x in reach if x in h), key=lambda x: (h[x], x)):
            if self.chosen_weight + h[x] >= self.best_weight:
                continue
            yield from extend(x, 0)

    def search(self):
        self._tick()
        pending = self.unsatisfied()
        if not pending:
            if self.chosen_weight < self.best_weight:
                self.best_weight = self.chosen_weight
                self.best_edges = frozenset(self.chosen)
                self.stats.incumbent_updates += 1
                logger.debug("incumbent %d at node %d", self.best_weight, self.stats.nodes)
            return
        result = self.bound(pending)
        if result is None or self.chosen_weight + result[0] >= self.best_weight:
            self.stats.pruned += 1
            return
        idx = result[1]
        reach = dict(pending)[idx]
        for path in self._paths(idx, reach):
            added = [e for e in path if e not in self.chosen]
            self._add(added)
            try:
                self.search()
            finally:
                self._remove(added)


def _seed(inst: DsnInstance) -> Tuple[FrozenSet[Edge], int, int]:
    """Incumbent edge set, its weight, and a root lower bound from star values"""
    g = inst.graph
    settings = get_settings()
    best = edge_minimalize(inst, shortest_path_union(inst))
    best_weight = g.total_weight(best)
    star_bound = 0
    out_trees: List[FrozenSet[Edge]] = []
    in_trees: List[FrozenSet[Edge]] = []
    for root, others, direction in _star_groups(inst):
        if len(others) > settings.star_seed_max_terminals:
            continue
        tree = star_dp_min(g, root, others, direction)
        star_bound = max(star_bound, tree.weight)
        (out_trees if direction == 'out' else in_trees).append(tree.edges)
    for trees in (out_trees, in_trees):
        if not trees:
            continue
        union = frozenset().union(*trees)
        if not satisfies(g.vertex_count, union, inst.demands):
            continue
        candidate = edge_minimalize(inst, union)
        weight = g.total_weight(candidate)
        if (weight, sorted(candidate)) < (best_weight, sorted(best)):
            best, best_weight = candidate, weight
    return best, best_weight, star_bound


def _run(inst: DsnInstance, budget: SolverBudget, cutoff: Optional[int]) -> Tuple[Solution, bool]:
    """
    Shared driver. With a cutoff only solutions of weight <= cutoff count.

    Returns (best solution found or the seed, whether the search completed).
    """
    started = time.monotonic()
    _require_feasible_host(inst)
    stats = SearchStats()
    g = inst.graph
    if not inst.demands:
        stats.elapsed = time.monotonic() - started
        return Solution(frozenset(), 0, True, True, stats, g.weighted), True

    seed, seed_weight, star_bound = _seed(inst)
    limit = seed_weight if cutoff is None else min(seed_weight, cutoff + 1)
    engine = _PathBranchAndBound(inst, budget, limit, seed if seed_weight <= limit else None,
                                 stats, started)
    root = engine.bound(engine.unsatisfied())
    stats.root_bound = max(star_bound, root[0] if root else 0)

    complete = True
    if stats.root_bound < engine.best_weight:
        try:
            engine.search()
        except _BudgetExhausted:
            complete = False
            stats.budget_exhausted = True
            logger.warning("solver budget exhausted after %d nodes; returning incumbent %d",
                           stats.nodes, engine.best_weight)

    if engine.best_edges is not None:
        edges = edge_minimalize(inst, engine.best_edges)
    else:
        edges = seed
    weight = g.total_weight(edges)
    stats.elapsed = time.monotonic() - started
    optimal = complete and engine.best_edges is not None and weight == engine.best_weight
    logger.info("solver finished: weight %d, optimal=%s, nodes=%d, root bound %d",
                weight, optimal, stats.nodes, stats.root_bound)
    return Solution(edges, weight, optimal, True, stats, g.weighted), complete


def _canonical_optimum(inst: DsnInstance, weight: int, witness: FrozenSet[Edge],
                       budget: SolverBudget) -> Optional[FrozenSet[Edge]]:
    """
    Lexicographically least edge set (as a sorted tuple) of weight <= weight

    Edges are fixed in sorted order: each one is kept when some solution of
    that weight agrees with the choices so far and contains it. Forced edges
    cost nothing in the restricted searches and rejected edges are removed.
    Returns None when a restricted search runs out of budget.
    """
    g = inst.graph
    n = g.vertex_count
    forced: Set[Edge] = set()
    rejected: Set[Edge] = set()
    for e in g.sorted_edges():
        if satisfies(n, forced, inst.demands):
            break
        if e in witness:
            forced.add(e)
            continue
        trial = forced | {e}
        remaining = weight - g.total_weight(trial)
        allowed = g.edges - rejected
        found = None
        if remaining >= 0 and satisfies(n, allowed, inst.demands):
            restricted = g.subgraph(allowed).with_weights(
                {x: 0 if x in trial else g.edge_weight(x) for x in allowed})
            answer = decide_at_most(inst.with_graph(restricted), remaining, budget)
            if answer.status == UNKNOWN:
                return None
            found = answer.solution
        if found is None:
            rejected.add(e)
        else:
            forced = trial
            witness = frozenset(found.edges) | trial
    return frozenset(forced)


def branch_bound_min(inst: DsnInstance, budget: Optional[SolverBudget] = None) -> Solution:
    """
    Exact optimum within budget; on exhaustion the best incumbent with optimal=False

    A proven optimum is replaced by the lexicographically least optimal edge
    set, the same set oracle_min returns.
    """
    budget = budget or SolverBudget.from_settings()
    solution, _ = _run(inst, budget, None)
    if not solution.optimal or not solution.edges:
        return solution
    canonical = _canonical_optimum(inst, solution.weight, solution.edges, budget)
    if canonical is None:
        logger.warning("budget exhausted while canonicalizing; keeping the first optimum found")
        return solution
    return replace(solution, edges=canonical, minimal=is_edge_minimal(inst, canonical))


def decide_at_most(inst: DsnInstance, bound: int, budget: Optional[SolverBudget] = None) -> ThresholdResult:
    """Threshold version of the search; prunes everything heavier than bound"""
    budget = budget or SolverBudget.from_settings()
    solution, complete = _run(inst, budget, bound)
    if solution.weight <= bound:
        return ThresholdResult(YES, bound, solution)
    if complete:
        return ThresholdResult(NO, bound, None)
    return ThresholdResult(UNKNOWN, bound, solution)


def root_lower_bound(inst: DsnInstance) -> int:
    """The bound the search starts from; never above the optimum"""
    _require_feasible_host(inst)
    if not inst.demands:
        return 0
    stats = SearchStats()
    engine = _PathBranchAndBound(inst, SolverBudget(), 0, None, stats, time.monotonic())
    result = engine.bound(engine.unsatisfied())
    return result[0] if result else 0


def solve(inst: DsnInstance, budget: Optional[SolverBudget] = None) -> Solution:
    """Dispatch on budget.mode"""
    budget = budget or SolverBudget.from_settings()
    if budget.mode == ORACLE:
        return oracle_min(inst)
    if budget.mode == STAR_DP:
        sources = {u for u, _ in inst.demands}
        targets = {v for _, v in inst.demands}
        if len(sources) == 1:
            (root,) = sources
            return star_dp_min(inst.graph, root, targets, 'out')
        if len(targets) == 1:
            (root,) = targets
            return star_dp_min(inst.graph, root, sources, 'in')
        raise GraphError("StarDP mode needs a single source or a single target among the demands")
    return branch_bound_min(inst, budget)


# ==================== Treewidth ====================

def _undirected(graph: Digraph) -> nx.Graph:
    u = nx.Graph()
    u.add_nodes_from(graph.vertices())
    u.add_edges_from(graph.edges)
    return u


def _exact_elimination(u: nx.Graph) -> Tuple[int, List[int]]:
    """Subset DP over elimination prefixes: TW(S) = min_v max(TW(S-v), |Q(S-v, v)|)"""
    nodes = sorted(u.nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    adj = [0] * len(nodes)
    for a, b in u.edges:
        adj[pos[a]] |= 1 << pos[b]
        adj[pos[b]] |= 1 << pos[a]

    def q_size(prefix: int, v: int) -> int:
        # vertices outside prefix+v reachable from v through prefix
        seen = 1 << v
        frontier = [v]
        found = 0
        while frontier:
            x = frontier.pop()
            nbrs = adj[x] & ~seen
            seen |= nbrs
            found |= nbrs & ~prefix
            inner = nbrs & prefix
            while inner:
                low = inner & -inner
                frontier.append(low.bit_length() - 1)
                inner ^= low
        return bin(found).count('1')

    size = len(nodes)
    best = [0] * (1 << size)
    choice = [0] * (1 << size)
    best[0] = -1
    for mask in range(1, 1 << size):
        value = None
        rest = mask
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            prefix = mask ^ low
            cand = max(best[prefix], q_size(prefix, v))
            if value is None or cand < value:
                value, choice[mask] = cand, v
        best[mask] = value
    order: List[int] = []
    mask = (1 << size) - 1
    while mask:
        v = choice[mask]
        order.append(nodes[v])
        mask ^= 1 << v
    order.reverse()
    return max(best[(1 << size) - 1], 0), order


def _min_fill_elimination(u: nx.Graph) -> Tuple[int, List[int]]:
    """Greedy min-fill; ties broken by degree then vertex id"""
    work = u.copy()
    order: List[int] = []
    width = 0
    while work.number_of_nodes():
        def fill(v):
            nbrs = list(work.neighbors(v))
            return sum(1 for i, a in enumerate(nbrs) for b in nbrs[i + 1:] if not work.has_edge(a, b))
        v = min(work.nodes, key=lambda x: (fill(x), work.degree(x), x))
        nbrs = sorted(work.neighbors(v))
        width = max(width, len(nbrs))
        work.add_edges_from((a, b) for i, a in enumerate(nbrs) for b in nbrs[i + 1:])
        work.remove_node(v)
        order.append(v)
    return width, order


def treewidth_upper(graph: Digraph) -> Tuple[int, List[int]]:
    """
    Treewidth upper bound of the underlying undirected graph

    Exact for small graphs, min-fill otherwise. Returns (width, order).
    """
    u = _undirected(graph)
    if u.number_of_nodes() == 0:
        return 0, []
    if u.number_of_nodes() <= get_settings().treewidth_exact_vertices:
        return _exact_elimination(u)
    return _min_fill_elimination(u)


def elimination_width(graph: Digraph, order: Sequence[int]) -> int:
    """Width of an elimination order; used to check reported orders"""
    work = _undirected(graph)
    if sorted(order) != sorted(work.nodes):
        raise GraphError("order must list every vertex exactly once")
    width = 0
    for v in order:
        nbrs = sorted(work.neighbors(v))
        width = max(width, len(nbrs))
        work.add_edges_from((a, b) for i, a in enumerate(nbrs) for b in nbrs[i + 1:])
        work.remove_node(v)
    return width


# ==================== c-bounded probe ====================

@dataclass
class ProbeReport:
    k: int
    weighted: bool
    edge_count: int
    weight: int
    contracted_vertices: int
    contracted_edges: int
    acyclic: bool
    total_branch_degree: int
    branch_ratio: float
    treewidth_upper: int

    def to_dict(self) -> Dict:
        report = asdict(self)
        report['mode'] = 'weighted' if self.weighted else 'unweighted'
        return report


def c_bounded_probe(inst: DsnInstance, solution: Iterable[Edge]) -> ProbeReport:
    """Branchiness and treewidth of a feasible solution after SCC contraction"""
    chosen = frozenset(solution)
    contraction, _ = scc_contract(inst, chosen)
    if not contraction.contracted.is_acyclic():
        raise GraphError("contracted solution has a cycle")
    sol_graph = inst.graph.subgraph(chosen)
    degree = total_branch_degree(sol_graph)
    width, _ = treewidth_upper(sol_graph)
    return ProbeReport(
        k=inst.k,
        weighted=inst.graph.weighted,
        edge_count=len(chosen),
        weight=inst.graph.total_weight(chosen),
        contracted_vertices=contraction.contracted.vertex_count,
        contracted_edges=len(contraction.contracted.edges),
        acyclic=True,
        total_branch_degree=degree,
        branch_ratio=degree / inst.k if inst.k else 0.0,
        treewidth_upper=width,
    )
