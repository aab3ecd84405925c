"""
Cleaner Tests
Tests for the identification rules, bad-vertex elimination, pre-cleaning,
semi-cleaning, biclique cleaning and the clean dispatcher

Run with: python test_cleaner.py
"""
import itertools
import random
import unittest
import os
import sys

from hypothesis import HealthCheck, assume, given, settings, strategies as st

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from dsn.cleaner import (BICLIQUE_OUTCOME, INDUCED_BICLIQUE, INSUFFICIENT, MATCHING_CLOSURE_BICLIQUE, ORDERED,
                         RULES, CleanedPattern, InducedBiclique, SemiCleanedPair,
                         apply_identification_rule, bad_vertices, biclique_cases, clean, clean_min_biclique,
                         eliminate_bad_vertices, is_contraction_redundant, is_induced_biclique,
                         is_matching_closure_biclique, merge_keeps_reach, monochromatic_clique, ordered_invariants_hold,
                         ordered_state, pair_color, partition_wrt, preclean, reachability_minimal_spanning,
                         replay_identifications, semi_clean, semiclean_to_hard, simplify_biclique)
from dsn.digraph import Digraph, GraphError
from dsn.patterns import (BICLIQUE, MATCHING, ToughPair, all_biclique_flags, all_matching_flags,
                          generate_hard_pattern, pattern_matches)

SLOW = os.getenv('DSN_SLOW_TESTS', '').lower() in ('1', 'true', 'yes')


def matching_host(t, extra_vertices=0, extra_edges=()):
    """Plain t-matching W->X, Y->Z (ids W, X, Y, Z in blocks of t) plus extra vertices and edges"""
    g, _ = generate_hard_pattern(MATCHING, t)
    return Digraph(g.vertex_count + extra_vertices, sorted(g.edges) + list(extra_edges))


def matching_pair(t):
    e1 = tuple((i, t + i) for i in range(t))
    e2 = tuple((2 * t + i, 3 * t + i) for i in range(t))
    return ToughPair(e1, e2, True)


def closure_biclique_host():
    """a_i -> b_i with a_i -> c_ij -> b_j for i != j, plus a separate y -> z matching"""
    edges = [(i, 4 + i) for i in range(4)]
    c = 8
    for i, j in itertools.permutations(range(4), 2):
        edges += [(i, c), (c, 4 + j)]
        c += 1
    edges += [(20 + i, 24 + i) for i in range(4)]
    return Digraph(28, edges)


def noisy_host(seed):
    """t in {4, 5} pattern with one to three noise vertices: subdivided edges and pendants"""
    rng = random.Random(seed)
    kind = rng.choice((MATCHING, BICLIQUE))
    flags = rng.choice(all_matching_flags() if kind == MATCHING else all_biclique_flags())
    g, _ = generate_hard_pattern(kind, rng.choice((4, 5)), flags)
    n, edges = g.vertex_count, set(g.edges)
    for _ in range(rng.randint(1, 3)):
        mode = rng.choice(('subdivide', 'after_sink', 'before_source'))
        if mode == 'subdivide':
            u, v = rng.choice(sorted(edges))
            edges -= {(u, v)}
            edges |= {(u, n), (n, v)}
        elif mode == 'after_sink':
            edges.add((rng.choice([v for v in range(n) if all(a != v for a, _ in edges)]), n))
        else:
            edges.add((n, rng.choice([v for v in range(n) if all(b != v for _, b in edges)])))
        n += 1
    return Digraph(n, sorted(edges))


def cased_biclique(cells):
    """a_i = i, b_i = n + i, source 2n, sink 2n + 1; cells[i] = (p, q) fixes how index i meets them"""
    n = len(cells)
    source, sink = 2 * n, 2 * n + 1
    edges = [(i, n + j) for i in range(n) for j in range(n)]
    for i, (p, q) in enumerate(cells):
        if p == 0:
            edges.append((source, i))
        elif p == 1:
            edges.append((source, n + i))
        if q == 0:
            edges.append((n + i, sink))
        elif q == 1:
            edges.append((i, sink))
    return Digraph(2 * n + 2, edges), list(range(n)), list(range(n, 2 * n))


def rule_host(rule, rng):
    """Matching host with one noise vertex wired so that the given rule's guard holds"""
    t = rng.choice((2, 3, 4))
    col = lambda c: [c * t + i for i in range(t)]
    some = lambda seq: rng.sample(seq, rng.randint(1, len(seq)))
    maybe = lambda seq: rng.sample(seq, rng.randint(0, len(seq)))
    k = rng.randint(1, t - 1)
    if rule in ('IR1', 'IR2', 'IR3', 'IR4'):
        c = {'IR1': 0, 'IR2': 2, 'IR3': 1, 'IR4': 3}[rule]
        inn, out = some(col(c)[:k]), some(col(c)[k:])
        if rule == 'IR3':
            inn += maybe(col(0)[:k])
        elif rule == 'IR4':
            inn += maybe(col(2)[:k])
    elif rule in ('IR5', 'IR6'):
        tails = col(2) if rule == 'IR5' else col(0)
        inn = some(tails)
        last = max(v % t for v in inn)
        heads = col(3) if rule == 'IR5' else col(1)
        cross = col(1) if rule == 'IR5' else col(3)
        out = maybe(heads[last:]) + maybe(cross)
    else:
        heads = col(3) if rule == 'IR7' else col(1)
        out = some(heads)
        first = min(v % t for v in out)
        own = col(2) if rule == 'IR7' else col(0)
        cross = col(0) if rule == 'IR7' else col(2)
        inn = maybe(own[:first + 1]) + maybe(cross)
    v = 4 * t
    extra = [(u, v) for u in inn] + [(v, w) for w in out]
    return matching_host(t, 1, extra), t


@st.composite
def noisy_matchings(draw):
    """Plain 2-matching with one extra vertex wired to random role vertices"""
    inn = draw(st.sets(st.integers(0, 7), max_size=3))
    out = draw(st.sets(st.integers(0, 7), max_size=3))
    extra = [(u, 8) for u in sorted(inn)] + [(8, v) for v in sorted(out)]
    return matching_host(2, 1, extra)


@st.composite
def small_digraphs(draw, max_vertices=6):
    n = draw(st.integers(min_value=2, max_value=max_vertices))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=min(len(pairs), 10)))
    return Digraph(n, sorted(edges))


class TestSpanningAndCliques(unittest.TestCase):
    """Test closure-preserving deletions and monochromatic cliques"""

    def test_spanning_drops_chords(self):
        """Test a transitive chord is dropped and kept edges stay"""
        g = Digraph(3, [(0, 1), (1, 2), (0, 2)])
        result = reachability_minimal_spanning(g)
        self.assertEqual(result.edges, {(0, 1), (1, 2)})
        with self.assertRaises(GraphError):
            reachability_minimal_spanning(g, keep=[(0, 2)])
        with self.assertRaises(GraphError):
            reachability_minimal_spanning(g, keep=[(2, 0)])
        print("✓ Reachability-minimal spanning subgraph")

    @given(small_digraphs())
    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_spanning_preserves_closure(self, g):
        """Test the closure is unchanged and every edge is minimal"""
        result = reachability_minimal_spanning(g)
        self.assertEqual(result.closure_edges(), g.closure_edges())
        self.assertTrue(result.edges <= g.edges)
        for u, v in result.edges:
            rest = result.subgraph(result.edges - {(u, v)})
            self.assertFalse(rest.reaches(u, v))

    def test_monochromatic_clique(self):
        """Test exact and greedy clique searches"""
        same_parity = lambda i, j: (i - j) % 2 == 0
        exact = monochromatic_clique(7, same_parity, True)
        self.assertEqual(exact.members, (0, 2, 4, 6))
        self.assertTrue(exact.exact)
        greedy = monochromatic_clique(7, same_parity, True, exact_limit=3)
        self.assertFalse(greedy.exact)
        for i, j in itertools.combinations(greedy.members, 2):
            self.assertTrue(same_parity(i, j))
        self.assertEqual(monochromatic_clique(0, same_parity, True).members, ())
        print("✓ Monochromatic cliques")

    def test_pair_colors(self):
        """Test edge, path and no-path colours"""
        g = Digraph(5, [(0, 1), (2, 3), (0, 3), (2, 4), (4, 1)])
        self.assertEqual(pair_color(g, (0, 1), (2, 3)), (1, 2))
        self.assertEqual(pair_color(g, (2, 3), (0, 1)), (2, 1))
        h = matching_host(2)
        self.assertEqual(pair_color(h, (0, 2), (1, 3)), (3, 3))
        print("✓ Pair colours")


class TestPartitions(unittest.TestCase):
    """Test the four-way split around anchor vertices"""

    def test_partition_example(self):
        """Test star, circle, plus and minus on a small graph"""
        g = Digraph(6, [(0, 1), (1, 2), (3, 1), (2, 4), (4, 2)])
        parts = partition_wrt(g, g.vertices(), [1])
        self.assertEqual(parts.plus, {0, 3})
        self.assertEqual(parts.minus, {2, 4})
        self.assertEqual(parts.circle, {5})
        self.assertEqual(parts.star, set())
        cyclic = partition_wrt(g, g.vertices(), [2])
        self.assertEqual(cyclic.star, {4})
        all_parts = partition_wrt(g, g.vertices(), g.vertices())
        self.assertFalse(all_parts.star | all_parts.circle | all_parts.plus | all_parts.minus)
        print("✓ Partition")

    @given(small_digraphs(), st.sets(st.integers(0, 5), min_size=1, max_size=3))
    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_partition_matches_definition(self, g, anchors):
        """Test every vertex lands in the part its reachability names"""
        anchors = {u for u in anchors if u < g.vertex_count}
        assume(anchors)
        parts = partition_wrt(g, g.vertices(), anchors)
        for v in g.vertices():
            if v in anchors:
                continue
            out = any(g.reaches(v, u) for u in anchors)
            inn = any(g.reaches(u, v) for u in anchors)
            expected = parts.star if out and inn else parts.plus if out else parts.minus if inn else parts.circle
            self.assertIn(v, expected)


class TestIdentificationRules(unittest.TestCase):
    """Test the eight identification rules and bad-vertex elimination"""

    def test_rules_on_single_noise_vertex(self):
        """Test each guard picks the expected target"""
        cases = [('IR1', [(0, 8), (8, 1)], 0), ('IR5', [(4, 8)], 4),
                 ('IR7', [(8, 6)], 6), ('IR8', [(8, 3)], 3)]
        for rule, extra, target in cases:
            state = ordered_state(matching_host(2, 1, extra), matching_pair(2))
            self.assertTrue(ordered_invariants_hold(state), rule)
            applied = apply_identification_rule(state, rule)
            self.assertTrue(applied.applied, rule)
            self.assertEqual(applied.vertex, 8)
            self.assertEqual(applied.target, target)
            self.assertTrue(ordered_invariants_hold(applied.state), rule)
            self.assertEqual(state.ident.graph.vertex_count, 9)
            self.assertEqual(applied.state.ident.graph.vertex_count, 8)
        print("✓ Identification rule targets")

    def test_rule_that_does_not_apply(self):
        """Test a guard that fails leaves the state alone"""
        state = ordered_state(matching_host(2, 1, [(4, 8)]), matching_pair(2))
        result = apply_identification_rule(state, 'IR1')
        self.assertFalse(result.applied)
        self.assertIs(result.state, state)
        with self.assertRaises(GraphError):
            apply_identification_rule(state, 'IR9')
        print("✓ Rule guards")

    @given(noisy_matchings(), st.sampled_from(RULES))
    @settings(max_examples=100, deadline=None,
              suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
    def test_rules_keep_the_invariants(self, host, rule):
        """Test an applied rule keeps the pair certified with no bad vertex"""
        assume(host.is_acyclic())
        state = ordered_state(host, matching_pair(2))
        assume(ordered_invariants_hold(state))
        result = apply_identification_rule(state, rule)
        if result.applied:
            self.assertTrue(ordered_invariants_hold(result.state))

    def test_every_rule_on_random_eligible_states(self):
        """Test each rule on states built to satisfy its guard"""
        per_rule = 200 if SLOW else 25
        rng = random.Random(1)
        for rule in RULES:
            for _ in range(per_rule):
                host, t = rule_host(rule, rng)
                state = ordered_state(host, matching_pair(t))
                self.assertTrue(ordered_invariants_hold(state), (rule, sorted(host.edges)))
                result = apply_identification_rule(state, rule)
                self.assertTrue(result.applied, (rule, sorted(host.edges)))
                self.assertEqual(result.vertex, 4 * t)
                self.assertTrue(ordered_invariants_hold(result.state), (rule, sorted(host.edges)))
                self.assertEqual(bad_vertices(result.state.ident.graph, result.state.pair()), [])
        print(f"✓ {per_rule} eligible states per rule")

    def test_bad_vertex_elimination(self):
        """Test a bad vertex is avoided by a block pair"""
        g = matching_host(4, 1, [(0, 16), (8, 16), (16, 4), (16, 12)])
        full = matching_pair(4)
        self.assertEqual(bad_vertices(g, full), [16])
        reduced = eliminate_bad_vertices(g, full)
        self.assertEqual(reduced, ToughPair(((0, 4), (1, 5)), ((10, 14), (11, 15)), True))
        self.assertEqual(bad_vertices(g, reduced), [])
        print("✓ Bad vertex elimination")

    def test_elimination_without_bad_vertices(self):
        """Test the first diagonal block is returned when nothing is bad"""
        g = matching_host(4)
        reduced = eliminate_bad_vertices(g, matching_pair(4))
        self.assertEqual(reduced, ToughPair(((0, 4), (1, 5)), ((8, 12), (9, 13)), True))
        print("✓ Elimination of a clean pair")


class TestPreclean(unittest.TestCase):
    """Test the pre-cleaning outcomes"""

    def test_ordered_outcome(self):
        """Test a plain matching gives an ordered pair"""
        outcome = preclean(matching_host(4), matching_pair(4), 2)
        self.assertEqual(outcome.variant, ORDERED)
        self.assertEqual(outcome.colors, ((3, 3), (3, 3)))
        self.assertEqual(outcome.pair.t, 4)
        print("✓ Ordered pre-clean outcome")

    def test_biclique_outcome(self):
        """Test a complete side gives an induced biclique"""
        edges = [(i, 4 + j) for i in range(4) for j in range(4)] + [(8 + i, 12 + i) for i in range(4)]
        g = Digraph(16, edges)
        pair = ToughPair(tuple((i, 4 + i) for i in range(4)), tuple((8 + i, 12 + i) for i in range(4)))
        outcome = preclean(g, pair, 2)
        self.assertEqual(outcome.variant, BICLIQUE_OUTCOME)
        self.assertEqual(outcome.a, (0, 1, 2, 3))
        self.assertEqual(outcome.b, (4, 5, 6, 7))
        self.assertTrue(is_induced_biclique(g, outcome.a, outcome.b, minimal=True))
        print("✓ Biclique pre-clean outcome")

    def test_matching_closure_biclique_outcome(self):
        """Test a matching inside a closure biclique is detected"""
        g = closure_biclique_host()
        pair = ToughPair(tuple((i, 4 + i) for i in range(4)), tuple((20 + i, 24 + i) for i in range(4)))
        outcome = preclean(g, pair, 2)
        self.assertEqual(outcome.variant, MATCHING_CLOSURE_BICLIQUE)
        self.assertTrue(is_matching_closure_biclique(g, outcome.a, outcome.b))
        print("✓ Matching-in-closure-biclique outcome")

    def test_small_pair_is_insufficient(self):
        """Test a pair below twice the target stops"""
        outcome = preclean(matching_host(2), matching_pair(2), 2)
        self.assertEqual(outcome.variant, INSUFFICIENT)
        self.assertIn('below', outcome.reason)
        print("✓ Pre-clean size guard")


class TestSemiClean(unittest.TestCase):
    """Test semi-cleaning and the move to a hard pattern"""

    def test_plain_matching_is_already_semi_clean(self):
        """Test nothing is identified without noise"""
        sc = semi_clean(matching_host(2), matching_pair(2))
        self.assertIsInstance(sc, SemiCleanedPair)
        self.assertEqual(sc.log, ())
        self.assertIsNone(sc.source)
        self.assertIsNone(sc.sink)
        print("✓ Plain semi-clean")

    def test_noise_collapses_to_source_and_sink(self):
        """Test pendant noise becomes one source and one sink, then a matching"""
        g = matching_host(2, 3, [(8, 0), (3, 9)])
        sc = semi_clean(g, matching_pair(2))
        self.assertIsInstance(sc, SemiCleanedPair)
        self.assertEqual(sc.graph.vertex_count, 10)
        self.assertEqual((sc.source, sc.sink), (8, 9))
        self.assertEqual(replay_identifications(g, sc.log).edges, sc.graph.edges)

        result = semiclean_to_hard(sc, 2)
        self.assertIsInstance(result, CleanedPattern)
        self.assertEqual(result.pattern.kind, MATCHING)
        self.assertEqual(result.pattern.t, 2)
        self.assertEqual(result.graph.vertex_count, 8)
        self.assertIsNotNone(pattern_matches(result.graph, result.pattern))
        replayed = replay_identifications(sc.graph, result.log, result.removed)
        self.assertEqual(replayed.edges, result.graph.edges)
        print("✓ Semi-clean with noise")

    def test_crossing_side_hands_off_a_biclique(self):
        """Test crossing closure edges on one side give an induced biclique"""
        extra = [(i, 4 + j) for i in range(4) for j in range(4) if i < j]
        g = matching_host(4, 0, extra)
        sc = semi_clean(g, matching_pair(4))
        self.assertIsInstance(sc, SemiCleanedPair)
        result = semiclean_to_hard(sc, 2)
        self.assertIsInstance(result, InducedBiclique)
        self.assertEqual(result.a, (0, 1))
        self.assertEqual(result.b, (6, 7))
        self.assertTrue(is_induced_biclique(result.graph, result.a, result.b, minimal=True))
        print("✓ Induced biclique hand-off")


class TestBicliqueCleaning(unittest.TestCase):
    """Test biclique cleaning and simplification"""

    def test_clean_min_biclique(self):
        """Test a bare biclique and one with a common source"""
        plain = Digraph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
        result = clean_min_biclique(plain, [0, 1], [2, 3])
        self.assertIsInstance(result, CleanedPattern)
        self.assertEqual(result.pattern.kind, BICLIQUE)
        self.assertEqual(result.pattern.t, 2)
        self.assertFalse(result.pattern.flags.has_source)

        sourced = Digraph(5, sorted(plain.edges) + [(4, 0), (4, 1)])
        result = clean_min_biclique(sourced, [0, 1], [2, 3])
        self.assertIsInstance(result, CleanedPattern)
        self.assertTrue(result.pattern.flags.has_source)
        self.assertFalse(result.pattern.flags.has_sink)

        with self.assertRaises(GraphError):
            clean_min_biclique(Digraph(4, [(0, 2), (1, 3)]), [0, 1], [2, 3])
        print("✓ Minimal biclique cleaning")

    def test_each_of_the_nine_cells(self):
        """Test the largest cell is kept and certified for every source and sink class"""
        for p in range(3):
            for q in range(3):
                cells = [(p, q)] * 5 + [((p + 1) % 3, (q + 1) % 3)] * 4
                g, a, b = cased_biclique(cells)
                cases = biclique_cases(g, a, b)
                self.assertEqual((cases.source_class, cases.sink_class), (p, q))
                self.assertEqual(cases.kept, (0, 1, 2, 3, 4))
                result = clean_min_biclique(g, a, b)
                self.assertIsInstance(result, CleanedPattern, (p, q))
                self.assertEqual((result.pattern.kind, result.pattern.t), (BICLIQUE, 5))
                self.assertEqual(result.pattern.flags.has_source, p == 0, (p, q))
                self.assertEqual(result.pattern.flags.has_sink, q == 0, (p, q))
                self.assertEqual(replay_identifications(g, result.log).edges, result.graph.edges)
        print("✓ Nine biclique cells")

    def test_kept_cell_holds_a_ninth(self):
        """Test the class sizes behind the kept cell on random surroundings"""
        rng = random.Random(9)
        for _ in range(200 if SLOW else 40):
            n = rng.randint(9, 13)
            cells = [(rng.randrange(3), rng.randrange(3)) for _ in range(n)]
            g, a, b = cased_biclique(cells)
            cases = biclique_cases(g, a, b)
            self.assertEqual(sorted(sum(cases.source_classes, ())), list(range(n)))
            self.assertEqual(sorted(sum(cases.sink_classes, ())), list(range(n)))
            chosen = cases.source_classes[cases.source_class]
            self.assertGreaterEqual(3 * len(chosen), n)
            self.assertGreaterEqual(3 * len(cases.kept), len(chosen))
            self.assertGreaterEqual(9 * len(cases.kept), n)
            result = clean_min_biclique(g, a, b)
            self.assertIsInstance(result, CleanedPattern, cells)
            self.assertEqual(result.pattern.t, len(cases.kept))
            self.assertIsNotNone(pattern_matches(result.graph, result.pattern))
        print("✓ Kept cell size")

    def test_contraction_redundancy(self):
        """Test relay edges are redundant and matching edges are not"""
        g = closure_biclique_host()
        a, b = [0, 1, 2, 3], [4, 5, 6, 7]
        self.assertTrue(is_contraction_redundant(g, (0, 8), a, b))
        self.assertFalse(is_contraction_redundant(g, (0, 4), a, b))
        with self.assertRaises(GraphError):
            is_contraction_redundant(g, (0, 5), a, b)
        print("✓ Contraction redundancy")

    def test_simplify_to_induced_biclique(self):
        """Test relays are contracted into an induced biclique"""
        g = closure_biclique_host()
        outcome = simplify_biclique(g, [0, 1, 2, 3], [4, 5, 6, 7], 2)
        self.assertEqual(outcome.variant, INDUCED_BICLIQUE)
        self.assertEqual(len(outcome.a), 4)
        self.assertTrue(is_induced_biclique(outcome.graph, outcome.a, outcome.b, minimal=True))
        self.assertEqual(replay_identifications(g, outcome.log).edges, outcome.graph.edges)
        print("✓ Biclique simplification")


class TestCleanDispatcher(unittest.TestCase):
    """Test the end-to-end cleaning dispatcher"""

    def test_pattern_with_isolated_vertex(self):
        """Test an isolated vertex is absorbed and the pattern recognized"""
        report = clean(matching_host(2, 1), 2)
        self.assertTrue(report.success)
        self.assertEqual(report.stage, 'recognize')
        self.assertEqual((report.pattern.kind, report.pattern.t), (MATCHING, 2))
        self.assertEqual(report.to_dict()['pattern']['kind'], MATCHING)
        print("✓ Clean: isolated vertex")

    def test_biclique_is_recognized(self):
        """Test a bare biclique is returned as is"""
        report = clean(Digraph(4, [(0, 2), (0, 3), (1, 2), (1, 3)]), 2)
        self.assertTrue(report.success)
        self.assertEqual((report.pattern.kind, report.pattern.t), (BICLIQUE, 2))
        print("✓ Clean: biclique")

    def test_pendant_noise(self):
        """Test pendant sources and sinks fold into the matching"""
        g = matching_host(2, 2, [(8, 0), (3, 9)])
        report = clean(g, 2)
        self.assertTrue(report.success, report.reason)
        self.assertEqual(report.stage, 'noise')
        self.assertEqual((report.pattern.kind, report.pattern.t), (MATCHING, 2))
        self.assertEqual(replay_identifications(g, report.log, report.removed).edges, report.graph.edges)
        print("✓ Clean: pendant noise")

    def test_path_is_insufficient(self):
        """Test a path has no tough pair"""
        report = clean(Digraph(4, [(0, 1), (1, 2), (2, 3)]), 2)
        self.assertFalse(report.success)
        self.assertEqual(report.status, INSUFFICIENT)
        self.assertEqual(report.stage, 'find_tough_pair')
        self.assertEqual(report.to_dict()['status'], INSUFFICIENT)
        with self.assertRaises(GraphError):
            clean(Digraph(2, [(0, 1)]), 0)
        print("✓ Clean: insufficient path")

    @given(small_digraphs())
    @settings(max_examples=500 if SLOW else 40, deadline=None,
              suppress_health_check=[HealthCheck.too_slow])
    def test_successful_outputs_are_certified(self, g):
        """Test every success is a pattern reproduced by its log"""
        report = clean(g, 1)
        self.assertIn(report.status, ('ok', INSUFFICIENT))
        if report.success:
            self.assertGreaterEqual(report.pattern.t, 1)
            self.assertIsNotNone(pattern_matches(report.graph, report.pattern))
            replayed = replay_identifications(g, report.log, report.removed)
            self.assertEqual(replayed.edges, report.graph.edges)
            self.assertEqual(replayed.vertex_count, report.graph.vertex_count)
        else:
            self.assertTrue(report.stage)


class TestNoiseStripping(unittest.TestCase):
    """Test reach-preserving merges of noise around a pattern"""

    def test_merge_keeps_reach(self):
        """Test a relay merge is neutral and a merge that adds reach is not"""
        path = Digraph(3, [(0, 1), (1, 2)])
        self.assertTrue(merge_keeps_reach(path, 0, 1))
        self.assertTrue(merge_keeps_reach(path, 2, 1))
        fork = Digraph(4, [(0, 1), (2, 1), (1, 3)])
        self.assertFalse(merge_keeps_reach(fork, 0, 1))
        self.assertTrue(merge_keeps_reach(fork, 3, 1))
        print("✓ Reach-preserving merges")

    def test_subdivided_biclique_edge(self):
        """Test a 4-biclique with one subdivided edge comes back whole"""
        g, _ = generate_hard_pattern(BICLIQUE, 4)
        edges = (g.edges - {(0, 4)}) | {(0, 8), (8, 4)}
        host = Digraph(9, sorted(edges))
        report = clean(host, 2)
        self.assertTrue(report.success, report.reason)
        self.assertEqual(report.stage, 'noise')
        self.assertEqual((report.pattern.kind, report.pattern.t), (BICLIQUE, 4))
        self.assertEqual(report.graph.vertex_count, 8)
        print("✓ Subdivided biclique")

    def test_noisy_patterns_are_recovered(self):
        """Test patterns with subdivided edges and pendant noise clean to t >= 2"""
        for seed in range(50 if SLOW else 12):
            host = noisy_host(seed)
            report = clean(host, 2)
            self.assertTrue(report.success, f"seed {seed}: {report.stage} {report.reason}")
            self.assertGreaterEqual(report.pattern.t, 2)
            self.assertIsNotNone(pattern_matches(report.graph, report.pattern))
            replayed = replay_identifications(host, report.log, report.removed)
            self.assertEqual(replayed.edges, report.graph.edges)
        print("✓ Noisy patterns recovered")


def run_tests():
    """Run all tests with detailed output"""
    print("\n" + "=" * 70)
    print("CLEANER TESTS")
    print("=" * 70)
    print()

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    suite.addTests(loader.loadTestsFromTestCase(TestSpanningAndCliques))
    suite.addTests(loader.loadTestsFromTestCase(TestPartitions))
    suite.addTests(loader.loadTestsFromTestCase(TestIdentificationRules))
    suite.addTests(loader.loadTestsFromTestCase(TestPreclean))
    suite.addTests(loader.loadTestsFromTestCase(TestSemiClean))
    suite.addTests(loader.loadTestsFromTestCase(TestBicliqueCleaning))
    suite.addTests(loader.loadTestsFromTestCase(TestCleanDispatcher))
    suite.addTests(loader.loadTestsFromTestCase(TestNoiseStripping))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    print("\n" + "=" * 70)
    if result.wasSuccessful():
        print("✓ ALL TESTS PASSED")
    else:
        print("✗ SOME TESTS FAILED")
    print("=" * 70)
    print()

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
