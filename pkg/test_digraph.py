"""
Digraph Core Tests
Tests for the digraph value type, closure, identification, instances,
SCC contraction and the instance file format

Run with: python test_digraph.py
"""
import unittest
import os
import sys

from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from dsn.digraph import (Digraph, DsnInstance, GraphError, apply_vertex_map, contract_edge, identify,
                         merge_map, satisfies, scc_contract, transitive_closure, transitively_equivalent)
from data.instance_io import (InstanceDocument, InstanceParseError, load_grid_tiling, load_instance,
                              parse_document, parse_grid_tiling, parse_instance, serialize_document,
                              serialize_grid_tiling, serialize_instance)

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'fixtures')


@st.composite
def digraphs(draw, max_vertices=7):
    n = draw(st.integers(min_value=1, max_value=max_vertices))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs))) if pairs else set()
    return Digraph(n, edges)


class TestDigraph(unittest.TestCase):
    """Test construction and reachability"""

    @classmethod
    def setUpClass(cls):
        """Set up test fixtures"""
        # 0 -> 1 -> 2 -> 0 is a cycle, 2 -> 3 leaves it
        cls.cyclic = Digraph(5, [(0, 1), (1, 2), (2, 0), (2, 3)])
        cls.path = Digraph(4, [(0, 1), (1, 2), (2, 3)], weight={(0, 1): 3, (1, 2): 1, (2, 3): 2})

    def test_rejects_invalid_graphs(self):
        """Test self-loops, out-of-range edges and negative weights"""
        with self.assertRaises(GraphError):
            Digraph(2, [(0, 0)])
        with self.assertRaises(GraphError):
            Digraph(2, [(0, 2)])
        with self.assertRaises(GraphError):
            Digraph(2, [(0, 1)], weight={(0, 1): -1})
        with self.assertRaises(GraphError):
            Digraph(-1)
        print("✓ Invalid graphs rejected")

    def test_reachability_excludes_self_without_cycle(self):
        """Test reaches() on a cycle and on an acyclic tail"""
        g = self.cyclic
        self.assertTrue(g.reaches(0, 3))
        self.assertTrue(g.reaches(0, 0), "a vertex on a cycle reaches itself")
        self.assertFalse(g.reaches(3, 3))
        self.assertFalse(g.reaches(3, 0))
        self.assertFalse(g.reaches(4, 0))
        self.assertTrue(g.on_cycle(1))
        self.assertFalse(g.is_acyclic())
        self.assertTrue(self.path.is_acyclic())
        print("✓ Reachability respects cycles")

    def test_weights(self):
        """Test weighted and unweighted edge weights"""
        self.assertEqual(self.path.total_weight(self.path.edges), 6)
        self.assertEqual(self.path.unweighted().total_weight(self.path.edges), 3)
        self.assertEqual(Digraph(2, [(0, 1)]).edge_weight((0, 1)), 1)
        print("✓ Weights and unit weights")

    def test_subgraph_requires_existing_edges(self):
        """Test subgraph keeps weights and rejects foreign edges"""
        sub = self.path.subgraph([(0, 1)])
        self.assertEqual(sub.edge_weight((0, 1)), 3)
        with self.assertRaises(GraphError):
            self.path.subgraph([(1, 0)])
        print("✓ Subgraphs")

    def test_closure(self):
        """Test transitive closure of a path"""
        closure = transitive_closure(self.path)
        self.assertEqual(closure.edges, {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)})
        self.assertTrue(transitively_equivalent(self.path, closure))
        self.assertFalse(transitively_equivalent(self.path, Digraph(4, [(0, 1)])))
        with self.assertRaises(GraphError):
            transitively_equivalent(self.path, Digraph(3))
        print("✓ Transitive closure")

    def test_equality_includes_weights_and_labels(self):
        """Test value equality"""
        a = Digraph(2, [(0, 1)])
        self.assertEqual(a, Digraph(2, [(0, 1)]))
        self.assertNotEqual(a, Digraph(2, [(0, 1)], weight={(0, 1): 2}))
        self.assertNotEqual(a, a.with_labels({0: 'W1'}))
        print("✓ Equality")

    def test_satisfies(self):
        """Test demand satisfaction by an edge set"""
        self.assertTrue(satisfies(4, [(0, 1), (1, 2)], [(0, 2)]))
        self.assertFalse(satisfies(4, [(0, 1), (1, 2)], [(2, 0)]))
        self.assertTrue(satisfies(4, [], []))
        print("✓ Demand satisfaction")

    @given(digraphs())
    @settings(max_examples=60, deadline=None)
    def test_closure_matches_networkx(self, d):
        """Test closure rows against networkx descendants"""
        import networkx as nx
        g = d.to_networkx()
        for u in d.vertices():
            expected = set(nx.descendants(g, u))
            self.assertEqual({v for v in d.vertices() if d.reaches(u, v)}, expected)


class TestIdentification(unittest.TestCase):
    """Test vertex identification and edge contraction"""

    def test_merge_map_smaller_survives(self):
        """Test renumbering after a merge"""
        self.assertEqual(merge_map(5, 3, 1), [0, 1, 2, 1, 3])
        with self.assertRaises(GraphError):
            merge_map(3, 1, 1)
        print("✓ Merge map")

    def test_identify_drops_loops_and_keeps_min_weight(self):
        """Test loops vanish and parallel edges keep the smaller weight"""
        d = Digraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)], weight={(0, 1): 5, (0, 2): 2, (1, 3): 1, (2, 3): 4})
        merged = identify(d, 1, 2)
        self.assertEqual(merged.vertex_count, 3)
        self.assertEqual(merged.edges, {(0, 1), (1, 2)})
        self.assertEqual(merged.edge_weight((0, 1)), 2)
        self.assertEqual(merged.edge_weight((1, 2)), 1)
        print("✓ Identification")

    def test_contract_edge(self):
        """Test contracting an edge and rejecting a missing one"""
        d = Digraph(3, [(0, 1), (1, 2)])
        self.assertEqual(contract_edge(d, (0, 1)).edges, {(0, 1)})
        with self.assertRaises(GraphError):
            contract_edge(d, (0, 2))
        print("✓ Edge contraction")

    def test_labels_follow_first_preimage(self):
        """Test label survival under a vertex map"""
        d = Digraph(3, [(0, 2)], labels={1: 'X1', 2: 'Z1'})
        image = apply_vertex_map(d, [0, 1, 1], 2)
        self.assertEqual(image.labels, {1: 'X1'})
        print("✓ Labels under identification")

    @given(digraphs(), st.data())
    @settings(max_examples=60, deadline=None)
    def test_identification_never_breaks_reachability(self, d, data):
        """Test u reaches v before a merge implies the images reach after it"""
        if d.vertex_count < 2:
            return
        u = data.draw(st.integers(0, d.vertex_count - 1))
        v = data.draw(st.integers(0, d.vertex_count - 1).filter(lambda x: x != u))
        mapping = merge_map(d.vertex_count, u, v)
        merged = identify(d, u, v)
        for a in d.vertices():
            for b in d.vertices():
                if d.reaches(a, b) and mapping[a] != mapping[b]:
                    self.assertTrue(merged.reaches(mapping[a], mapping[b]))


class TestInstances(unittest.TestCase):
    """Test DSN instances and SCC contraction"""

    def test_instance_validation(self):
        """Test duplicate terminals and non-terminal demands"""
        g = Digraph(3, [(0, 1), (1, 2)])
        with self.assertRaises(GraphError):
            DsnInstance(g, (0, 0), frozenset())
        with self.assertRaises(GraphError):
            DsnInstance(g, (0, 2), frozenset({(0, 1)}))
        with self.assertRaises(GraphError):
            DsnInstance(g, (0, 5), frozenset())
        inst = DsnInstance(g, (0, 2), frozenset({(0, 2)}))
        self.assertEqual(inst.k, 2)
        self.assertEqual(inst.demand_graph().edges, {(0, 1)})
        print("✓ Instance validation")

    def test_from_demand_graph(self):
        """Test demands given on terminal indices"""
        g = Digraph(4, [(0, 1), (1, 2), (2, 3)], labels={3: 'B1'})
        inst = DsnInstance.from_demand_graph(g, (1, 3), Digraph(2, [(0, 1)]))
        self.assertEqual(inst.demands, {(1, 3)})
        self.assertEqual(inst.demand_graph().labels, {1: 'B1'})
        print("✓ Demand graph round trip")

    def test_scc_contraction(self):
        """Test a solution with a cycle contracts to an acyclic image"""
        g = Digraph(4, [(0, 1), (1, 2), (2, 1), (2, 3)])
        inst = DsnInstance(g, (0, 3), frozenset({(0, 3)}))
        record, contracted = scc_contract(inst, g.edges)
        self.assertTrue(record.contracted.is_acyclic())
        self.assertEqual(record.contracted.vertex_count, 3)
        self.assertEqual(record.component_of[1], record.component_of[2])
        self.assertEqual(contracted.k, 2)
        self.assertTrue(satisfies(record.contracted.vertex_count, record.contracted.edges, contracted.demands))
        print("✓ SCC contraction")

    def test_scc_contraction_rejects_infeasible(self):
        """Test an infeasible solution is refused"""
        g = Digraph(3, [(0, 1), (1, 2)])
        inst = DsnInstance(g, (0, 2), frozenset({(0, 2)}))
        with self.assertRaises(GraphError):
            scc_contract(inst, [(0, 1)])
        print("✓ Infeasible solution rejected")


class TestInstanceFiles(unittest.TestCase):
    """Test the line-oriented instance format"""

    def test_parse_document(self):
        """Test every keyword in one document"""
        text = "\n".join([
            "# two-edge path",
            "nodes 3",
            "edge 0 1 4",
            "edge 1 2",
            "terminal 0",
            "terminal 2",
            "demand 0 2",
            "label 0 source vertex",
            "solution weight 5",
            "use 0 1",
            "use 1 2",
            "const C_star 344",
        ])
        doc = parse_document(text)
        inst = doc.instance
        self.assertEqual(inst.graph.vertex_count, 3)
        self.assertEqual(inst.graph.edge_weight((0, 1)), 4)
        self.assertEqual(inst.graph.edge_weight((1, 2)), 1)
        self.assertEqual(inst.graph.label(0), 'source vertex')
        self.assertEqual(doc.solution, {(0, 1), (1, 2)})
        self.assertEqual(doc.solution_weight, 5)
        self.assertEqual(doc.constants, {'C_star': 344})
        print("✓ Document parsing")

    def test_parse_errors_carry_line_numbers(self):
        """Test malformed lines report where they are"""
        cases = [
            ("nodes 2\nedge 0 5", 2),
            ("nodes 2\nedge 0 0", 2),
            ("edge 0 1", 1),
            ("nodes 2\nterminal 0\ndemand 0 1", 3),
            ("nodes 2\nedge 0 1\nuse 0 1", 3),
            ("nodes 2\nbogus 1", 2),
        ]
        for text, line_no in cases:
            with self.assertRaises(InstanceParseError) as ctx:
                parse_document(text)
            self.assertEqual(ctx.exception.line_no, line_no, text)
        print("✓ Parse errors report line numbers")

    def test_serialize_then_parse(self):
        """Test a document survives serialization"""
        g = Digraph(3, [(0, 1), (1, 2)], weight={(0, 1): 2, (1, 2): 7}, labels={2: 'sink'})
        inst = DsnInstance(g, (0, 2), frozenset({(0, 2)}))
        doc = InstanceDocument(inst, solution=frozenset(g.edges), constants={'M_star': 9})
        again = parse_document(serialize_document(doc))
        self.assertEqual(again.instance.graph, g)
        self.assertEqual(again.instance.demands, inst.demands)
        self.assertEqual(again.solution, g.edges)
        self.assertEqual(again.solution_weight, 9)
        self.assertEqual(again.constants, {'M_star': 9})
        self.assertEqual(parse_instance(serialize_instance(inst)).graph, g)
        print("✓ Serialization")

    def test_unwritable_labels_are_rejected(self):
        """Test labels that would not read back are refused on write"""
        for tag in ('a#b', 'a\tb', 'a\nb', ' a', 'a ', 'a  b'):
            g = Digraph(2, [(0, 1)], labels={1: tag})
            with self.assertRaises(GraphError, msg=repr(tag)):
                serialize_instance(DsnInstance(g, (0, 1), frozenset({(0, 1)})))
        g = Digraph(2, [(0, 1)], labels={0: 'source vertex', 1: 'u2,1'})
        inst = DsnInstance(g, (0, 1), frozenset({(0, 1)}))
        self.assertEqual(parse_instance(serialize_instance(inst)).graph.labels, g.labels)
        print("✓ Label validation")

    def test_grid_tiling_files(self):
        """Test Grid Tiling parsing and its errors"""
        gt = parse_grid_tiling("k 1\nn 3\nset 1 1 2 2\nset 1 1 2 3\n")
        self.assertEqual(gt.cell(1, 1), {(2, 2), (2, 3)})
        self.assertEqual(parse_grid_tiling(serialize_grid_tiling(gt)), gt)
        with self.assertRaises(InstanceParseError):
            parse_grid_tiling("k 1\nn 3\nset 2 1 2 2\n")
        with self.assertRaises(InstanceParseError):
            parse_grid_tiling("k 1\nn 3\n")
        print("✓ Grid Tiling files")

    def test_fixtures_load(self):
        """Test the checked-in fixtures parse"""
        self.assertEqual(load_grid_tiling(os.path.join(FIXTURES, 'gt_sat_k2_n3.txt')).k, 2)
        self.assertEqual(load_grid_tiling(os.path.join(FIXTURES, 'gt_unsat_k2_n3.txt')).n, 3)
        self.assertEqual(load_instance(os.path.join(FIXTURES, 'matching_t2.txt')).k, 8)
        self.assertEqual(load_instance(os.path.join(FIXTURES, 'small_instance.txt')).k, 3)
        print("✓ Fixtures load")


def run_tests():
    """Run all tests with detailed output"""
    print("\n" + "=" * 70)
    print("DIGRAPH CORE TESTS")
    print("=" * 70)
    print()

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    suite.addTests(loader.loadTestsFromTestCase(TestDigraph))
    suite.addTests(loader.loadTestsFromTestCase(TestIdentification))
    suite.addTests(loader.loadTestsFromTestCase(TestInstances))
    suite.addTests(loader.loadTestsFromTestCase(TestInstanceFiles))

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
