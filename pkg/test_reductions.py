"""
Reduction Tests
Tests for Grid Tiling, the MG gadget, the matching and biclique reductions
and the reduction equivalence check

Run with: python test_reductions.py
Set DSN_SLOW_TESTS=1 to include the exact equivalence checks.
"""
import itertools
import random
import unittest
import os
import sys

import networkx as nx
from hypothesis import HealthCheck, given, settings, strategies as st

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from data.instance_io import load_grid_tiling
from dsn.digraph import GraphError
from dsn.gadgets import DIAMOND_VARIANTS, build_diamond_reduction
from dsn.grid_tiling import GridTilingInstance, check_assignment, grid_tiling_solve, normalize
from dsn.patterns import BICLIQUE, MATCHING, MatchingFlags, all_matching_flags, recognize_hard_pattern
from dsn.reductions import (BICLIQUE_VARIANTS, auxiliary_paths, build_biclique_reduction, build_matching_reduction,
                            build_mg, forward_solution, mg_canonical, mg_constants, mg_decode, restrict_to_mg)
from dsn.solver import is_feasible
from dsn.verification import PASS, build_reduction, parse_entries, verify_reduction_equivalence

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'fixtures')
SLOW = os.getenv('DSN_SLOW_TESTS', '').lower() in ('1', 'true', 'yes')


@st.composite
def grid_instances(draw):
    k = draw(st.integers(min_value=1, max_value=2))
    n = draw(st.integers(min_value=2, max_value=3))
    entries = [(x, y) for x in range(1, n + 1) for y in range(1, n + 1)]
    cells = {(i, j): draw(st.sets(st.sampled_from(entries), min_size=1, max_size=3))
             for i in range(1, k + 1) for j in range(1, k + 1)}
    return GridTilingInstance.from_cells(k, n, cells)


def _brute_force_satisfiable(gt: GridTilingInstance) -> bool:
    keys = [(i, j) for i in range(1, gt.k + 1) for j in range(1, gt.k + 1)]
    for choice in itertools.product(*(sorted(gt.cell(i, j)) for i, j in keys)):
        if check_assignment(gt, dict(zip(keys, choice))):
            return True
    return False


class TestGridTiling(unittest.TestCase):
    """Test Grid Tiling instances and the brute-force solver"""

    @classmethod
    def setUpClass(cls):
        """Set up test fixtures"""
        cls.sat = load_grid_tiling(os.path.join(FIXTURES, 'gt_sat_k2_n3.txt'))
        cls.unsat = load_grid_tiling(os.path.join(FIXTURES, 'gt_unsat_k2_n3.txt'))

    def test_fixtures(self):
        """Test the fixtures solve as expected"""
        witness = grid_tiling_solve(self.sat)
        self.assertIsNotNone(witness)
        self.assertTrue(check_assignment(self.sat, witness))
        self.assertEqual(witness[(2, 2)], (2, 2))
        self.assertIsNone(grid_tiling_solve(self.unsat))
        print("✓ Grid Tiling fixtures")

    def test_check_assignment(self):
        """Test row and column consistency"""
        gt = GridTilingInstance.from_cells(2, 3, {(1, 1): {(2, 2)}, (2, 1): {(3, 2)},
                                                  (1, 2): {(2, 3)}, (2, 2): {(3, 3), (2, 3)}})
        good = {(1, 1): (2, 2), (2, 1): (3, 2), (1, 2): (2, 3), (2, 2): (3, 3)}
        self.assertTrue(check_assignment(gt, good))
        self.assertFalse(check_assignment(gt, {**good, (2, 2): (2, 3)}))
        self.assertFalse(check_assignment(gt, {(1, 1): (2, 2)}))
        print("✓ Assignment checks")

    def test_validation_and_normalize(self):
        """Test malformed instances and the interior shift"""
        with self.assertRaises(GraphError):
            GridTilingInstance.from_cells(1, 3, {})
        with self.assertRaises(GraphError):
            GridTilingInstance.from_cells(1, 3, {(1, 1): {(4, 1)}})
        with self.assertRaises(GraphError):
            GridTilingInstance(2, 3, ((frozenset({(1, 1)}),),))
        self.assertFalse(self.unsat.interior)
        with self.assertRaises(GraphError):
            self.unsat.check_interior()
        shifted = normalize(self.unsat)
        self.assertEqual(shifted.n, 5)
        self.assertTrue(shifted.interior)
        self.assertEqual(shifted.cell(2, 1), frozenset({(3, 4)}))
        self.assertIsNone(grid_tiling_solve(shifted))
        print("✓ Validation and normalization")

    def test_parse_entries(self):
        """Test the x,y;x,y entry syntax"""
        self.assertEqual(parse_entries("2,3; 2,2;2,2"), [(2, 2), (2, 3)])
        with self.assertRaises(GraphError):
            parse_entries("2;3")
        with self.assertRaises(GraphError):
            parse_entries(";")
        print("✓ Entry parsing")

    @given(grid_instances())
    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_solver_matches_brute_force(self, gt):
        """Test the row-first solver against trying every assignment"""
        witness = grid_tiling_solve(gt)
        self.assertEqual(witness is not None, _brute_force_satisfiable(gt))
        if witness is not None:
            self.assertTrue(check_assignment(gt, witness))
        self.assertEqual(witness is not None, grid_tiling_solve(normalize(gt)) is not None)


class TestMainGadgetMG(unittest.TestCase):
    """Test the MG gadget and its canonical solutions"""

    @classmethod
    def setUpClass(cls):
        """Set up test fixtures"""
        cls.single = GridTilingInstance.from_cells(1, 3, {(1, 1): {(2, 2)}})
        cls.sat = load_grid_tiling(os.path.join(FIXTURES, 'gt_sat_k2_n3.txt'))

    def test_constants(self):
        """Test Delta, B* and the threshold"""
        constants = mg_constants(1, 3)
        self.assertEqual(constants['Delta'], 45)
        self.assertEqual(constants['B_star'], 376)
        self.assertEqual(constants['target'], 375)
        print("✓ MG constants")

    def test_canonical_single_cell(self):
        """Test the k=1 canonical solution meets the threshold exactly"""
        bundle = build_mg(self.single)
        witness = grid_tiling_solve(self.single)
        edges = mg_canonical(bundle, witness)
        self.assertTrue(is_feasible(bundle.instance, edges))
        self.assertEqual(bundle.graph.total_weight(edges), bundle.constants['target'])
        self.assertEqual(mg_decode(bundle, edges), {'rows': (2,), 'columns': (2,)})
        print("✓ MG canonical solution")

    def test_canonical_two_by_two(self):
        """Test the k=2 canonical solution stays within the threshold"""
        bundle = build_mg(self.sat)
        witness = grid_tiling_solve(self.sat)
        edges = forward_solution(bundle, witness)
        self.assertTrue(is_feasible(bundle.instance, edges))
        self.assertLessEqual(bundle.graph.total_weight(edges), bundle.constants['target'])
        self.assertEqual(restrict_to_mg(bundle, edges), mg_canonical(bundle, witness))
        self.assertEqual(mg_decode(bundle, edges), {'rows': (2, 2), 'columns': (2, 2)})
        print("✓ MG canonical solution k=2")

    def test_inconsistent_assignment_rejected(self):
        """Test the canonical builder refuses broken assignments"""
        gt = GridTilingInstance.from_cells(2, 4, {(1, 1): {(2, 2)}, (2, 1): {(3, 2)},
                                                  (1, 2): {(2, 3)}, (2, 2): {(2, 3), (3, 3)}})
        bundle = build_mg(gt)
        with self.assertRaises(GraphError):
            mg_canonical(bundle, {(1, 1): (2, 2), (2, 1): (3, 2), (1, 2): (2, 3), (2, 2): (2, 3)})
        self.assertIsNone(mg_decode(bundle, frozenset()))
        with self.assertRaises(GraphError):
            build_mg(load_grid_tiling(os.path.join(FIXTURES, 'gt_unsat_k2_n3.txt')))
        print("✓ MG guards")


class TestPatternReductions(unittest.TestCase):
    """Test the matching and biclique reductions"""

    @classmethod
    def setUpClass(cls):
        """Set up test fixtures"""
        cls.sat = load_grid_tiling(os.path.join(FIXTURES, 'gt_sat_k2_n3.txt'))
        cls.witness = grid_tiling_solve(cls.sat)

    def test_matching_reduction_demand_graph(self):
        """Test the demand graph is the flagged matching pattern"""
        for flags in (MatchingFlags(), MatchingFlags(path_wz='W', source_set='W+Y'),
                      MatchingFlags(sink_set='X+Z', has_r_yx=True)):
            inst, _ = build_matching_reduction(self.sat, flags)
            pattern = recognize_hard_pattern(inst.demand_graph())
            self.assertIsNotNone(pattern)
            self.assertEqual(pattern.signature(), (MATCHING, 2, flags))
        print("✓ Matching reduction demand graphs")

    def test_matching_reduction_forward(self):
        """Test the forward solution is feasible within the threshold"""
        for flags in (MatchingFlags(), MatchingFlags(path_wz='joined', path_yx='X')):
            inst, bundle = build_matching_reduction(self.sat, flags)
            edges = forward_solution(bundle, self.witness)
            self.assertTrue(is_feasible(inst, edges))
            self.assertLessEqual(inst.graph.total_weight(edges), bundle.constants['target'])
        print("✓ Matching reduction forward direction")

    def test_biclique_reduction(self):
        """Test every variant's demand graph and forward solution"""
        for variant in BICLIQUE_VARIANTS:
            inst, bundle = build_biclique_reduction(self.sat, variant)
            pattern = recognize_hard_pattern(inst.demand_graph())
            self.assertIsNotNone(pattern, variant)
            self.assertEqual(pattern.kind, BICLIQUE)
            self.assertEqual(pattern.t, 5)
            self.assertEqual(pattern.flags.has_source, variant in ('source', 'both'))
            self.assertEqual(pattern.flags.has_sink, variant in ('sink', 'both'))
            edges = forward_solution(bundle, self.witness)
            self.assertTrue(is_feasible(inst, edges), variant)
            self.assertLessEqual(inst.graph.total_weight(edges), bundle.constants['target'])
        with self.assertRaises(GraphError):
            build_biclique_reduction(self.sat, 'middle')
        print("✓ Biclique reductions")

    def test_auxiliary_paths(self):
        """Test every source reaches every sink"""
        for k in (1, 2):
            g = auxiliary_paths(k)
            width = 2 * k + 1
            self.assertEqual(g.vertex_count, 2 * width + (2 * k - 1) * width)
            self.assertTrue(g.is_acyclic())
            for s in range(width):
                for t in range(width, 2 * width):
                    self.assertTrue(g.reaches(s, t), f"k={k} {s}->{t}")
        print("✓ Auxiliary path graph")

    def test_build_reduction_normalizes(self):
        """Test non-interior instances are shifted before building"""
        unsat = load_grid_tiling(os.path.join(FIXTURES, 'gt_unsat_k2_n3.txt'))
        inst, bundle, threshold, used = build_reduction(unsat, 'matching')
        self.assertEqual(used.n, 5)
        self.assertEqual(threshold, bundle.constants['target'])
        self.assertEqual(inst.k, 8)
        _, diamond, w_star, _ = build_reduction(self.sat, 'diamond')
        self.assertEqual(w_star, diamond.constants['W_star'])
        with self.assertRaises(GraphError):
            build_reduction(self.sat, 'spiral')
        print("✓ Reduction builder")


def is_planar(g):
    """Planarity of the underlying undirected graph"""
    return nx.check_planarity(g.to_networkx().to_undirected())[0]


def uniform_grid(k, n=3):
    return GridTilingInstance.from_cells(k, n, {(i, j): {(2, 2)} for i in range(1, k + 1) for j in range(1, k + 1)})


class TestPlanarity(unittest.TestCase):
    """Test every reduction builds a planar graph"""

    def test_mg_is_planar(self):
        """Test MG for k = 1..3"""
        for k in (1, 2, 3):
            self.assertTrue(is_planar(build_mg(uniform_grid(k)).graph), f"k={k}")
        print("✓ MG planar")

    def test_biclique_reductions_are_planar(self):
        """Test every biclique variant for k = 1..3 and the bare annulus"""
        for k in (1, 2, 3):
            self.assertTrue(is_planar(auxiliary_paths(k)), f"annulus k={k}")
            for variant in BICLIQUE_VARIANTS:
                inst, _ = build_biclique_reduction(uniform_grid(k), variant)
                self.assertTrue(is_planar(inst.graph), f"k={k} {variant}")
        print("✓ Biclique reductions planar")

    def test_matching_reductions_are_planar(self):
        """Test sampled matching flags for k = 1..3"""
        for k in (1, 2, 3):
            for flags in random.Random(k).sample(all_matching_flags(), 12):
                inst, _ = build_matching_reduction(uniform_grid(k), flags)
                self.assertTrue(is_planar(inst.graph), f"k={k} {flags}")
        print("✓ Matching reductions planar")

    def test_diamond_reductions_are_planar(self):
        """Test every diamond variant for k = 1..3"""
        for k in (1, 2, 3):
            for variant in DIAMOND_VARIANTS:
                inst, _ = build_diamond_reduction(uniform_grid(k), variant)
                self.assertTrue(is_planar(inst.graph), f"k={k} {variant}")
        print("✓ Diamond reductions planar")

    def test_biclique_hubs_sit_on_their_paths(self):
        """Test where the row and column hubs join the annulus for k=2"""
        inst, bundle = build_biclique_reduction(uniform_grid(2))
        g = inst.graph
        label = lambda vs: [g.label(v) for v in vs]
        hubs = bundle.roles
        self.assertEqual(label(g.predecessors(hubs['a'][0])), ['A3'])
        self.assertEqual(label(g.successors(hubs['b'][0])), ['u3,3'])
        self.assertEqual(label(g.predecessors(hubs['a'][1])), ['u2,1'])
        self.assertEqual(label(g.successors(hubs['b'][1])), ['B2'])
        self.assertEqual(label(g.predecessors(hubs['c'][0])), ['A4'])
        self.assertEqual(label(g.successors(hubs['d'][0])), ['u1,3'])
        self.assertEqual(label(g.predecessors(hubs['c'][1])), ['u4,1'])
        self.assertEqual(label(g.successors(hubs['d'][1])), ['B1'])
        print("✓ Biclique hubs on their paths")


@unittest.skipUnless(SLOW, "set DSN_SLOW_TESTS=1")
class TestReductionEquivalence(unittest.TestCase):
    """Test satisfiable iff a solution fits the threshold"""

    def test_single_cell_reductions(self):
        """Test k=1 matching and biclique reductions"""
        gt = GridTilingInstance.from_cells(1, 3, {(1, 1): {(2, 2)}})
        for kind in ('matching', 'biclique'):
            result = verify_reduction_equivalence(gt, kind)
            self.assertEqual(result['status'], PASS, result)
        print("✓ Single cell equivalence")

    def test_fixture_reductions(self):
        """Test the satisfiable and unsatisfiable fixtures"""
        for name in ('gt_sat_k2_n3.txt', 'gt_unsat_k2_n3.txt'):
            gt = load_grid_tiling(os.path.join(FIXTURES, name))
            result = verify_reduction_equivalence(gt, 'matching')
            self.assertEqual(result['status'], PASS, result)
        print("✓ Fixture equivalence")


def run_tests():
    """Run all tests with detailed output"""
    print("\n" + "=" * 70)
    print("REDUCTION TESTS")
    print("=" * 70)
    print()

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    suite.addTests(loader.loadTestsFromTestCase(TestGridTiling))
    suite.addTests(loader.loadTestsFromTestCase(TestMainGadgetMG))
    suite.addTests(loader.loadTestsFromTestCase(TestPatternReductions))
    suite.addTests(loader.loadTestsFromTestCase(TestPlanarity))
    suite.addTests(loader.loadTestsFromTestCase(TestReductionEquivalence))

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
