#!/usr/bin/env python3
"""
Fixture Generator for the DSN Toolkit

Writes the instance files under data/fixtures used by the tests and by
verify_setup.py:
- small_instance.txt: weighted two-demand instance with optimum 5
- matching_t2.txt: demands forming the 2-hard matching pattern
- gt_sat_k2_n3.txt / gt_unsat_k2_n3.txt: Grid Tiling with known answers

Each file is checked against its known answer before it is written.
"""

import os
import sys
from pathlib import Path

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from data.instance_io import InstanceDocument, serialize_document, serialize_grid_tiling
from dsn.digraph import Digraph, DsnInstance
from dsn.grid_tiling import GridTilingInstance, grid_tiling_solve
from dsn.patterns import MATCHING, generate_hard_pattern, recognize_hard_pattern
from dsn.solver import oracle_min

FIXTURES = Path(__file__).parent / 'data' / 'fixtures'

SMALL_EDGES = {(0, 1): 2, (0, 3): 1, (1, 2): 2, (2, 4): 1, (3, 2): 4, (3, 4): 1}


def write_fixture(name, header, body):
    """Write one fixture with its comment header"""
    path = FIXTURES / name
    path.write_text(f"# {header}\n{body}", encoding='utf-8')
    print(f"✓ {path}")


def create_small_instance():
    """Two demands out of vertex 0 sharing the 0->1->2 path"""
    graph = Digraph(5, SMALL_EDGES, SMALL_EDGES)
    inst = DsnInstance(graph, (0, 2, 4), {(0, 2), (0, 4)})
    weight = oracle_min(inst).weight
    if weight != 5:
        raise RuntimeError(f"small instance optimum is {weight}, expected 5")
    write_fixture('small_instance.txt', "two demands out of vertex 0; optimum 5 uses 0->1->2->4",
                  serialize_document(InstanceDocument(inst)))


def create_matching_instance():
    """The literal pattern as its own host graph"""
    pattern_graph, _ = generate_hard_pattern(MATCHING, 2)
    terminals = tuple(range(pattern_graph.vertex_count))
    inst = DsnInstance.from_demand_graph(pattern_graph, terminals, pattern_graph.with_labels({}))
    found = recognize_hard_pattern(inst.demand_graph())
    if found is None or found.kind != MATCHING or found.t != 2:
        raise RuntimeError("generated matching fixture is not recognized")
    write_fixture('matching_t2.txt', "demands form the 2-hard matching pattern",
                  serialize_document(InstanceDocument(inst)))


def create_grid_tiling():
    """One satisfiable and one unsatisfiable 2x2 instance over [3]x[3]"""
    sat = GridTilingInstance.from_cells(2, 3, {(i, j): {(2, 2)} for i in (1, 2) for j in (1, 2)})
    cells = {(i, j): {(2, 2)} for i in (1, 2) for j in (1, 2)}
    cells[(2, 1)] = {(2, 3)}
    unsat = GridTilingInstance.from_cells(2, 3, cells)
    if grid_tiling_solve(sat) is None or grid_tiling_solve(unsat) is not None:
        raise RuntimeError("grid tiling fixtures do not have their expected answers")
    write_fixture('gt_sat_k2_n3.txt', "every cell offers (2,2)", serialize_grid_tiling(sat))
    write_fixture('gt_unsat_k2_n3.txt', "row 1 cannot agree on its y value", serialize_grid_tiling(unsat))


def main():
    """Main fixture creation function"""
    print("="*60)
    print("🎯 DSN TOOLKIT - FIXTURE GENERATOR")
    print("="*60)
    print(f"\nWriting fixtures to {FIXTURES}")

    try:
        FIXTURES.mkdir(parents=True, exist_ok=True)

        create_small_instance()
        create_matching_instance()
        create_grid_tiling()

        print("\n" + "="*60)
        print("✅ Fixture creation completed successfully!")
        print("="*60)

        print("\n🚀 Next Steps:")
        print("  • python verify_setup.py")
        print("  • python -m dsn classify data/fixtures/matching_t2.txt")
        print("  • python -m dsn tile --gt data/fixtures/gt_sat_k2_n3.txt")

    except Exception as e:
        print(f"\n❌ Error: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == '__main__':
    main()
