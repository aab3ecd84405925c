"""
DSN Command Line
Batch verbs over instance files: classify, solve, oracle, clean, gadget,
reduce, tile and verify. Text reports by default, --json for scripting.

Exit codes: 0 success or PASS, 1 FAIL (or no pattern for clean), 2 usage error.
"""
import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from data.instance_io import (InstanceDocument, load_document, load_grid_tiling, serialize_document)
from dsn import __version__
from dsn.cleaner import clean
from dsn.config import get_settings
from dsn.digraph import Digraph, DsnInstance, GraphError
from dsn.gadgets import (DIAMOND_VARIANTS, build_connector, build_down_main, build_up_main)
from dsn.grid_tiling import GridTilingInstance, grid_tiling_solve
from dsn.patterns import (PATH_WZ_CHOICES, PATH_YX_CHOICES, SET_CHOICES, MatchingFlags, largest_tough_pair,
                          recognize_diamond, recognize_hard_pattern, recognize_star_or_cycle,
                          total_branch_degree)
from dsn.reductions import BICLIQUE_VARIANTS, build_mg
from dsn.solver import BRANCH_BOUND, SOLVER_MODES, SolverBudget, c_bounded_probe, oracle_min, solve
from dsn.verification import (PASS, REDUCTION_KINDS, build_reduction, forward_edges, parse_entries,
                              verify_connector, verify_main, verify_reduction_equivalence,
                              verify_weight_removal)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad command line; reported with exit code 2"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ==================== Report rendering ====================

def _render(value, indent: int = 0) -> List[str]:
    pad = '  ' * indent
    lines = []
    if isinstance(value, dict):
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item and not _flat(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_render(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(_render(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    return lines


def _flat(item) -> bool:
    return isinstance(item, list) and all(not isinstance(x, (dict, list)) or
                                          (isinstance(x, list) and all(not isinstance(y, (dict, list)) for y in x))
                                          for x in item)


def _scalar(item) -> str:
    if isinstance(item, list):
        return ' '.join('(' + ','.join(str(y) for y in x) + ')' if isinstance(x, list) else str(x) for x in item)
    if item is None:
        return '-'
    return str(item)


def render_text(verb: str, report: Dict) -> str:
    lines = ["=" * 70, f"  {verb}", "=" * 70]
    status = report.get('status')
    if status is not None:
        lines.append(f"status: {status}")
    lines.extend(_render({k: v for k, v in report.items() if k != 'status'}))
    return "\n".join(lines) + "\n"


def render_json(report: Dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# ==================== Helpers ====================

def _budget(args) -> SolverBudget:
    settings = get_settings()
    return SolverBudget(args.max_nodes or settings.max_nodes, args.max_seconds or settings.max_seconds,
                        getattr(args, 'mode', None) or BRANCH_BOUND)


def _demand_or_host(inst: DsnInstance) -> Digraph:
    """Detectors and the cleaner work on the demand graph when the file declares demands"""
    return inst.demand_graph() if inst.demands else inst.graph.unweighted()


def _emit_instance(doc: InstanceDocument, out: Optional[str]) -> Dict:
    text = serialize_document(doc)
    if out:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(text)
        return {'written': out}
    return {'document': text}


def _grid_from_args(args) -> GridTilingInstance:
    if getattr(args, 'gt', None):
        return load_grid_tiling(args.gt)
    entries = parse_entries(args.s)
    k = args.k or 1
    return GridTilingInstance.from_cells(k, args.n, {(i, j): set(entries)
                                                     for i in range(1, k + 1) for j in range(1, k + 1)})


def _matching_flags(args) -> MatchingFlags:
    return MatchingFlags(args.path_wz, args.path_yx, args.source_set, args.sink_set, args.r_wz, args.r_yx)


# ==================== Verbs ====================

def cmd_classify(args) -> Tuple[int, Dict]:
    inst = load_document(args.file).instance
    d = _demand_or_host(inst)
    report: Dict = {'vertices': d.vertex_count, 'edges': len(d.edges),
                    'total_branch_degree': total_branch_degree(d)}
    star = recognize_star_or_cycle(d)
    report['star_or_cycle'] = {'kind': star.kind, 't': star.t} if star else None
    diamond = recognize_diamond(d)
    report['diamond'] = {'kind': diamond.kind, 't': diamond.t, 'literal': diamond.literal} if diamond else None
    pattern = recognize_hard_pattern(d)
    report['hard_pattern'] = None if pattern is None else {
        'kind': pattern.kind, 't': pattern.t, 'flags': vars(pattern.flags), 'literal': pattern.literal}
    for name, ordered in (('tough_pair', False), ('ordered_tough_pair', True)):
        t, pair, status = largest_tough_pair(d, args.max_t, ordered)
        report[name] = {'t': t, 'search': status,
                        'edges': [[list(e) for e in pair.e1], [list(e) for e in pair.e2]] if pair else None}
    report['status'] = 'ok'
    return EXIT_OK, report


def cmd_solve(args) -> Tuple[int, Dict]:
    inst = load_document(args.file).instance
    if args.threads and args.threads > 1:
        logger.info("--threads=%d requested; the search runs single-threaded", args.threads)
    solution = solve(inst, _budget(args))
    report = solution.to_dict()
    if args.probe:
        report['probe'] = c_bounded_probe(inst, solution.edges).to_dict()
    report['status'] = 'optimal' if solution.optimal else 'incumbent'
    return EXIT_OK, report


def cmd_oracle(args) -> Tuple[int, Dict]:
    inst = load_document(args.file).instance
    solution = oracle_min(inst, args.cap)
    report = solution.to_dict()
    report['status'] = 'optimal'
    return EXIT_OK, report


def cmd_clean(args) -> Tuple[int, Dict]:
    inst = load_document(args.file).instance
    result = clean(_demand_or_host(inst), args.t)
    return (EXIT_OK if result.success else EXIT_FAIL), result.to_dict()


def cmd_gadget(args) -> Tuple[int, Dict]:
    if args.kind == 'connector':
        bundle = build_connector(args.n)
    elif args.kind in ('dmain', 'umain'):
        if not args.s:
            raise UsageError(f"gadget {args.kind} needs --s")
        entries = parse_entries(args.s)
        bundle = build_down_main(entries, args.n) if args.kind == 'dmain' else build_up_main(entries, args.n)
    else:
        if not args.s and not args.gt:
            raise UsageError("gadget mg needs --s (with --k) or --gt")
        bundle = build_mg(_grid_from_args(args))
    doc = InstanceDocument(bundle.instance, constants=dict(bundle.constants))
    report = {'kind': bundle.kind, 'vertices': bundle.instance.graph.vertex_count,
              'edges': len(bundle.instance.graph.edges), 'constants': dict(bundle.constants), 'status': 'ok'}
    report.update(_emit_instance(doc, args.out))
    return EXIT_OK, report


def cmd_reduce(args) -> Tuple[int, Dict]:
    gt = load_grid_tiling(args.gt)
    flags = _matching_flags(args) if args.kind == 'matching' else None
    inst, bundle, threshold, used = build_reduction(gt, args.kind, flags, args.variant)
    constants = dict(bundle.constants)
    constants['threshold'] = threshold
    solution = None
    if args.with_solution:
        witness = grid_tiling_solve(used)
        if witness is not None:
            solution = forward_edges(args.kind, bundle, witness)
    doc = InstanceDocument(inst, solution=solution, constants=constants)
    report = {'kind': args.kind, 'normalized': used is not gt, 'vertices': inst.graph.vertex_count,
              'edges': len(inst.graph.edges), 'terminals': inst.k, 'threshold': threshold, 'status': 'ok'}
    report.update(_emit_instance(doc, args.out))
    return EXIT_OK, report


def cmd_tile(args) -> Tuple[int, Dict]:
    gt = load_grid_tiling(args.gt)
    witness = grid_tiling_solve(gt)
    if witness is None:
        return EXIT_OK, {'k': gt.k, 'n': gt.n, 'status': 'unsatisfiable', 'witness': None}
    cells = [[i, j, x, y] for (i, j), (x, y) in sorted(witness.items())]
    return EXIT_OK, {'k': gt.k, 'n': gt.n, 'status': 'satisfiable', 'witness': cells}


def cmd_verify(args) -> Tuple[int, Dict]:
    budget = _budget(args)
    if args.check == 'lemma-cg':
        report = verify_connector(args.n, budget)
    elif args.check in ('lemma-dmg', 'lemma-umg'):
        if not args.s:
            raise UsageError(f"verify {args.check} needs --s")
        report = verify_main(args.n, parse_entries(args.s), args.check == 'lemma-dmg', budget,
                             exact=not args.canonical_only)
    elif args.check == 'reduction-equivalence':
        if not args.gt or not args.kind:
            raise UsageError("verify reduction-equivalence needs --gt and --kind")
        flags = _matching_flags(args) if args.kind == 'matching' else None
        report = verify_reduction_equivalence(load_grid_tiling(args.gt), args.kind, flags, args.variant, budget)
    else:
        report = verify_weight_removal(args.samples, args.seed)
    return (EXIT_OK if report['status'] == PASS else EXIT_FAIL), report


# ==================== Parser ====================

def _budget_flags(p: argparse.ArgumentParser):
    p.add_argument('--max-nodes', type=int, default=None, help='search node budget')
    p.add_argument('--max-seconds', type=float, default=None, help='search time budget')


def _matching_flag_args(p: argparse.ArgumentParser):
    p.add_argument('--path-wz', choices=PATH_WZ_CHOICES, default='none')
    p.add_argument('--path-yx', choices=PATH_YX_CHOICES, default='none')
    p.add_argument('--source-set', choices=SET_CHOICES, default='none')
    p.add_argument('--sink-set', choices=SET_CHOICES, default='none')
    p.add_argument('--r-wz', action='store_true')
    p.add_argument('--r-yx', action='store_true')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='dsn', description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--json', action='store_true', help='structured output')
    parser.add_argument('--version', action='version', version=f"dsn {__version__}")
    sub = parser.add_subparsers(dest='verb', parser_class=_Parser)

    p = sub.add_parser('classify', help='pattern detectors and tough-pair sizes')
    p.add_argument('file')
    p.add_argument('--max-t', type=int, default=3)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser('solve', help='exact optimum within budget')
    p.add_argument('file')
    p.add_argument('--mode', choices=SOLVER_MODES, default=BRANCH_BOUND)
    p.add_argument('--threads', type=int, default=1)
    p.add_argument('--probe', action='store_true', help='report branch degree and treewidth of the solution')
    _budget_flags(p)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser('oracle', help='subset-enumeration optimum')
    p.add_argument('file')
    p.add_argument('--cap', type=int, default=None)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser('clean', help='identify down to a hard pattern')
    p.add_argument('file')
    p.add_argument('--t', type=int, required=True)
    p.set_defaults(handler=cmd_clean)

    p = sub.add_parser('gadget', help='emit a gadget instance')
    p.add_argument('kind', choices=('connector', 'dmain', 'umain', 'mg'))
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--s', default=None, help="entry set, e.g. '2,2;2,3'")
    p.add_argument('--k', type=int, default=None)
    p.add_argument('--gt', default=None)
    p.add_argument('--out', default=None)
    p.set_defaults(handler=cmd_gadget)

    p = sub.add_parser('reduce', help='emit a reduction instance from Grid Tiling')
    p.add_argument('kind', choices=REDUCTION_KINDS)
    p.add_argument('--gt', required=True)
    p.add_argument('--variant', default=None, choices=DIAMOND_VARIANTS + BICLIQUE_VARIANTS)
    p.add_argument('--with-solution', action='store_true')
    p.add_argument('--out', default=None)
    _matching_flag_args(p)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser('tile', help='solve a Grid Tiling instance')
    p.add_argument('--gt', required=True)
    p.set_defaults(handler=cmd_tile)

    p = sub.add_parser('verify', help='exact checks with PASS/FAIL')
    p.add_argument('check', choices=('lemma-cg', 'lemma-dmg', 'lemma-umg', 'reduction-equivalence',
                                     'weight-removal'))
    p.add_argument('--n', type=int, default=3)
    p.add_argument('--s', default=None)
    p.add_argument('--canonical-only', action='store_true', help='skip the optimum search')
    p.add_argument('--gt', default=None)
    p.add_argument('--kind', choices=REDUCTION_KINDS, default=None)
    p.add_argument('--variant', default=None, choices=DIAMOND_VARIANTS + BICLIQUE_VARIANTS)
    p.add_argument('--samples', type=int, default=50)
    p.add_argument('--seed', type=int, default=0)
    _matching_flag_args(p)
    _budget_flags(p)
    p.set_defaults(handler=cmd_verify)
    return parser


def _check_variant(args):
    variant = getattr(args, 'variant', None)
    kind = getattr(args, 'kind', None)
    if variant is None:
        return
    allowed = {'diamond': DIAMOND_VARIANTS, 'biclique': BICLIQUE_VARIANTS}.get(kind, ())
    if variant not in allowed:
        raise UsageError(f"--variant {variant} does not apply to {kind}")


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Parse argv, run one verb and write its report; returns the exit code"""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verb is None:
            raise UsageError("missing verb")
        _check_variant(args)
        code, report = args.handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    stdout.write(render_json(report) if args.json else render_text(args.verb, report))
    return code


def main() -> int:
    logging.basicConfig(level=getattr(logging, get_settings().log_level.upper(), logging.WARNING),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    return run()


if __name__ == '__main__':
    sys.exit(main())
