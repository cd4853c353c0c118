"""`mec params`: code parameters for an access tree."""
import argparse

from mec.construct import METHODS, build_code, parameters_report

from cli.utils.io import dumps, read_tree


def register(subparsers) -> None:
    parser = subparsers.add_parser('params', help="Print k, m, per-node columns, beta and q")
    parser.add_argument('--tree', required=True, help="Access-tree file")
    parser.add_argument('--method', choices=METHODS, default='lp')
    parser.add_argument('--k-multiplier', type=int, default=1, help="Scale k and every m_i (lp only)")
    parser.add_argument('--json', action='store_true', help="Print the JSON parameters report")
    parser.set_defaults(handler=run)


def format_report(report: dict) -> list[str]:
    lines = [f"k={report['k']} m={report['m']} beta={report['beta']} q={report['q']}"]
    lines.extend(f"  {name}: {count}" for name, count in report['per_node'].items())
    return lines


def run(args: argparse.Namespace) -> int:
    tree, _ = read_tree(args.tree)
    report = parameters_report(build_code(tree, args.method, args.k_multiplier), args.method)
    if args.json:
        print(dumps(report), end='')
    else:
        print('\n'.join(format_report(report)))
    return 0
