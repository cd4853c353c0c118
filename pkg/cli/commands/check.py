"""`mec check`: verify a manifest's code against every minimal access set of a tree."""
import argparse

from mec.access import enumerate_minimal
from mec.codes import is_sufficient
from mec.errors import InsufficientError

from cli.services.manifest import load_code
from cli.utils.io import read_tree


def register(subparsers) -> None:
    parser = subparsers.add_parser('check', help="Check completeness of a code for a tree")
    parser.add_argument('--manifest', required=True)
    parser.add_argument('--tree', required=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    code = load_code(args.manifest)
    tree, _ = read_tree(args.tree, code.universe)
    structure = enumerate_minimal(tree)
    failing = [mask for mask in structure.masks if not is_sufficient(code, mask)]
    if failing:
        for mask in failing:
            print(f"insufficient: {{{','.join(code.universe.names_of(mask))}}}")
        raise InsufficientError(
            f"{len(failing)} of {len(structure.masks)} access sets cannot decode")
    print(f"complete: {len(structure.masks)} access sets verified")
    return 0
