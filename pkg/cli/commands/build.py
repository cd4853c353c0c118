"""`mec build`: construct a code and write its manifest."""
import argparse
import logging

from mec.construct import METHODS, build_code

from cli.services.manifest import build_manifest
from cli.utils.io import read_tree, write_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser('build', help="Build a code and write its manifest")
    parser.add_argument('--tree', required=True, help="Access-tree file")
    parser.add_argument('--method', choices=METHODS, default='lp')
    parser.add_argument('--k-multiplier', type=int, default=1)
    parser.add_argument('--out', required=True, help="Manifest path")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    tree, raw = read_tree(args.tree)
    code = build_code(tree, args.method, args.k_multiplier)
    manifest = build_manifest(code, args.method, raw)
    write_json(args.out, manifest)
    logger.info("Built %s code with k=%d m=%d", args.method, code.k, code.m)
    print(f"wrote {args.out}: k={code.k} m={code.m} beta={manifest['beta']} q={code.q}")
    return 0
