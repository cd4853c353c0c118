"""`mec basic`: the bit-chunking construction on a file, with automatic zero padding."""
import argparse
from pathlib import Path

from mec.basic import basic_encode, basic_pad, basic_unit

from cli.services.manifest import provenance
from cli.utils.io import bits_text, bytes_to_bits, read_bytes, read_tree, write_json

BASIC_FILE = 'basic.json'


def register(subparsers) -> None:
    parser = subparsers.add_parser('basic', help="Chunk a file over an AND/OR access tree")
    parser.add_argument('--tree', required=True)
    parser.add_argument('--file', required=True)
    parser.add_argument('--out', required=True, help="Output directory")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    tree, raw = read_tree(args.tree)
    data = read_bytes(args.file)
    bits, pad = basic_pad(bytes_to_bits(data), tree)
    chunks = basic_encode(tree, bits)
    stored = 0
    for node, node_chunks in chunks.items():
        stored += sum(len(c) for c in node_chunks)
        write_json(Path(args.out) / f"{node.name}.chunks.json", {
            'node': node.name,
            'chunks': [bits_text(c) for c in node_chunks],
        })
    write_json(Path(args.out) / BASIC_FILE, {
        'tree': str(tree),
        'byte_length': len(data),
        'pad_bits': pad,
        'unit': basic_unit(tree),
        'stored_bits': stored,
        'provenance': provenance({'tree': raw.encode(), 'file': data}),
    })
    print(f"chunked {len(bits)} bits ({pad} padding) into {stored} stored bits")
    return 0
