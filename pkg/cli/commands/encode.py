"""
`mec encode` / `mec decode`: split a file into per-node fragment files and back.

Files are packed into symbols of floor(log2 q) bits and cut into stripes of
k symbols; each node's fragment file holds its symbols stripe after stripe.
"""
import argparse
import logging
from pathlib import Path

from mec.codes import FragmentVector, decode, encode, is_sufficient
from mec.errors import InsufficientError, PreconditionError
from mec.packing import pack, stripe, symbol_bits, unpack

from cli.services.manifest import code_hash, load_code, provenance
from cli.utils.io import parse_nodes, read_bytes, read_json, sha256_hex, write_json

logger = logging.getLogger(__name__)

ENCODING_FILE = 'encoding.json'


def register(subparsers) -> None:
    parser = subparsers.add_parser('encode', help="Encode a file into fragment files")
    parser.add_argument('--code', required=True, help="Code manifest")
    parser.add_argument('--file', required=True)
    parser.add_argument('--out', required=True, help="Output directory")
    parser.set_defaults(handler=run_encode)

    parser = subparsers.add_parser('decode', help="Recover a file from fragment files")
    parser.add_argument('--code', required=True, help="Code manifest")
    parser.add_argument('--dir', required=True, help="Directory written by encode")
    parser.add_argument('--out', required=True, help="Recovered file path")
    parser.add_argument('--nodes', help="Comma-separated nodes to decode from (default: all present)")
    parser.set_defaults(handler=run_decode)


def fragment_path(directory, name: str) -> Path:
    return Path(directory) / f"{name}.frag.json"


def run_encode(args: argparse.Namespace) -> int:
    code = load_code(args.code)
    digest = code_hash(code)
    data = read_bytes(args.file)
    symbols, pad_bits = pack(data, code.q)
    stripes = stripe(symbols, code.k)
    per_node: dict[str, list[int] | None] = {
        node.name: [] if code.fragment_length(node) else None for node in code.universe}
    for block in stripes:
        fragments = encode(code, block)
        for node in code.universe:
            if fragments[node] is not None:
                per_node[node.name].extend(fragments[node])

    for node in code.universe:
        write_json(fragment_path(args.out, node.name), {
            'code_hash': digest,
            'node': node.name,
            'symbols': per_node[node.name],
        })
    write_json(Path(args.out) / ENCODING_FILE, {
        'code_hash': digest,
        'byte_length': len(data),
        'pad_bits': pad_bits,
        'stripes': len(stripes),
        'symbol_bits': symbol_bits(code.q),
        'input_sha256': sha256_hex(data),
        'provenance': provenance({'file': data}),
    })
    logger.info("Encoded %d bytes into %d stripes", len(data), len(stripes))
    print(f"encoded {len(data)} bytes into {len(stripes)} stripes for {code.n} nodes")
    return 0


def _load_fragments(directory, code) -> dict[str, list[int] | None]:
    """Fragment files present in ``directory``; a ``null`` symbol list is the absent fragment."""
    digest = code_hash(code)
    fragments: dict[str, list[int] | None] = {}
    for node in code.universe:
        path = fragment_path(directory, node.name)
        if not path.exists():
            continue
        obj = read_json(path)
        if obj.get('code_hash') != digest:
            raise PreconditionError(f"Fragment file of {node} was written for a different code")
        if obj.get('node') != node.name:
            raise PreconditionError(f"Fragment file {path.name} belongs to {obj.get('node')}")
        symbols = obj.get('symbols')
        fragments[node.name] = None if symbols is None else [int(s) for s in symbols]
    return fragments


def run_decode(args: argparse.Namespace) -> int:
    code = load_code(args.code)
    encoding = read_json(Path(args.dir) / ENCODING_FILE)
    if encoding.get('code_hash') != code_hash(code):
        raise PreconditionError("Fragments were encoded with a different code")
    available = _load_fragments(args.dir, code)
    mask = (parse_nodes(args.nodes, code.universe) if args.nodes
            else code.universe.mask(list(available)))
    missing = [name for name in code.universe.names_of(mask) if name not in available]
    if missing:
        raise PreconditionError(f"No fragment file for {', '.join(missing)}")
    if not is_sufficient(code, mask):
        raise InsufficientError(
            f"insufficient: {{{','.join(code.universe.names_of(mask))}}} cannot reconstruct the file")

    stripes = int(encoding['stripes'])
    symbols: list[int] = []
    for s in range(stripes):
        entries = []
        for node in code.universe:
            width = code.fragment_length(node)
            if not mask & node.bit or width == 0:
                entries.append(None)
                continue
            if available[node.name] is None:
                raise PreconditionError(f"Fragment of {node} is absent but it holds {width} columns")
            chunk = available[node.name][s * width:(s + 1) * width]
            if len(chunk) != width:
                raise PreconditionError(f"Fragment file of {node} is truncated at stripe {s + 1}")
            entries.append(chunk)
        value = decode(code, FragmentVector(code.universe, entries))
        if value is None:
            raise PreconditionError(f"Stripe {s + 1}: fragments are not consistent with the code")
        symbols.extend(value)

    data = unpack(symbols, code.q, int(encoding['byte_length']))
    if sha256_hex(data) != encoding.get('input_sha256', sha256_hex(data)):
        raise PreconditionError("Recovered file does not match the encoded digest")
    with open(args.out, 'wb') as f:
        f.write(data)
    print(f"decoded {len(data)} bytes from {{{','.join(code.universe.names_of(mask))}}}")
    return 0
