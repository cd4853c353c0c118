"""File helpers shared by the commands."""
import hashlib
import json
from pathlib import Path
from typing import Any

from mec.access import AccessTree, Universe, parse_tree
from mec.errors import PreconditionError


def read_bytes(path: str | Path) -> bytes:
    with open(path, 'rb') as f:
        return f.read()


def read_text(path: str | Path) -> str:
    with open(path, 'r') as f:
        return f.read()


def read_json(path: str | Path) -> Any:
    with open(path, 'r') as f:
        return json.load(f)


def dumps(obj: Any) -> str:
    """Sorted keys and two-space indentation so identical inputs give identical files."""
    return json.dumps(obj, sort_keys=True, indent=2) + '\n'


def write_json(path: str | Path, obj: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        f.write(dumps(obj))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def read_tree(path: str | Path, universe: Universe | None = None) -> tuple[AccessTree, str]:
    """
    Parse an access-tree file; lines starting with '#' are comments.

    Returns:
        (tree, raw file text)
    """
    raw = read_text(path)
    text = ' '.join(line for line in raw.splitlines() if not line.lstrip().startswith('#'))
    return parse_tree(text, universe), raw


def parse_nodes(text: str, universe: Universe) -> int:
    """Comma- or space-separated node names to a mask."""
    names = [name for name in text.replace(',', ' ').split() if name]
    if not names:
        raise PreconditionError("Node list is empty")
    return universe.mask(names)


def bytes_to_bits(data: bytes) -> list[int]:
    """Bit i of the stream is bit (i mod 8) of byte i // 8."""
    return [(byte >> i) & 1 for byte in data for i in range(8)]


def bits_text(bits) -> str:
    return ''.join(str(b) for b in bits)
