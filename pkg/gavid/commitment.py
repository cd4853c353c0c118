"""
Fragment commitments: canonical fragment bytes, SHA-256 digests, the
verification vector D and the Merkle root with per-node fingerprints.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Sequence

from mec.access import NodeId
from mec.codes import Fragment, FragmentVector
from mec.errors import PreconditionError

HASH_ALGORITHM = 'sha256'
DIGEST_SIZE = 32
DOMAIN_TAG = b'MEC1'
ABSENT_COUNT = 0xFFFFFFFF
ZERO_DIGEST = bytes(DIGEST_SIZE)

Proof = tuple[bytes, ...]


def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def fragment_bytes(index: int, fragment: Fragment | None) -> bytes:
    """
    Canonical encoding: "MEC1" | index (u32 BE, 1-based) | count (u32 BE) | symbols (u64 BE each).

    The absent marker is count 0xFFFFFFFF with no symbols.
    """
    if fragment is None:
        return DOMAIN_TAG + struct.pack('>II', index, ABSENT_COUNT)
    return DOMAIN_TAG + struct.pack(f'>II{len(fragment)}Q', index, len(fragment), *fragment)


def fragment_digest(index: int, fragment: Fragment | None) -> bytes:
    return digest(fragment_bytes(index, fragment))


# ---------------------------------------------------------------------------
# Merkle tree

@dataclass(frozen=True)
class MerkleContext:
    """Levels from the (padded) leaves up to the root."""

    levels: tuple[tuple[bytes, ...], ...]
    count: int

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def fingerprint(self, i: int) -> Proof:
        """Sibling digests from leaf i (0-based) up to the root."""
        if not 0 <= i < self.count:
            raise PreconditionError(f"Leaf {i} outside 0..{self.count - 1}")
        siblings = []
        for level in self.levels[:-1]:
            siblings.append(level[i ^ 1])
            i //= 2
        return tuple(siblings)


def merkle_depth(n: int) -> int:
    """l = ceil(log2 n); 0 for a single leaf."""
    return math.ceil(math.log2(n)) if n > 1 else 0


def merkle_build(leaf_hashes: Sequence[bytes]) -> MerkleContext:
    """
    Build the tree over the leaf hashes, padding to a power of two with the zero digest.

    Raises:
        PreconditionError: If there are no leaves
    """
    if not leaf_hashes:
        raise PreconditionError("Merkle tree needs at least one leaf")
    width = 1 << merkle_depth(len(leaf_hashes))
    level = tuple(leaf_hashes) + (ZERO_DIGEST,) * (width - len(leaf_hashes))
    levels = [level]
    while len(level) > 1:
        level = tuple(digest(level[j] + level[j + 1]) for j in range(0, len(level), 2))
        levels.append(level)
    return MerkleContext(tuple(levels), len(leaf_hashes))


def merkle_verify(i: int, g: bytes, fingerprint: Sequence[bytes], root: bytes) -> bool:
    """Iterate H(g) up the fingerprint; bit j of i says whether the node is a right child."""
    node = digest(g)
    for level, sibling in enumerate(fingerprint):
        if i >> level & 1:
            node = digest(sibling + node)
        else:
            node = digest(node + sibling)
    return node == root


# ---------------------------------------------------------------------------
# Commitment schemes

class VectorCommitment:
    """D = D_1 | ... | D_n, one digest per node; proofs are empty."""

    name = 'vector'

    def commit(self, fragments: FragmentVector) -> tuple[bytes, tuple[Proof, ...]]:
        nodes = fragments.universe.nodes
        value = b''.join(fragment_digest(node.index, fragments[node]) for node in nodes)
        return value, tuple(() for _ in nodes)

    def verify(self, node: NodeId, fragment: Fragment | None, commitment: bytes,
               proof: Proof, n: int) -> bool:
        if len(commitment) != DIGEST_SIZE * n or proof:
            return False
        start = DIGEST_SIZE * (node.index - 1)
        return commitment[start:start + DIGEST_SIZE] == fragment_digest(node.index, fragment)

    def overhead_bytes(self, n: int) -> int:
        return DIGEST_SIZE * n


class MerkleCommitment:
    """The Merkle root over the fragment digests; each node's proof is its fingerprint."""

    name = 'merkle'

    def commit(self, fragments: FragmentVector) -> tuple[bytes, tuple[Proof, ...]]:
        nodes = fragments.universe.nodes
        tree = merkle_build([fragment_digest(node.index, fragments[node]) for node in nodes])
        return tree.root, tuple(tree.fingerprint(node.index - 1) for node in nodes)

    def verify(self, node: NodeId, fragment: Fragment | None, commitment: bytes,
               proof: Proof, n: int) -> bool:
        if len(commitment) != DIGEST_SIZE or len(proof) != merkle_depth(n):
            return False
        return merkle_verify(node.index - 1, fragment_bytes(node.index, fragment), proof, commitment)

    def overhead_bytes(self, n: int) -> int:
        return (merkle_depth(n) + 1) * DIGEST_SIZE


CommitmentScheme = VectorCommitment | MerkleCommitment

SCHEMES: dict[str, CommitmentScheme] = {
    'vector': VectorCommitment(),
    'merkle': MerkleCommitment(),
}


def commitment_scheme(variant: str) -> CommitmentScheme:
    try:
        return SCHEMES[variant]
    except KeyError:
        raise PreconditionError(
            f"Unknown variant '{variant}'; expected one of {', '.join(SCHEMES)}") from None
