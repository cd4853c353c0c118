"""
Basic bit-chunking construction over AND/OR access trees.

General thresholds are first rewritten into OR-of-ANDs. Each vertex carries a
chunk of the file: an AND splits its chunk into equal consecutive parts, an
OR hands the whole chunk to every child. A node stores the chunks of all its
leaves in depth-first order.
"""
from __future__ import annotations

import math
from typing import Sequence

from mec.access import (AccessTree, Internal, Leaf, NodeId, NodeSet, Vertex,
                        evaluate, expand_thresholds, vertex_text)
from mec.errors import PreconditionError

Bits = tuple[int, ...]
Chunks = dict[NodeId, list[Bits]]


def _is_and(vertex: Internal) -> bool:
    return vertex.threshold == vertex.fan_out and vertex.fan_out > 1


def basic_unit(tree: AccessTree) -> int:
    """Least positive file length every AND split divides evenly."""
    expanded = expand_thresholds(tree)

    def walk(vertex: Vertex, product: int) -> int:
        if isinstance(vertex, Leaf):
            return product
        if _is_and(vertex):
            product *= vertex.fan_out
        return math.lcm(*(walk(child, product) for child in vertex.children))

    return walk(expanded.root, 1)


def basic_pad(bits: Sequence[int], tree: AccessTree) -> tuple[Bits, int]:
    """Zero-pad the file to the least valid length; returns (bits, pad count)."""
    unit = basic_unit(tree)
    pad = -len(bits) % unit
    return tuple(bits) + (0,) * pad, pad


def _check_bits(bits: Sequence[int]) -> Bits:
    if not bits:
        raise PreconditionError("File must contain at least one bit")
    if any(b not in (0, 1) for b in bits):
        raise PreconditionError("File bits must be 0 or 1")
    return tuple(bits)


def basic_encode(tree: AccessTree, bits: Sequence[int]) -> Chunks:
    """
    Assign bit chunks to every node.

    Returns:
        Mapping NodeId -> list of chunks, in universe order

    Raises:
        PreconditionError: If an AND vertex receives a chunk its fan-out does
                           not divide; the message names the vertex
    """
    bits = _check_bits(bits)
    expanded = expand_thresholds(tree)
    chunks: Chunks = {node: [] for node in tree.universe}

    def assign(vertex: Vertex, chunk: Bits) -> None:
        if isinstance(vertex, Leaf):
            chunks[vertex.node].append(chunk)
            return
        if not _is_and(vertex):
            for child in vertex.children:
                assign(child, chunk)
            return
        parts = vertex.fan_out
        if len(chunk) % parts:
            raise PreconditionError(
                f"AND vertex {vertex_text(vertex)} cannot split {len(chunk)} bits into "
                f"{parts} equal chunks; pad the file to a multiple of {basic_unit(tree)}")
        size = len(chunk) // parts
        for i, child in enumerate(vertex.children):
            assign(child, chunk[i * size:(i + 1) * size])

    assign(expanded.root, bits)
    return chunks


def basic_decode(tree: AccessTree, chunks: Chunks, nodes: NodeSet) -> Bits | None:
    """
    Reassemble the file from the chunks of the given nodes.

    Returns None when the node set does not satisfy the tree.

    Raises:
        PreconditionError: If the chunk lists do not match the tree's shape
    """
    mask = tree.universe.mask(nodes)
    if not evaluate(tree, mask):
        return None
    expanded = expand_thresholds(tree)
    cursor = {node: 0 for node in tree.universe}

    def locate(vertex: Vertex) -> tuple:
        # Pair each leaf with its chunk in depth-first order.
        if isinstance(vertex, Leaf):
            owned = chunks.get(vertex.node, [])
            position = cursor[vertex.node]
            if position >= len(owned):
                raise PreconditionError(f"Node {vertex.node} is missing chunk {position + 1}")
            cursor[vertex.node] += 1
            return ('leaf', vertex.node, owned[position])
        return ('gate', vertex, [locate(child) for child in vertex.children])

    located = locate(expanded.root)
    for node, used in cursor.items():
        if used != len(chunks.get(node, [])):
            raise PreconditionError(
                f"Node {node} holds {len(chunks.get(node, []))} chunks, tree has {used} leaves for it")

    def recover(entry: tuple) -> Bits | None:
        if entry[0] == 'leaf':
            return tuple(entry[2]) if mask & entry[1].bit else None
        vertex, children = entry[1], entry[2]
        if not _is_and(vertex):
            for child in children:
                result = recover(child)
                if result is not None:
                    return result
            return None
        parts = []
        for child in children:
            result = recover(child)
            if result is None:
                return None
            parts.append(result)
        if len({len(p) for p in parts}) != 1:
            raise PreconditionError(
                f"Chunks under AND vertex {vertex_text(vertex)} have unequal lengths")
        return tuple(bit for part in parts for bit in part)

    return recover(located)
