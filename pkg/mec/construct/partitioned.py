"""
Uniform and optimal fragment assignments for partitioned access trees
(trees in which every node labels at most one leaf).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from mec.access import AccessTree, Leaf, NodeId, Universe, Vertex, balance, duplicated_leaves, vertex_text
from mec.codes import LinearCode, block_labeling, mds_code
from mec.errors import InvariantBreach, NotPartitionedError, PreconditionError
from mec.field import smallest_prime_at_least

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FaResult:
    """nu base fragments, threshold k, h[node] fragments per node."""

    nu: int
    k: int
    h: dict[NodeId, int]

    @property
    def beta(self) -> Fraction:
        return Fraction(self.nu - self.k, self.k)

    def counts(self, universe: Universe) -> list[int]:
        return [self.h.get(node, 0) for node in universe]


def _require_partitioned(tree: AccessTree) -> None:
    duplicated = duplicated_leaves(tree)
    if duplicated:
        names = ', '.join(node.name for node in duplicated)
        raise NotPartitionedError(
            f"Tree is not partitioned: {names} label more than one leaf; "
            f"use the lp or kronecker method instead")


def uniform_assignment(tree: AccessTree) -> FaResult:
    """
    Give every leaf k / (product of thresholds above it), k the lcm of those products.

    Raises:
        NotPartitionedError: If a node labels two leaves
    """
    _require_partitioned(tree)
    products: dict[NodeId, int] = {}

    def walk(vertex: Vertex, product: int) -> None:
        if isinstance(vertex, Leaf):
            products[vertex.node] = product
            return
        for child in vertex.children:
            walk(child, product * vertex.threshold)

    walk(balance(tree).root, 1)
    k = math.lcm(*products.values())
    h = {node: k // products[node] if node in products else 0 for node in tree.universe}
    return FaResult(sum(h.values()), k, h)


def fa_optimal(tree: AccessTree) -> FaResult:
    """
    Recursive optimal assignment.

    At every vertex the children are sorted by fragment ratio nu/k (stable);
    the first s* children are kept, where s* is the smallest s in
    {r-t+1, ..., r-1} with rho[s+1] >= sum(rho[1..s]) / (s-r+t), else r.

    Raises:
        NotPartitionedError: If a node labels two leaves
    """
    _require_partitioned(tree)

    def fa(vertex: Vertex) -> tuple[int, int, dict[NodeId, int]]:
        if isinstance(vertex, Leaf):
            return 1, 1, {vertex.node: 1}
        results = [fa(child) for child in vertex.children]
        r, t = len(results), vertex.threshold
        order = sorted(range(r), key=lambda a: Fraction(results[a][0], results[a][1]))
        rho = [Fraction(results[a][0], results[a][1]) for a in order]
        s_star = r
        for s in range(r - t + 1, r):
            if rho[s] >= sum(rho[:s], Fraction(0)) / (s - r + t):
                s_star = s
                break
        kept = order[:s_star]
        lam = math.lcm(*(results[a][1] for a in kept))
        nu = 0
        h: dict[NodeId, int] = {}
        for a in kept:
            child_nu, child_k, child_h = results[a]
            alpha = lam // child_k
            nu += alpha * child_nu
            for node, count in child_h.items():
                if count == 0:
                    continue
                if h.get(node):
                    raise InvariantBreach(
                        f"Node {node} receives fragments from two subtrees of {vertex_text(vertex)}")
                h[node] = alpha * count
        k = (s_star - r + t) * lam
        logger.debug("FA %s: s*=%d lambda=%d nu=%d k=%d", vertex_text(vertex), s_star, lam, nu, k)
        return nu, k, h

    nu, k, h = fa(tree.root)
    return FaResult(nu, k, {node: h.get(node, 0) for node in tree.universe})


def build_partitioned_code(tree: AccessTree,
                           via: Literal['uniform', 'optimal'] = 'optimal') -> LinearCode:
    """[nu, k] MDS code over the least prime q >= nu, h(i) consecutive columns per node."""
    if via == 'uniform':
        result = uniform_assignment(tree)
    elif via == 'optimal':
        result = fa_optimal(tree)
    else:
        raise PreconditionError(f"Unknown assignment '{via}'; expected uniform or optimal")
    field = smallest_prime_at_least(result.nu)
    universe = tree.universe
    return mds_code(result.k, result.nu, field,
                    block_labeling(universe, result.counts(universe)), universe)
