"""
Kronecker construction: a linear monotone erasure code for any access tree.

Each threshold vertex combines its children's generators R_a = M_a (x) I_alpha
through a t x r Vandermonde matrix A as M = (A (x) I_lambda) diag(R_1..R_r).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from mec import config
from mec.access import AccessTree, Internal, Leaf, NodeId, Universe, Vertex, balance, internal_vertices, vertex_text
from mec.codes import LinearCode
from mec.errors import CapacityError
from mec.field import (FieldMatrix, FieldSpec, block_diag, identity, kronecker, ones,
                       smallest_prime_at_least, vandermonde)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KroneckerResult:
    matrix: FieldMatrix
    nu: int
    k: int
    labels: tuple[NodeId, ...]
    field: FieldSpec
    universe: Universe


@dataclass(frozen=True)
class SizePrediction:
    psi: tuple[Fraction, ...]
    k_pred: int
    cols_pred: int
    beta_pred: Fraction


def kronecker_field_size(tree: AccessTree) -> FieldSpec:
    """Least prime >= max(2, fan-out of every vertex whose threshold is not 1)."""
    bound = max([2] + [v.fan_out for v in internal_vertices(tree) if v.threshold != 1])
    return smallest_prime_at_least(bound)


def build_kronecker(tree: AccessTree, field: FieldSpec | None = None) -> KroneckerResult:
    """
    Run the recursive Kronecker construction.

    Raises:
        CapacityError: If an intermediate matrix exceeds MEC_MAX_COLUMNS columns
    """
    field = field or kronecker_field_size(tree)
    cap = config.max_columns()

    def build(vertex: Vertex) -> tuple[FieldMatrix, list[NodeId]]:
        if isinstance(vertex, Leaf):
            return identity(field, 1), [vertex.node]
        parts = [build(child) for child in vertex.children]
        lam = math.lcm(*(matrix.rows for matrix, _ in parts))
        blocks: list[FieldMatrix] = []
        labels: list[NodeId] = []
        for matrix, child_labels in parts:
            alpha = lam // matrix.rows
            blocks.append(kronecker(matrix, identity(field, alpha)))
            labels.extend(label for label in child_labels for _ in range(alpha))
        if len(labels) > cap:
            raise CapacityError(
                f"Vertex {vertex_text(vertex)} needs {len(labels)} columns; cap is {cap}")
        t, r = vertex.threshold, vertex.fan_out
        combiner = ones(field, 1, r) if t == 1 else vandermonde(t, r, field)
        merged = kronecker(combiner, identity(field, lam)) @ block_diag(blocks)
        logger.debug("Vertex %s: lambda=%d k=%d nu=%d", vertex_text(vertex), lam,
                     merged.rows, merged.cols)
        return merged, labels

    matrix, labels = build(tree.root)
    logger.info("Kronecker construction over %s: k=%d nu=%d", field, matrix.rows, matrix.cols)
    return KroneckerResult(matrix, matrix.cols, matrix.rows, tuple(labels), field, tree.universe)


def kronecker_to_code(result: KroneckerResult) -> LinearCode:
    """Wrap the matrix as a code; same-node columns form one fragment."""
    return LinearCode(result.matrix, result.labels, result.universe)


def predict_kronecker_size(tree: AccessTree) -> SizePrediction:
    """
    Closed-form size of the Kronecker code.

    psi_i = (children of leaf-parent v_i) / (product of thresholds on the
    root..v_i path), taken on the balanced tree; k is the lcm of those
    unreduced path products.
    """
    balanced = balance(tree)
    if isinstance(balanced.root, Leaf):
        return SizePrediction((Fraction(1),), 1, 1, Fraction(0))
    psi: list[Fraction] = []
    products: list[int] = []

    def walk(vertex: Internal, product: int) -> None:
        product *= vertex.threshold
        if all(isinstance(child, Leaf) for child in vertex.children):
            psi.append(Fraction(vertex.fan_out, product))
            products.append(product)
            return
        for child in vertex.children:
            walk(child, product)  # type: ignore[arg-type]

    walk(balanced.root, 1)
    k_pred = math.lcm(*products)
    total = sum(psi, Fraction(0))
    return SizePrediction(tuple(psi), k_pred, int(total * k_pred), total - 1)
