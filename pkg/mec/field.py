"""
Prime-field arithmetic and the matrix operations every construction uses.

Matrices are numpy object arrays of Python ints reduced into [0, q), so
products never overflow and results are exact for any supported q.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import sympy

from mec.errors import CapacityError, FieldMismatchError, PreconditionError

logger = logging.getLogger(__name__)

MAX_FIELD_BITS = 61


@dataclass(frozen=True, order=True)
class FieldSpec:
    """A prime field F_q."""

    q: int

    def __post_init__(self):
        if self.q < 2 or not sympy.isprime(self.q):
            raise PreconditionError(f"Field order {self.q} is not a prime")
        if self.q.bit_length() > MAX_FIELD_BITS:
            raise CapacityError(
                f"Field order {self.q} exceeds {MAX_FIELD_BITS} bits")

    def element(self, value: int) -> int:
        return int(value) % self.q

    def inverse(self, value: int) -> int:
        if value % self.q == 0:
            raise PreconditionError("Zero has no inverse")
        return pow(int(value), -1, self.q)

    def __str__(self):
        return f"GF({self.q})"


def smallest_prime_at_least(bound: int) -> FieldSpec:
    """
    Return the prime field whose order is the least prime >= max(bound, 2).

    Raises:
        PreconditionError: If bound < 1
    """
    if bound < 1:
        raise PreconditionError(f"Prime bound must be positive, got {bound}")
    if bound <= 2:
        return FieldSpec(2)
    if sympy.isprime(bound):
        return FieldSpec(bound)
    return FieldSpec(int(sympy.nextprime(bound)))


class FieldMatrix:
    """Immutable rows x cols matrix over a prime field."""

    __slots__ = ('field', '_data')

    def __init__(self, field: FieldSpec, data: np.ndarray):
        if data.ndim != 2:
            raise PreconditionError(
                f"Matrix data must be two-dimensional, got shape {data.shape}")
        reduced = np.array(data, dtype=object) % field.q if data.size else \
            np.empty(data.shape, dtype=object)
        reduced.flags.writeable = False
        self.field = field
        self._data = reduced

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Sequence[Sequence[int]],
                  cols: int | None = None) -> FieldMatrix:
        if not rows:
            return cls(field, np.empty((0, cols or 0), dtype=object))
        widths = {len(row) for row in rows}
        if len(widths) != 1:
            raise PreconditionError(f"Ragged matrix rows: widths {sorted(widths)}")
        data = np.empty((len(rows), widths.pop()), dtype=object)
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                data[i, j] = int(value)
        return cls(field, data)

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the reduced entries."""
        return self._data

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major entries."""
        return tuple(int(x) for x in self._data.flat)

    def to_lists(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self._data]

    def __getitem__(self, index: tuple[int, int]) -> int:
        return int(self._data[index])

    def select_columns(self, indices: Iterable[int]) -> FieldMatrix:
        indices = list(indices)
        if not indices:
            return FieldMatrix(self.field, np.empty((self.rows, 0), dtype=object))
        return FieldMatrix(self.field, self._data[:, indices])

    def scale(self, factor: int) -> FieldMatrix:
        return FieldMatrix(self.field, self._data * int(factor))

    def transpose(self) -> FieldMatrix:
        return FieldMatrix(self.field, self._data.T.copy())

    def left_multiply(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Return the row vector f * M."""
        if len(vector) != self.rows:
            raise PreconditionError(
                f"Vector length {len(vector)} does not match {self.rows} rows")
        if self.cols == 0:
            return ()
        if self.rows == 0:
            return (0,) * self.cols
        product = np.array([int(v) for v in vector], dtype=object) @ self._data
        return tuple(int(x) % self.field.q for x in product)

    def __matmul__(self, other: FieldMatrix) -> FieldMatrix:
        _same_field(self, other)
        if self.cols != other.rows:
            raise PreconditionError(
                f"Cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return zeros(self.field, self.rows, other.cols)
        return FieldMatrix(self.field, self._data @ other._data)

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and self.entries == other.entries)

    __hash__ = None  # type: ignore

    def __repr__(self):
        return f"FieldMatrix({self.field}, {self.to_lists()})"


def _same_field(a: FieldMatrix, b: FieldMatrix) -> None:
    if a.field != b.field:
        raise FieldMismatchError(
            f"Matrices over {a.field} and {b.field} cannot be combined")


def zeros(field: FieldSpec, rows: int, cols: int) -> FieldMatrix:
    return FieldMatrix(field, np.zeros((rows, cols), dtype=object))


def identity(field: FieldSpec, n: int) -> FieldMatrix:
    return FieldMatrix.from_rows(
        field, [[int(i == j) for j in range(n)] for i in range(n)], cols=n)


def ones(field: FieldSpec, rows: int, cols: int) -> FieldMatrix:
    return FieldMatrix.from_rows(field, [[1] * cols for _ in range(rows)], cols=cols)


def vandermonde(t: int, r: int, field: FieldSpec) -> FieldMatrix:
    """
    Build the t x r Vandermonde matrix on the points 0, 1, ..., r-1.

    Entry (i, j) is j**i with 0**0 = 1, so row 0 is all ones.

    Raises:
        PreconditionError: If t < 1 or r > q (not enough distinct points)
    """
    if t < 1:
        raise PreconditionError(f"Vandermonde needs at least one row, got {t}")
    if r > field.q:
        raise PreconditionError(
            f"Vandermonde with {r} columns needs {r} distinct points, {field} has {field.q}")
    rows = [[pow(j, i, field.q) for j in range(r)] for i in range(t)]
    return FieldMatrix.from_rows(field, rows, cols=r)


def kronecker(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    """Kronecker product a (x) b with shape (a.rows*b.rows, a.cols*b.cols)."""
    _same_field(a, b)
    rows, cols = a.rows * b.rows, a.cols * b.cols
    if rows == 0 or cols == 0:
        return FieldMatrix(a.field, np.empty((rows, cols), dtype=object))
    outer = np.multiply.outer(a.data, b.data)
    return FieldMatrix(a.field, outer.transpose(0, 2, 1, 3).reshape(rows, cols))


def hstack(blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    for block in blocks[1:]:
        _same_field(blocks[0], block)
    return FieldMatrix(blocks[0].field, np.hstack([b.data for b in blocks]))


def vstack(blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    for block in blocks[1:]:
        _same_field(blocks[0], block)
    return FieldMatrix(blocks[0].field, np.vstack([b.data for b in blocks]))


def block_diag(blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    field = blocks[0].field
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    data = np.zeros((rows, cols), dtype=object)
    r = c = 0
    for block in blocks:
        _same_field(blocks[0], block)
        data[r:r + block.rows, c:c + block.cols] = block.data
        r += block.rows
        c += block.cols
    return FieldMatrix(field, data)


def _row_reduce(data: np.ndarray, q: int, ncols: int) -> tuple[np.ndarray, list[int]]:
    """Gauss-Jordan over the first ncols columns; first nonzero row is the pivot."""
    m = np.array(data, dtype=object)
    total_rows = m.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == total_rows:
            break
        candidates = np.flatnonzero(m[r:, c] != 0)
        if candidates.size == 0:
            continue
        p = r + int(candidates[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, q)) % q
        factors = m[:, c].copy()
        factors[r] = 0
        m = (m - np.multiply.outer(factors, m[r])) % q
        pivots.append(c)
        r += 1
    return m, pivots


def rank(matrix: FieldMatrix) -> int:
    if matrix.rows == 0 or matrix.cols == 0:
        return 0
    _, pivots = _row_reduce(matrix.data, matrix.field.q, matrix.cols)
    return len(pivots)


def solve_left(g_b: FieldMatrix, values: Sequence[int]) -> tuple[int, ...] | None:
    """
    Solve f * G_B = g_B for the k-vector f.

    Returns None when rank(G_B) < k or when the system is inconsistent.

    Raises:
        PreconditionError: If len(values) != G_B.cols
    """
    if len(values) != g_b.cols:
        raise PreconditionError(
            f"Right-hand side has {len(values)} symbols, matrix has {g_b.cols} columns")
    k, q = g_b.rows, g_b.field.q
    if g_b.cols < k:
        return None
    if k == 0:
        return ()
    augmented = np.empty((g_b.cols, k + 1), dtype=object)
    augmented[:, :k] = g_b.data.T
    augmented[:, k] = [int(v) % q for v in values]
    reduced, pivots = _row_reduce(augmented, q, k)
    if len(pivots) < k:
        logger.debug("solve_left: rank %d < %d", len(pivots), k)
        return None
    if np.any(reduced[k:, k] != 0):
        logger.debug("solve_left: inconsistent system")
        return None
    return tuple(int(x) for x in reduced[:k, k])
