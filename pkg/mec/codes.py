"""
Linear monotone erasure codes: generator matrix plus a column-to-node labeling.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from mec import config
from mec.access import AccessStructure, NodeId, NodeSet, Universe
from mec.errors import CapacityError, InvariantBreach, PreconditionError
from mec.field import FieldMatrix, FieldSpec, rank, solve_left, vandermonde

logger = logging.getLogger(__name__)

Fragment = tuple[int, ...]


@dataclass(frozen=True)
class LinearCode:
    """
    A k x m full-rank generator over F_q whose columns are assigned to nodes.

    ``labeling[j]`` is the node owning column j (0-based column index).
    """

    generator: FieldMatrix
    labeling: tuple[NodeId, ...]
    universe: Universe

    def __post_init__(self):
        if len(self.labeling) != self.generator.cols:
            raise PreconditionError(
                f"Labeling covers {len(self.labeling)} columns, generator has {self.generator.cols}")
        for node in self.labeling:
            if self.universe.node(node.index) != node:
                raise PreconditionError(f"Column label {node} is not in the universe")
        if rank(self.generator) != self.generator.rows:
            raise InvariantBreach(
                f"Generator of shape {self.generator.shape} is not full rank")
        columns: dict[int, list[int]] = {node.index: [] for node in self.universe}
        for j, node in enumerate(self.labeling):
            columns[node.index].append(j)
        object.__setattr__(self, '_columns', {i: tuple(c) for i, c in columns.items()})

    @property
    def field(self) -> FieldSpec:
        return self.generator.field

    @property
    def q(self) -> int:
        return self.generator.field.q

    @property
    def k(self) -> int:
        return self.generator.rows

    @property
    def m(self) -> int:
        return self.generator.cols

    @property
    def n(self) -> int:
        return len(self.universe)

    def columns_of(self, node: NodeId | str | int) -> tuple[int, ...]:
        """Ascending global column indices owned by the node."""
        return self._columns[self.universe.node(node).index]  # type: ignore[attr-defined]

    def fragment_length(self, node: NodeId | str | int) -> int:
        return len(self.columns_of(node))

    def columns_per_node(self) -> dict[str, int]:
        return {node.name: len(self.columns_of(node)) for node in self.universe}

    def columns_of_set(self, mask: int) -> list[int]:
        cols: list[int] = []
        for node in self.universe.nodes_of(mask):
            cols.extend(self.columns_of(node))
        return sorted(cols)


class FragmentVector:
    """Per-node fragments; ``None`` is the absent marker."""

    __slots__ = ('universe', '_entries')

    def __init__(self, universe: Universe, entries: Sequence[Fragment | None]):
        if len(entries) != len(universe):
            raise PreconditionError(
                f"Fragment vector has {len(entries)} entries for {len(universe)} nodes")
        self.universe = universe
        self._entries = tuple(None if e is None else tuple(int(x) for x in e) for e in entries)

    def __getitem__(self, node: NodeId | str | int) -> Fragment | None:
        return self._entries[self.universe.node(node).index - 1]

    def __iter__(self) -> Iterator[Fragment | None]:
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        return (isinstance(other, FragmentVector) and self.universe == other.universe
                and self._entries == other._entries)

    __hash__ = None  # type: ignore

    def __repr__(self):
        shown = {n.name: e for n, e in zip(self.universe, self._entries)}
        return f"FragmentVector({shown})"

    @property
    def entries(self) -> tuple[Fragment | None, ...]:
        return self._entries

    def present_mask(self) -> int:
        return sum(node.bit for node, e in zip(self.universe, self._entries) if e is not None)

    def restrict(self, nodes: NodeSet) -> FragmentVector:
        """Keep the entries of the given nodes, absent elsewhere."""
        mask = self.universe.mask(nodes)
        return FragmentVector(self.universe, [
            e if mask & node.bit else None for node, e in zip(self.universe, self._entries)])


def encode(code: LinearCode, f: Sequence[int]) -> FragmentVector:
    """
    Compute every node's fragment f * G_{p_i}.

    Raises:
        PreconditionError: If len(f) != k
    """
    if len(f) != code.k:
        raise PreconditionError(f"File vector has {len(f)} symbols, code dimension is {code.k}")
    codeword = code.generator.left_multiply(f)
    entries: list[Fragment | None] = []
    for node in code.universe:
        cols = code.columns_of(node)
        entries.append(tuple(codeword[j] for j in cols) if cols else None)
    return FragmentVector(code.universe, entries)


def decode(code: LinearCode, fragments: FragmentVector) -> tuple[int, ...] | None:
    """
    Reconstruct f from the present fragments, or None if they cannot determine it.

    Raises:
        PreconditionError: If a present fragment's length differs from m_i
    """
    cols: list[int] = []
    values: list[int] = []
    for node, entry in zip(code.universe, fragments):
        if entry is None:
            continue
        owned = code.columns_of(node)
        if len(entry) != len(owned):
            raise PreconditionError(
                f"Fragment of {node} has {len(entry)} symbols, expected {len(owned)}")
        cols.extend(owned)
        values.extend(entry)
    return solve_left(code.generator.select_columns(cols), values)


def is_sufficient(code: LinearCode, nodes: NodeSet) -> bool:
    mask = code.universe.mask(nodes)
    return rank(code.generator.select_columns(code.columns_of_set(mask))) == code.k


def is_complete(code: LinearCode, structure: AccessStructure) -> bool:
    if structure.universe != code.universe:
        raise PreconditionError("Access structure and code use different universes")
    for mask in structure.masks:
        if not is_sufficient(code, mask):
            logger.debug("Access set %s is insufficient", code.universe.names_of(mask))
            return False
    return True


def overhead(code: LinearCode) -> Fraction:
    return Fraction(code.m - code.k, code.k)


def block_labeling(universe: Universe, counts: Sequence[int]) -> tuple[NodeId, ...]:
    """Consecutive column blocks: counts[i] columns for the node with index i+1."""
    if len(counts) != len(universe):
        raise PreconditionError(f"{len(counts)} block sizes for {len(universe)} nodes")
    labeling: list[NodeId] = []
    for node, count in zip(universe, counts):
        labeling.extend([node] * count)
    return tuple(labeling)


def mds_code(k: int, m: int, field: FieldSpec,
             labeling: Sequence[NodeId] | None = None,
             universe: Universe | None = None) -> LinearCode:
    """
    The [m, k] Vandermonde code.

    Without a labeling every column goes to its own virtual node V1..Vm.

    Raises:
        PreconditionError: If not k <= m <= q
    """
    if not 1 <= k <= m:
        raise PreconditionError(f"MDS code needs 1 <= k <= m, got k={k}, m={m}")
    if m > config.max_columns():
        raise CapacityError(f"Code length {m} exceeds the column cap {config.max_columns()}")
    if m > field.q:
        raise PreconditionError(f"MDS code of length {m} needs q >= m, got q={field.q}")
    if labeling is None:
        universe = Universe(f"V{j}" for j in range(1, m + 1))
        labeling = universe.nodes
    elif universe is None:
        raise PreconditionError("A custom labeling needs its universe")
    return LinearCode(vandermonde(k, m, field), tuple(labeling), universe)


def check_mds(code: LinearCode) -> bool:
    """
    True iff every k-subset of generator columns has rank k.

    Raises:
        CapacityError: If m exceeds MEC_MAX_MDS_CHECK
    """
    cap = config.max_mds_check()
    if code.m > cap:
        raise CapacityError(f"check_mds enumerates column subsets; m={code.m} exceeds cap {cap}")
    return all(rank(code.generator.select_columns(cols)) == code.k
               for cols in itertools.combinations(range(code.m), code.k))
