"""
Access trees, access structures and Byzantine quorum-system machinery.

Node sets are bitmasks over a dense universe: bit ``index - 1`` stands for the
node with that index. Public operations accept either masks or iterables of
``NodeId``/names and convert through the universe.
"""
from __future__ import annotations

import itertools
import logging
import random
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Union

import networkx as nx

from mec import config
from mec.errors import CapacityError, PreconditionError, TreeSyntaxError

logger = logging.getLogger(__name__)

IDENTIFIER = re.compile(r'[A-Za-z_][A-Za-z0-9_]*\Z')
_TOKEN = re.compile(r'\(|\)|[^\s()]+')


@dataclass(frozen=True, order=True)
class NodeId:
    """A node of the universe; ordered and compared by index only."""

    index: int
    name: str = field(compare=False)

    @property
    def bit(self) -> int:
        return 1 << (self.index - 1)

    def __str__(self):
        return self.name


class Universe:
    """Dense ordered node registry: indices run 1..n in registration order."""

    def __init__(self, names: Iterable[str]):
        self._nodes: tuple[NodeId, ...] = ()
        self._by_name: dict[str, NodeId] = {}
        nodes = []
        for name in names:
            if name in self._by_name:
                raise PreconditionError(f"Duplicate node name '{name}'")
            node = NodeId(len(nodes) + 1, name)
            nodes.append(node)
            self._by_name[name] = node
        self._nodes = tuple(nodes)

    def __len__(self):
        return len(self._nodes)

    def __iter__(self) -> Iterator[NodeId]:
        return iter(self._nodes)

    def __eq__(self, other):
        return isinstance(other, Universe) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Universe({list(self.names)})"

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return self._nodes

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(node.name for node in self._nodes)

    @property
    def full_mask(self) -> int:
        return (1 << len(self._nodes)) - 1

    def node(self, ref: NodeId | str | int) -> NodeId:
        """Resolve a name, a 1-based index or a NodeId to this universe's NodeId."""
        if isinstance(ref, NodeId):
            ref = ref.name
        if isinstance(ref, int):
            if not 1 <= ref <= len(self._nodes):
                raise PreconditionError(f"Node index {ref} outside 1..{len(self._nodes)}")
            return self._nodes[ref - 1]
        try:
            return self._by_name[ref]
        except KeyError:
            raise PreconditionError(f"Unknown node '{ref}'") from None

    def mask(self, nodes: NodeSet) -> int:
        if isinstance(nodes, int):
            if nodes & ~self.full_mask:
                raise PreconditionError(f"Mask {nodes:#x} has bits outside the universe")
            return nodes
        result = 0
        for ref in nodes:
            result |= self.node(ref).bit
        return result

    def nodes_of(self, mask: int) -> tuple[NodeId, ...]:
        return tuple(node for node in self._nodes if mask & node.bit)

    def names_of(self, mask: int) -> list[str]:
        return [node.name for node in self.nodes_of(mask)]


NodeSet = Union[int, Iterable[Union[NodeId, str]]]


@dataclass(frozen=True)
class Leaf:
    node: NodeId


@dataclass(frozen=True)
class Internal:
    """Threshold vertex: true iff at least ``threshold`` children are true."""

    threshold: int
    children: tuple[Vertex, ...]

    def __post_init__(self):
        if not self.children:
            raise PreconditionError("Threshold vertex needs at least one child")
        if not 1 <= self.threshold <= len(self.children):
            raise PreconditionError(
                f"Threshold {self.threshold} outside [1, {len(self.children)}] "
                f"for vertex {_vertex_text(self)}")

    @property
    def fan_out(self) -> int:
        return len(self.children)


Vertex = Union[Leaf, Internal]


@dataclass(frozen=True)
class AccessTree:
    root: Vertex
    universe: Universe

    def __str__(self):
        return tree_to_text(self)


@dataclass(frozen=True)
class AccessStructure:
    """Antichain of nonempty access sets, kept in a fixed enumeration order."""

    universe: Universe
    masks: tuple[int, ...]

    def __post_init__(self):
        if not self.masks:
            raise PreconditionError("Access structure must contain at least one set")
        for mask in self.masks:
            if mask == 0:
                raise PreconditionError("Access sets must be nonempty")
            if mask & ~self.universe.full_mask:
                raise PreconditionError("Access set outside the universe")
        if not is_antichain(self.masks):
            raise PreconditionError("Access sets must form an antichain")

    @classmethod
    def from_sets(cls, universe: Universe,
                  sets: Iterable[Iterable[NodeId | str]]) -> AccessStructure:
        return cls(universe, tuple(universe.mask(s) for s in sets))

    def __len__(self):
        return len(self.masks)

    def __iter__(self) -> Iterator[frozenset[NodeId]]:
        for mask in self.masks:
            yield frozenset(self.universe.nodes_of(mask))

    @property
    def min_size(self) -> int:
        """Size of the smallest access set."""
        return min(mask.bit_count() for mask in self.masks)

    def names(self) -> list[list[str]]:
        return [self.universe.names_of(mask) for mask in self.masks]


@dataclass(frozen=True)
class QuorumContext:
    universe: Universe
    quorums: tuple[int, ...]
    fail_prone: tuple[int, ...]
    kernels: tuple[int, ...] = ()
    reliable: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return len(self.universe)

    def contains_quorum(self, mask: int) -> bool:
        return _contains_member(mask, self.quorums)

    def contains_kernel(self, mask: int) -> bool:
        return _contains_member(mask, self.kernels)

    def contains_reliable(self, mask: int) -> bool:
        return _contains_member(mask, self.reliable)

    def kernel_structure(self) -> AccessStructure:
        return AccessStructure(self.universe, self.kernels)

    def describe(self) -> dict:
        names = self.universe.names_of
        return {
            'universe': list(self.universe.names),
            'quorums': [names(m) for m in self.quorums],
            'fail_prone': [names(m) for m in self.fail_prone],
            'kernels': [names(m) for m in self.kernels],
            'reliable': [names(m) for m in self.reliable],
        }


# ---------------------------------------------------------------------------
# Set-system helpers

def _contains_member(mask: int, members: Iterable[int]) -> bool:
    return any(member & mask == member for member in members)


def set_order(mask: int) -> tuple[int, tuple[int, ...]]:
    """Sort key: size first, then the ascending index sequence."""
    return mask.bit_count(), tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def is_antichain(masks: Iterable[int]) -> bool:
    masks = list(masks)
    for i, a in enumerate(masks):
        for j, b in enumerate(masks):
            if i != j and a & b == a:
                return False
    return True


def minimal_sets(masks: Iterable[int]) -> tuple[int, ...]:
    """Inclusion-minimal members, in ``set_order``."""
    kept: list[int] = []
    for mask in sorted(set(masks), key=set_order):
        if not _contains_member(mask, kept):
            kept.append(mask)
    return tuple(kept)


def maximal_sets(masks: Iterable[int]) -> tuple[int, ...]:
    kept: list[int] = []
    for mask in sorted(set(masks), key=set_order, reverse=True):
        if not any(mask & other == mask for other in kept):
            kept.append(mask)
    return tuple(sorted(kept, key=set_order))


def _check_universe_size(universe: Universe, what: str) -> None:
    cap = config.max_universe()
    if len(universe) > cap:
        raise CapacityError(
            f"{what} enumerates subsets of {len(universe)} nodes; cap is {cap}")


# ---------------------------------------------------------------------------
# Access-tree text format

def parse_tree(text: str, universe: Universe | None = None) -> AccessTree:
    """
    Parse the s-expression access-tree format.

    Args:
        text: e.g. "(2 (3 p1 p2 p4) (2 p3 p4 p5) (1 p6 p7 p8))"
        universe: Optional fixed universe; by default leaf names are
                  registered in first-appearance order

    Returns:
        AccessTree

    Raises:
        TreeSyntaxError: On malformed text or unknown leaf names
        PreconditionError: If a threshold is outside [1, child count]
    """
    tokens = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
    if not tokens:
        raise TreeSyntaxError("Empty access-tree text")
    order: list[str] = []
    position = 0

    def parse() -> tuple:
        nonlocal position
        if position >= len(tokens):
            raise TreeSyntaxError("Unexpected end of input")
        token, offset = tokens[position]
        position += 1
        if token == ')':
            raise TreeSyntaxError(f"Column {offset + 1}: unexpected ')'")
        if token != '(':
            if not IDENTIFIER.match(token):
                raise TreeSyntaxError(f"Column {offset + 1}: invalid leaf name '{token}'")
            if token not in order:
                order.append(token)
            return ('leaf', token)
        if position >= len(tokens):
            raise TreeSyntaxError(f"Column {offset + 1}: '(' without threshold")
        threshold_token, threshold_offset = tokens[position]
        position += 1
        if not threshold_token.isdigit():
            raise TreeSyntaxError(
                f"Column {threshold_offset + 1}: expected integer threshold, got '{threshold_token}'")
        children = []
        while True:
            if position >= len(tokens):
                raise TreeSyntaxError(f"Column {offset + 1}: unclosed '('")
            if tokens[position][0] == ')':
                position += 1
                break
            children.append(parse())
        if not children:
            raise TreeSyntaxError(f"Column {offset + 1}: threshold vertex without children")
        return ('gate', int(threshold_token), children)

    raw = parse()
    if position != len(tokens):
        raise TreeSyntaxError(f"Column {tokens[position][1] + 1}: trailing input")

    if universe is None:
        universe = Universe(order)
    else:
        for name in order:
            if name not in universe.names:
                raise TreeSyntaxError(f"Leaf '{name}' is not in the universe")

    def build(node: tuple) -> Vertex:
        if node[0] == 'leaf':
            return Leaf(universe.node(node[1]))
        return Internal(node[1], tuple(build(child) for child in node[2]))

    return AccessTree(build(raw), universe)


def _vertex_text(vertex: Vertex) -> str:
    if isinstance(vertex, Leaf):
        return vertex.node.name
    return f"({vertex.threshold} {' '.join(_vertex_text(c) for c in vertex.children)})"


def vertex_text(vertex: Vertex) -> str:
    return _vertex_text(vertex)


def tree_to_text(tree: AccessTree) -> str:
    return _vertex_text(tree.root)


# ---------------------------------------------------------------------------
# Tree queries

def iter_vertices(vertex: Vertex) -> Iterator[Vertex]:
    """Depth-first, parents before children, children in order."""
    yield vertex
    if isinstance(vertex, Internal):
        for child in vertex.children:
            yield from iter_vertices(child)


def leaves(tree: AccessTree) -> list[Leaf]:
    return [v for v in iter_vertices(tree.root) if isinstance(v, Leaf)]


def internal_vertices(tree: AccessTree) -> list[Internal]:
    return [v for v in iter_vertices(tree.root) if isinstance(v, Internal)]


def height(vertex: Vertex) -> int:
    if isinstance(vertex, Leaf):
        return 0
    return 1 + max(height(child) for child in vertex.children)


def evaluate(tree: AccessTree, nodes: NodeSet) -> bool:
    """Evaluate the monotone Boolean formula on the node set."""
    return _evaluate(tree.root, tree.universe.mask(nodes))


def _evaluate(vertex: Vertex, mask: int) -> bool:
    if isinstance(vertex, Leaf):
        return bool(mask & vertex.node.bit)
    satisfied = 0
    for child in vertex.children:
        if _evaluate(child, mask):
            satisfied += 1
            if satisfied >= vertex.threshold:
                return True
    return False


def _minimal_masks(vertex: Vertex) -> tuple[int, ...]:
    if isinstance(vertex, Leaf):
        return (vertex.node.bit,)
    child_sets = [_minimal_masks(child) for child in vertex.children]
    if vertex.threshold == 1:
        return minimal_sets(itertools.chain.from_iterable(child_sets))
    candidates = set()
    for group in itertools.combinations(child_sets, vertex.threshold):
        for choice in itertools.product(*group):
            union = 0
            for mask in choice:
                union |= mask
            candidates.add(union)
    return minimal_sets(candidates)


def enumerate_minimal(tree: AccessTree) -> AccessStructure:
    """
    Return exactly the inclusion-minimal node sets satisfying the tree.

    Sets are ordered by size, then by their ascending index sequence.

    Raises:
        CapacityError: If the universe exceeds MEC_MAX_UNIVERSE nodes
    """
    _check_universe_size(tree.universe, "enumerate_minimal")
    return AccessStructure(tree.universe, _minimal_masks(tree.root))


def duplicated_leaves(tree: AccessTree) -> list[NodeId]:
    seen: dict[NodeId, int] = {}
    for leaf in leaves(tree):
        seen[leaf.node] = seen.get(leaf.node, 0) + 1
    return sorted(node for node, count in seen.items() if count > 1)


def is_partitioned(tree: AccessTree) -> bool:
    return not duplicated_leaves(tree)


def balance(tree: AccessTree) -> AccessTree:
    """Pad shallow leaves with unary threshold-1 vertices so all leaves share one depth."""
    total = height(tree.root)

    def pad(vertex: Vertex, remaining: int) -> Vertex:
        if isinstance(vertex, Leaf):
            for _ in range(remaining):
                vertex = Internal(1, (vertex,))
            return vertex
        return Internal(vertex.threshold,
                        tuple(pad(child, remaining - 1) for child in vertex.children))

    return AccessTree(pad(tree.root, total), tree.universe)


def expand_thresholds(tree: AccessTree, cap: int | None = None) -> AccessTree:
    """
    Rewrite every 1 < t < r vertex as an OR over the C(r, t) AND groups.

    Raises:
        CapacityError: If a rewritten vertex has more than ``cap`` children
    """
    cap = config.max_threshold_expansion() if cap is None else cap

    def expand(vertex: Vertex) -> Vertex:
        if isinstance(vertex, Leaf):
            return vertex
        children = tuple(expand(child) for child in vertex.children)
        t, r = vertex.threshold, len(children)
        if t == 1 or t == r:
            return Internal(t, children)
        if r > cap:
            raise CapacityError(
                f"Vertex {_vertex_text(vertex)} has {r} children; threshold expansion cap is {cap}")
        return Internal(1, tuple(Internal(t, group)
                                 for group in itertools.combinations(children, t)))

    return AccessTree(expand(tree.root), tree.universe)


def random_tree(rng: random.Random, nodes: int | None = None,
                depth: int | None = None, partitioned: bool = True) -> AccessTree:
    """
    Generate a random access tree over nodes p1..pn.

    Args:
        rng: Seeded random source
        nodes: Node count; drawn from MEC_RANDOM_NODES_MIN..MAX if None
        depth: Maximum number of threshold levels; MEC_RANDOM_DEPTH_MAX if None
        partitioned: If False, a few nodes are reused in other subtrees

    Returns:
        AccessTree whose universe is p1..pn in index order
    """
    nodes_min, nodes_max, depth_max = config.random_tree_ranges()
    if nodes is None:
        nodes = rng.randint(nodes_min, nodes_max)
    if depth is None:
        depth = depth_max
    universe = Universe(f"p{i}" for i in range(1, nodes + 1))

    def grow(group: list[NodeId], levels: int) -> Vertex:
        if len(group) == 1:
            return Leaf(group[0])
        if levels <= 1:
            children: list[Vertex] = [Leaf(node) for node in group]
        else:
            parts = rng.randint(2, min(len(group), 4))
            cuts = sorted(rng.sample(range(1, len(group)), parts - 1))
            bounds = [0, *cuts, len(group)]
            children = [grow(group[a:b], levels - 1) for a, b in zip(bounds, bounds[1:])]
        if not partitioned and len(universe) > 2 and rng.random() < 0.4:
            children.append(Leaf(rng.choice(universe.nodes)))
        return Internal(rng.randint(1, len(children)), tuple(children))

    root = grow(list(universe.nodes), max(depth, 1))
    if isinstance(root, Leaf) and not partitioned:
        root = Internal(1, (root,))
    return AccessTree(root, universe)


def tree_to_graph(tree: AccessTree) -> nx.DiGraph:
    """
    Convert the tree to a rooted networkx graph.

    Vertices are numbered in depth-first order; attributes: ``label``
    (leaf name or "t/r"), ``kind`` ("leaf" or "gate") and ``depth``.
    """
    graph = nx.DiGraph()
    counter = itertools.count()

    def add(vertex: Vertex, depth: int) -> int:
        vid = next(counter)
        if isinstance(vertex, Leaf):
            graph.add_node(vid, label=vertex.node.name, kind='leaf', depth=depth)
            return vid
        graph.add_node(vid, label=f"{vertex.threshold}/{vertex.fan_out}",
                       kind='gate', depth=depth)
        for child in vertex.children:
            graph.add_edge(vid, add(child, depth + 1))
        return vid

    add(tree.root, 0)
    return graph


# ---------------------------------------------------------------------------
# Quorum systems

def canonical_fail_prone(universe: Universe, quorums: Iterable[int]) -> tuple[int, ...]:
    """Maximal sets among the complements of the quorums."""
    full = universe.full_mask
    return maximal_sets(full & ~q for q in quorums)


def check_quorum_system(ctx: QuorumContext) -> tuple[bool, list[str]]:
    """Verify consistency and availability by enumeration."""
    names = ctx.universe.names_of
    violations = []
    for f in ctx.fail_prone:
        for i, q1 in enumerate(ctx.quorums):
            for q2 in ctx.quorums[i:]:
                if (q1 & q2) & ~f == 0:
                    violations.append(
                        f"consistency: {names(q1)} and {names(q2)} intersect inside fail-prone {names(f)}")
        if not any(f & q == 0 for q in ctx.quorums):
            violations.append(f"availability: no quorum is disjoint from fail-prone {names(f)}")
    return not violations, violations


def _subsets_by_size(n: int) -> Iterator[int]:
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            mask = 0
            for i in combo:
                mask |= 1 << i
            yield mask


def kernels(universe: Universe, quorums: Iterable[int]) -> tuple[int, ...]:
    """
    All minimal transversals of the quorum system.

    Raises:
        CapacityError: If the universe exceeds MEC_MAX_UNIVERSE nodes
    """
    _check_universe_size(universe, "kernels")
    quorums = tuple(quorums)
    found: list[int] = []
    for mask in _subsets_by_size(len(universe)):
        if _contains_member(mask, found):
            continue
        if all(mask & q for q in quorums):
            found.append(mask)
    return tuple(found)


def reliable_sets(ctx: QuorumContext) -> tuple[int, ...]:
    """
    All minimal R such that every fail-prone F leaves a kernel inside R \\ F.

    Raises:
        CapacityError: If the universe exceeds MEC_MAX_UNIVERSE nodes
    """
    _check_universe_size(ctx.universe, "reliable_sets")
    found: list[int] = []
    for mask in _subsets_by_size(ctx.n):
        if _contains_member(mask, found):
            continue
        if all(_contains_member(mask & ~f, ctx.kernels) for f in ctx.fail_prone):
            found.append(mask)
    return tuple(found)


def _complete_context(universe: Universe, quorums: tuple[int, ...],
                      fail_prone: tuple[int, ...]) -> QuorumContext:
    ctx = QuorumContext(universe, quorums, fail_prone, kernels(universe, quorums))
    ctx = replace(ctx, reliable=reliable_sets(ctx))
    logger.info("Quorum context over %d nodes: %d quorums, %d kernels, %d reliable sets",
                len(universe), len(ctx.quorums), len(ctx.kernels), len(ctx.reliable))
    return ctx


def quorum_context(universe: Universe, quorums: Iterable[NodeSet]) -> QuorumContext:
    """Build a context from explicit quorums; ℱ is their canonical fail-prone system."""
    masks = tuple(universe.mask(q) for q in quorums)
    if not masks:
        raise PreconditionError("Quorum system must contain at least one quorum")
    if not is_antichain(masks):
        raise PreconditionError("Quorums must form an antichain")
    masks = tuple(sorted(masks, key=set_order))
    return _complete_context(universe, masks, canonical_fail_prone(universe, masks))


def threshold_quorum_context(n: int, f: int) -> QuorumContext:
    """
    The n-node, f-fault threshold system over p1..pn.

    Raises:
        PreconditionError: If n < 3f + 1
    """
    if f < 0 or n < 3 * f + 1:
        raise PreconditionError(f"Threshold system needs n >= 3f+1, got n={n}, f={f}")
    universe = Universe(f"p{i}" for i in range(1, n + 1))
    _check_universe_size(universe, "threshold_quorum_context")
    size = (n + f + 2) // 2
    everyone = range(n)
    quorums = tuple(sum(1 << i for i in combo) for combo in itertools.combinations(everyone, size))
    fail_prone = tuple(sum(1 << i for i in combo) for combo in itertools.combinations(everyone, f))
    return _complete_context(universe, quorums, fail_prone)


def load_quorum_context(obj: dict) -> QuorumContext:
    """
    Parse the quorum-context JSON object.

    Accepts ``{"universe": [...], "quorums": [[...]]}`` or
    ``{"threshold": {"n": N, "f": F}}``.
    """
    if 'threshold' in obj:
        spec = obj['threshold']
        try:
            return threshold_quorum_context(int(spec['n']), int(spec['f']))
        except (KeyError, TypeError) as e:
            raise PreconditionError(f"Malformed threshold quorum spec: {e}") from None
    if 'universe' not in obj or 'quorums' not in obj:
        raise PreconditionError("Quorum file needs 'universe' and 'quorums', or 'threshold'")
    universe = Universe(obj['universe'])
    return quorum_context(universe, obj['quorums'])
