"""
Test suite for the coding library: fields, access structures, codes, the
basic chunking construction and the exact LP solver.

Run with:
    pytest mec/tests.py
"""
import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mec.access import (AccessStructure, Internal, Leaf, Universe, balance, canonical_fail_prone,
                        check_quorum_system, duplicated_leaves, enumerate_minimal, evaluate,
                        expand_thresholds, is_partitioned, kernels, load_quorum_context,
                        parse_tree, quorum_context, random_tree, reliable_sets,
                        threshold_quorum_context, tree_to_graph, tree_to_text)
from mec.basic import basic_decode, basic_encode, basic_pad, basic_unit
from mec.codes import (FragmentVector, LinearCode, block_labeling, check_mds, decode, encode,
                       is_complete, is_sufficient, mds_code, overhead)
from mec.errors import CapacityError, FieldMismatchError, PreconditionError, TreeSyntaxError
from mec.field import (FieldMatrix, FieldSpec, block_diag, identity, kronecker, rank,
                       smallest_prime_at_least, solve_left, vandermonde)
from mec.ratlp import (LpProblem, derive_parameters, gamma_from_structure, lcm_of_denominators,
                       solve_lpp)

# Named trees used across the suites
EXAMPLE_1 = "(1 (2 (1 a b) (3 c d e)) (2 (2 a b) (1 c d e)))"
WORKED_EXAMPLE = "(2 (3 p1 p2 p4) (2 p3 p4 p5) (1 p6 p7 p8))"
EXAMPLE_2 = "(2 a b (1 c d e))"
EXAMPLE_3 = "(2 (3 p1 p2 p3) (2 p4 p5 p6) (1 p7 p8 p9))"

EXAMPLE_1_FILE = (0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1)


def lp_example_structure() -> AccessStructure:
    """The five access sets of EXAMPLE_1, in the order the LP example prints them."""
    universe = Universe("abcde")
    return AccessStructure.from_sets(universe, ["acde", "bcde", "abc", "abd", "abe"])


def matrix(q, rows):
    return FieldMatrix.from_rows(FieldSpec(q), rows)


def name_sets(structure):
    return {frozenset(names) for names in structure.names()}


def all_masks(n):
    return range(1 << n)


# ---------------------------------------------------------------------------
# field

@pytest.mark.parametrize("bound,expected", [(1, 2), (2, 2), (3, 3), (8, 11), (14, 17)])
def test_smallest_prime_at_least(bound, expected):
    assert smallest_prime_at_least(bound).q == expected


def test_field_rejects_composites_and_bad_bounds():
    with pytest.raises(PreconditionError):
        FieldSpec(4)
    with pytest.raises(PreconditionError):
        smallest_prime_at_least(0)
    with pytest.raises(CapacityError):
        FieldSpec(2 ** 64 - 59)


def test_vandermonde_examples():
    assert vandermonde(3, 3, FieldSpec(3)).to_lists() == [[1, 1, 1], [0, 1, 2], [0, 1, 1]]
    assert vandermonde(2, 3, FieldSpec(3)).to_lists() == [[1, 1, 1], [0, 1, 2]]
    assert vandermonde(1, 5, FieldSpec(7)).to_lists() == [[1, 1, 1, 1, 1]]
    with pytest.raises(PreconditionError):
        vandermonde(2, 4, FieldSpec(3))


def test_kronecker_examples():
    f3 = FieldSpec(3)
    m1 = vandermonde(3, 3, f3)
    assert kronecker(m1, identity(f3, 1)) == m1

    r1 = kronecker(m1, identity(f3, 2))
    assert r1.shape == (6, 6)
    for bi in range(3):
        for bj in range(3):
            block = [[r1[2 * bi + i, 2 * bj + j] for j in range(2)] for i in range(2)]
            value = m1[bi, bj]
            assert block == [[value, 0], [0, value]]

    assert kronecker(matrix(5, [[2]]), matrix(5, [[1, 3]])).to_lists() == [[2, 1]]
    with pytest.raises(FieldMismatchError):
        kronecker(matrix(5, [[1]]), matrix(7, [[1]]))


def test_rank_examples():
    assert rank(matrix(3, [[0, 0], [0, 0]])) == 0
    assert rank(matrix(3, [[1, 1, 1], [0, 1, 2]])) == 2


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_vandermonde_every_k_subset_has_full_rank(q):
    for m in range(1, min(q, 8) + 1):
        for k in range(1, m + 1):
            g = vandermonde(k, m, FieldSpec(q))
            for cols in itertools.combinations(range(m), k):
                assert rank(g.select_columns(cols)) == k


def test_solve_left_examples():
    f7 = FieldSpec(7)
    assert solve_left(identity(f7, 2), (4, 6)) == (4, 6)
    assert solve_left(matrix(7, [[1, 1], [0, 1]]), (1, 2)) == (1, 1)
    assert solve_left(matrix(7, [[1], [0]]), (5,)) is None
    with pytest.raises(PreconditionError):
        solve_left(identity(f7, 2), (1,))


def test_solve_left_rejects_inconsistent_system():
    # Columns (1,0), (0,1), (1,1) force the third symbol to be the sum of the first two.
    g = matrix(7, [[1, 0, 1], [0, 1, 1]])
    assert solve_left(g, (2, 3, 5)) == (2, 3)
    assert solve_left(g, (2, 3, 6)) is None


@settings(derandomize=True, max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7, 11]), st.integers(1, 4), st.integers(0, 4), st.data())
def test_solve_left_round_trip(q, k, extra, data):
    m = min(k + extra, q)
    if m < k:
        return
    g = vandermonde(k, m, FieldSpec(q))
    f = tuple(data.draw(st.lists(st.integers(0, q - 1), min_size=k, max_size=k)))
    assert solve_left(g, g.left_multiply(f)) == f


def _random_matrix(rng, q, rows, cols):
    return matrix(q, [[rng.randrange(q) for _ in range(cols)] for _ in range(rows)])


def _random_invertible(rng, q, n):
    while True:
        candidate = _random_matrix(rng, q, n, n)
        if rank(candidate) == n:
            return candidate


def test_rank_of_kronecker_with_identity_scales():
    rng = random.Random(7)
    for _ in range(25):
        q = rng.choice([2, 3, 5, 7])
        a = _random_matrix(rng, q, rng.randint(1, 3), rng.randint(1, 4))
        s = rng.randint(1, 3)
        assert rank(kronecker(a, identity(FieldSpec(q), s))) == s * rank(a)


def test_kronecker_mixed_product_stays_invertible():
    rng = random.Random(11)
    for _ in range(15):
        q = rng.choice([3, 5, 7])
        t, s = rng.randint(1, 3), rng.randint(1, 3)
        a = _random_invertible(rng, q, t)
        blocks = [_random_invertible(rng, q, s) for _ in range(t)]
        product = kronecker(a, identity(FieldSpec(q), s)) @ block_diag(blocks)
        assert rank(product) == t * s


# ---------------------------------------------------------------------------
# access trees

def test_parse_tree_examples():
    tree = parse_tree(WORKED_EXAMPLE)
    assert tree.universe.names == ("p1", "p2", "p4", "p3", "p5", "p6", "p7", "p8")
    assert isinstance(tree.root, Internal) and tree.root.threshold == 2
    assert [c.threshold for c in tree.root.children] == [3, 2, 1]

    single = parse_tree("p1")
    assert isinstance(single.root, Leaf) and single.root.node.name == "p1"

    with pytest.raises(PreconditionError):
        parse_tree("(4 p1 p2 p3)")


@pytest.mark.parametrize("text", ["", "(2 a", "a b", "(x a b)", ")", "(1)", "(1 a 1b)"])
def test_parse_tree_syntax_errors(text):
    with pytest.raises(TreeSyntaxError):
        parse_tree(text)


def test_tree_text_round_trip():
    for text in [EXAMPLE_1, WORKED_EXAMPLE, EXAMPLE_2, EXAMPLE_3, "p1"]:
        tree = parse_tree(text)
        assert tree_to_text(tree) == text
        assert parse_tree(tree_to_text(tree)) == tree
    assert tree_to_text(parse_tree("  ( 1\n a   b )")) == "(1 a b)"


def test_evaluate_examples():
    tree = parse_tree(WORKED_EXAMPLE)
    assert evaluate(tree, ["p3", "p4", "p5", "p6"])
    assert evaluate(tree, tree.universe.nodes)
    assert not evaluate(tree, [])
    assert not evaluate(tree, ["p1", "p2", "p4"])


def test_enumerate_minimal_examples():
    assert name_sets(enumerate_minimal(parse_tree(EXAMPLE_1))) == {
        frozenset("acde"), frozenset("bcde"), frozenset("abc"), frozenset("abd"), frozenset("abe")}
    assert name_sets(enumerate_minimal(parse_tree("(1 p1 p2)"))) == {
        frozenset({"p1"}), frozenset({"p2"})}
    assert name_sets(enumerate_minimal(parse_tree("(2 p1 p2)"))) == {frozenset({"p1", "p2"})}


def test_worked_example_has_fourteen_minimal_sets():
    assert len(enumerate_minimal(parse_tree(WORKED_EXAMPLE))) == 14


def test_enumerate_minimal_capacity(monkeypatch):
    monkeypatch.setenv("MEC_MAX_UNIVERSE", "4")
    with pytest.raises(CapacityError):
        enumerate_minimal(parse_tree("(1 a b c d e)"))


def test_is_partitioned_examples():
    assert not is_partitioned(parse_tree(WORKED_EXAMPLE))
    assert [n.name for n in duplicated_leaves(parse_tree(WORKED_EXAMPLE))] == ["p4"]
    assert is_partitioned(parse_tree(EXAMPLE_3))
    assert is_partitioned(parse_tree("p1"))


def test_balance_examples():
    assert tree_to_text(balance(parse_tree(EXAMPLE_2))) == "(2 (1 a) (1 b) (1 c d e))"
    assert tree_to_text(balance(parse_tree(EXAMPLE_3))) == EXAMPLE_3
    assert tree_to_text(balance(parse_tree("p1"))) == "p1"


def test_random_tree_properties():
    rng = random.Random(2024)
    for _ in range(30):
        partitioned = rng.random() < 0.5
        tree = random_tree(rng, nodes=rng.randint(1, 9), depth=rng.randint(1, 4),
                           partitioned=partitioned)
        n = len(tree.universe)
        structure = enumerate_minimal(tree)
        for mask in structure.masks:
            assert evaluate(tree, mask)
            for node in tree.universe.nodes_of(mask):
                assert not evaluate(tree, mask & ~node.bit)
        balanced = balance(tree)
        for mask in all_masks(n):
            assert evaluate(balanced, mask) == evaluate(tree, mask)
        if partitioned:
            assert is_partitioned(tree)


def test_balance_preserves_evaluate_on_twelve_nodes():
    rng = random.Random(5)
    tree = random_tree(rng, nodes=12, depth=4)
    balanced = balance(tree)
    assert all(evaluate(balanced, mask) == evaluate(tree, mask) for mask in all_masks(12))


@settings(derandomize=True, max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 255), st.integers(0, 255))
def test_evaluate_is_monotone(seed, a, b):
    tree = random_tree(random.Random(seed), nodes=8, depth=3, partitioned=seed % 2 == 0)
    smaller, larger = a & b, a | b
    assert evaluate(tree, smaller) <= evaluate(tree, larger)


def test_expand_thresholds_keeps_semantics():
    tree = parse_tree("(2 a (3 b c d e) (1 f g))")
    expanded = expand_thresholds(tree)
    assert all(v.threshold in (1, v.fan_out) for v in _internal(expanded.root))
    assert all(evaluate(expanded, m) == evaluate(tree, m) for m in all_masks(7))
    with pytest.raises(CapacityError):
        expand_thresholds(parse_tree("(2 a b c d)"), cap=3)


def _internal(vertex):
    if isinstance(vertex, Internal):
        yield vertex
        for child in vertex.children:
            yield from _internal(child)


def test_tree_to_graph_shape():
    graph = tree_to_graph(parse_tree(EXAMPLE_1))
    assert graph.number_of_nodes() == 1 + 2 + 4 + 10
    assert graph.nodes[0]["label"] == "1/2"
    assert sorted(graph.nodes[v]["label"] for v in graph if graph.nodes[v]["kind"] == "leaf") == \
        sorted("ababcdecde")


# ---------------------------------------------------------------------------
# quorum systems

def _subsets(universe, size):
    return {frozenset(c) for c in itertools.combinations(universe.names, size)}


def _names(universe, masks):
    return {frozenset(universe.names_of(m)) for m in masks}


def test_canonical_fail_prone_examples():
    ctx = threshold_quorum_context(4, 1)
    assert _names(ctx.universe, canonical_fail_prone(ctx.universe, ctx.quorums)) == \
        _subsets(ctx.universe, 1)
    pair = Universe(["p1", "p2"])
    assert canonical_fail_prone(pair, [pair.full_mask]) == (0,)
    assert _names(pair, canonical_fail_prone(pair, [pair.mask(["p1"])])) == {frozenset({"p2"})}


def test_check_quorum_system_examples():
    ok, violations = check_quorum_system(threshold_quorum_context(4, 1))
    assert ok and not violations

    universe = Universe(["p1", "p2", "p3"])
    two = tuple(universe.mask(c) for c in itertools.combinations(universe.names, 2))
    one = tuple(universe.mask([n]) for n in universe.names)
    from mec.access import QuorumContext
    ok, violations = check_quorum_system(QuorumContext(universe, two, one))
    assert not ok
    assert any(v.startswith("consistency") for v in violations)

    ok, _ = check_quorum_system(QuorumContext(universe, (universe.full_mask,), (0,)))
    assert ok


def test_kernels_examples():
    ctx = threshold_quorum_context(4, 1)
    assert _names(ctx.universe, ctx.kernels) == _subsets(ctx.universe, 2)
    universe = Universe(["p1", "p2", "p3"])
    assert _names(universe, kernels(universe, [universe.mask(["p1", "p2"])])) == \
        {frozenset({"p1"}), frozenset({"p2"})}
    assert _names(universe, kernels(universe, [universe.full_mask])) == _subsets(universe, 1)


def test_reliable_sets_examples():
    ctx = threshold_quorum_context(4, 1)
    assert _names(ctx.universe, ctx.reliable) == _subsets(ctx.universe, 3)

    universe = Universe(["p1", "p2", "p3"])
    singletons = tuple(node.bit for node in universe)
    from mec.access import QuorumContext
    trivial = QuorumContext(universe, (universe.full_mask,), (0,), singletons)
    assert reliable_sets(trivial) == singletons


def test_reliable_sets_on_ten_nodes():
    ctx = threshold_quorum_context(10, 1)
    quorum_size = min(q.bit_count() for q in ctx.quorums)
    assert quorum_size == 6
    assert {r.bit_count() for r in ctx.reliable} == {6}

    universe = ctx.universe
    canonical = quorum_context(universe, [c for c in itertools.combinations(universe.names, 9)])
    assert {f.bit_count() for f in canonical.fail_prone} == {1}
    assert {r.bit_count() for r in canonical.reliable} == {3}
    assert max(r.bit_count() for r in canonical.reliable) < 9


@pytest.mark.parametrize("n,f,size", [(4, 1, 3), (7, 2, 5), (3, 0, 2)])
def test_threshold_quorum_context(n, f, size):
    ctx = threshold_quorum_context(n, f)
    assert {q.bit_count() for q in ctx.quorums} == {size}
    assert check_quorum_system(ctx)[0]
    if f == 0:
        assert ctx.fail_prone == (0,)


def test_threshold_quorum_context_rejects_small_n():
    with pytest.raises(PreconditionError):
        threshold_quorum_context(3, 1)


@pytest.mark.parametrize("n,f", [(4, 1), (5, 1), (7, 2)])
def test_quorums_contain_kernels_and_are_reliable(n, f):
    ctx = threshold_quorum_context(n, f)
    for q in ctx.quorums:
        assert ctx.contains_kernel(q)
        assert ctx.contains_reliable(q)


def test_load_quorum_context_forms():
    ctx = load_quorum_context({"threshold": {"n": 4, "f": 1}})
    assert len(ctx.quorums) == 4
    explicit = load_quorum_context({
        "universe": ["p1", "p2", "p3", "p4", "p5"],
        "quorums": [["p3", "p4", "p5"], ["p1", "p2", "p4", "p5"],
                    ["p1", "p2", "p3", "p5"], ["p1", "p2", "p3", "p4"]],
    })
    assert _names(explicit.universe, explicit.fail_prone) == {
        frozenset({"p1", "p2"}), frozenset({"p3"}), frozenset({"p4"}), frozenset({"p5"})}
    assert check_quorum_system(explicit)[0]
    assert len(explicit.kernels) == 9
    with pytest.raises(PreconditionError):
        load_quorum_context({"universe": ["a"]})


# ---------------------------------------------------------------------------
# codes

def mds_example() -> LinearCode:
    return mds_code(2, 3, FieldSpec(7))


def lp_example_code() -> LinearCode:
    universe = Universe("abcde")
    return mds_code(5, 7, FieldSpec(7), block_labeling(universe, [2, 2, 1, 1, 1]), universe)


def test_encode_examples():
    identity_code = LinearCode(identity(FieldSpec(5), 3), Universe(["x", "y", "z"]).nodes,
                               Universe(["x", "y", "z"]))
    assert encode(identity_code, (4, 0, 2)).entries == ((4,), (0,), (2,))

    assert encode(mds_example(), (1, 1)).entries == ((1,), (2,), (3,))

    fragments = encode(lp_example_code(), (1, 2, 3, 4, 5))
    assert len(fragments["a"]) == 2 and len(fragments["c"]) == 1
    with pytest.raises(PreconditionError):
        encode(mds_example(), (1,))


def test_encode_gives_absent_marker_to_empty_nodes():
    universe = Universe(["a", "b", "c"])
    code = mds_code(2, 3, FieldSpec(3), block_labeling(universe, [2, 0, 1]), universe)
    fragments = encode(code, (1, 2))
    assert fragments["b"] is None
    assert fragments["a"] is not None and len(fragments["a"]) == 2


def test_decode_examples():
    code = mds_example()
    f = (3, 5)
    assert decode(code, encode(code, f)) == f
    assert decode(code, FragmentVector(code.universe, [(1,), None, (3,)])) == (1, 1)
    assert decode(code, FragmentVector(code.universe, [(1,), None, None])) is None
    with pytest.raises(PreconditionError):
        decode(code, FragmentVector(code.universe, [(1, 2), None, None]))


def test_is_sufficient_examples():
    code = lp_example_code()
    assert is_sufficient(code, code.universe.nodes)
    assert not is_sufficient(code, [])
    assert is_sufficient(code, ["a", "b", "c"])
    assert not is_sufficient(code, ["a", "c", "d"])


def test_is_complete_examples():
    code = lp_example_code()
    assert is_complete(code, AccessStructure(code.universe, (code.universe.full_mask,)))
    assert is_complete(code, lp_example_structure())

    rows = code.generator.to_lists()
    zeroed = [[0, 0] + row[2:] for row in rows]
    broken = LinearCode(FieldMatrix.from_rows(code.field, zeroed), code.labeling, code.universe)
    assert not is_complete(broken, lp_example_structure())


def test_overhead_examples():
    assert overhead(mds_code(3, 3, FieldSpec(3))) == 0
    assert overhead(lp_example_code()) == Fraction(2, 5)
    assert overhead(mds_code(4, 4 + 3, FieldSpec(7))) == Fraction(3, 4)


@pytest.mark.parametrize("k,n", [(1, 4), (2, 5), (3, 7), (4, 4)])
def test_mds_overhead_formula(k, n):
    code = mds_code(k, n, smallest_prime_at_least(n))
    assert overhead(code) == Fraction(n - k, k)
    assert code.universe.names == tuple(f"V{j}" for j in range(1, n + 1))


def test_mds_code_examples():
    assert mds_code(2, 3, FieldSpec(3)).generator.to_lists() == [[1, 1, 1], [0, 1, 2]]
    base = lp_example_code()
    assert base.generator == vandermonde(5, 7, FieldSpec(7))
    assert base.columns_of("a") == (0, 1) and base.columns_of("e") == (6,)
    with pytest.raises(PreconditionError):
        mds_code(2, 4, FieldSpec(3))


def test_check_mds_examples():
    assert check_mds(mds_code(3, 7, FieldSpec(7)))
    assert check_mds(mds_code(1, 5, FieldSpec(5)))
    repeated = FieldMatrix.from_rows(FieldSpec(5), [[1, 1, 1], [0, 1, 1]])
    universe = Universe(["x", "y", "z"])
    assert not check_mds(LinearCode(repeated, universe.nodes, universe))


def test_sufficiency_is_monotone():
    code = lp_example_code()
    for mask in all_masks(5):
        if is_sufficient(code, mask):
            for node in code.universe:
                assert is_sufficient(code, mask | node.bit)


# ---------------------------------------------------------------------------
# basic construction

def test_basic_encode_example_1():
    tree = parse_tree(EXAMPLE_1)
    chunks = {node.name: lists for node, lists in basic_encode(tree, EXAMPLE_1_FILE).items()}
    f1, f2 = (0, 1, 1, 1, 0, 0), (1, 0, 1, 1, 0, 1)
    assert chunks["a"] == [f1, (0, 1, 1)]
    assert chunks["b"] == [f1, (1, 0, 0)]
    assert chunks["c"] == [(1, 0), f2]
    assert chunks["d"] == [(1, 1), f2]
    assert chunks["e"] == [(0, 1), f2]


def test_basic_decode_example_1():
    tree = parse_tree(EXAMPLE_1)
    chunks = basic_encode(tree, EXAMPLE_1_FILE)
    for names in enumerate_minimal(tree).names():
        assert basic_decode(tree, chunks, names) == EXAMPLE_1_FILE
    assert basic_decode(tree, chunks, ["c", "d"]) is None
    assert basic_decode(tree, chunks, tree.universe.nodes) == EXAMPLE_1_FILE


def test_basic_trivial_trees():
    single = parse_tree("p1")
    assert basic_encode(single, (1, 0, 1))[single.universe.node("p1")] == [(1, 0, 1)]
    either = parse_tree("(1 p1 p2)")
    chunks = basic_encode(either, (1, 1))
    assert all(lists == [(1, 1)] for lists in chunks.values())


def test_basic_divisibility_error_names_vertex():
    tree = parse_tree("(1 a (3 b c d))")
    with pytest.raises(PreconditionError, match=r"\(3 b c d\)"):
        basic_encode(tree, (1, 0, 1, 1))
    assert basic_unit(tree) == 3
    padded, pad = basic_pad((1, 0, 1, 1), tree)
    assert pad == 2 and len(padded) == 6


def test_basic_decode_rejects_malformed_chunks():
    tree = parse_tree("(2 a b)")
    chunks = basic_encode(tree, (1, 0, 1, 1))
    chunks[tree.universe.node("b")] = [(1,)]
    with pytest.raises(PreconditionError):
        basic_decode(tree, chunks, ["a", "b"])


def test_basic_round_trip_on_random_trees():
    rng = random.Random(99)
    for _ in range(25):
        tree = random_tree(rng, nodes=rng.randint(1, 8), depth=3, partitioned=rng.random() < 0.5)
        try:
            unit = basic_unit(tree)
        except CapacityError:
            continue
        if unit > 720:
            continue
        bits = tuple(rng.randint(0, 1) for _ in range(unit * rng.randint(1, 2)))
        chunks = basic_encode(tree, bits)
        for mask in enumerate_minimal(tree).masks:
            assert basic_decode(tree, chunks, mask) == bits


# ---------------------------------------------------------------------------
# exact LP

def test_gamma_examples():
    assert gamma_from_structure(lp_example_structure()).gamma == (
        (1, 0, 1, 1, 1), (0, 1, 1, 1, 1), (1, 1, 1, 0, 0), (1, 1, 0, 1, 0), (1, 1, 0, 0, 1))
    universe = Universe(["p1", "p2", "p3"])
    assert gamma_from_structure(AccessStructure(universe, (universe.full_mask,))).gamma == \
        ((1, 1, 1),)
    singletons = AccessStructure(universe, tuple(n.bit for n in universe))
    assert gamma_from_structure(singletons).gamma == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_solve_lpp_example():
    problem = gamma_from_structure(lp_example_structure())
    solution = solve_lpp(problem)
    assert solution.objective == Fraction(7, 5)
    assert problem.is_feasible(solution.y)
    printed = tuple(Fraction(v) for v in ("2/5", "2/5", "1/5", "1/5", "1/5"))
    assert problem.is_feasible(printed) and sum(printed) == Fraction(7, 5)
    assert derive_parameters(solution.y) == (5, (2, 2, 1, 1, 1), 7, Fraction(2, 5))


def test_solve_lpp_trivial_structures():
    universe = Universe(["p1", "p2", "p3"])
    whole = gamma_from_structure(AccessStructure(universe, (universe.full_mask,)))
    assert solve_lpp(whole).objective == 1

    four = Universe(["p1", "p2", "p3", "p4"])
    triples = AccessStructure.from_sets(four, itertools.combinations(four.names, 3))
    solution = solve_lpp(gamma_from_structure(triples))
    assert solution.objective == Fraction(4, 3)
    assert solution.y == (Fraction(1, 3),) * 4


def test_derive_parameters_examples():
    assert derive_parameters([Fraction(1), Fraction(1)]) == (1, (1, 1), 2, Fraction(1))
    assert derive_parameters([Fraction(1, 2), Fraction(1, 3)]) == (6, (3, 2), 5, Fraction(-1, 6))


def test_lcm_of_denominators_examples():
    assert lcm_of_denominators([Fraction(2, 5), Fraction(1, 5)]) == 5
    assert lcm_of_denominators([Fraction(3), Fraction(1)]) == 1
    assert lcm_of_denominators([Fraction(1, 4), Fraction(1, 6)]) == 12
    assert lcm_of_denominators([]) == 1


def test_lp_problem_rejects_empty_rows():
    with pytest.raises(PreconditionError):
        LpProblem(((0, 0),), 2)


def _solve_square(rows, rhs):
    """Exact Gaussian elimination; None when singular."""
    n = len(rows)
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    for c in range(n):
        pivot = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if pivot is None:
            return None
        aug[c], aug[pivot] = aug[pivot], aug[c]
        aug[c] = [x / aug[c][c] for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                aug[r] = [x - aug[r][c] * p for x, p in zip(aug[r], aug[c])]
    return [row[-1] for row in aug]


def _vertex_enumeration_optimum(problem):
    n = problem.n
    constraints = [(list(row), 1) for row in problem.gamma] + \
        [([int(i == j) for j in range(n)], 0) for i in range(n)]
    best = None
    for chosen in itertools.combinations(constraints, n):
        y = _solve_square([c[0] for c in chosen], [c[1] for c in chosen])
        if y is not None and problem.is_feasible(y):
            value = sum(y)
            best = value if best is None else min(best, value)
    return best


@st.composite
def lp_problems(draw):
    n = draw(st.integers(2, 6))
    row = st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(any).map(tuple)
    rows = draw(st.lists(row, min_size=1, max_size=10, unique=True))
    return LpProblem(tuple(sorted(rows)), n)


@settings(derandomize=True, max_examples=300, deadline=None)
@given(lp_problems())
def test_simplex_matches_vertex_enumeration(problem):
    solution = solve_lpp(problem)
    assert problem.is_feasible(solution.y)
    assert solution.objective == _vertex_enumeration_optimum(problem)
    params = derive_parameters(solution.y)
    for row in problem.gamma:
        assert sum(s for s, bit in zip(params.per_node, row) if bit) >= params.k
