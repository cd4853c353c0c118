"""
Test suite for the code builders.

Covers the worked examples of every construction plus randomized checks:
Kronecker completeness and size prediction, optimal assignment against the
LP optimum, and decodability of every builder's output over all node subsets.

Run with:
    pytest mec/construct/tests.py
"""
import random
from fractions import Fraction

import pytest

from mec.access import AccessStructure, Universe, enumerate_minimal, evaluate, parse_tree, random_tree
from mec.codes import decode, encode, is_complete, is_sufficient, overhead
from mec.construct import (METHODS, build_code, build_kronecker, build_lp_code, build_partitioned_code,
                           fa_optimal, kronecker_field_size, kronecker_to_code, overhead_bounds,
                           parameters_report, predict_kronecker_size, uniform_assignment)
from mec.errors import CapacityError, NotPartitionedError, PreconditionError
from mec.field import FieldSpec, hstack, identity, kronecker, ones, rank, vandermonde, vstack, zeros
from mec.ratlp import gamma_from_structure, solve_lpp
from mec.tests import EXAMPLE_2, EXAMPLE_3, WORKED_EXAMPLE, lp_example_structure

# Suite sizes
FA_VS_LP_TREES = 200
KRONECKER_TREES = 25
SUBSET_TREES_PER_METHOD = 4
MAX_KRONECKER_COLUMNS = 120
SUBSET_MAX_COLUMNS = 60


def _names(tree, mapping):
    return {tree.universe.node(node).name: count for node, count in mapping.items()}


def _random_file(rng, code):
    return tuple(rng.randrange(code.q) for _ in range(code.k))


def _small_kronecker(rng, partitioned):
    """Random tree with at most 9 nodes whose Kronecker code stays small."""
    while True:
        tree = random_tree(rng, nodes=rng.randint(1, 9), depth=rng.randint(1, 3),
                           partitioned=partitioned)
        if predict_kronecker_size(tree).cols_pred <= MAX_KRONECKER_COLUMNS:
            return tree


# ---------------------------------------------------------------------------
# Kronecker

@pytest.mark.parametrize("text,q", [(WORKED_EXAMPLE, 3), ("p1", 2), ("(2 (1 a b c d e) (2 f g))", 2)])
def test_kronecker_field_size(text, q):
    assert kronecker_field_size(parse_tree(text)).q == q


def test_build_kronecker_worked_example():
    result = build_kronecker(parse_tree(WORKED_EXAMPLE))
    assert (result.k, result.nu, result.field.q) == (12, 33, 3)

    f3 = FieldSpec(3)
    r1 = kronecker(vandermonde(3, 3, f3), identity(f3, 2))
    r2 = kronecker(vandermonde(2, 3, f3), identity(f3, 3))
    r3 = kronecker(ones(f3, 1, 3), identity(f3, 6))
    expected = vstack([hstack([r1, r2, r3]),
                       hstack([zeros(f3, 6, 6), r2, r3.scale(2)])])
    assert result.matrix == expected
    assert [node.name for node in result.labels[:6]] == ["p1", "p1", "p2", "p2", "p4", "p4"]


def test_build_kronecker_small_trees():
    leaf = build_kronecker(parse_tree("p1"))
    assert (leaf.k, leaf.nu) == (1, 1)
    assert leaf.matrix.to_lists() == [[1]]

    threshold = build_kronecker(parse_tree("(2 p1 p2 p3)"))
    assert (threshold.k, threshold.nu) == (2, 3)
    assert threshold.matrix == vandermonde(2, 3, FieldSpec(3))


def test_build_kronecker_column_cap(monkeypatch):
    monkeypatch.setenv("MEC_MAX_COLUMNS", "10")
    with pytest.raises(CapacityError):
        build_kronecker(parse_tree(WORKED_EXAMPLE))


def test_kronecker_to_code_merges_node_columns():
    code = kronecker_to_code(build_kronecker(parse_tree(WORKED_EXAMPLE)))
    assert code.fragment_length("p4") == 2 + 3
    assert code.fragment_length("p1") == 2
    assert code.fragment_length("p6") == 6
    assert sum(code.columns_per_node().values()) == 33

    leaf = kronecker_to_code(build_kronecker(parse_tree("p1")))
    assert (leaf.k, leaf.m) == (1, 1)

    threshold = kronecker_to_code(build_kronecker(parse_tree("(2 p1 p2 p3)")))
    assert threshold.columns_per_node() == {"p1": 1, "p2": 1, "p3": 1}


def test_worked_example_kronecker_code_is_complete():
    tree = parse_tree(WORKED_EXAMPLE)
    code = kronecker_to_code(build_kronecker(tree))
    structure = enumerate_minimal(tree)
    assert len(structure) == 14
    assert is_complete(code, structure)


def test_predict_kronecker_size_examples():
    worked = predict_kronecker_size(parse_tree(WORKED_EXAMPLE))
    assert worked.psi == (Fraction(1, 2), Fraction(3, 4), Fraction(3, 2))
    assert worked.beta_pred == Fraction(7, 4)
    assert (worked.k_pred, worked.cols_pred) == (12, 33)

    assert predict_kronecker_size(parse_tree("(2 p1 p2)")).psi == (1,)
    assert predict_kronecker_size(parse_tree("(2 p1 p2)")).beta_pred == 0
    either = predict_kronecker_size(parse_tree("(1 p1 p2)"))
    assert either.psi == (2,) and either.beta_pred == 1
    assert predict_kronecker_size(parse_tree("p1")).k_pred == 1


def test_kronecker_size_agreement():
    rng = random.Random(17)
    for _ in range(KRONECKER_TREES):
        tree = _small_kronecker(rng, partitioned=rng.random() < 0.5)
        predicted = predict_kronecker_size(tree)
        result = build_kronecker(tree)
        assert (result.k, result.nu) == (predicted.k_pred, predicted.cols_pred)
        assert predicted.beta_pred == Fraction(result.nu - result.k, result.k)


def test_kronecker_completeness_on_random_trees():
    rng = random.Random(23)
    for _ in range(KRONECKER_TREES):
        partitioned = rng.random() < 0.5
        tree = _small_kronecker(rng, partitioned)
        code = kronecker_to_code(build_kronecker(tree))
        structure = enumerate_minimal(tree)
        assert is_complete(code, structure)
        assert rank(code.generator) == code.k


# ---------------------------------------------------------------------------
# LP

def test_build_lp_code_example():
    code = build_lp_code(lp_example_structure())
    assert (code.k, code.m, code.q) == (5, 7, 7)
    assert code.columns_per_node() == {"a": 2, "b": 2, "c": 1, "d": 1, "e": 1}
    assert overhead(code) == Fraction(2, 5)
    assert is_complete(code, lp_example_structure())


def test_build_lp_code_trivial_structures():
    universe = Universe(["p1", "p2", "p3"])
    whole = build_lp_code(AccessStructure(universe, (universe.full_mask,)))
    assert overhead(whole) == 0

    four = Universe(["p1", "p2", "p3", "p4"])
    triples = AccessStructure(four, tuple(four.full_mask & ~node.bit for node in four))
    code = build_lp_code(triples)
    assert (code.k, code.m) == (3, 4)
    assert overhead(code) == Fraction(1, 3)


def test_build_lp_code_multiplier():
    code = build_lp_code(lp_example_structure(), k_multiplier=2)
    assert (code.k, code.m, code.q) == (10, 14, 17)
    assert overhead(code) == Fraction(2, 5)
    with pytest.raises(PreconditionError):
        build_lp_code(lp_example_structure(), k_multiplier=0)


@pytest.mark.parametrize("n,tau,k,expected", [
    (5, 3, 5, (5, 10, Fraction(5, 3))),
    (4, 1, 1, (1, 4, Fraction(7))),
    (6, 6, 3, (3, 6, Fraction(2))),
])
def test_overhead_bounds(n, tau, k, expected):
    assert overhead_bounds(n, tau, k) == expected


def test_overhead_bounds_rejects_bad_tau():
    with pytest.raises(PreconditionError):
        overhead_bounds(3, 4, 1)


def test_lp_codes_respect_bounds():
    rng = random.Random(41)
    for _ in range(30):
        tree = random_tree(rng, nodes=rng.randint(1, 8), depth=3, partitioned=rng.random() < 0.5)
        structure = enumerate_minimal(tree)
        code = build_lp_code(structure)
        low, high, beta_bound = overhead_bounds(len(tree.universe), structure.min_size, code.k)
        assert low <= code.m <= high
        assert overhead(code) <= beta_bound
        assert is_complete(code, structure)


# ---------------------------------------------------------------------------
# partitioned assignments

def test_uniform_assignment_examples():
    tree = parse_tree(EXAMPLE_2)
    result = uniform_assignment(tree)
    assert (result.nu, result.k) == (5, 2)
    assert set(_names(tree, result.h).values()) == {1}
    assert result.beta == Fraction(3, 2)

    two_level = parse_tree("(2 (3 a b c) (2 d e))")
    h = _names(two_level, uniform_assignment(two_level).h)
    k = uniform_assignment(two_level).k
    assert h["a"] == k // 6 and h["d"] == k // 4

    leaf = uniform_assignment(parse_tree("p1"))
    assert (leaf.nu, leaf.k) == (1, 1)


def test_fa_optimal_example_3():
    tree = parse_tree(EXAMPLE_3)
    result = fa_optimal(tree)
    assert (result.nu, result.k) == (5, 2)
    assert _names(tree, result.h) == {
        "p1": 2, "p2": 0, "p3": 0, "p4": 1, "p5": 1, "p6": 1, "p7": 0, "p8": 0, "p9": 0}


def test_fa_optimal_example_2():
    tree = parse_tree(EXAMPLE_2)
    result = fa_optimal(tree)
    assert (result.nu, result.k) == (2, 1)
    assert _names(tree, result.h) == {"a": 1, "b": 1, "c": 0, "d": 0, "e": 0}
    assert result.beta == 1
    assert fa_optimal(parse_tree("p1")).nu == 1


def test_partitioned_builders_reject_reused_nodes():
    tree = parse_tree(WORKED_EXAMPLE)
    with pytest.raises(NotPartitionedError, match="p4"):
        fa_optimal(tree)
    with pytest.raises(NotPartitionedError, match="p4"):
        uniform_assignment(tree)


def test_build_partitioned_code_examples():
    optimal = build_partitioned_code(parse_tree(EXAMPLE_3), "optimal")
    assert (optimal.m, optimal.k) == (5, 2)
    assert optimal.fragment_length("p1") == 2

    uniform = build_partitioned_code(parse_tree(EXAMPLE_2), "uniform")
    assert (uniform.m, uniform.k) == (5, 2)
    assert set(uniform.columns_per_node().values()) == {1}
    assert (build_partitioned_code(parse_tree(EXAMPLE_2), "optimal").m,) == (2,)

    leaf = build_partitioned_code(parse_tree("p1"))
    assert (leaf.m, leaf.k) == (1, 1)
    with pytest.raises(PreconditionError):
        build_partitioned_code(parse_tree("p1"), "greedy")  # type: ignore[arg-type]


def test_uniform_dominates_optimal():
    rng = random.Random(3)
    for _ in range(60):
        tree = random_tree(rng, nodes=rng.randint(1, 10), depth=rng.randint(1, 4))
        assert uniform_assignment(tree).beta >= fa_optimal(tree).beta
    example = parse_tree(EXAMPLE_2)
    assert uniform_assignment(example).beta > fa_optimal(example).beta


def test_fa_matches_lp_optimum():
    rng = random.Random(2718)
    for _ in range(FA_VS_LP_TREES):
        tree = random_tree(rng, nodes=rng.randint(1, 10), depth=rng.randint(1, 4))
        result = fa_optimal(tree)
        solution = solve_lpp(gamma_from_structure(enumerate_minimal(tree)))
        assert Fraction(result.nu, result.k) == solution.objective, str(tree)


def test_fa_codes_are_complete():
    rng = random.Random(12)
    for _ in range(15):
        tree = random_tree(rng, nodes=rng.randint(1, 12), depth=rng.randint(1, 4))
        code = build_partitioned_code(tree, "optimal")
        assert is_complete(code, enumerate_minimal(tree))


# ---------------------------------------------------------------------------
# dispatch and reporting

def test_build_code_dispatch():
    tree = parse_tree(EXAMPLE_2)
    assert {method: build_code(tree, method).m for method in ("uniform", "optimal", "lp")} == \
        {"uniform": 5, "optimal": 2, "lp": 2}
    with pytest.raises(PreconditionError):
        build_code(tree, "magic")
    with pytest.raises(PreconditionError):
        build_code(tree, "optimal", k_multiplier=2)
    with pytest.raises(NotPartitionedError):
        build_code(parse_tree(WORKED_EXAMPLE), "optimal")


def test_parameters_report():
    code = build_lp_code(lp_example_structure())
    assert parameters_report(code, "lp") == {
        "method": "lp", "k": 5, "m": 7,
        "per_node": {"a": 2, "b": 2, "c": 1, "d": 1, "e": 1},
        "beta": "2/5", "q": 7,
    }
    leaf = parameters_report(build_code(parse_tree("p1"), "optimal"), "optimal")
    assert leaf["beta"] == "0"


@pytest.mark.parametrize("method", METHODS)
def test_sufficiency_matches_decodability(method):
    rng = random.Random(METHODS.index(method))
    for _ in range(SUBSET_TREES_PER_METHOD):
        partitioned = method in ("uniform", "optimal") or rng.random() < 0.5
        tree = random_tree(rng, nodes=rng.randint(1, 8), depth=3, partitioned=partitioned)
        if method == "kronecker" and predict_kronecker_size(tree).cols_pred > SUBSET_MAX_COLUMNS:
            continue
        code = build_code(tree, method)
        f = _random_file(rng, code)
        fragments = encode(code, f)
        for mask in range(1 << code.n):
            recovered = decode(code, fragments.restrict(mask))
            assert is_sufficient(code, mask) == (recovered == f)
            if evaluate(tree, mask):
                assert recovered == f
