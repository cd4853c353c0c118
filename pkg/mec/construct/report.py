"""Method dispatch and the JSON parameters report."""
from __future__ import annotations

from fractions import Fraction

from mec.access import AccessTree, enumerate_minimal
from mec.codes import LinearCode, overhead
from mec.construct.kronecker import build_kronecker, kronecker_to_code
from mec.construct.lp import build_lp_code
from mec.construct.partitioned import build_partitioned_code
from mec.errors import PreconditionError

METHODS = ('uniform', 'optimal', 'lp', 'kronecker')


def format_fraction(value: Fraction) -> str:
    """Exact "p/q" text; integers print without a denominator."""
    return str(Fraction(value))


def build_code(tree: AccessTree, method: str, k_multiplier: int = 1) -> LinearCode:
    """
    Build a code for the tree with one of uniform | optimal | lp | kronecker.

    Raises:
        PreconditionError: On an unknown method, or a k_multiplier with a
                           method other than lp
    """
    if method not in METHODS:
        raise PreconditionError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")
    if k_multiplier != 1 and method != 'lp':
        raise PreconditionError("k_multiplier is only supported by the lp method")
    if method == 'lp':
        return build_lp_code(enumerate_minimal(tree), k_multiplier)
    if method == 'kronecker':
        return kronecker_to_code(build_kronecker(tree))
    return build_partitioned_code(tree, method)  # type: ignore[arg-type]


def parameters_report(code: LinearCode, method: str) -> dict:
    return {
        'method': method,
        'k': code.k,
        'm': code.m,
        'per_node': code.columns_per_node(),
        'beta': format_fraction(overhead(code)),
        'q': code.q,
    }
