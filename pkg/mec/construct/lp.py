"""LP construction: optimal per-node allocations for any enumerated access structure."""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import NamedTuple

from mec.access import AccessStructure
from mec.codes import LinearCode, block_labeling, mds_code
from mec.errors import PreconditionError
from mec.field import smallest_prime_at_least
from mec.ratlp import derive_parameters, gamma_from_structure, solve_lpp

logger = logging.getLogger(__name__)


class OverheadBounds(NamedTuple):
    m_low: int
    m_high: int
    beta_bound: Fraction


def build_lp_code(structure: AccessStructure, k_multiplier: int = 1) -> LinearCode:
    """
    Solve the program for the structure and label an MDS base code with it.

    Args:
        structure: Enumerated access structure
        k_multiplier: Scales k and every m_i (any multiple of the lcm works)

    Returns:
        [m, k] Vandermonde code over the least prime q >= m, node i owning the
        i-th consecutive block of m_i columns
    """
    if k_multiplier < 1:
        raise PreconditionError(f"k_multiplier must be positive, got {k_multiplier}")
    solution = solve_lpp(gamma_from_structure(structure))
    params = derive_parameters(solution.y)
    k = params.k * k_multiplier
    counts = [c * k_multiplier for c in params.per_node]
    m = sum(counts)
    field = smallest_prime_at_least(m)
    logger.info("LP code: objective=%s k=%d m=%d q=%d", solution.objective, k, m, field.q)
    universe = structure.universe
    return mds_code(k, m, field, block_labeling(universe, counts), universe)


def overhead_bounds(n: int, tau: int, k: int) -> OverheadBounds:
    """
    Bounds for an optimal LP code with n nodes, smallest access set tau and dimension k.

    Returns:
        (k, ceil(k / tau) * n, n / k + (n - tau) / tau)
    """
    if not 1 <= tau <= n:
        raise PreconditionError(f"Need 1 <= tau <= n, got tau={tau}, n={n}")
    return OverheadBounds(k, math.ceil(Fraction(k, tau)) * n,
                          Fraction(n, k) + Fraction(n - tau, tau))
