"""
Exact rational simplex for the storage-minimising linear program

    minimise  sum(y)   subject to   Gamma . y >= 1,   y >= 0

where Gamma is the access-set/node incidence matrix. All arithmetic uses
``fractions.Fraction``; pivoting follows Bland's rule.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from mec.access import AccessStructure
from mec.errors import InvariantBreach, PreconditionError

logger = logging.getLogger(__name__)

Rational = Fraction


@dataclass(frozen=True)
class LpProblem:
    """Binary constraint matrix Gamma (omega rows, n columns)."""

    gamma: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        for i, row in enumerate(self.gamma):
            if len(row) != self.n:
                raise PreconditionError(f"Row {i + 1} of Gamma has {len(row)} entries, expected {self.n}")
            if any(x not in (0, 1) for x in row):
                raise PreconditionError(f"Row {i + 1} of Gamma is not binary")
            if not any(row):
                raise PreconditionError(f"Row {i + 1} of Gamma is all zero (empty access set)")

    @property
    def omega(self) -> int:
        return len(self.gamma)

    def is_feasible(self, y: Sequence[Fraction]) -> bool:
        return all(v >= 0 for v in y) and all(
            sum(y[j] for j in range(self.n) if row[j]) >= 1 for row in self.gamma)


@dataclass(frozen=True)
class LpSolution:
    y: tuple[Fraction, ...]
    objective: Fraction


class Parameters(NamedTuple):
    k: int
    per_node: tuple[int, ...]
    m: int
    beta: Fraction


class _Tableau:
    """Dense tableau in canonical form: basic columns form an identity."""

    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows
        self.basis = basis
        self.pivots = 0

    @property
    def width(self) -> int:
        return len(self.rows[0]) - 1 if self.rows else 0

    def rhs(self, i: int) -> Fraction:
        return self.rows[i][-1]

    def pivot(self, r: int, c: int) -> None:
        pivot_row = self.rows[r]
        factor = pivot_row[c]
        pivot_row[:] = [x / factor for x in pivot_row]
        for i, row in enumerate(self.rows):
            if i != r and row[c] != 0:
                scale = row[c]
                row[:] = [x - scale * p for x, p in zip(row, pivot_row)]
        self.basis[r] = c
        self.pivots += 1

    def reduced_costs(self, cost: Sequence[Fraction], columns: int) -> list[Fraction]:
        basic_cost = [cost[b] for b in self.basis]
        return [cost[j] - sum(cb * row[j] for cb, row in zip(basic_cost, self.rows) if cb)
                for j in range(columns)]

    def optimize(self, cost: Sequence[Fraction], columns: int) -> None:
        """Bland's rule: lowest-index improving column, lowest-index leaving basic variable."""
        while True:
            reduced = self.reduced_costs(cost, columns)
            entering = next((j for j in range(columns)
                             if j not in self.basis and reduced[j] < 0), None)
            if entering is None:
                return
            leaving = None
            best: tuple[Fraction, int] | None = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    key = (row[-1] / row[entering], self.basis[i])
                    if best is None or key < best:
                        best, leaving = key, i
            if leaving is None:
                raise InvariantBreach("Linear program is unbounded")
            self.pivot(leaving, entering)


def _two_phase(a: list[list[Fraction]], b: list[Fraction],
               cost: list[Fraction]) -> _Tableau:
    """
    Minimise cost.x subject to a.x = b, x >= 0, with b >= 0.

    Rows that already own a unit column start with it in the basis; the
    others get artificial variables that phase one drives to zero.
    """
    m, n = len(a), len(cost)
    rows = [list(row) + [rhs] for row, rhs in zip(a, b)]
    basis: list[int | None] = [None] * m
    for j in range(n):
        nonzero = [i for i in range(m) if rows[i][j] != 0]
        if len(nonzero) == 1 and rows[nonzero[0]][j] == 1 and basis[nonzero[0]] is None:
            basis[nonzero[0]] = j
    missing = [i for i in range(m) if basis[i] is None]
    for slot, i in enumerate(missing):
        for r, row in enumerate(rows):
            row.insert(-1, Fraction(int(r == i)))
        basis[i] = n + slot
    tableau = _Tableau(rows, basis)  # type: ignore[arg-type]

    if missing:
        phase_one = [Fraction(0)] * n + [Fraction(1)] * len(missing)
        tableau.optimize(phase_one, n + len(missing))
        infeasibility = sum(tableau.rhs(i) for i, bv in enumerate(tableau.basis) if bv >= n)
        if infeasibility != 0:
            raise InvariantBreach("Linear program is infeasible")
        for i in reversed(range(len(tableau.rows))):
            if tableau.basis[i] < n:
                continue
            column = next((j for j in range(n) if tableau.rows[i][j] != 0), None)
            if column is None:
                del tableau.rows[i]
                del tableau.basis[i]
            else:
                tableau.pivot(i, column)
        for row in tableau.rows:
            del row[n:-1]
        logger.debug("Phase one finished after %d pivots", tableau.pivots)

    tableau.optimize(cost, n)
    return tableau


def gamma_from_structure(structure: AccessStructure) -> LpProblem:
    """Incidence matrix: row i, column j is 1 iff node j+1 is in access set i."""
    n = len(structure.universe)
    gamma = tuple(tuple(int(bool(mask >> j & 1)) for j in range(n)) for mask in structure.masks)
    return LpProblem(gamma, n)


def solve_lpp(problem: LpProblem) -> LpSolution:
    """
    Return an exact optimal vertex of the program.

    The simplex runs on the dual (maximise sum(z) s.t. Gamma^T z <= 1,
    z >= 0), whose slack basis is feasible from the start and whose tableau
    has only n rows; the primal vertex y is read off the final reduced costs
    of the slack columns.
    """
    omega, n = problem.omega, problem.n
    a = [[Fraction(problem.gamma[i][j]) for i in range(omega)] +
         [Fraction(int(j == s)) for s in range(n)] for j in range(n)]
    b = [Fraction(1)] * n
    cost = [Fraction(-1)] * omega + [Fraction(0)] * n
    tableau = _two_phase(a, b, cost)
    reduced = tableau.reduced_costs(cost, omega + n)
    y = tuple(reduced[omega + j] for j in range(n))
    objective = sum(y, Fraction(0))
    dual_value = sum((tableau.rhs(i) for i, bv in enumerate(tableau.basis) if bv < omega), Fraction(0))
    if not problem.is_feasible(y) or objective != dual_value:
        raise InvariantBreach(f"Simplex returned a non-optimal point y={y}")
    logger.debug("solve_lpp: omega=%d n=%d pivots=%d objective=%s",
                 omega, n, tableau.pivots, objective)
    return LpSolution(y, objective)


def lcm_of_denominators(values: Sequence[Fraction]) -> int:
    return math.lcm(1, *(Fraction(v).denominator for v in values))


def derive_parameters(y: Sequence[Fraction]) -> Parameters:
    """k = lcm of denominators, m_i = y_i * k, m = sum m_i, beta = (m - k) / k."""
    k = lcm_of_denominators(y)
    per_node = tuple(int(Fraction(v) * k) for v in y)
    m = sum(per_node)
    return Parameters(k, per_node, m, Fraction(m - k, k))
