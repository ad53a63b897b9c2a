"""Least non-negative solutions of polynomial equation systems.

A system maps each variable to a list of terms ``(coefficient, factors)``;
the value of a term is the coefficient times the product of the values of
its factor variables.  Strongly connected components without a cycle are
evaluated directly, so rational coefficients give rational results there.
Cyclic components are solved by monotone iteration from zero in floating
point; linear cyclic components with rational data are then re-solved
exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

from .errors import NonConvergence

Term = tuple[object, Sequence[Hashable]]
Value = Fraction | float | int


def _product(coef: Value, factors: Iterable[Hashable], values: Mapping[Hashable, Value]) -> Value:
    acc = coef
    for f in factors:
        v = values[f]
        if not v:
            return 0
        acc = acc * v
    return acc


def solve(
    system: Mapping[Hashable, Sequence[Term]],
    tolerance: float = 1e-12,
    max_iter: int = 10000,
) -> tuple[dict[Hashable, Value], bool]:
    """Return ``(values, exact)`` for the least fixed point of ``system``.

    ``exact`` is true when every value is rational: coefficients were
    rational and each cyclic component was linear.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(system)
    for var, terms in system.items():
        for _, factors in terms:
            for f in factors:
                graph.add_edge(var, f)
    cond = nx.condensation(graph)
    members = cond.graph["mapping"]
    comps: dict[int, list[Hashable]] = {}
    for node, c in members.items():
        comps.setdefault(c, []).append(node)

    values: dict[Hashable, Value] = {}
    exact = True
    for c in reversed(list(nx.topological_sort(cond))):
        nodes = comps[c]
        cyclic = len(nodes) > 1 or graph.has_edge(nodes[0], nodes[0])
        if not cyclic:
            var = nodes[0]
            total: Value = 0
            for coef, factors in system.get(var, ()):
                total = total + _product(coef, factors, values)
            if isinstance(total, float):
                exact = False
            values[var] = total
            continue
        for v in nodes:
            values[v] = 0.0
        for _ in range(max_iter):
            change = 0.0
            for v in nodes:
                new = 0.0
                for coef, factors in system.get(v, ()):
                    new += float(_product(float(coef), factors, values))
                change = max(change, abs(new - values[v]))
                values[v] = new
            if change < tolerance:
                break
        else:
            raise NonConvergence(
                f"no convergence within {max_iter} iterations (last change {change:.3g})",
                dict(values),
            )
        rational = _linear_exact(nodes, system, values)
        if rational is not None:
            values.update(rational)
        else:
            exact = False
    return values, exact


def _is_rational(v: object) -> bool:
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def _linear_exact(
    nodes: list[Hashable], system: Mapping[Hashable, Sequence[Term]], approx: Mapping[Hashable, Value]
) -> dict[Hashable, Fraction] | None:
    """Exact solution of a linear rational component, if it matches the iterate.

    A component is linear when every term has at most one factor inside it.
    The iterate converged to the least solution; a nonsingular linear system
    has only one solution, so agreement confirms the rational values.
    """
    inside = set(nodes)
    index = {v: i for i, v in enumerate(nodes)}
    size = len(nodes)
    matrix = [[Fraction(0)] * (size + 1) for _ in range(size)]
    for v in nodes:
        row = matrix[index[v]]
        row[index[v]] += 1
        for coef, factors in system.get(v, ()):
            if not _is_rational(coef):
                return None
            const = Fraction(coef)
            var = None
            for f in factors:
                if f in inside:
                    if var is not None:
                        return None
                    var = f
                else:
                    val = approx[f]
                    if not _is_rational(val):
                        return None
                    const *= val
            if var is None:
                row[size] += const
            else:
                row[index[var]] -= const
    # Gauss-Jordan over the rationals
    for col in range(size):
        pivot = next((r for r in range(col, size) if matrix[r][col] != 0), None)
        if pivot is None:
            return None
        matrix[col], matrix[pivot] = matrix[pivot], matrix[col]
        lead = matrix[col][col]
        matrix[col] = [x / lead for x in matrix[col]]
        for r in range(size):
            if r != col and matrix[r][col] != 0:
                k = matrix[r][col]
                matrix[r] = [a - k * b for a, b in zip(matrix[r], matrix[col])]
    out = {v: matrix[index[v]][size] for v in nodes}
    for v, x in out.items():
        if x < 0 or abs(float(x) - float(approx[v])) > 1e-9 * max(1.0, abs(float(x))):
            return None
    return out
