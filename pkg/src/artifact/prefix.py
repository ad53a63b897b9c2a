"""Tabular simulation of probabilistic push-down transducers.

Forward items ``forward(X, Y, i, j)`` stand for computations from the
initial configuration that have read ``a1..aj`` and have ``Y`` on top of
``X``, where ``X`` became the top at position ``i``.  Inner items
``inner(X, Y, i, j)`` stand for subcomputations that start by pushing on
``X`` at position ``i``.  Each item is stored once; its value is the sum of
the probabilities of all its derivations.
"""

from __future__ import annotations

import warnings
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, NamedTuple, Sequence

from . import fixpoint
from .automaton import Pdt, Pop, Ppdt, Push, Swap
from .errors import ArtifactError, NotVerifiedConsistent, ScanUniformityViolation
from .grammar import is_consistent


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    __str__ = __repr__

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


class TableItem(NamedTuple):
    kind: str  # "forward" or "inner"
    lower: Hashable
    upper: Hashable
    i: int
    j: int

    def __str__(self) -> str:
        return f"{self.kind}({self.lower}, {self.upper}, {self.i}, {self.j})"


def forward(lower: Hashable, upper: Hashable, i: int, j: int) -> TableItem:
    return TableItem("forward", lower, upper, i, j)


def inner(lower: Hashable, upper: Hashable, i: int, j: int) -> TableItem:
    return TableItem("inner", lower, upper, i, j)


Inference = tuple[int | None, tuple[TableItem, ...]]  # (transition id, antecedents)


@dataclass
class ItemTable:
    input: tuple
    inferences: dict[TableItem, list[Inference]] = field(default_factory=dict)
    values: dict[TableItem, Fraction | float] = field(default_factory=dict)
    exact: bool = True

    def __contains__(self, item: TableItem) -> bool:
        return item in self.inferences

    def __len__(self) -> int:
        return len(self.inferences)

    @property
    def items(self) -> set[TableItem]:
        return set(self.inferences)

    def value(self, item: TableItem) -> Fraction | float:
        return self.values.get(item, Fraction(0))


@dataclass(frozen=True)
class ScanUniformity:
    uniform: bool
    mixed: tuple = ()

    def __bool__(self) -> bool:
        return self.uniform


def check_scan_uniformity(automaton: Pdt | Ppdt) -> ScanUniformity:
    pdt = automaton.pdt if isinstance(automaton, Ppdt) else automaton
    mixed = [
        x for x, sw in pdt.swap_by.items()
        if any(t.x is None for t in sw) and any(t.x is not None for t in sw)
    ]
    return ScanUniformity(not mixed, tuple(sorted(mixed, key=str)))


def derive_items(automaton: Pdt | Ppdt, w: Sequence) -> ItemTable:
    pdt = automaton.pdt if isinstance(automaton, Ppdt) else automaton
    w = tuple(w)
    n = len(w)
    table = ItemTable(w)
    infs = table.inferences
    agenda: deque[TableItem] = deque()
    fwd_by_top: dict[tuple, list[TableItem]] = defaultdict(list)  # (upper, j)
    inn_by_top: dict[tuple, list[TableItem]] = defaultdict(list)  # (upper, j)
    inn_by_bottom: dict[tuple, list[TableItem]] = defaultdict(list)  # (lower, i)

    def add(item: TableItem, tid: int | None, ante: tuple[TableItem, ...]) -> None:
        if item not in infs:
            infs[item] = []
            agenda.append(item)
        infs[item].append((tid, ante))

    def scans(item: TableItem) -> None:
        for t in pdt.swap_by.get(item.upper, ()):
            if t.x is None:
                add(item._replace(upper=t.Y), t.id, (item,))
            elif item.j < n and w[item.j] == t.x:
                add(item._replace(upper=t.Y, j=item.j + 1), t.id, (item,))

    def combine(left: TableItem, right: TableItem) -> None:
        for t in pdt.pop_by.get((left.upper, right.upper), ()):
            add(TableItem(left.kind, left.lower, t.Z, left.i, right.j), t.id, (left, right))

    add(forward(BOTTOM, pdt.x_init, 0, 0), None, ())
    for t in pdt.transitions:
        if isinstance(t, Push):
            for j in range(n + 1):
                add(inner(t.X, t.Y, j, j), t.id, ())

    while agenda:
        it = agenda.popleft()
        scans(it)
        if it.kind == "forward":
            for t in pdt.push_by.get(it.upper, ()):
                add(forward(it.upper, t.Y, it.j, it.j), t.id, (it,))
            fwd_by_top[it.upper, it.j].append(it)
            for right in inn_by_bottom.get((it.upper, it.j), ()):
                combine(it, right)
        else:
            inn_by_top[it.upper, it.j].append(it)
            inn_by_bottom[it.lower, it.i].append(it)
            # as left antecedent; includes pairing with itself
            for right in inn_by_bottom.get((it.upper, it.j), ()):
                combine(it, right)
            # as right antecedent; the self pair was handled above
            for left in fwd_by_top.get((it.lower, it.i), ()):
                combine(left, it)
            for left in inn_by_top.get((it.lower, it.i), ()):
                if left != it:
                    combine(left, it)
    return table


def solve_item_probabilities(
    table: ItemTable, ppdt: Ppdt, tolerance: float = 1e-12, max_iter: int = 10000
) -> ItemTable:
    system = {
        item: [(Fraction(1) if tid is None else ppdt.p(tid), ante) for tid, ante in infs]
        for item, infs in table.inferences.items()
    }
    table.values, table.exact = fixpoint.solve(system, tolerance, max_iter)
    return table


def item_table(ppdt: Ppdt, w: Sequence, tolerance: float = 1e-12, max_iter: int = 10000) -> ItemTable:
    return solve_item_probabilities(derive_items(ppdt, w), ppdt, tolerance, max_iter)


def string_probability_ppdt(
    ppdt: Ppdt, w: Sequence, tolerance: float = 1e-12, max_iter: int = 10000
) -> Fraction | float:
    table = item_table(ppdt, w, tolerance, max_iter)
    return table.value(forward(BOTTOM, ppdt.pdt.x_final, 0, len(table.input)))


def _verify_consistent(ppdt: Ppdt, tolerance: float) -> None:
    from .lifting import ppda_to_pcfg

    try:
        verdict = is_consistent(ppda_to_pcfg(ppdt), tolerance=max(tolerance, 1e-9))
    except ArtifactError as e:
        warnings.warn(NotVerifiedConsistent(f"consistency could not be checked: {e}"), stacklevel=3)
        return
    if not verdict:
        warnings.warn(
            NotVerifiedConsistent(f"automaton is not consistent (total mass {verdict.z_start})"),
            stacklevel=3,
        )


def prefix_probability(
    ppdt: Ppdt,
    w: Sequence,
    consistent: bool | None = None,
    tolerance: float = 1e-12,
    max_iter: int = 10000,
) -> Fraction | float:
    """Total probability of the strings that start with ``w``.

    The automaton must be proper and consistent.  With ``consistent``
    left as None this is checked through the equivalent PCFG; pass True
    to skip the check.
    """
    verdict = check_scan_uniformity(ppdt)
    if not verdict:
        raise ScanUniformityViolation(list(verdict.mixed))
    if consistent is None:
        _verify_consistent(ppdt, tolerance)
    elif not consistent:
        warnings.warn(NotVerifiedConsistent("prefix probability assumes a consistent automaton"), stacklevel=2)
    pdt = ppdt.pdt
    table = item_table(ppdt, w, tolerance, max_iter)
    n = len(table.input)
    scanning = {x for x, sw in pdt.swap_by.items() if any(t.x is not None for t in sw)}
    total: Fraction | float = table.value(forward(BOTTOM, pdt.x_final, 0, n))
    for item in sorted(table.inferences, key=str):
        if item.kind == "forward" and item.j == n and item.upper in scanning:
            total += table.value(item)
    return total
