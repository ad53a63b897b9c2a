"""Decision procedures over push-down transducers: leads-to, SPP, CPP, reducedness, mass bounds."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .automaton import (
    Computation, Configuration, Pdt, Pop, Ppdt, Push, StackSymbol, Swap, Transition,
    computation_probability, successors,
)
from .errors import EmptyLanguage


class LeadsToRelation:
    """Pairs (Y, Y') such that the one-symbol stack Y can become Y' without emptying."""

    def __init__(self, succ: dict[StackSymbol, set[StackSymbol]]) -> None:
        self.succ = succ

    def __contains__(self, pair: tuple[StackSymbol, StackSymbol]) -> bool:
        y, y2 = pair
        return y2 in self.succ.get(y, ())

    def __iter__(self) -> Iterator[tuple[StackSymbol, StackSymbol]]:
        for y, ys in self.succ.items():
            for y2 in ys:
                yield y, y2

    def __len__(self) -> int:
        return sum(len(v) for v in self.succ.values())

    def targets(self, y: StackSymbol) -> set[StackSymbol]:
        return self.succ.get(y, {y})

    @property
    def pairs(self) -> frozenset:
        return frozenset(self)


def leadsto_relation(pdt: Pdt) -> LeadsToRelation:
    succ: dict[StackSymbol, set] = {q: set() for q in pdt.stack_symbols}
    pred: dict[StackSymbol, set] = defaultdict(set)
    pushers: dict[StackSymbol, list[Push]] = defaultdict(list)
    for t in pdt.transitions:
        if isinstance(t, Push):
            pushers[t.Y].append(t)
    work: deque = deque()

    def add(y: StackSymbol, z: StackSymbol) -> None:
        if z not in succ[y]:
            succ[y].add(z)
            pred[z].add(y)
            work.append((y, z))

    for q in pdt.stack_symbols:
        add(q, q)
    while work:
        y, z = work.popleft()
        for t in pdt.swap_by.get(z, ()):
            add(y, t.Y)
        # (y, z) as the outer pair: z pushes w, w leads to w', pop (z, w')
        for p in pdt.push_by.get(z, ()):
            for w2 in list(succ[p.Y]):
                for pop in pdt.pop_by.get((z, w2), ()):
                    add(y, pop.Z)
        # (y, z) as the inner pair: some x pushes y, and z pops off x
        for p in pushers.get(y, ()):
            for pop in pdt.pop_by.get((p.X, z), ()):
                for outer in list(pred[p.X]):
                    add(outer, pop.Z)
    return LeadsToRelation(succ)


# ---------------------------------------------------------------------------
# reducedness


@dataclass(frozen=True)
class ReducedVerdict:
    reduced: bool
    unused: tuple[Transition, ...]

    def __bool__(self) -> bool:
        return self.reduced


def useful_transitions(pdt: Pdt, rel: LeadsToRelation | None = None) -> set[int]:
    """Ids of transitions occurring in some complete computation."""
    rel = rel or leadsto_relation(pdt)
    if (pdt.x_init, pdt.x_final) not in rel:
        raise EmptyLanguage("no complete computation exists", operation="trim_pdt")
    used: set[int] = set()
    seen = {(pdt.x_init, pdt.x_final)}
    todo = [(pdt.x_init, pdt.x_final)]

    def visit(a: StackSymbol, b: StackSymbol) -> None:
        if (a, b) not in seen:
            seen.add((a, b))
            todo.append((a, b))

    while todo:
        a, b = todo.pop()
        for t in pdt.swap_by.get(a, ()):
            if (t.Y, b) in rel:
                used.add(t.id)
                visit(t.Y, b)
        for p in pdt.push_by.get(a, ()):
            for w2 in rel.targets(p.Y):
                for pop in pdt.pop_by.get((a, w2), ()):
                    if (pop.Z, b) in rel:
                        used.update((p.id, pop.id))
                        visit(p.Y, w2)
                        visit(pop.Z, b)
    return used


def is_reduced_pdt(pdt: Pdt) -> ReducedVerdict:
    try:
        used = useful_transitions(pdt)
    except EmptyLanguage:
        used = set()
    unused = tuple(t for t in pdt.transitions if t.id not in used)
    return ReducedVerdict(not unused, unused)


def trim_pdt(pdt: Pdt) -> Pdt:
    used = useful_transitions(pdt)
    return Pdt(
        pdt.x_init,
        pdt.x_final,
        tuple(t for t in pdt.transitions if t.id in used),
        pdt.input_alphabet,
        pdt.output_alphabet,
    )


# ---------------------------------------------------------------------------
# strong predictiveness


@dataclass(frozen=True)
class SppVerdict:
    holds: bool
    violations: tuple[tuple[Push, Pop, Pop], ...] = ()

    def __bool__(self) -> bool:
        return self.holds


def pop_targets(pdt: Pdt, push: Push, rel: LeadsToRelation) -> dict[StackSymbol, Pop]:
    """Symbols that can replace ``push.X`` once the pushed subcomputation is popped."""
    out: dict[StackSymbol, Pop] = {}
    for y2 in rel.targets(push.Y):
        for pop in pdt.pop_by.get((push.X, y2), ()):
            out.setdefault(pop.Z, pop)
    return out


def check_spp(pdt: Pdt, rel: LeadsToRelation | None = None) -> SppVerdict:
    rel = rel or leadsto_relation(pdt)
    bad = []
    for t in pdt.transitions:
        if isinstance(t, Push):
            targets = list(pop_targets(pdt, t, rel).values())
            for other in targets[1:]:
                bad.append((t, targets[0], other))
    return SppVerdict(not bad, tuple(bad))


# ---------------------------------------------------------------------------
# correct-prefix property


class Liveness:
    """Decides whether a stack can still be emptied down to ``X_final``.

    The stack is read from the top down: the set of symbols that may
    stand in place of the part read so far is updated through pops.
    """

    def __init__(self, pdt: Pdt, rel: LeadsToRelation) -> None:
        self.pdt = pdt
        self.rel = rel
        self.pops_by_lower: dict[StackSymbol, list[Pop]] = defaultdict(list)
        for t in pdt.transitions:
            if isinstance(t, Pop):
                self.pops_by_lower[t.Y].append(t)
        self._accepting: dict[StackSymbol, bool] = {}

    def start(self, top: StackSymbol) -> frozenset:
        return frozenset({top})

    def step(self, current: frozenset, lower: StackSymbol) -> frozenset:
        out = set()
        for pop in self.pops_by_lower.get(lower, ()):
            if any((c, pop.X) in self.rel for c in current):
                out.add(pop.Z)
        return frozenset(out)

    def accepting_symbol(self, s: StackSymbol) -> bool:
        v = self._accepting.get(s)
        if v is None:
            v = self._accepting[s] = (s, self.pdt.x_final) in self.rel
        return v

    def accepts(self, current: frozenset) -> bool:
        return any(self.accepting_symbol(s) for s in current)

    def live(self, stack: tuple[StackSymbol, ...]) -> bool:
        cur = self.start(stack[-1])
        for lower in reversed(stack[:-1]):
            cur = self.step(cur, lower)
            if not cur:
                return False
        return self.accepts(cur)


@dataclass(frozen=True)
class DeadWitness:
    computation: Computation
    stack: tuple[StackSymbol, ...]


@dataclass(frozen=True)
class CppVerdict:
    holds: bool
    witness: DeadWitness | None = None
    search_exhausted: bool = False
    dead_pattern: tuple[StackSymbol, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.holds


def _find_dead_pattern(pdt: Pdt, rel: LeadsToRelation, live: Liveness) -> tuple | None:
    """Search reachable stacks (top-down) for one that cannot be completed."""
    pushers: dict[StackSymbol, set[StackSymbol]] = defaultdict(set)
    for t in pdt.transitions:
        if isinstance(t, Push):
            for y in rel.targets(t.Y):
                pushers[y].add(t.X)
    bottoms = rel.targets(pdt.x_init)
    seen = set()
    queue: deque = deque()
    for q in sorted(pdt.stack_symbols, key=str):
        st = (q, live.start(q))
        seen.add(st)
        queue.append((st, (q,)))
    while queue:
        (y, cur), path = queue.popleft()
        if y in bottoms and not live.accepts(cur):
            return tuple(reversed(path))
        for lower in pushers.get(y, ()):
            nxt = live.step(cur, lower)
            st = (lower, nxt)
            if st not in seen:
                seen.add(st)
                queue.append((st, path + (lower,)))
    return None


def check_cpp(pdt: Pdt, bound: int | None = None, max_configs: int = 200_000) -> CppVerdict:
    """CPP holds iff every reachable stack (input ignored) can still reach ``[X_final]``.

    When it fails, a breadth-first search of at most ``bound`` steps
    (default ten times the number of stack symbols) looks for a shortest
    dead computation.
    """
    rel = leadsto_relation(pdt)
    live = Liveness(pdt, rel)
    pattern = _find_dead_pattern(pdt, rel, live)
    if pattern is None:
        return CppVerdict(True)
    bound = 10 * len(pdt.stack_symbols) if bound is None else bound
    start = Configuration((pdt.x_init,), 0, ())
    queue: deque = deque([(start, ())])
    parents: dict = {}
    explored = 0
    while queue and explored < max_configs:
        conf, path = queue.popleft()
        explored += 1
        if not live.live(conf.stack):
            return CppVerdict(False, _rebuild(pdt, path), False, pattern)
        if len(path) >= bound:
            continue
        for t, nxt in successors(pdt, conf, None):
            queue.append((nxt, path + (t,)))
    return CppVerdict(False, None, True, pattern)


def _rebuild(pdt: Pdt, steps: tuple[Transition, ...]) -> DeadWitness:
    conf = Configuration((pdt.x_init,), 0, ())
    trace = [conf]
    read = []
    for t in steps:
        for t2, nxt in successors(pdt, conf, None):
            if t2.id == t.id:
                conf = nxt
                break
        trace.append(conf)
        if isinstance(t, Swap) and t.x is not None:
            read.append(t.x)
    return DeadWitness(Computation(tuple(read), tuple(steps), tuple(trace)), conf.stack)


# ---------------------------------------------------------------------------
# mass bound


@dataclass(frozen=True)
class MassReport:
    total: Fraction | float
    complete: int
    dead: int
    truncated: bool

    @property
    def bounded(self) -> bool:
        return self.total <= 1


def check_mass_bound(ppdt: Ppdt, max_steps: int) -> MassReport:
    """Sum p(c) over complete and shortest dead computations of at most ``max_steps`` steps."""
    pdt = ppdt.pdt
    live = Liveness(pdt, leadsto_relation(pdt))
    total: Fraction | float = Fraction(0)
    complete = dead = 0
    truncated = False
    if max_steps == 0:
        return MassReport(total, 0, 0, True)
    stack_list: list = [((pdt.x_init,), Fraction(1), 0)]
    while stack_list:
        stack, p, n = stack_list.pop()
        if stack == (pdt.x_final,):
            total += p
            complete += 1
            continue
        if not live.live(stack):
            total += p
            dead += 1
            continue
        if n == max_steps:
            truncated = True
            continue
        conf = Configuration(stack, 0, ())
        for t, nxt in successors(pdt, conf, None):
            stack_list.append((nxt.stack, p * ppdt.p(t), n + 1))
    return MassReport(total, complete, dead, truncated)


def symbols_of(ts: Iterable[Transition]) -> set[StackSymbol]:
    out: set = set()
    for t in ts:
        if isinstance(t, Push):
            out.update((t.X, t.Y))
        elif isinstance(t, Pop):
            out.update((t.Y, t.X, t.Z))
        else:
            out.update((t.X, t.Y))
    return out

