"""Push-down transducers, their normal form, and bounded execution."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import BoundExceeded

StackSymbol = Hashable


class Marker:
    """The end-of-spine output marker."""

    _instance: "Marker | None" = None

    def __new__(cls) -> "Marker":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊣"

    __str__ = __repr__

    def __reduce__(self):
        return (Marker, ())


END = Marker()
OutSym = Hashable  # rule id (str), END, or an int marker


def project(v: Iterable[OutSym]) -> tuple[str, ...]:
    """Keep only the rule identifiers of an output string."""
    return tuple(x for x in v if isinstance(x, str))


@dataclass(frozen=True)
class Push:
    X: StackSymbol
    Y: StackSymbol
    id: int = -1

    def __str__(self) -> str:
        return f"{self.X} ↦ {self.X} {self.Y}"


@dataclass(frozen=True)
class Pop:
    Y: StackSymbol  # lower
    X: StackSymbol  # top
    Z: StackSymbol
    id: int = -1

    def __str__(self) -> str:
        return f"{self.Y} {self.X} ↦ {self.Z}"


@dataclass(frozen=True)
class Swap:
    X: StackSymbol
    x: Hashable | None
    y: tuple[OutSym, ...]
    Y: StackSymbol
    id: int = -1

    def __str__(self) -> str:
        read = "ε" if self.x is None else self.x
        out = " ".join(map(str, self.y)) or "ε"
        return f"{self.X} –{read},{out}→ {self.Y}"


@dataclass(frozen=True)
class PushSwap:
    """Shorthand X –x,y→ X Y."""

    X: StackSymbol
    x: Hashable | None
    y: tuple[OutSym, ...]
    Y: StackSymbol


@dataclass(frozen=True)
class PopSwap:
    """Shorthand Y X –x,y→ Z."""

    Y: StackSymbol
    X: StackSymbol
    x: Hashable | None
    y: tuple[OutSym, ...]
    Z: StackSymbol


Transition = Push | Pop | Swap


@dataclass(frozen=True)
class Fresh:
    """Machine-made stack symbol: ``base`` decorated with ``tag``."""

    base: StackSymbol
    tag: Hashable

    def __str__(self) -> str:
        if isinstance(self.tag, str):
            return f"{self.base}_{self.tag}"
        x, y = self.tag
        out = ",".join(map(str, y)) or "ε"
        return f"{self.base}_{{{'ε' if x is None else x};{out}}}"


def top_of(t: Transition) -> StackSymbol:
    return t.X


@dataclass(frozen=True)
class Pdt:
    x_init: StackSymbol
    x_final: StackSymbol
    transitions: tuple[Transition, ...]
    input_alphabet: frozenset = None  # type: ignore[assignment]
    output_alphabet: frozenset = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        ts = tuple(replace(t, id=i) for i, t in enumerate(self.transitions))
        for t in ts:
            if not isinstance(t, (Push, Pop, Swap)):
                raise TypeError(f"unsupported transition {t!r}; use normalize for shorthand forms")
        object.__setattr__(self, "transitions", ts)
        ins = {t.x for t in ts if isinstance(t, Swap) and t.x is not None}
        outs = {s for t in ts if isinstance(t, Swap) for s in t.y}
        object.__setattr__(self, "input_alphabet", frozenset(ins | set(self.input_alphabet or ())))
        object.__setattr__(self, "output_alphabet", frozenset(outs | set(self.output_alphabet or ())))

    @cached_property
    def stack_symbols(self) -> frozenset:
        qs = {self.x_init, self.x_final}
        for t in self.transitions:
            if isinstance(t, Push):
                qs.update((t.X, t.Y))
            elif isinstance(t, Pop):
                qs.update((t.Y, t.X, t.Z))
            else:
                qs.update((t.X, t.Y))
        return frozenset(qs)

    @property
    def size(self) -> int:
        return len(self.transitions)

    @cached_property
    def push_by(self) -> dict[StackSymbol, tuple[Push, ...]]:
        return _group(t for t in self.transitions if isinstance(t, Push))

    @cached_property
    def swap_by(self) -> dict[StackSymbol, tuple[Swap, ...]]:
        return _group(t for t in self.transitions if isinstance(t, Swap))

    @cached_property
    def pop_by(self) -> dict[tuple[StackSymbol, StackSymbol], tuple[Pop, ...]]:
        acc: dict = defaultdict(list)
        for t in self.transitions:
            if isinstance(t, Pop):
                acc[t.Y, t.X].append(t)
        return {k: tuple(v) for k, v in acc.items()}

    @cached_property
    def pop_by_top(self) -> dict[StackSymbol, tuple[Pop, ...]]:
        return _group(t for t in self.transitions if isinstance(t, Pop))

    def kinds(self, X: StackSymbol) -> set[str]:
        out = set()
        if X in self.push_by:
            out.add("push")
        if X in self.pop_by_top:
            out.add("pop")
        if X in self.swap_by:
            out.add("swap")
        return out

    def is_normal(self) -> bool:
        if self.kinds(self.x_final):
            return False
        return all(len(self.kinds(X)) <= 1 for X in self.stack_symbols)

    def groups(self) -> list[tuple[Transition, ...]]:
        """Transition sets whose probabilities must sum to one in a proper PPDT."""
        return [*self.push_by.values(), *self.swap_by.values(), *self.pop_by.values()]

    def group_of(self, t: Transition) -> tuple[Transition, ...]:
        if isinstance(t, Push):
            return self.push_by[t.X]
        if isinstance(t, Swap):
            return self.swap_by[t.X]
        return self.pop_by[t.Y, t.X]


def _group(ts: Iterable[Transition]) -> dict:
    acc: dict = defaultdict(list)
    for t in ts:
        acc[t.X].append(t)
    return {k: tuple(v) for k, v in acc.items()}


@dataclass(frozen=True)
class Ppdt:
    pdt: Pdt
    prob: Mapping[int, Fraction | float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "prob", dict(self.prob))
        for t in self.pdt.transitions:
            p = self.prob.get(t.id)
            if p is None:
                raise ValueError(f"transition {t.id} has no probability")
            if not 0 <= p <= 1:
                raise ValueError(f"probability of transition {t.id} outside [0, 1]: {p}")

    def p(self, t: Transition | int) -> Fraction | float:
        return self.prob[t if isinstance(t, int) else t.id]

    def group_sums(self) -> list[tuple[tuple[Transition, ...], Fraction | float]]:
        return [(g, sum((self.p(t) for t in g), Fraction(0))) for g in self.pdt.groups()]

    def is_proper(self, tolerance: float = 0.0) -> bool:
        for _, s in self.group_sums():
            if isinstance(s, Fraction) and tolerance == 0:
                if s != 1:
                    return False
            elif abs(s - 1) > tolerance:
                return False
        return True


# ---------------------------------------------------------------------------
# normal form


def normalize(
    source: Pdt | Iterable[Transition | PushSwap | PopSwap],
    x_init: StackSymbol | None = None,
    x_final: StackSymbol | None = None,
) -> Pdt:
    """Expand shorthand transitions and split stack symbols of mixed type.

    Accepts a `Pdt` or a raw transition list with explicit ``x_init`` and
    ``x_final``.  Each computation of the input corresponds to exactly one
    computation of the result with the same input and output.
    """
    if isinstance(source, Pdt):
        x_init, x_final = source.x_init, source.x_final
        raw = list(source.transitions)
        ins, outs = source.input_alphabet, source.output_alphabet
    else:
        raw = list(source)
        ins = outs = frozenset()
    if x_init is None or x_final is None:
        raise ValueError("x_init and x_final are required")

    ts: list[Transition] = []
    for t in raw:
        if isinstance(t, PushSwap):
            mid = Fresh(t.Y, (t.x, tuple(t.y)))
            ts.append(Push(t.X, mid))
            ts.append(Swap(mid, t.x, tuple(t.y), t.Y))
        elif isinstance(t, PopSwap):
            mid = Fresh(t.Z, (t.x, tuple(t.y)))
            ts.append(Pop(t.Y, t.X, mid))
            ts.append(Swap(mid, t.x, tuple(t.y), t.Z))
        else:
            ts.append(replace(t, id=-1))
    ts = list(dict.fromkeys(ts))  # shorthand expansion may repeat the same swap

    if any(top_of(t) == x_final for t in ts):
        new_final = Fresh(x_final, "final")
        ts.append(Swap(x_final, None, (), new_final))
        x_final = new_final

    kinds: dict[StackSymbol, set[str]] = defaultdict(set)
    for t in ts:
        kinds[t.X].add(type(t).__name__.lower())
    mixed = {X for X, k in kinds.items() if len(k) > 1}
    if mixed:
        def part(X: StackSymbol, kind: str) -> StackSymbol:
            return Fresh(X, kind) if X in mixed else X

        out: list[Transition] = []
        for X in sorted(mixed, key=str):
            for kind in ("push", "pop", "swap"):
                if kind in kinds[X]:
                    out.append(Swap(X, None, (), Fresh(X, kind)))
        for t in ts:
            if isinstance(t, Push):
                out.append(Push(part(t.X, "push"), t.Y))
            elif isinstance(t, Swap):
                out.append(Swap(part(t.X, "swap"), t.x, t.y, t.Y))
            else:
                out.append(Pop(part(t.Y, "push"), part(t.X, "pop"), t.Z))
        ts = out
    return Pdt(x_init, x_final, tuple(ts), ins, outs)


def separate_scans(pdt: Pdt) -> Pdt:
    """Move terminal-reading swaps off symbols that also have epsilon swaps."""
    mixed = {
        X for X, sw in pdt.swap_by.items()
        if any(t.x is None for t in sw) and any(t.x is not None for t in sw)
    }
    if not mixed:
        return pdt
    ts: list[Transition] = []
    for X in sorted(mixed, key=str):
        ts.append(Swap(X, None, (), Fresh(X, "scan")))
    for t in pdt.transitions:
        if isinstance(t, Swap) and t.X in mixed and t.x is not None:
            ts.append(replace(t, X=Fresh(t.X, "scan")))
        else:
            ts.append(t)
    return Pdt(pdt.x_init, pdt.x_final, tuple(ts), pdt.input_alphabet, pdt.output_alphabet)


# ---------------------------------------------------------------------------
# execution


class Configuration(NamedTuple):
    stack: tuple[StackSymbol, ...]
    pos: int
    output: tuple[OutSym, ...]


@dataclass(frozen=True)
class Computation:
    input: tuple
    steps: tuple[Transition, ...]
    trace: tuple[Configuration, ...]

    @property
    def output(self) -> tuple[OutSym, ...]:
        return self.trace[-1].output

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.steps)

    @property
    def final(self) -> Configuration:
        return self.trace[-1]

    def __len__(self) -> int:
        return len(self.steps)


def successors(pdt: Pdt, conf: Configuration, w: Sequence | None) -> Iterator[tuple[Transition, Configuration]]:
    """Applicable transitions in ascending id order.

    With ``w`` None the input is ignored and every swap is allowed.
    """
    stack = conf.stack
    top = stack[-1]
    cands: list[Transition] = []
    cands.extend(pdt.push_by.get(top, ()))
    cands.extend(pdt.swap_by.get(top, ()))
    if len(stack) >= 2:
        cands.extend(pdt.pop_by.get((stack[-2], top), ()))
    cands.sort(key=lambda t: t.id)
    for t in cands:
        if isinstance(t, Push):
            yield t, Configuration(stack + (t.Y,), conf.pos, conf.output)
        elif isinstance(t, Pop):
            yield t, Configuration(stack[:-2] + (t.Z,), conf.pos, conf.output)
        elif t.x is None:
            yield t, Configuration(stack[:-1] + (t.Y,), conf.pos, conf.output + t.y)
        elif w is None:
            yield t, Configuration(stack[:-1] + (t.Y,), conf.pos + 1, conf.output + t.y)
        elif conf.pos < len(w) and w[conf.pos] == t.x:
            yield t, Configuration(stack[:-1] + (t.Y,), conf.pos + 1, conf.output + t.y)


class _Search:
    def __init__(self) -> None:
        self.truncated = False


def _dfs(
    start: Configuration,
    children: Callable[[Configuration, int], Iterator[tuple[Transition, Configuration]]],
) -> Iterator[tuple[list[Transition], list[Configuration]]]:
    """Depth-first walk yielding the current path after each step, root first."""
    steps: list[Transition] = []
    trace: list[Configuration] = [start]
    yield steps, trace
    stack = [children(start, 0)]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            if steps:
                steps.pop()
                trace.pop()
            continue
        steps.append(nxt[0])
        trace.append(nxt[1])
        yield steps, trace
        stack.append(children(nxt[1], len(steps)))


def _enumerate(
    pdt: Pdt, w: tuple, max_steps: int, complete_only: bool, search: _Search
) -> Iterator[Computation]:
    n = len(w)

    def children(conf: Configuration, depth: int) -> Iterator[tuple[Transition, Configuration]]:
        left = max_steps - depth
        for t, nxt in successors(pdt, conf, w):
            if complete_only:
                if len(nxt.stack) - 1 + (n - nxt.pos) > left - 1:
                    search.truncated = True
                    continue
            elif left == 0:
                search.truncated = True
                continue
            yield t, nxt

    for steps, trace in _dfs(Configuration((pdt.x_init,), 0, ()), children):
        conf = trace[-1]
        if not complete_only or (conf.stack == (pdt.x_final,) and conf.pos == n):
            yield Computation(w, tuple(steps), tuple(trace))


def enumerate_computations(
    pdt: Pdt, input: Sequence, max_steps: int, complete_only: bool = True
) -> Iterator[Computation]:
    """Depth-first enumeration of computations on ``input`` with at most ``max_steps`` transitions."""
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    pdt = pdt.pdt if isinstance(pdt, Ppdt) else pdt
    yield from _enumerate(pdt, tuple(input), max_steps, complete_only, _Search())


def complete_computations(pdt: Pdt, input: Sequence, max_steps: int) -> tuple[list[Computation], bool]:
    """All complete computations plus a flag telling whether the step bound cut the search."""
    search = _Search()
    pdt = pdt.pdt if isinstance(pdt, Ppdt) else pdt
    found = list(_enumerate(pdt, tuple(input), max_steps, True, search))
    return found, search.truncated


def computation_probability(ppdt: Ppdt, c: Computation | Iterable[Transition]) -> Fraction | float:
    steps = c.steps if isinstance(c, Computation) else c
    p: Fraction | float = Fraction(1)
    for t in steps:
        p *= ppdt.p(t)
        if not p:
            return p
    return p


class ProbMonomial(Counter):
    """Multiset of transition ids standing for the product of their probabilities."""

    def evaluate(self, prob: Mapping[int, Fraction | float]) -> Fraction | float:
        v: Fraction | float = Fraction(1)
        for tid, k in self.items():
            v *= prob[tid] ** k
        return v

    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((t, k) for t, k in self.items() if k > 0))

    def __str__(self) -> str:
        if not +self:
            return "1"
        return "·".join(f"p(τ{t})" + (f"^{k}" if k > 1 else "") for t, k in self.key())


def symbolic_string_probability(pdt: Pdt, w: Sequence, max_steps: int) -> list[ProbMonomial]:
    comps, truncated = complete_computations(pdt, w, max_steps)
    if truncated:
        raise BoundExceeded(
            f"search for computations on {' '.join(map(str, w))!r} hit the bound of {max_steps} steps",
            partial_count=len(comps),
        )
    return [ProbMonomial(c.ids) for c in comps]


def input_free_computations(
    pdt: Pdt, max_steps: int, max_length: int | None = None
) -> Iterator[Computation]:
    """Complete computations on any input, reading at most ``max_length`` symbols."""

    def children(conf: Configuration, depth: int) -> Iterator[tuple[Transition, Configuration]]:
        if conf.stack == (pdt.x_final,):
            return
        left = max_steps - depth
        for t, nxt in successors(pdt, conf, None):
            if len(nxt.stack) - 1 > left - 1:
                continue
            if max_length is not None and nxt.pos > max_length:
                continue
            yield t, nxt

    for steps, trace in _dfs(Configuration((pdt.x_init,), 0, ()), children):
        if trace[-1].stack == (pdt.x_final,):
            read = tuple(t.x for t in steps if isinstance(t, Swap) and t.x is not None)
            yield Computation(read, tuple(steps), tuple(trace))


def accepted_strings(pdt: Pdt, max_steps: int, max_length: int | None = None) -> set[tuple]:
    return {c.input for c in input_free_computations(pdt, max_steps, max_length)}
