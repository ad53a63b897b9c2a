"""Parsing strategies: PDT constructions from grammars and output-to-derivation maps.

Every construction works on the grammar extended by a virtual rule
``S† → S``.  The virtual rule is never written to the output, so the
resulting transducers emit only rules of the input grammar (plus ``⊣`` and
integer markers where the strategy needs them).
"""

from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Hashable, Iterable, Sequence

from .automaton import (
    END, Pdt, Pop, PopSwap, Push, PushSwap, Swap, complete_computations, accepted_strings,
    normalize, project, separate_scans,
)
from .errors import GrammarError, MalformedOutput, NotReduced, NullablePrefixInStart
from .grammar import (
    Cfg, Derivation, Rule, empty_corner_relation, enumerate_derivations, is_reduced,
    left_corner_relation, yield_of,
)
from .properties import trim_pdt


class StrategyKind(str, Enum):
    TOP_DOWN = "top_down"
    LEFT_CORNER = "left_corner"
    PLR = "plr"
    EPS_LEFT_CORNER = "eps_left_corner"
    ELR = "elr"
    LR0 = "lr0"

    def __str__(self) -> str:
        return self.value


class _AugStart:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "S†"

    __str__ = __repr__

    def __reduce__(self):
        return (_AugStart, ())


AUG_START = _AugStart()
AUG_ID = "†"


def _augmented(cfg: Cfg) -> tuple[Cfg, Rule]:
    aug = Rule(AUG_ID, AUG_START, (cfg.start,))
    g = Cfg(cfg.terminals, cfg.nonterminals | {AUG_START}, AUG_START, (aug,) + cfg.rules)
    return g, aug


def _seq(xs: Iterable) -> str:
    return " ".join(map(str, xs))


def _dotted(rule: Rule, dot: int) -> str:
    return f"{rule.lhs}→{_seq(rule.rhs[:dot])}•{_seq(rule.rhs[dot:])}"


# ---------------------------------------------------------------------------
# stack symbols


@dataclass(frozen=True)
class DottedRule:
    rule: Rule
    dot: int

    def __str__(self) -> str:
        return f"[{_dotted(self.rule, self.dot)}]"


@dataclass(frozen=True)
class LcItem:
    rule: Rule
    dot: int
    corner: Hashable | None = None

    def __str__(self) -> str:
        tail = "" if self.corner is None else f"; {self.corner}"
        return f"[{_dotted(self.rule, self.dot)}{tail}]"


@dataclass(frozen=True)
class PlrItem:
    lhs: Hashable
    prefix: tuple
    corner: Hashable | None = None

    def __str__(self) -> str:
        tail = "" if self.corner is None else f"; {self.corner}"
        return f"[{self.lhs}→{_seq(self.prefix)}{tail}]"


@dataclass(frozen=True)
class PlrDone:
    rule: Rule

    def __str__(self) -> str:
        return f"[{self.rule.lhs}→{_seq(self.rule.rhs)}]✓{self.rule.id}"


@dataclass(frozen=True)
class EpsLcItem:
    """[A→α•β, μ•ν] with optional corner; ``m`` = |μν|, ``k`` = |μ|.

    ``dot`` counts from the start of the right-hand side, so the left-corner
    part begins at position ``m``.  ``empty`` marks a corner known to derive
    the empty string; ``empty_mode`` marks items whose remaining goals must
    all derive the empty string.
    """

    rule: Rule
    dot: int
    m: int
    k: int
    corner: Hashable | None = None
    empty: bool = False
    empty_mode: bool = False

    def __str__(self) -> str:
        mu = self.rule.rhs[: self.m]
        nu = f"{_seq(mu[: self.k])}•{_seq(mu[self.k:])}"
        body = f"{self.rule.lhs}→{_seq(self.rule.rhs[self.m: self.dot])}•{_seq(self.rule.rhs[self.dot:])}"
        tail = ""
        if self.corner is not None:
            tail = f"; {self.corner}" + ("∅" if self.empty else "")
        mode = "°" if self.empty_mode else ""
        return f"[{body}, {nu}{tail}]{mode}"


@dataclass(frozen=True)
class ElrItem:
    gamma: frozenset
    prefix: tuple
    corner: Hashable | None = None

    def __str__(self) -> str:
        g = ",".join(sorted(map(str, self.gamma)))
        tail = "" if self.corner is None else f"; {self.corner}"
        return f"[{{{g}}}→{_seq(self.prefix)}{tail}]"


@dataclass(frozen=True)
class LrState:
    kernel: frozenset
    items: frozenset = field(compare=False, default=frozenset())

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(_dotted(r, d) for r, d in self.kernel)) + "}"


@dataclass(frozen=True)
class LrReduce:
    rule: Rule
    k: int

    def __str__(self) -> str:
        return f"⟨reduce {self.rule.id}:{self.k}⟩"


@dataclass(frozen=True)
class LrTag:
    state: LrState
    lhs: Hashable

    def __str__(self) -> str:
        return f"⟨{self.state}/{self.lhs}⟩"


class _LrAccept:
    def __repr__(self) -> str:
        return "⟨accept⟩"

    __str__ = __repr__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _LrAccept)

    def __hash__(self) -> int:
        return hash("_LrAccept")


LR_ACCEPT = _LrAccept()


# ---------------------------------------------------------------------------
# constructions


class _Builder:
    """Worklist closure: ``expand`` yields transitions and new symbols to visit."""

    def __init__(self, init: Hashable) -> None:
        self.transitions: list = []
        self.seen = {init}
        self.queue = deque([init])

    def visit(self, sym: Hashable) -> None:
        if sym not in self.seen:
            self.seen.add(sym)
            self.queue.append(sym)

    def emit(self, t) -> None:
        self.transitions.append(t)
        self.visit(t.Z if isinstance(t, (Pop, PopSwap)) else t.Y)

    def run(self, expand: Callable[[Hashable], None]) -> list:
        while self.queue:
            expand(self.queue.popleft())
        return self.transitions


def _corners(pairs: Iterable[tuple]) -> dict[Hashable, set]:
    out: dict[Hashable, set] = defaultdict(set)
    for x, a in pairs:
        out[a].add(x)
    return out


def _top_down(g: Cfg, aug: Rule):
    init, final = DottedRule(aug, 0), DottedRule(aug, 1)
    b = _Builder(init)

    def expand(it: DottedRule) -> None:
        r, d = it.rule, it.dot
        if d == len(r.rhs):
            return
        y = r.rhs[d]
        if g.is_terminal(y):
            b.emit(Swap(it, y, (), DottedRule(r, d + 1)))
            return
        for pi in g.rules_for(y):
            b.emit(PushSwap(it, None, (pi.id,), DottedRule(pi, 0)))
            b.emit(Pop(it, DottedRule(pi, len(pi.rhs)), DottedRule(r, d + 1)))

    return init, final, b.run(expand)


def _left_corner(g: Cfg, aug: Rule):
    below = _corners(left_corner_relation(g))  # below[Y] = {X : X ∠* Y}
    init, final = LcItem(aug, 0), LcItem(aug, 1)
    eps_rules = [r for r in g.rules if not r.rhs]
    b = _Builder(init)

    def expand(it: LcItem) -> None:
        r, d = it.rule, it.dot
        if d == len(r.rhs):
            return
        y = r.rhs[d]
        if it.corner is None:
            for a in sorted(below[y] & g.terminals, key=str):
                b.emit(Swap(it, a, (), LcItem(r, d, a)))
            for pi in eps_rules:
                if pi.lhs in below[y]:
                    b.emit(Swap(it, None, (pi.id,), LcItem(r, d, pi.lhs)))
            return
        x = it.corner
        for pi in g.rules:
            if pi.rhs and pi.rhs[0] == x and pi.lhs in below[y]:
                b.emit(PushSwap(it, None, (pi.id,), LcItem(pi, 1)))
                b.emit(Pop(it, LcItem(pi, len(pi.rhs)), LcItem(r, d, pi.lhs)))
        if x == y:
            b.emit(Swap(it, None, () if g.is_terminal(y) else (END,), LcItem(r, d + 1)))

    return init, final, b.run(expand)


def _plr(g: Cfg, aug: Rule):
    below = _corners(left_corner_relation(g))
    init, final = PlrItem(AUG_START, ()), PlrItem(AUG_START, (g.rules_for(AUG_START)[0].rhs[0],))
    eps_rules = [r for r in g.rules if not r.rhs]
    b = _Builder(init)

    def goals(lhs: Hashable, prefix: tuple) -> set:
        n = len(prefix)
        return {r.rhs[n] for r in g.rules_for(lhs) if len(r.rhs) > n and r.rhs[:n] == prefix}

    def expand(it) -> None:
        if isinstance(it, PlrDone):
            return
        ys = goals(it.lhs, it.prefix)
        if it.corner is None:
            corner_of = set().union(*(below[y] for y in ys)) if ys else set()
            for a in sorted(corner_of & g.terminals, key=str):
                b.emit(Swap(it, a, (), PlrItem(it.lhs, it.prefix, a)))
            for pi in eps_rules:
                if pi.lhs in corner_of:
                    b.emit(Swap(it, None, (pi.id,), PlrItem(it.lhs, it.prefix, pi.lhs)))
            if it.prefix and it.lhs is not AUG_START:
                for pi in g.rules_for(it.lhs):
                    if pi.rhs == it.prefix:
                        b.emit(Swap(it, None, (pi.id,), PlrDone(pi)))
            return
        x = it.corner
        corner_of = set().union(*(below[y] for y in ys)) if ys else set()
        heads = sorted({pi.lhs for pi in g.rules if pi.rhs and pi.rhs[0] == x and pi.lhs in corner_of}, key=str)
        for c in heads:
            b.emit(Push(it, PlrItem(c, (x,))))
            for pi in g.rules_for(c):
                if pi.rhs and pi.rhs[0] == x:
                    b.emit(Pop(it, PlrDone(pi), PlrItem(it.lhs, it.prefix, c)))
        if x in ys:
            b.emit(Swap(it, None, (), PlrItem(it.lhs, it.prefix + (x,))))

    return init, final, b.run(expand)


def _eps_left_corner(g: Cfg, aug: Rule):
    if g.rules_for(AUG_START)[0].rhs[0] in g.nullable:
        raise NullablePrefixInStart(
            "the start symbol derives the empty string", operation="construct"
        )
    below_eps = _corners(left_corner_relation(g, ignore_nullable_prefix=True))
    below_empty = _corners(empty_corner_relation(g))
    nullable = g.nullable
    eps_rules = [r for r in g.rules if not r.rhs]
    init, final = EpsLcItem(aug, 0, 0, 0), EpsLcItem(aug, 1, 0, 0)
    b = _Builder(init)

    def splits(x: Hashable) -> Iterable[tuple[Rule, int]]:
        for pi in g.rules:
            for j, s in enumerate(pi.rhs):
                if s == x:
                    yield pi, j
                if s not in nullable:
                    break

    def with_corner(it: EpsLcItem, x: Hashable, empty: bool) -> EpsLcItem:
        return EpsLcItem(it.rule, it.dot, it.m, it.k, x, empty, it.empty_mode)

    def expand(it: EpsLcItem) -> None:
        r, d = it.rule, it.dot
        if d == len(r.rhs):
            if it.k < it.m:
                bsym = r.rhs[it.k]
                for pi in g.rules_for(bsym):
                    if all(s in nullable for s in pi.rhs):
                        n = len(pi.rhs)
                        b.emit(PushSwap(it, None, (pi.id,), EpsLcItem(pi, n, n, 0)))
                        b.emit(Pop(it, EpsLcItem(pi, n, n, n), EpsLcItem(r, d, it.m, it.k + 1)))
            return
        y = r.rhs[d]
        if it.corner is None:
            if not it.empty_mode:
                for a in sorted(below_eps[y] & g.terminals, key=str):
                    b.emit(Swap(it, a, (), with_corner(it, a, False)))
            for pi in eps_rules:
                if pi.lhs in below_empty.get(y, ()):
                    b.emit(Swap(it, None, (pi.id, 0), with_corner(it, pi.lhs, True)))
            return
        x = it.corner
        if it.empty:
            for pi in g.rules:
                if (pi.rhs and pi.rhs[0] == x and all(s in nullable for s in pi.rhs[1:])
                        and pi.lhs in below_empty.get(y, ())):
                    n = len(pi.rhs)
                    b.emit(PushSwap(it, None, (pi.id, 0), EpsLcItem(pi, 1, 0, 0, empty_mode=True)))
                    b.emit(Pop(it, EpsLcItem(pi, n, 0, 0, empty_mode=True), with_corner(it, pi.lhs, True)))
        else:
            for pi, j in splits(x):
                if pi.lhs in below_eps[y]:
                    n = len(pi.rhs)
                    b.emit(PushSwap(it, None, (pi.id, j), EpsLcItem(pi, j + 1, j, 0)))
                    b.emit(Pop(it, EpsLcItem(pi, n, j, j), with_corner(it, pi.lhs, False)))
        if x == y:
            out = () if g.is_terminal(y) else (END,)
            b.emit(Swap(it, None, out, EpsLcItem(r, d + 1, it.m, it.k, empty_mode=it.empty_mode)))

    return init, final, b.run(expand)


def _elr(g: Cfg, aug: Rule):
    below = _corners(left_corner_relation(g))
    init = ElrItem(frozenset({AUG_START}), ())
    final = ElrItem(frozenset({AUG_START}), (aug.rhs[0],))
    eps_rules = [r for r in g.rules if not r.rhs]
    b = _Builder(init)
    pushers: list[ElrItem] = []

    def goals(gamma: frozenset, prefix: tuple) -> set:
        n = len(prefix)
        return {
            r.rhs[n] for a in gamma for r in g.rules_for(a) if len(r.rhs) > n and r.rhs[:n] == prefix
        }

    def below_any(gamma: frozenset, prefix: tuple) -> set:
        ys = goals(gamma, prefix)
        return set().union(*(below[y] for y in ys)) if ys else set()

    def expand(it: ElrItem) -> None:
        reach = below_any(it.gamma, it.prefix)
        if it.corner is None:
            for a in sorted(reach & g.terminals, key=str):
                b.emit(Swap(it, a, (), ElrItem(it.gamma, it.prefix, a)))
            for pi in eps_rules:
                if pi.lhs in reach:
                    b.emit(Swap(it, None, (pi.id,), ElrItem(it.gamma, it.prefix, pi.lhs)))
            return
        x = it.corner
        gamma2 = frozenset(pi.lhs for pi in g.rules if pi.rhs and pi.rhs[0] == x and pi.lhs in reach)
        if gamma2:
            b.emit(Push(it, ElrItem(gamma2, (x,))))
            pushers.append(it)
            for c in gamma2:
                b.visit(ElrItem(it.gamma, it.prefix, c))
        n = len(it.prefix)
        keep = frozenset(
            a for a in it.gamma for r in g.rules_for(a)
            if len(r.rhs) > n and r.rhs[:n] == it.prefix and r.rhs[n] == x
        )
        if keep:
            b.emit(Swap(it, None, (), ElrItem(keep, it.prefix + (x,))))

    ts = b.run(expand)
    tops = [q for q in b.seen if q.corner is None and q.prefix]
    for it in pushers:
        reach = below_any(it.gamma, it.prefix)
        for top in tops:
            if top.prefix[0] != it.corner:
                continue
            for c in top.gamma:
                if c not in reach:
                    continue
                for pi in g.rules_for(c):
                    if pi.rhs == top.prefix:
                        target = ElrItem(it.gamma, it.prefix, c)
                        if target in b.seen:
                            ts.append(PopSwap(it, top, None, (pi.id,), target))
    return init, final, ts


def _lr0(g: Cfg, aug: Rule):
    symbols = sorted(g.terminals, key=str) + sorted(g.nonterminals - {AUG_START}, key=str)

    def closure(kernel: frozenset) -> frozenset:
        items = set(kernel)
        todo = list(kernel)
        while todo:
            r, d = todo.pop()
            if d < len(r.rhs) and r.rhs[d] in g.nonterminals:
                for pi in g.rules_for(r.rhs[d]):
                    if (pi, 0) not in items:
                        items.add((pi, 0))
                        todo.append((pi, 0))
        return frozenset(items)

    cache: dict[frozenset, LrState] = {}

    def state(kernel: frozenset) -> LrState:
        s = cache.get(kernel)
        if s is None:
            s = cache[kernel] = LrState(kernel, closure(kernel))
        return s

    def goto(q: LrState, x: Hashable) -> LrState | None:
        k = frozenset((r, d + 1) for r, d in q.items if d < len(r.rhs) and r.rhs[d] == x)
        return state(k) if k else None

    q0 = state(frozenset({(aug, 0)}))
    states = [q0]
    seen = {q0}
    i = 0
    while i < len(states):
        q = states[i]
        i += 1
        for x in symbols:
            nxt = goto(q, x)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                states.append(nxt)

    tags: dict[LrState, list[LrTag]] = defaultdict(list)
    ts: list = []
    for q in states:
        for x in sorted(g.nonterminals - {AUG_START}, key=str):
            target = goto(q, x)
            if target is not None:
                tag = LrTag(q, x)
                tags[q].append(tag)
                ts.append(Push(tag, target))
    for q in states:
        for a in sorted(g.terminals, key=str):
            target = goto(q, a)
            if target is not None:
                ts.append(PushSwap(q, a, (), target))
        for r, d in sorted(q.items, key=lambda it: (it[0].id, it[1])):
            if r is aug or d != len(r.rhs):
                continue
            if d == 0:
                ts.append(Swap(q, None, (r.id,), LrTag(q, r.lhs)))
            else:
                ts.append(Swap(q, None, (), LrReduce(r, d)))
    for r in g.rules:
        if r is aug or not r.rhs:
            continue
        for k in range(len(r.rhs), 0, -1):
            for q in states:
                if (r, k - 1) not in q.items:
                    continue
                for lower in [q, *tags[q]]:
                    if k > 1:
                        ts.append(Pop(lower, LrReduce(r, k), LrReduce(r, k - 1)))
                    else:
                        ts.append(PopSwap(lower, LrReduce(r, 1), None, (r.id,), LrTag(q, r.lhs)))
    accept = goto(q0, aug.rhs[0])
    for lower in [q0, *tags[q0]]:
        ts.append(Pop(lower, accept, LR_ACCEPT))
    return q0, LR_ACCEPT, ts


_BUILDERS = {
    StrategyKind.TOP_DOWN: _top_down,
    StrategyKind.LEFT_CORNER: _left_corner,
    StrategyKind.PLR: _plr,
    StrategyKind.EPS_LEFT_CORNER: _eps_left_corner,
    StrategyKind.ELR: _elr,
    StrategyKind.LR0: _lr0,
}


def raw_transitions(kind: StrategyKind | str, cfg: Cfg) -> tuple[Hashable, Hashable, list]:
    """Transitions of a strategy before expansion of shorthand forms."""
    kind = StrategyKind(kind)
    if not is_reduced(cfg):
        raise NotReduced("the grammar is not reduced", operation="construct")
    g, aug = _augmented(cfg)
    return _BUILDERS[kind](g, aug)


def construct(kind: StrategyKind | str, cfg: Cfg) -> Pdt:
    init, final, ts = raw_transitions(kind, cfg)
    pdt = normalize(ts, init, final)
    pdt = separate_scans(pdt)
    return trim_pdt(pdt)


# ---------------------------------------------------------------------------
# output mappings


def _rule(cfg: Cfg, sym: Hashable) -> Rule:
    if not isinstance(sym, str):
        raise MalformedOutput(f"expected a rule, found {sym}", operation="map_output")
    try:
        return cfg.rule(sym)
    except KeyError:
        raise MalformedOutput(f"unknown rule {sym}", operation="map_output") from None


def _f_lc(cfg: Cfg, v: Sequence) -> Derivation:
    def sub(d: list, i: int) -> tuple[list, int]:
        while True:
            if i >= len(v):
                raise MalformedOutput("output ended inside a left-corner spine", operation="map_output")
            pi = _rule(cfg, v[i])
            i += 1
            corner_nt = bool(pi.rhs) and pi.rhs[0] in cfg.nonterminals
            if corner_nt != bool(d):
                raise MalformedOutput(f"rule {pi.id} does not fit its left corner", operation="map_output")
            out = [pi.id, *d]
            for x in pi.rhs[1:]:
                if x in cfg.nonterminals:
                    di, i = sub([], i)
                    out.extend(di)
            d = out
            if i < len(v) and v[i] is END:
                return d, i + 1

    d, i = sub([], 0)
    if i != len(v):
        raise MalformedOutput("trailing output symbols", operation="map_output")
    return tuple(d)


def _f_eps_lc(cfg: Cfg, v: Sequence) -> Derivation:
    def td(i: int) -> tuple[list, int]:
        if i >= len(v):
            raise MalformedOutput("output ended inside an empty subderivation", operation="map_output")
        pi = _rule(cfg, v[i])
        i += 1
        out = [pi.id]
        for _ in pi.rhs:
            di, i = td(i)
            out.extend(di)
        return out, i

    def sub(d: list, i: int) -> tuple[list, int]:
        while True:
            if i + 1 >= len(v):
                raise MalformedOutput("output ended inside a left-corner spine", operation="map_output")
            pi = _rule(cfg, v[i])
            m = v[i + 1]
            if not isinstance(m, int) or isinstance(m, bool):
                raise MalformedOutput(f"rule {pi.id} is not followed by a length marker", operation="map_output")
            i += 2
            if pi.rhs:
                if m >= len(pi.rhs):
                    raise MalformedOutput(f"marker {m} too large for rule {pi.id}", operation="map_output")
                x, rest = pi.rhs[m], pi.rhs[m + 1:]
            elif m == 0:
                x, rest = None, ()
            else:
                raise MalformedOutput(f"marker {m} on an empty rule", operation="map_output")
            if (x is not None and x in cfg.nonterminals) != bool(d):
                raise MalformedOutput(f"rule {pi.id} does not fit its left corner", operation="map_output")
            ds: list = []
            for s in rest:
                if s in cfg.nonterminals:
                    di, i = sub([], i)
                    ds.extend(di)
            tds: list = []
            for _ in range(m):
                di, i = td(i)
                tds.extend(di)
            d = [pi.id, *tds, *d, *ds]
            if i < len(v) and v[i] is END:
                return d, i + 1

    d, i = sub([], 0)
    if i != len(v):
        raise MalformedOutput("trailing output symbols", operation="map_output")
    return tuple(d)


def _f_postorder(cfg: Cfg, v: Sequence) -> Derivation:
    """Rebuild the tree from a bottom-up rule sequence and read it top-down."""
    stack: list[tuple[Rule, list]] = []
    for sym in v:
        pi = _rule(cfg, sym)
        nts = [x for x in pi.rhs if x in cfg.nonterminals]
        if len(stack) < len(nts):
            raise MalformedOutput(f"rule {pi.id} lacks subtrees", operation="map_output")
        kids = stack[len(stack) - len(nts):] if nts else []
        del stack[len(stack) - len(nts):]
        if [k[0].lhs for k in kids] != nts:
            raise MalformedOutput(f"subtrees do not match rule {pi.id}", operation="map_output")
        stack.append((pi, kids))
    if len(stack) != 1 or stack[0][0].lhs != cfg.start:
        raise MalformedOutput("output does not form a single tree for the start symbol", operation="map_output")
    out: list[str] = []
    todo = [stack[0]]
    while todo:
        pi, kids = todo.pop()
        out.append(pi.id)
        todo.extend(reversed(kids))
    return tuple(out)


def map_output(kind: StrategyKind | str, v: Sequence, cfg: Cfg) -> Derivation:
    """The strategy's function from output strings to leftmost derivations."""
    kind = StrategyKind(kind)
    v = tuple(v)
    if kind is StrategyKind.TOP_DOWN:
        if any(not isinstance(x, str) for x in v):
            raise MalformedOutput("top-down output contains markers", operation="map_output")
        for x in v:
            _rule(cfg, x)
        return v
    if kind is StrategyKind.LEFT_CORNER:
        return _f_lc(cfg, v)
    if kind is StrategyKind.EPS_LEFT_CORNER:
        return _f_eps_lc(cfg, v)
    return _f_postorder(cfg, v)


# ---------------------------------------------------------------------------
# contract check


@dataclass
class ContractReport:
    kind: StrategyKind
    strings: int = 0
    pairs: int = 0
    violations: list[str] = field(default_factory=list)
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def verify_strategy_contract(
    kind: StrategyKind | str,
    cfg: Cfg,
    max_steps: int = 40,
    max_length: int = 6,
    computation_steps: int = 400,
) -> ContractReport:
    """Check that decoding complete computations is a bijection onto derivations, per string.

    Derivations have at most ``max_steps`` rules, strings at most ``max_length``
    symbols; computations are searched up to ``computation_steps`` transitions.
    """
    kind = StrategyKind(kind)
    pdt = construct(kind, cfg)
    report = ContractReport(kind)
    by_yield: dict[tuple, set[Derivation]] = defaultdict(set)
    for d, w in enumerate_derivations(cfg, max_steps, max_length):
        by_yield[w].add(d)
    strings = set(by_yield) | accepted_strings(pdt, computation_steps, max_length)
    for w in sorted(strings, key=lambda s: (len(s), tuple(map(str, s)))):
        report.strings += 1
        comps, truncated = complete_computations(pdt, w, computation_steps)
        report.truncated |= truncated
        decoded: Counter = Counter()
        label = " ".join(map(str, w)) or "ε"
        for c in comps:
            try:
                d = map_output(kind, c.output, cfg)
            except MalformedOutput as e:
                report.violations.append(f"{label}: output {c.output} does not decode ({e})")
                continue
            decoded[d] += 1
            if Counter(project(c.output)) != Counter(d):
                report.violations.append(f"{label}: rule multiset differs for {d}")
            try:
                if yield_of(cfg, d) != w:
                    report.violations.append(f"{label}: derivation {d} derives another string")
            except GrammarError as e:
                report.violations.append(f"{label}: {d} is not a complete derivation ({e})")
        for d, n in decoded.items():
            if n > 1:
                report.violations.append(f"{label}: {n} computations decode to {d}")
            elif d not in by_yield[w] and len(d) <= max_steps:
                report.violations.append(f"{label}: decoded {d} missing from the grammar's derivations")
        for d in by_yield[w]:
            if d not in decoded:
                report.violations.append(f"{label}: derivation {d} has no computation")
        report.pairs += sum(1 for d in decoded if d in by_yield[w])
    return report
